#ifndef DWALLSIM_TRAJECTORY_HPP
#define DWALLSIM_TRAJECTORY_HPP

#include <map>
#include <string>
#include <vector>

#include "dwallsim/field.hpp"

namespace dwallsim {

/// Recorded run: one snapshot per time plus named scalar series sampled at the same times.
struct Trajectory {
    std::vector<double> times;
    std::vector<SpinField> snapshots;
    std::map<std::string, std::vector<double>> series;

    std::size_t size() const { return times.size(); }
    bool empty() const { return times.empty(); }

    void record(double t, SpinField m) {
        times.push_back(t);
        snapshots.push_back(std::move(m));
    }
};

}  // namespace dwallsim

#endif  // DWALLSIM_TRAJECTORY_HPP
