#ifndef DWALLSIM_SPECTRAL_HPP
#define DWALLSIM_SPECTRAL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <vector>

#include "dwallsim/calculus.hpp"
#include "dwallsim/cutoff.hpp"
#include "dwallsim/error.hpp"
#include "dwallsim/field.hpp"
#include "dwallsim/params.hpp"
#include "dwallsim/wall.hpp"

namespace dwallsim {

/// Symmetric banded matrix stored by diagonals: band[d][i] = A(i, i + d), d = 0..b.
class BandedSym {
public:
    BandedSym(std::size_t n, std::size_t b) : n_(n), band_(b + 1, std::vector<double>(n, 0.0)) {}

    std::size_t size() const { return n_; }
    std::size_t bandwidth() const { return band_.size() - 1; }
    double& at(std::size_t d, std::size_t i) { return band_[d][i]; }
    double at(std::size_t d, std::size_t i) const { return band_[d][i]; }

    /// A(i, j) for |i - j| within the band, else zero.
    double operator()(std::size_t i, std::size_t j) const {
        const std::size_t lo = std::min(i, j), d = std::max(i, j) - lo;
        return d < band_.size() ? band_[d][lo] : 0.0;
    }

    std::vector<double> apply(const std::vector<double>& v) const {
        std::vector<double> out(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) out[i] = band_[0][i] * v[i];
        for (std::size_t d = 1; d < band_.size(); ++d) {
            for (std::size_t i = 0; i + d < n_; ++i) {
                out[i] += band_[d][i] * v[i + d];
                out[i + d] += band_[d][i] * v[i];
            }
        }
        return out;
    }

private:
    std::size_t n_;
    std::vector<std::vector<double>> band_;
};

/// Unpivoted LDL^T of a symmetric banded matrix. The signs of D give the inertia (Sylvester),
/// which is what the bisection routines below rely on.
class BandedLdlt {
public:
    explicit BandedLdlt(const BandedSym& a) : n_(a.size()), b_(a.bandwidth()), d_(n_), l_(b_ + 1, std::vector<double>(n_)) {
        const double tiny = 1e-300;
        for (std::size_t i = 0; i < n_; ++i) {
            double di = a(i, i);
            const std::size_t k0 = i >= b_ ? i - b_ : 0;
            for (std::size_t k = k0; k < i; ++k) di -= lower(i, k) * lower(i, k) * d_[k];
            if (std::abs(di) < tiny) di = tiny;
            d_[i] = di;
            for (std::size_t j = i + 1; j <= std::min(n_ - 1, i + b_); ++j) {
                double v = a(j, i);
                const std::size_t kk = j >= b_ ? j - b_ : 0;
                for (std::size_t k = kk; k < i; ++k) v -= lower(j, k) * lower(i, k) * d_[k];
                l_[j - i][i] = v / di;
            }
        }
    }

    std::size_t negative_count() const {
        return static_cast<std::size_t>(std::count_if(d_.begin(), d_.end(), [](double x) { return x < 0.0; }));
    }

    std::vector<double> solve(std::vector<double> x) const {
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t k0 = i >= b_ ? i - b_ : 0;
            for (std::size_t k = k0; k < i; ++k) x[i] -= lower(i, k) * x[k];
        }
        for (std::size_t i = 0; i < n_; ++i) x[i] /= d_[i];
        for (std::size_t i = n_; i-- > 0;) {
            for (std::size_t j = i + 1; j <= std::min(n_ - 1, i + b_); ++j) x[i] -= lower(j, i) * x[j];
        }
        return x;
    }

private:
    double lower(std::size_t j, std::size_t k) const { return l_[j - k][k]; }

    std::size_t n_, b_;
    std::vector<double> d_;
    std::vector<std::vector<double>> l_;
};

/// Dirichlet finite-difference L_Gamma = -d_xx + Gamma^2 (cos^2 theta* - sin^2 theta*) on all grid
/// nodes (zero ghosts beyond both ends): diag = 2/dx^2 + V, off = -1/dx^2.
struct OperatorMatrix {
    Grid1D grid{};
    double Gamma = 1.0;
    std::vector<double> potential;
    std::vector<double> diag;
    std::vector<double> off;

    std::size_t dimension() const { return diag.size(); }

    std::vector<double> apply(const std::vector<double>& v) const {
        const std::size_t n = diag.size();
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = diag[i] * v[i];
            if (i > 0) s += off[i - 1] * v[i - 1];
            if (i + 1 < n) s += off[i] * v[i + 1];
            out[i] = s;
        }
        return out;
    }

    BandedSym banded() const {
        BandedSym a(diag.size(), 1);
        for (std::size_t i = 0; i < diag.size(); ++i) a.at(0, i) = diag[i];
        for (std::size_t i = 0; i < off.size(); ++i) a.at(1, i) = off[i];
        return a;
    }

    /// sin theta* sampled on the grid (the continuum kernel).
    std::vector<double> kernel() const {
        std::vector<double> k(grid.n);
        for (std::size_t i = 0; i < grid.n; ++i) k[i] = sin_theta_star(grid.x(i), Gamma);
        return k;
    }
};

inline double wall_potential(double x, double Gamma) {
    const double c = cos_theta_star(x, Gamma), s = sin_theta_star(x, Gamma);
    return Gamma * Gamma * (c * c - s * s);
}

inline OperatorMatrix assemble_L(const ModelParams& params, const Grid1D& grid) {
    const double G = params.Gamma();
    const double need = 30.0 / G;
    if (grid.x_min > -need || grid.x_max() < need) {
        throw Error(ErrorCode::GridTooSmall, "operator grid must span [-30/Gamma, 30/Gamma] = [" +
                                                 std::to_string(-need) + ", " + std::to_string(need) + "]");
    }
    OperatorMatrix op;
    op.grid = grid;
    op.Gamma = G;
    const double inv = 1.0 / (grid.dx * grid.dx);
    op.potential.resize(grid.n);
    op.diag.resize(grid.n);
    op.off.assign(grid.n - 1, -inv);
    for (std::size_t i = 0; i < grid.n; ++i) {
        op.potential[i] = wall_potential(grid.x(i), G);
        op.diag[i] = 2.0 * inv + op.potential[i];
    }
    return op;
}

/// Number of eigenvalues strictly below sigma (Sturm count of the tridiagonal matrix).
inline std::size_t sturm_count(const OperatorMatrix& op, double sigma) {
    std::size_t count = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < op.diag.size(); ++i) {
        const double off2 = i > 0 ? op.off[i - 1] * op.off[i - 1] : 0.0;
        q = op.diag[i] - sigma - (i > 0 ? off2 / q : 0.0);
        if (q == 0.0) q = -1e-300;
        if (q < 0.0) ++count;
    }
    return count;
}

struct Eigenpair {
    double value = 0.0;
    std::vector<double> vector;  // normalized so dx * sum v^2 = 1
};

namespace detail {
inline double grid_dot(const std::vector<double>& a, const std::vector<double>& b, double dx) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s * dx;
}

inline void fix_sign(std::vector<double>& v, const Grid1D& grid) {
    const auto i0 = static_cast<std::size_t>(std::clamp(std::round(-grid.x_min / grid.dx), 0.0,
                                                        static_cast<double>(grid.n - 1)));
    double peak = 0.0;
    for (double x : v) peak = std::max(peak, std::abs(x));
    double ref = v[i0];
    if (std::abs(ref) <= 1e-8 * peak) {
        for (double x : v) {
            if (std::abs(x) > 1e-3 * peak) {
                ref = x;
                break;
            }
        }
    }
    if (ref < 0.0)
        for (double& x : v) x = -x;
}
}  // namespace detail

/// Smallest k eigenpairs, ascending: eigenvalues by Sturm bisection, vectors by inverse iteration
/// with Gram-Schmidt against the ones already found.
inline std::vector<Eigenpair> eigenpairs(const OperatorMatrix& op, std::size_t k) {
    if (k < 1 || k > 10) throw Error(ErrorCode::ValidationError, "eigenpair count must be in [1, 10]");
    const std::size_t n = op.dimension();
    if (k > n) throw Error(ErrorCode::SolverFail, "more eigenpairs requested than unknowns");
    double lo = op.diag[0], hi = op.diag[0];
    for (std::size_t i = 0; i < n; ++i) {
        const double r = (i > 0 ? std::abs(op.off[i - 1]) : 0.0) + (i + 1 < n ? std::abs(op.off[i]) : 0.0);
        lo = std::min(lo, op.diag[i] - r);
        hi = std::max(hi, op.diag[i] + r);
    }
    const double dx = op.grid.dx;
    std::vector<Eigenpair> out;
    for (std::size_t j = 0; j < k; ++j) {
        double a = lo, b = hi;
        for (int it = 0; it < 200 && b - a > 4e-16 * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
            const double mid = 0.5 * (a + b);
            (sturm_count(op, mid) > j ? b : a) = mid;
        }
        const double lambda = 0.5 * (a + b);
        BandedSym shifted = op.banded();
        for (std::size_t i = 0; i < n; ++i) shifted.at(0, i) -= lambda;
        const BandedLdlt fact(shifted);
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.01 * std::sin(0.37 * static_cast<double>(i) + j);
        for (int it = 0; it < 6; ++it) {
            for (const auto& prev : out) {
                const double c = detail::grid_dot(v, prev.vector, dx);
                for (std::size_t i = 0; i < n; ++i) v[i] -= c * prev.vector[i];
            }
            v = fact.solve(v);
            const double nv = std::sqrt(detail::grid_dot(v, v, dx));
            if (!std::isfinite(nv) || nv == 0.0) throw Error(ErrorCode::SolverFail, "inverse iteration broke down");
            for (double& x : v) x /= nv;
        }
        for (const auto& prev : out) {
            const double c = detail::grid_dot(v, prev.vector, dx);
            for (std::size_t i = 0; i < n; ++i) v[i] -= c * prev.vector[i];
        }
        const double nv = std::sqrt(detail::grid_dot(v, v, dx));
        for (double& x : v) x /= nv;
        detail::fix_sign(v, op.grid);
        auto r = op.apply(v);
        for (std::size_t i = 0; i < n; ++i) r[i] -= lambda * v[i];
        const double residual = std::sqrt(detail::grid_dot(r, r, dx));
        if (!(residual < 1e-6 * std::max(1.0, hi))) {
            throw Error(ErrorCode::SolverFail, "eigenvector residual " + std::to_string(residual) + " too large");
        }
        out.push_back({lambda, std::move(v)});
    }
    return out;
}

/// (L v, v) = dx * sum (L v)_i v_i, optionally weighted node-wise by psi.
inline double quadratic_form(const OperatorMatrix& op, const std::vector<double>& v, const Cutoff* cutoff = nullptr) {
    const auto Lv = op.apply(v);
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += Lv[i] * v[i] * (cutoff ? cutoff->psi()[i] : 1.0);
    return s * op.grid.dx;
}

inline double rayleigh_quotient(const OperatorMatrix& op, const std::vector<double>& v) {
    return quadratic_form(op, v) / detail::grid_dot(v, v, op.grid.dx);
}

/// Discrete norms matching the Dirichlet operator: forward differences with zero ghosts.
/// The H1 Gram matrix is I + K and the H2 one is I + K + K^2 with K = -D2.
inline double operator_h1_norm_sq(const std::vector<double>& v, double dx, const std::vector<double>* weight = nullptr) {
    const std::size_t n = v.size();
    auto w = [&](std::size_t i) { return weight ? (*weight)[i] : 1.0; };
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w(i) * v[i] * v[i];
    double g = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double d = v[i + 1] - v[i];
        g += 0.5 * (w(i) + w(i + 1)) * d * d;
    }
    g += w(0) * v[0] * v[0] + w(n - 1) * v[n - 1] * v[n - 1];
    return s * dx + g / dx;
}

inline double operator_h2_norm_sq(const std::vector<double>& v, double dx) {
    const std::size_t n = v.size();
    double s = operator_h1_norm_sq(v, dx);
    const double inv = 1.0 / (dx * dx);
    for (std::size_t i = 0; i < n; ++i) {
        const double l = i > 0 ? v[i - 1] : 0.0, r = i + 1 < n ? v[i + 1] : 0.0;
        const double d2 = (l - 2.0 * v[i] + r) * inv;
        s += d2 * d2 * dx;
    }
    return s;
}

/// ∫ sqrt(psi) v sin theta* dx (psi = 1 without a cutoff).
inline double kernel_overlap(const OperatorMatrix& op, const std::vector<double>& v, const Cutoff* cutoff = nullptr) {
    const auto k = op.kernel();
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * k[i] * (cutoff ? cutoff->sqrt_psi()[i] : 1.0);
    return s * op.grid.dx;
}

/// L(sqrt(psi) f) - sqrt(psi) L f computed with the discrete operator.
inline std::vector<double> commutator(const OperatorMatrix& op, const std::vector<double>& f, const Cutoff& cutoff) {
    const auto& r = cutoff.sqrt_psi();
    std::vector<double> rf(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) rf[i] = r[i] * f[i];
    auto a = op.apply(rf);
    const auto b = op.apply(f);
    for (std::size_t i = 0; i < f.size(); ++i) a[i] -= r[i] * b[i];
    return a;
}

/// Continuum value of the same commutator: -(sqrt psi)'' f - 2 (sqrt psi)' f'.
inline std::vector<double> commutator_closed_form(const std::vector<double>& f, const std::vector<double>& df,
                                                  const Cutoff& cutoff) {
    std::vector<double> out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        out[i] = -cutoff.d2sqrt_psi()[i] * f[i] - 2.0 * cutoff.dsqrt_psi()[i] * df[i];
    }
    return out;
}

/// (L v, v) + (1/lambda) (∫ v sin theta*)^2 - 4 lambda ||v||_{H1}^2. With a cutoff the form is
/// (L v, v)_psi, the overlap uses sqrt(psi) v and the norm is H1(psi dx).
inline double coercivity_gap(const OperatorMatrix& op, const std::vector<double>& v, double lambda,
                             const Cutoff* cutoff = nullptr) {
    const double overlap = kernel_overlap(op, v, cutoff);
    const double norm_sq = operator_h1_norm_sq(v, op.grid.dx, cutoff ? &cutoff->psi() : nullptr);
    return quadratic_form(op, v, cutoff) + overlap * overlap / lambda - 4.0 * lambda * norm_sq;
}

/// ||L v||^2 + (1/lambda) (∫ v sin theta*)^2 - 4 lambda ||v||_{H2}^2.
inline double coercivity_gap_h2(const OperatorMatrix& op, const std::vector<double>& v, double lambda) {
    const auto Lv = op.apply(v);
    const double overlap = kernel_overlap(op, v);
    return detail::grid_dot(Lv, Lv, op.grid.dx) + overlap * overlap / lambda -
           4.0 * lambda * operator_h2_norm_sq(v, op.grid.dx);
}

/// 0.9 * lambda_2 / 4 from the second discrete eigenvalue.
inline double calibrated_lambda0(const OperatorMatrix& op) {
    return 0.9 * eigenpairs(op, 2)[1].value / 4.0;
}

/// Largest lambda for which the discrete gap (H1 or H2 form) is non-negative for every v, found
/// by bisection on the inertia of Q(lambda) = F + (dx/lambda) k k^T - 4 lambda M, where F is L or
/// L^2 and M the matching Gram matrix. For a banded T and c > 0, T + c k k^T has one fewer
/// negative eigenvalue than T exactly when 1 + c k^T T^{-1} k < 0.
inline double certified_lambda0(const OperatorMatrix& op, NormOrder order = NormOrder::H1) {
    const std::size_t n = op.dimension();
    const double dx = op.grid.dx, inv = 1.0 / (dx * dx);
    const auto k = op.kernel();
    const bool h2 = order == NormOrder::H2;
    BandedSym F(n, h2 ? 2 : 1), M(n, h2 ? 2 : 1);
    // K = -D2 with zero ghosts: tridiag(-1, 2, -1) / dx^2.
    auto Kij = [&](std::size_t i, std::size_t j) {
        if (i == j) return 2.0 * inv;
        return (std::max(i, j) - std::min(i, j) == 1) ? -inv : 0.0;
    };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d <= F.bandwidth() && i + d < n; ++d) {
            const std::size_t j = i + d;
            double kk = 0.0;  // (K^2)_{ij}
            double ll = 0.0;  // (L^2)_{ij}
            if (h2) {
                for (std::size_t m = (i > 0 ? i - 1 : 0); m <= std::min(n - 1, i + 1); ++m) {
                    kk += Kij(i, m) * Kij(m, j);
                    const double Lim = m == i ? op.diag[i] : op.off[std::min(i, m)];
                    const double Lmj = (m == j) ? op.diag[j]
                                       : (std::max(m, j) - std::min(m, j) == 1 ? op.off[std::min(m, j)] : 0.0);
                    ll += Lim * Lmj;
                }
            }
            const double Lij = d == 0 ? op.diag[i] : (d == 1 ? op.off[i] : 0.0);
            F.at(d, i) = h2 ? ll : Lij;
            M.at(d, i) = (d == 0 ? 1.0 : 0.0) + Kij(i, j) + (h2 ? kk : 0.0);
        }
    }
    auto admissible = [&](double lambda) {
        BandedSym T = F;
        for (std::size_t d = 0; d <= T.bandwidth(); ++d)
            for (std::size_t i = 0; i + d < n; ++i) T.at(d, i) -= 4.0 * lambda * M.at(d, i);
        const BandedLdlt fact(T);
        std::size_t neg = fact.negative_count();
        if (neg > 1) return false;
        if (neg == 0) return true;
        const auto y = fact.solve(k);
        const double kTy = std::inner_product(k.begin(), k.end(), y.begin(), 0.0);
        return 1.0 + (dx / lambda) * kTy < 0.0;
    };
    double lo = 0.0, hi = 1.0;
    while (admissible(hi)) hi *= 2.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (admissible(mid) ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace dwallsim

#endif  // DWALLSIM_SPECTRAL_HPP
