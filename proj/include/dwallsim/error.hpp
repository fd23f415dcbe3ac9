#ifndef DWALLSIM_ERROR_HPP
#define DWALLSIM_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace dwallsim {

enum class ErrorCode {
    GridTooSmall,
    RegridOutOfRange,
    TrajectoryTooShort,
    CflViolation,
    NanDetected,
    Blowup,
    NoConvergence,
    SeparationTooSmall,
    SolverFail,
    InsufficientData,
    ParseError,
    ValidationError,
    IoError,
    FormatError,
    NormViolation,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::GridTooSmall: return "GRID_TOO_SMALL";
        case ErrorCode::RegridOutOfRange: return "REGRID_OUT_OF_RANGE";
        case ErrorCode::TrajectoryTooShort: return "TRAJECTORY_TOO_SHORT";
        case ErrorCode::CflViolation: return "CFL_VIOLATION";
        case ErrorCode::NanDetected: return "NAN_DETECTED";
        case ErrorCode::Blowup: return "BLOWUP";
        case ErrorCode::NoConvergence: return "NO_CONVERGENCE";
        case ErrorCode::SeparationTooSmall: return "SEPARATION_TOO_SMALL";
        case ErrorCode::SolverFail: return "SOLVER_FAIL";
        case ErrorCode::InsufficientData: return "INSUFFICIENT_DATA";
        case ErrorCode::ParseError: return "PARSE_ERROR";
        case ErrorCode::ValidationError: return "VALIDATION_ERROR";
        case ErrorCode::IoError: return "IO_ERROR";
        case ErrorCode::FormatError: return "FORMAT_ERROR";
        case ErrorCode::NormViolation: return "NORM_VIOLATION";
    }
    return "UNKNOWN";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace dwallsim

#endif  // DWALLSIM_ERROR_HPP
