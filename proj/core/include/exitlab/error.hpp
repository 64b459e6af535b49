#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace exitlab {

enum class ErrorCode {
    NonMorse,
    GradientVanishesOnBoundary,
    DegenerateBoundaryCritical,
    EmptySublevel,
    DisconnectedGraph,
    HypothesesNotChecked,
    MaxStepsExceeded,
    ReflectionLoop,
    GridTooCoarse,
    FloorTemperature,
    NoConvergence,
    WindowsOverlap,
    NegativeNormalDerivative,
    SolverFailure,
    ZeroTotalRate,
    BudgetExceeded,
    ChannelUnresolved,
    BadSample,
    TooFewSurvivors,
    UnknownSuite,
    SchemaError,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace exitlab
