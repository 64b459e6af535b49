#include "exitlab/error.hpp"

namespace exitlab {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NonMorse: return "NonMorse";
        case ErrorCode::GradientVanishesOnBoundary: return "GradientVanishesOnBoundary";
        case ErrorCode::DegenerateBoundaryCritical: return "DegenerateBoundaryCritical";
        case ErrorCode::EmptySublevel: return "EmptySublevel";
        case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
        case ErrorCode::HypothesesNotChecked: return "HypothesesNotChecked";
        case ErrorCode::MaxStepsExceeded: return "MaxStepsExceeded";
        case ErrorCode::ReflectionLoop: return "ReflectionLoop";
        case ErrorCode::GridTooCoarse: return "GridTooCoarse";
        case ErrorCode::FloorTemperature: return "FloorTemperature";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::WindowsOverlap: return "WindowsOverlap";
        case ErrorCode::NegativeNormalDerivative: return "NegativeNormalDerivative";
        case ErrorCode::SolverFailure: return "SolverFailure";
        case ErrorCode::ZeroTotalRate: return "ZeroTotalRate";
        case ErrorCode::BudgetExceeded: return "BudgetExceeded";
        case ErrorCode::ChannelUnresolved: return "ChannelUnresolved";
        case ErrorCode::BadSample: return "BadSample";
        case ErrorCode::TooFewSurvivors: return "TooFewSurvivors";
        case ErrorCode::UnknownSuite: return "UnknownSuite";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

}  // namespace exitlab
