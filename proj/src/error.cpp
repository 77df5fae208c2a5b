#include "streamres/error.hpp"

namespace streamres {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::MissingFile: return "MissingFile";
        case ErrorCode::SchemaMismatch: return "SchemaMismatch";
        case ErrorCode::NonFiniteFeature: return "NonFiniteFeature";
        case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
        case ErrorCode::NonMonotoneTimestamp: return "NonMonotoneTimestamp";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::UOutOfRange: return "UOutOfRange";
        case ErrorCode::KExceedsPopulation: return "KExceedsPopulation";
        case ErrorCode::EmptyPopulation: return "EmptyPopulation";
        case ErrorCode::MixedDiscipline: return "MixedDiscipline";
        case ErrorCode::EOutOfRange: return "EOutOfRange";
        case ErrorCode::NoActiveStreams: return "NoActiveStreams";
        case ErrorCode::BudgetExhausted: return "BudgetExhausted";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::DimensionOutOfRange: return "DimensionOutOfRange";
        case ErrorCode::QOutOfRange: return "QOutOfRange";
        case ErrorCode::WindowTooSmall: return "WindowTooSmall";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::MismatchedWindow: return "MismatchedWindow";
        case ErrorCode::DegenerateCluster: return "DegenerateCluster";
        case ErrorCode::NoLabels: return "NoLabels";
        case ErrorCode::AlignmentMismatch: return "AlignmentMismatch";
        case ErrorCode::InvalidIRI: return "InvalidIRI";
    }
    return "Unknown";
}

namespace {

std::string decorate(ErrorCode code, const std::string& message,
                     std::optional<std::size_t> line) {
    std::string out(to_string(code));
    if (line) out += "(line " + std::to_string(*line) + ")";
    out += ": ";
    out += message;
    return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> line)
    : std::runtime_error(decorate(code, message, line)), code_(code), line_(line) {}

}  // namespace streamres
