#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace streamres {

enum class ErrorCode {
    MissingFile,
    SchemaMismatch,
    NonFiniteFeature,
    NonPositiveWeight,
    NonMonotoneTimestamp,
    InvalidSpec,
    UOutOfRange,
    KExceedsPopulation,
    EmptyPopulation,
    MixedDiscipline,
    EOutOfRange,
    NoActiveStreams,
    BudgetExhausted,
    DimensionMismatch,
    DimensionOutOfRange,
    QOutOfRange,
    WindowTooSmall,
    InvalidConfig,
    MismatchedWindow,
    DegenerateCluster,
    NoLabels,
    AlignmentMismatch,
    InvalidIRI,
};

std::string_view to_string(ErrorCode code) noexcept;

// All library failures are reported through this type. `line()` is set for
// errors tied to a specific input row (1-based, header included).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message,
          std::optional<std::size_t> line = std::nullopt);

    ErrorCode code() const noexcept { return code_; }
    std::optional<std::size_t> line() const noexcept { return line_; }

private:
    ErrorCode code_;
    std::optional<std::size_t> line_;
};

}  // namespace streamres
