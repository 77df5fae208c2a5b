#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace streamres {

using Point = std::vector<double>;

// One stream element.
struct Record {
    std::string stream_id;
    std::uint64_t timestamp = 0;
    Point features;
    double weight = 1.0;
    std::optional<std::string> label;

    bool operator==(const Record&) const = default;
};

// Throws Error on a non-finite feature, a non-positive/non-finite weight, an
// empty feature vector or (when `dimension` is non-zero) a width mismatch.
void validate_record(const Record& record, std::size_t dimension = 0,
                     std::optional<std::size_t> line = std::nullopt);

// JSONL object form: {"stream_id", "ts", "features", "weight", "label"}.
nlohmann::json record_to_json(const Record& record);
Record record_from_json(const nlohmann::json& j,
                        std::optional<std::size_t> line = std::nullopt);

}  // namespace streamres
