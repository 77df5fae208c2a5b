#include "streamres/record.hpp"

#include <cmath>

#include "streamres/error.hpp"

namespace streamres {

void validate_record(const Record& record, std::size_t dimension,
                     std::optional<std::size_t> line) {
    if (record.features.empty()) {
        throw Error(ErrorCode::SchemaMismatch, "record has no features", line);
    }
    if (dimension != 0 && record.features.size() != dimension) {
        throw Error(ErrorCode::SchemaMismatch,
                    "expected " + std::to_string(dimension) + " features, got " +
                        std::to_string(record.features.size()),
                    line);
    }
    for (double f : record.features) {
        if (!std::isfinite(f)) {
            throw Error(ErrorCode::NonFiniteFeature, "feature is not finite", line);
        }
    }
    if (!(record.weight > 0.0) || !std::isfinite(record.weight)) {
        throw Error(ErrorCode::NonPositiveWeight,
                    "weight must be positive and finite", line);
    }
}

nlohmann::json record_to_json(const Record& record) {
    nlohmann::json j;
    j["stream_id"] = record.stream_id;
    j["ts"] = record.timestamp;
    j["features"] = record.features;
    j["weight"] = record.weight;
    if (record.label) j["label"] = *record.label;
    return j;
}

Record record_from_json(const nlohmann::json& j, std::optional<std::size_t> line) {
    if (!j.is_object()) {
        throw Error(ErrorCode::SchemaMismatch, "expected a JSON object", line);
    }
    Record r;
    try {
        r.stream_id = j.at("stream_id").get<std::string>();
        r.timestamp = j.at("ts").get<std::uint64_t>();
        const auto& features = j.at("features");
        if (!features.is_array()) {
            throw Error(ErrorCode::SchemaMismatch, "features must be an array", line);
        }
        r.features.reserve(features.size());
        for (const auto& f : features) {
            // Non-finite values serialize as null in JSON.
            if (f.is_null()) {
                throw Error(ErrorCode::NonFiniteFeature, "feature is not finite", line);
            }
            r.features.push_back(f.get<double>());
        }
        if (auto it = j.find("weight"); it != j.end() && !it->is_null()) {
            r.weight = it->get<double>();
        }
        if (auto it = j.find("label"); it != j.end() && !it->is_null()) {
            r.label = it->get<std::string>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaMismatch, e.what(), line);
    }
    validate_record(r, 0, line);
    return r;
}

}  // namespace streamres
