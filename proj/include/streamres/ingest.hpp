#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "streamres/record.hpp"
#include "streamres/rng.hpp"

namespace streamres {

enum class Format { csv, jsonl };

Format parse_format(const std::string& name);

// Single-consumer sequential iterator over records. `next()` returns
// std::nullopt once the source is exhausted.
class RecordSource {
public:
    virtual ~RecordSource() = default;
    virtual std::optional<Record> next() = 0;
};

// Shared row checks for file sources: fixed arity, per-stream monotone
// timestamps and the Record invariants.
class RowChecker {
public:
    void check(const Record& record, std::size_t line);

private:
    std::size_t dimension_ = 0;
    std::map<std::string, std::uint64_t, std::less<>> last_ts_;
};

// CSV with a mandatory header `stream_id,timestamp,f1..fd[,weight][,label]`.
// Optional columns are recognised by their header names. Empty weight cells
// mean 1.0, empty label cells mean "no label". Fields are not quoted.
class CsvSource final : public RecordSource {
public:
    explicit CsvSource(const std::filesystem::path& path);
    std::optional<Record> next() override;

    std::size_t dimension() const { return n_features_; }

private:
    std::ifstream in_;
    std::size_t line_no_ = 0;
    std::size_t n_columns_ = 0;
    std::size_t n_features_ = 0;
    bool has_weight_ = false;
    bool has_label_ = false;
    RowChecker checker_;
};

class JsonlSource final : public RecordSource {
public:
    explicit JsonlSource(const std::filesystem::path& path);
    std::optional<Record> next() override;

private:
    std::ifstream in_;
    std::size_t line_no_ = 0;
    RowChecker checker_;
};

class VectorSource final : public RecordSource {
public:
    explicit VectorSource(std::vector<Record> records) : records_(std::move(records)) {}
    std::optional<Record> next() override {
        if (pos_ >= records_.size()) return std::nullopt;
        return records_[pos_++];
    }

private:
    std::vector<Record> records_;
    std::size_t pos_ = 0;
};

std::unique_ptr<RecordSource> open_source(const std::filesystem::path& path, Format format);

std::vector<Record> drain(RecordSource& source);

std::vector<Record> read_records(const std::filesystem::path& path, Format format);

void write_records_jsonl(std::ostream& out, const std::vector<Record>& records);
void write_records_csv(std::ostream& out, const std::vector<Record>& records);

// ---------------------------------------------------------------------------
// Synthetic Gaussian-mixture source with injected anomalies.

struct WeightLaw {
    enum class Kind { constant, exponential, pareto };
    Kind kind = Kind::constant;
    double parameter = 1.0;  // rate for exponential, alpha for pareto

    static WeightLaw constant() { return {}; }
    static WeightLaw exponential(double rate) { return {Kind::exponential, rate}; }
    static WeightLaw pareto(double alpha) { return {Kind::pareto, alpha}; }
};

struct SyntheticSpec {
    std::size_t n_clusters = 3;
    std::vector<Point> means = {{0.0, 0.0}, {10.0, 0.0}, {0.0, 10.0}};
    double stddev = 0.5;
    double anomaly_rate = 0.0;
    double anomaly_offset = 10.0;  // in multiples of stddev
    WeightLaw weight_law;
    std::uint64_t seed = 0;
    // Records are spread uniformly over streams "s0".."s{n_streams-1}".
    std::size_t n_streams = 1;
};

// Throws Error(InvalidSpec) describing the first violated constraint.
void validate_spec(const SyntheticSpec& spec);

std::string cluster_label(std::size_t cluster);
inline constexpr const char* kAnomalyLabel = "anomaly";

// Normal records are mean + stddev * N(0, I) and carry "cluster-<c>".
// Anomalies sit on a sphere of radius anomaly_offset * stddev around a random
// mean, at least that far from every mean, and carry "anomaly".
class SyntheticSource final : public RecordSource {
public:
    SyntheticSource(SyntheticSpec spec, std::uint64_t count);
    std::optional<Record> next() override;

private:
    Point anomaly_point();
    double draw_weight();

    SyntheticSpec spec_;
    std::uint64_t count_;
    std::uint64_t emitted_ = 0;
    Rng rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

std::vector<Record> generate_synthetic(const SyntheticSpec& spec, std::uint64_t count);

nlohmann::json spec_to_json(const SyntheticSpec& spec);
SyntheticSpec spec_from_json(const nlohmann::json& j);

}  // namespace streamres
