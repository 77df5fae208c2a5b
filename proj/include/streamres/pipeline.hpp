#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include "streamres/events.hpp"
#include "streamres/ingest.hpp"
#include "streamres/multires.hpp"
#include "streamres/resmeans.hpp"

namespace streamres {

struct SourceConfig {
    enum class Kind { file, synthetic };
    Kind kind = Kind::synthetic;
    std::filesystem::path path;
    Format format = Format::jsonl;
    SyntheticSpec synthetic;
    std::uint64_t count = 20000;
};

// The composed ingest -> pool sampling -> windowed clustering -> detection
// -> graph pipeline. `seed` is the only root of randomness: the synthetic
// generator, the pool and the clustering each derive their own stream
// from it.
struct PipelineConfig {
    SourceConfig source;
    AllocationPolicy policy;
    // Arrivals between pool drains. Every drain hands the current sample
    // to the clustering stage and empties the reservoirs.
    std::uint64_t epoch = 1000;
    ClusterConfig cluster;
    OutlierRule rule;
    std::filesystem::path outputs = "out";
    std::uint64_t seed = 0;
};

PipelineConfig default_config();

// Throws Error(InvalidConfig | EOutOfRange | InvalidSpec | QOutOfRange).
void validate(const PipelineConfig& config);

nlohmann::json config_to_json(const PipelineConfig& config);
// Missing keys keep their defaults. Unknown keys are rejected.
PipelineConfig config_from_json(const nlohmann::json& j);

std::unique_ptr<RecordSource> open_pipeline_source(const PipelineConfig& config);

struct SampleStats {
    std::uint64_t arrivals = 0;
    std::uint64_t sampled = 0;
    nlohmann::json pool;  // snapshot taken before the final drain
};

// Writes every drained sample record to `samples` as JSONL.
SampleStats stage_sample(RecordSource& source, const PipelineConfig& config,
                         std::ostream& samples);

// Clusters `samples` window by window and writes windows.jsonl lines.
std::size_t stage_cluster(RecordSource& samples, const PipelineConfig& config,
                          std::ostream& windows);

struct DetectStats {
    std::size_t windows = 0;
    std::size_t events = 0;
    std::optional<MetricsReport> metrics;  // summed over labelled windows
};

// Reads windows.jsonl, writes events.jsonl.
DetectStats stage_detect(std::istream& windows, const OutlierRule& rule, std::ostream& events);

// Reads windows.jsonl and events.jsonl, writes Turtle and DOT.
std::size_t stage_export(std::istream& windows, std::istream& events, std::ostream& turtle,
                         std::ostream& dot);

struct RunSummary {
    SampleStats sample;
    std::size_t windows = 0;
    DetectStats detect;
    std::size_t triples = 0;
};

nlohmann::json summary_to_json(const RunSummary& summary, const PipelineConfig& config);

// Runs every stage and writes samples.jsonl, pool.json, windows.jsonl,
// events.jsonl, graph.ttl, graph.dot and summary.json into config.outputs.
RunSummary run_pipeline(const PipelineConfig& config);

}  // namespace streamres
