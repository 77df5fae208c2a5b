#include "streamres/pipeline.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "streamres/error.hpp"
#include "streamres/kgexport.hpp"

namespace streamres {

PipelineConfig default_config() {
    PipelineConfig c;
    c.source.synthetic.n_clusters = 3;
    c.source.synthetic.means = {{0.0, 0.0}, {10.0, 0.0}, {0.0, 10.0}};
    c.source.synthetic.stddev = 0.5;
    c.source.synthetic.anomaly_rate = 0.05;
    c.source.synthetic.anomaly_offset = 10.0;
    c.source.synthetic.n_streams = 3;
    c.policy.budget = 300;
    c.cluster.k = 3;
    c.cluster.window_size = 300;
    return c;
}

void validate(const PipelineConfig& config) {
    if (config.source.kind == SourceConfig::Kind::synthetic) {
        validate_spec(config.source.synthetic);
    } else if (config.source.path.empty()) {
        throw Error(ErrorCode::InvalidConfig, "file source needs a path");
    }
    validate_policy(config.policy);
    if (config.epoch == 0) throw Error(ErrorCode::InvalidConfig, "epoch must be positive");
    validate_config(config.cluster);
    validate_rule(config.rule);
}

namespace {

nlohmann::json synthetic_block(const SyntheticSpec& spec) {
    auto j = spec_to_json(spec);
    j.erase("seed");
    return j;
}

// Every key in `patch` must already exist in `base`, recursively, except
// below "synthetic" where the generator parses its own block.
void check_known_keys(const nlohmann::json& base, const nlohmann::json& patch,
                      const std::string& where) {
    if (!patch.is_object()) return;
    for (const auto& [key, value] : patch.items()) {
        const auto path = where.empty() ? key : where + "." + key;
        if (!base.contains(key)) {
            throw Error(ErrorCode::InvalidConfig, "unknown config key '" + path + "'");
        }
        if (key != "synthetic" && base.at(key).is_object()) {
            check_known_keys(base.at(key), value, path);
        }
    }
}

}  // namespace

nlohmann::json config_to_json(const PipelineConfig& c) {
    nlohmann::json j;
    j["source"] = {
        {"kind", c.source.kind == SourceConfig::Kind::file ? "file" : "synthetic"},
        {"path", c.source.path.string()},
        {"format", c.source.format == Format::csv ? "csv" : "jsonl"},
        {"count", c.source.count},
        {"synthetic", synthetic_block(c.source.synthetic)},
    };
    j["policy"] = {{"e", c.policy.e}, {"M", c.policy.budget},
                   {"realloc_every", c.policy.realloc_every}};
    j["epoch"] = c.epoch;
    nlohmann::json timeout = nullptr;
    if (c.cluster.window_timeout != ClusterConfig{}.window_timeout)
        timeout = c.cluster.window_timeout;
    j["cluster"] = {{"k", c.cluster.k},
                    {"q", c.cluster.q},
                    {"window_size", c.cluster.window_size},
                    {"window_timeout", timeout},
                    {"max_iterations", c.cluster.max_iterations},
                    {"epsilon", c.cluster.epsilon},
                    {"restarts", c.cluster.restarts}};
    j["rule"] = {{"lambda", c.rule.lambda}, {"robust", c.rule.robust}};
    j["outputs"] = c.outputs.string();
    j["seed"] = c.seed;
    return j;
}

PipelineConfig config_from_json(const nlohmann::json& patch) {
    auto merged = config_to_json(default_config());
    check_known_keys(merged, patch, "");
    merged.merge_patch(patch);
    // merge_patch drops keys patched to null; restore the optional timeout.
    if (!merged["cluster"].contains("window_timeout")) merged["cluster"]["window_timeout"] = nullptr;

    PipelineConfig c;
    try {
        const auto& s = merged.at("source");
        const auto kind = s.at("kind").get<std::string>();
        if (kind == "file") c.source.kind = SourceConfig::Kind::file;
        else if (kind == "synthetic") c.source.kind = SourceConfig::Kind::synthetic;
        else throw Error(ErrorCode::InvalidConfig, "source.kind must be file or synthetic");
        c.source.path = s.at("path").get<std::string>();
        c.source.format = parse_format(s.at("format").get<std::string>());
        c.source.count = s.at("count").get<std::uint64_t>();
        c.source.synthetic = spec_from_json(s.at("synthetic"));

        const auto& p = merged.at("policy");
        c.policy.e = p.at("e").get<double>();
        c.policy.budget = p.at("M").get<std::size_t>();
        c.policy.realloc_every = p.at("realloc_every").get<std::uint64_t>();
        c.epoch = merged.at("epoch").get<std::uint64_t>();

        const auto& k = merged.at("cluster");
        c.cluster.k = k.at("k").get<std::size_t>();
        c.cluster.q = k.at("q").get<double>();
        c.cluster.window_size = k.at("window_size").get<std::size_t>();
        if (!k.at("window_timeout").is_null())
            c.cluster.window_timeout = k.at("window_timeout").get<std::uint64_t>();
        c.cluster.max_iterations = k.at("max_iterations").get<std::size_t>();
        c.cluster.epsilon = k.at("epsilon").get<double>();
        c.cluster.restarts = k.at("restarts").get<std::size_t>();

        c.rule.lambda = merged.at("rule").at("lambda").get<double>();
        c.rule.robust = merged.at("rule").at("robust").get<bool>();
        c.outputs = merged.at("outputs").get<std::string>();
        c.seed = merged.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, e.what());
    }
    c.cluster.seed = c.seed;
    return c;
}

std::unique_ptr<RecordSource> open_pipeline_source(const PipelineConfig& config) {
    if (config.source.kind == SourceConfig::Kind::file) {
        return open_source(config.source.path, config.source.format);
    }
    auto spec = config.source.synthetic;
    spec.seed = derive_seed(config.seed, "synthetic");
    return std::make_unique<SyntheticSource>(spec, config.source.count);
}

SampleStats stage_sample(RecordSource& source, const PipelineConfig& config,
                         std::ostream& samples) {
    validate_policy(config.policy);
    if (config.epoch == 0) throw Error(ErrorCode::InvalidConfig, "epoch must be positive");
    Rng rng(derive_seed(config.seed, "sampling"));
    ReservoirPool pool(config.policy);
    SampleStats stats;
    auto flush = [&] {
        const auto drained = pool.drain();
        stats.sampled += drained.size();
        write_records_jsonl(samples, drained);
    };
    while (auto record = source.next()) {
        pool.on_arrival(*record, rng);
        if (pool.arrivals() % config.epoch == 0) {
            stats.pool = pool.snapshot();
            flush();
        }
    }
    if (pool.total_entries() > 0) {
        stats.pool = pool.snapshot();
        flush();
    }
    if (stats.pool.is_null()) stats.pool = pool.snapshot();
    stats.arrivals = pool.arrivals();
    return stats;
}

std::size_t stage_cluster(RecordSource& samples, const PipelineConfig& config,
                          std::ostream& windows) {
    auto cluster = config.cluster;
    cluster.seed = config.seed;
    return run_stream(samples, cluster, [&](const WindowClustering& c, const Window& w) {
        windows << clustering_to_json(c, w).dump() << '\n';
    });
}

namespace {

template <typename Fn>
void for_each_json_line(std::istream& in, Fn&& fn) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorCode::SchemaMismatch, e.what(), line_no);
        }
        fn(j);
    }
}

}  // namespace

DetectStats stage_detect(std::istream& windows, const OutlierRule& rule, std::ostream& events) {
    validate_rule(rule);
    DetectStats stats;
    for_each_json_line(windows, [&](const nlohmann::json& j) {
        const auto stored = clustering_from_json(j);
        const auto report = build_report(stored.clustering, stored.window, rule);
        ++stats.windows;
        stats.events += report.events.size();
        if (report.metrics) {
            if (stats.metrics) *stats.metrics += *report.metrics;
            else stats.metrics = report.metrics;
        }
        events << report_to_json(report).dump() << '\n';
    });
    return stats;
}

std::size_t stage_export(std::istream& windows, std::istream& events, std::ostream& turtle,
                         std::ostream& dot) {
    std::vector<WindowClustering> clusterings;
    std::vector<EventReport> reports;
    for_each_json_line(windows, [&](const nlohmann::json& j) {
        clusterings.push_back(clustering_from_json(j).clustering);
    });
    for_each_json_line(events, [&](const nlohmann::json& j) {
        reports.push_back(report_from_json(j));
    });
    // An absent or empty events file stands for "no events anywhere".
    if (reports.empty()) {
        for (const auto& c : clusterings) {
            EventReport r;
            r.window_seq = c.window_seq;
            reports.push_back(std::move(r));
        }
    }
    const auto graph = kg::build_graph(clusterings, reports);
    turtle << kg::serialize_turtle(graph);
    dot << kg::serialize_dot(graph);
    return graph.size();
}

nlohmann::json summary_to_json(const RunSummary& s, const PipelineConfig& config) {
    nlohmann::json j;
    j["seed"] = config.seed;
    j["arrivals"] = s.sample.arrivals;
    j["sampled"] = s.sample.sampled;
    j["windows"] = s.windows;
    j["events"] = s.detect.events;
    j["triples"] = s.triples;
    if (s.detect.metrics) {
        const auto& m = *s.detect.metrics;
        j["metrics"] = {{"tp", m.tp},
                        {"fp", m.fp},
                        {"fn", m.fn},
                        {"precision", m.precision},
                        {"recall", m.recall},
                        {"f", m.f_measure}};
    } else {
        j["metrics"] = nullptr;
    }
    return j;
}

namespace {

std::ofstream create(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::MissingFile, "cannot create " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
    return in;
}

}  // namespace

RunSummary run_pipeline(const PipelineConfig& config) {
    validate(config);
    const auto& dir = config.outputs;
    std::filesystem::create_directories(dir);
    RunSummary summary;

    auto source = open_pipeline_source(config);
    {
        auto samples = create(dir / "samples.jsonl");
        summary.sample = stage_sample(*source, config, samples);
    }
    {
        auto pool = create(dir / "pool.json");
        pool << summary.sample.pool.dump(2) << '\n';
    }
    {
        JsonlSource samples(dir / "samples.jsonl");
        auto windows = create(dir / "windows.jsonl");
        summary.windows = stage_cluster(samples, config, windows);
    }
    {
        auto windows = open_in(dir / "windows.jsonl");
        auto events = create(dir / "events.jsonl");
        summary.detect = stage_detect(windows, config.rule, events);
    }
    {
        auto windows = open_in(dir / "windows.jsonl");
        auto events = open_in(dir / "events.jsonl");
        auto ttl = create(dir / "graph.ttl");
        auto dot = create(dir / "graph.dot");
        summary.triples = stage_export(windows, events, ttl, dot);
    }
    auto out = create(dir / "summary.json");
    out << summary_to_json(summary, config).dump(2) << '\n';
    return summary;
}

}  // namespace streamres
