#include "streamres/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "streamres/bench.hpp"
#include "streamres/error.hpp"
#include "streamres/pipeline.hpp"

#ifndef STREAMRES_DEFAULT_DATASET
#define STREAMRES_DEFAULT_DATASET ""
#endif

namespace streamres::cli {

namespace {

// Leaf paths of the default config, e.g. "cluster.k", "policy.M".
void collect_leaves(const nlohmann::json& j, const std::string& prefix,
                    std::vector<std::string>& out) {
    for (const auto& [key, value] : j.items()) {
        const auto path = prefix.empty() ? key : prefix + "." + key;
        if (value.is_object()) collect_leaves(value, path, out);
        else out.push_back(path);
    }
}

// Flag text is parsed as JSON when possible ("3", "true", "[[0,0]]"),
// otherwise taken as a string.
nlohmann::json parse_flag_value(const std::string& text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error&) {
        return text;
    }
}

void set_path(nlohmann::json& j, const std::string& path, nlohmann::json value) {
    nlohmann::json* node = &j;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const auto key = path.substr(start, dot == std::string::npos ? dot : dot - start);
        if (dot == std::string::npos) {
            (*node)[key] = std::move(value);
            return;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    std::replace(s.begin(), s.end(), '\r', ' ');
    return s;
}

std::ofstream create(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::MissingFile, "cannot create " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
    return in;
}

std::string percent(double v) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(1);
    s << v * 100.0;
    return s.str();
}

template <typename T>
std::vector<T> split_list(const std::string& text, T (*parse)(const std::string&)) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(parse(item));
    }
    if (out.empty()) throw Error(ErrorCode::InvalidConfig, "empty list '" + text + "'");
    return out;
}

std::size_t parse_size(const std::string& s) {
    try {
        return static_cast<std::size_t>(std::stoull(s));
    } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidConfig, "not a count: '" + s + "'");
    }
}

std::string parse_word(const std::string& s) { return s; }

bool parse_yes_no(const std::string& s) {
    if (s == "yes" || s == "true") return true;
    if (s == "no" || s == "false") return false;
    throw Error(ErrorCode::InvalidConfig, "expected yes/no, got '" + s + "'");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Weighted stream sampling, windowed clustering and event export"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    bool verbose = false;
    app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    auto* seed_opt = app.add_option("--seed", seed, "Root random seed");
    auto* out_opt = app.add_option("--out", out_dir, "Output directory");
    app.add_flag("--verbose", verbose, "Progress on stderr");

    std::vector<std::string> leaves;
    collect_leaves(config_to_json(default_config()), "", leaves);
    std::map<std::string, std::string> overrides;
    for (const auto& leaf : leaves) {
        if (leaf == "seed" || leaf == "outputs") continue;
        app.add_option_function<std::string>(
               "--" + leaf, [&overrides, leaf](const std::string& v) { overrides[leaf] = v; },
               "Override config field " + leaf)
            ->group("Config overrides");
    }

    auto* run_cmd = app.add_subcommand("run", "Run the whole pipeline");

    auto* gen_cmd = app.add_subcommand("generate", "Write synthetic records");
    std::uint64_t gen_count = 0;
    std::string gen_format = "jsonl";
    std::string gen_output;
    gen_cmd->add_option("--count", gen_count, "Number of records (default source.count)");
    gen_cmd->add_option("--format", gen_format, "jsonl or csv")
        ->check(CLI::IsMember({"jsonl", "csv"}));
    gen_cmd->add_option("--output", gen_output, "Output file (default <out>/records.<fmt>)");

    auto* sample_cmd = app.add_subcommand("sample", "Pool sampling stage");
    std::string sample_input;
    std::string sample_format = "jsonl";
    sample_cmd->add_option("--input", sample_input, "Record file (default: configured source)");
    sample_cmd->add_option("--format", sample_format, "jsonl or csv")
        ->check(CLI::IsMember({"jsonl", "csv"}));

    auto* cluster_cmd = app.add_subcommand("cluster", "Windowed clustering stage");
    std::string cluster_input;
    cluster_cmd->add_option("--input", cluster_input, "Samples JSONL (default <out>/samples.jsonl)");

    auto* detect_cmd = app.add_subcommand("detect", "Outlier detection stage");
    std::string detect_input;
    detect_cmd->add_option("--input", detect_input, "Windows JSONL (default <out>/windows.jsonl)");

    auto* export_cmd = app.add_subcommand("export", "Knowledge-graph export stage");
    std::string export_windows;
    std::string export_events;
    export_cmd->add_option("--windows", export_windows, "Windows JSONL (default <out>/windows.jsonl)");
    export_cmd->add_option("--events", export_events, "Events JSONL (default <out>/events.jsonl)");

    auto* bench_cmd = app.add_subcommand("bench", "Sampling benchmark grid");
    std::string bench_ks = "100,4500,9000";
    std::string bench_data = "dataset,random";
    std::string bench_repl = "yes,no";
    std::string bench_families = "uniform,weighted";
    std::size_t bench_repeats = 7;
    std::size_t bench_loops = 0;
    std::string bench_dataset = STREAMRES_DEFAULT_DATASET;
    bench_cmd->add_option("--ks", bench_ks, "Comma-separated sample sizes");
    bench_cmd->add_option("--data", bench_data, "dataset,random");
    bench_cmd->add_option("--replacement", bench_repl, "yes,no");
    bench_cmd->add_option("--families", bench_families, "uniform,weighted");
    bench_cmd->add_option("--repeats", bench_repeats, "Timed repeats per cell");
    bench_cmd->add_option("--loops", bench_loops, "Loops per repeat (0 = auto)");
    bench_cmd->add_option("--dataset", bench_dataset, "JSONL fixture for the dataset mode");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    std::string stage = app.get_subcommands().front()->get_name();
    try {
        nlohmann::json patch = nlohmann::json::object();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            try {
                patch = nlohmann::json::parse(in);
            } catch (const nlohmann::json::parse_error& e) {
                throw Error(ErrorCode::InvalidConfig, config_path + ": " + e.what());
            }
        }
        for (const auto& [path, text] : overrides) set_path(patch, path, parse_flag_value(text));
        if (*seed_opt) patch["seed"] = seed;
        if (*out_opt) patch["outputs"] = out_dir;
        auto config = config_from_json(patch);
        const auto dir = config.outputs;
        auto log = [&](const std::string& msg) {
            if (verbose) err << "[" << stage << "] " << msg << '\n';
        };

        if (*run_cmd) {
            validate(config);
            const auto s = run_pipeline(config);
            log("arrivals=" + std::to_string(s.sample.arrivals) +
                " sampled=" + std::to_string(s.sample.sampled) +
                " windows=" + std::to_string(s.windows) +
                " events=" + std::to_string(s.detect.events));
            out << "windows=" << s.windows << " events=" << s.detect.events
                << " triples=" << s.triples;
            if (s.detect.metrics) {
                out << " precision=" << percent(s.detect.metrics->precision)
                    << "% recall=" << percent(s.detect.metrics->recall)
                    << "% f=" << percent(s.detect.metrics->f_measure) << '%';
            }
            out << '\n';
        } else if (*gen_cmd) {
            validate_spec(config.source.synthetic);
            auto spec = config.source.synthetic;
            spec.seed = derive_seed(config.seed, "synthetic");
            const auto records =
                generate_synthetic(spec, gen_count ? gen_count : config.source.count);
            const std::filesystem::path path =
                gen_output.empty() ? dir / ("records." + gen_format)
                                   : std::filesystem::path(gen_output);
            auto file = create(path);
            if (gen_format == "csv") write_records_csv(file, records);
            else write_records_jsonl(file, records);
            log("wrote " + std::to_string(records.size()) + " records to " + path.string());
        } else if (*sample_cmd) {
            if (!sample_input.empty()) {
                config.source.kind = SourceConfig::Kind::file;
                config.source.path = sample_input;
                config.source.format = parse_format(sample_format);
            }
            validate(config);
            auto source = open_pipeline_source(config);
            std::filesystem::create_directories(dir);
            SampleStats stats;
            {
                auto samples = create(dir / "samples.jsonl");
                stats = stage_sample(*source, config, samples);
            }
            auto pool = create(dir / "pool.json");
            pool << stats.pool.dump(2) << '\n';
            log("arrivals=" + std::to_string(stats.arrivals) +
                " sampled=" + std::to_string(stats.sampled));
        } else if (*cluster_cmd) {
            validate(config);
            JsonlSource samples(cluster_input.empty() ? dir / "samples.jsonl"
                                                      : std::filesystem::path(cluster_input));
            auto windows = create(dir / "windows.jsonl");
            const auto n = stage_cluster(samples, config, windows);
            log("windows=" + std::to_string(n));
        } else if (*detect_cmd) {
            validate_rule(config.rule);
            auto windows = open_in(detect_input.empty() ? dir / "windows.jsonl"
                                                        : std::filesystem::path(detect_input));
            auto events = create(dir / "events.jsonl");
            const auto stats = stage_detect(windows, config.rule, events);
            out << "windows=" << stats.windows << " events=" << stats.events;
            if (stats.metrics) {
                out << " precision=" << percent(stats.metrics->precision)
                    << "% recall=" << percent(stats.metrics->recall)
                    << "% f=" << percent(stats.metrics->f_measure) << '%';
            }
            out << '\n';
        } else if (*export_cmd) {
            auto windows = open_in(export_windows.empty() ? dir / "windows.jsonl"
                                                          : std::filesystem::path(export_windows));
            auto events = open_in(export_events.empty() ? dir / "events.jsonl"
                                                        : std::filesystem::path(export_events));
            auto ttl = create(dir / "graph.ttl");
            auto dot = create(dir / "graph.dot");
            const auto n = stage_export(windows, events, ttl, dot);
            log("triples=" + std::to_string(n));
        } else if (*bench_cmd) {
            bench::BenchGrid grid;
            grid.ks = split_list<std::size_t>(bench_ks, parse_size);
            grid.data_modes = split_list<std::string>(bench_data, parse_word);
            grid.replacement = split_list<bool>(bench_repl, parse_yes_no);
            grid.families = split_list<std::string>(bench_families, parse_word);
            grid.repeats = bench_repeats;
            grid.loops = bench_loops;
            grid.dataset = bench_dataset;
            grid.seed = config.seed;
            const auto rows = bench::run_bench(grid);
            std::filesystem::create_directories(dir);
            auto csv = create(dir / "bench.csv");
            csv << bench::to_csv(rows);
            const auto table = bench::to_table(rows);
            auto txt = create(dir / "bench.txt");
            txt << table;
            out << table;
        }
    } catch (const Error& e) {
        err << "error: stage=" << stage << " code=" << to_string(e.code());
        if (e.line()) err << " line=" << *e.line();
        err << " message=" << one_line(e.what()) << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: stage=" << stage << " code=Internal message=" << one_line(e.what())
            << '\n';
        return 1;
    }
    return 0;
}

}  // namespace streamres::cli
