#include "streamres/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string_view>

#include "streamres/error.hpp"
#include "streamres/numfmt.hpp"

namespace streamres {

Format parse_format(const std::string& name) {
    if (name == "csv") return Format::csv;
    if (name == "jsonl") return Format::jsonl;
    throw Error(ErrorCode::InvalidConfig, "unknown format '" + name + "'");
}

void RowChecker::check(const Record& record, std::size_t line) {
    validate_record(record, dimension_, line);
    if (dimension_ == 0) dimension_ = record.features.size();
    auto it = last_ts_.find(record.stream_id);
    if (it == last_ts_.end()) {
        last_ts_.emplace(record.stream_id, record.timestamp);
    } else {
        if (record.timestamp < it->second) {
            throw Error(ErrorCode::NonMonotoneTimestamp,
                        "timestamp decreases within stream '" + record.stream_id + "'",
                        line);
        }
        it->second = record.timestamp;
    }
}

namespace {

std::vector<std::string_view> split_commas(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

double parse_real(std::string_view field, std::size_t line, const char* what) {
    field = trim(field);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
        throw Error(ErrorCode::SchemaMismatch,
                    std::string("cannot parse ") + what + " '" + std::string(field) + "'",
                    line);
    }
    return value;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
    return in;
}

}  // namespace

CsvSource::CsvSource(const std::filesystem::path& path) : in_(open_or_throw(path)) {
    std::string header;
    if (!std::getline(in_, header)) {
        throw Error(ErrorCode::SchemaMismatch, "missing CSV header", 1);
    }
    line_no_ = 1;
    auto cols = split_commas(trim(header));
    for (auto& c : cols) c = trim(c);
    if (cols.size() < 3 || cols[0] != "stream_id" || cols[1] != "timestamp") {
        throw Error(ErrorCode::SchemaMismatch,
                    "header must start with stream_id,timestamp and name at least "
                    "one feature",
                    1);
    }
    std::size_t tail = cols.size();
    if (cols[tail - 1] == "label") {
        has_label_ = true;
        --tail;
    }
    if (tail > 2 && cols[tail - 1] == "weight") {
        has_weight_ = true;
        --tail;
    }
    n_columns_ = cols.size();
    n_features_ = tail - 2;
    if (n_features_ == 0) {
        throw Error(ErrorCode::SchemaMismatch, "header names no feature columns", 1);
    }
}

std::optional<Record> CsvSource::next() {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_no_;
        auto body = trim(line);
        if (body.empty()) continue;
        auto fields = split_commas(body);
        if (fields.size() != n_columns_) {
            throw Error(ErrorCode::SchemaMismatch,
                        "expected " + std::to_string(n_columns_) + " columns, got " +
                            std::to_string(fields.size()),
                        line_no_);
        }
        Record r;
        r.stream_id = std::string(trim(fields[0]));
        if (r.stream_id.empty()) {
            throw Error(ErrorCode::SchemaMismatch, "empty stream_id", line_no_);
        }
        auto ts = trim(fields[1]);
        auto [ptr, ec] = std::from_chars(ts.data(), ts.data() + ts.size(), r.timestamp);
        if (ts.empty() || ec != std::errc() || ptr != ts.data() + ts.size()) {
            throw Error(ErrorCode::SchemaMismatch,
                        "cannot parse timestamp '" + std::string(ts) + "'", line_no_);
        }
        r.features.reserve(n_features_);
        for (std::size_t i = 0; i < n_features_; ++i) {
            r.features.push_back(parse_real(fields[2 + i], line_no_, "feature"));
        }
        std::size_t col = 2 + n_features_;
        if (has_weight_) {
            auto w = trim(fields[col++]);
            if (!w.empty()) r.weight = parse_real(w, line_no_, "weight");
        }
        if (has_label_) {
            auto l = trim(fields[col++]);
            if (!l.empty()) r.label = std::string(l);
        }
        checker_.check(r, line_no_);
        return r;
    }
    return std::nullopt;
}

JsonlSource::JsonlSource(const std::filesystem::path& path) : in_(open_or_throw(path)) {}

std::optional<Record> JsonlSource::next() {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_no_;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorCode::SchemaMismatch, e.what(), line_no_);
        }
        Record r = record_from_json(j, line_no_);
        checker_.check(r, line_no_);
        return r;
    }
    return std::nullopt;
}

std::unique_ptr<RecordSource> open_source(const std::filesystem::path& path, Format format) {
    if (format == Format::csv) return std::make_unique<CsvSource>(path);
    return std::make_unique<JsonlSource>(path);
}

std::vector<Record> drain(RecordSource& source) {
    std::vector<Record> out;
    while (auto r = source.next()) out.push_back(std::move(*r));
    return out;
}

std::vector<Record> read_records(const std::filesystem::path& path, Format format) {
    auto source = open_source(path, format);
    return drain(*source);
}

void write_records_jsonl(std::ostream& out, const std::vector<Record>& records) {
    for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

void write_records_csv(std::ostream& out, const std::vector<Record>& records) {
    std::size_t d = records.empty() ? 1 : records.front().features.size();
    out << "stream_id,timestamp";
    for (std::size_t i = 0; i < d; ++i) out << ",f" << (i + 1);
    out << ",weight,label\n";
    for (const auto& r : records) {
        out << r.stream_id << ',' << r.timestamp;
        for (double f : r.features) out << ',' << format_double(f);
        out << ',' << format_double(r.weight) << ',';
        if (r.label) out << *r.label;
        out << '\n';
    }
}

// ---------------------------------------------------------------------------

std::string cluster_label(std::size_t cluster) {
    return "cluster-" + std::to_string(cluster);
}

void validate_spec(const SyntheticSpec& spec) {
    auto fail = [](const std::string& why) { throw Error(ErrorCode::InvalidSpec, why); };
    if (spec.n_clusters == 0) fail("n_clusters must be positive");
    if (spec.means.size() != spec.n_clusters) fail("means must list n_clusters vectors");
    const std::size_t d = spec.means.front().size();
    if (d == 0) fail("means must have at least one dimension");
    for (const auto& m : spec.means) {
        if (m.size() != d) fail("means differ in dimensionality");
        for (double v : m)
            if (!std::isfinite(v)) fail("means must be finite");
    }
    for (std::size_t i = 0; i < spec.means.size(); ++i)
        for (std::size_t j = i + 1; j < spec.means.size(); ++j)
            if (spec.means[i] == spec.means[j]) fail("means must be pairwise distinct");
    if (!(spec.stddev >= 0.0) || !std::isfinite(spec.stddev)) fail("stddev must be >= 0");
    if (!(spec.anomaly_rate >= 0.0 && spec.anomaly_rate < 0.5))
        fail("anomaly_rate must lie in [0, 0.5)");
    if (!(spec.anomaly_offset > 0.0) || !std::isfinite(spec.anomaly_offset))
        fail("anomaly_offset must be positive");
    if (spec.anomaly_rate > 0.0 && spec.stddev == 0.0)
        fail("anomalies need a positive stddev");
    if (spec.weight_law.kind != WeightLaw::Kind::constant &&
        !(spec.weight_law.parameter > 0.0 && std::isfinite(spec.weight_law.parameter)))
        fail("weight law parameter must be positive");
    if (spec.n_streams == 0) fail("n_streams must be positive");
}

SyntheticSource::SyntheticSource(SyntheticSpec spec, std::uint64_t count)
    : spec_(std::move(spec)), count_(count), rng_(spec_.seed) {
    validate_spec(spec_);
}

Point SyntheticSource::anomaly_point() {
    const std::size_t d = spec_.means.front().size();
    const double radius = spec_.anomaly_offset * spec_.stddev;
    for (int attempt = 0; attempt < 10000; ++attempt) {
        const auto& center = spec_.means[uniform_index(rng_, spec_.n_clusters)];
        Point dir(d);
        double norm2 = 0.0;
        for (auto& v : dir) {
            v = normal_(rng_);
            norm2 += v * v;
        }
        if (norm2 == 0.0) continue;
        const double scale = radius / std::sqrt(norm2);
        Point p(d);
        for (std::size_t t = 0; t < d; ++t) p[t] = center[t] + dir[t] * scale;
        bool clear = true;
        for (const auto& m : spec_.means) {
            double dist2 = 0.0;
            for (std::size_t t = 0; t < d; ++t) dist2 += (p[t] - m[t]) * (p[t] - m[t]);
            // The generating mean itself sits at `radius` up to rounding.
            if (&m != &center && std::sqrt(dist2) < radius) {
                clear = false;
                break;
            }
        }
        if (clear) return p;
    }
    throw Error(ErrorCode::InvalidSpec,
                "means are too close to place anomalies at the requested offset");
}

double SyntheticSource::draw_weight() {
    switch (spec_.weight_law.kind) {
        case WeightLaw::Kind::constant:
            return 1.0;
        case WeightLaw::Kind::exponential:
            // -ln(u)/rate with u in (0,1]; u == 1 would give 0, so redraw.
            while (true) {
                double u = uniform_open_closed(rng_);
                if (u < 1.0) return -std::log(u) / spec_.weight_law.parameter;
            }
        case WeightLaw::Kind::pareto:
            return std::pow(uniform_open_closed(rng_), -1.0 / spec_.weight_law.parameter);
    }
    return 1.0;
}

std::optional<Record> SyntheticSource::next() {
    if (emitted_ >= count_) return std::nullopt;
    Record r;
    r.timestamp = emitted_++;
    std::size_t stream = spec_.n_streams > 1 ? uniform_index(rng_, spec_.n_streams) : 0;
    r.stream_id = "s" + std::to_string(stream);
    const bool anomalous =
        spec_.anomaly_rate > 0.0 && uniform_open_closed(rng_) <= spec_.anomaly_rate;
    if (anomalous) {
        r.features = anomaly_point();
        r.label = kAnomalyLabel;
    } else {
        std::size_t c = uniform_index(rng_, spec_.n_clusters);
        const auto& mean = spec_.means[c];
        r.features.resize(mean.size());
        for (std::size_t t = 0; t < mean.size(); ++t)
            r.features[t] = mean[t] + spec_.stddev * normal_(rng_);
        r.label = cluster_label(c);
    }
    r.weight = draw_weight();
    return r;
}

std::vector<Record> generate_synthetic(const SyntheticSpec& spec, std::uint64_t count) {
    SyntheticSource source(spec, count);
    return drain(source);
}

nlohmann::json spec_to_json(const SyntheticSpec& spec) {
    nlohmann::json j;
    j["n_clusters"] = spec.n_clusters;
    j["means"] = spec.means;
    j["stddev"] = spec.stddev;
    j["anomaly_rate"] = spec.anomaly_rate;
    j["anomaly_offset"] = spec.anomaly_offset;
    switch (spec.weight_law.kind) {
        case WeightLaw::Kind::constant: j["weight_law"] = "constant"; break;
        case WeightLaw::Kind::exponential: j["weight_law"] = "exponential"; break;
        case WeightLaw::Kind::pareto: j["weight_law"] = "pareto"; break;
    }
    j["weight_param"] = spec.weight_law.parameter;
    j["seed"] = spec.seed;
    j["n_streams"] = spec.n_streams;
    return j;
}

SyntheticSpec spec_from_json(const nlohmann::json& j) {
    SyntheticSpec s;
    try {
        s.means = j.value("means", s.means);
        s.n_clusters = j.value("n_clusters", s.means.size());
        s.stddev = j.value("stddev", s.stddev);
        s.anomaly_rate = j.value("anomaly_rate", s.anomaly_rate);
        s.anomaly_offset = j.value("anomaly_offset", s.anomaly_offset);
        const auto law = j.value("weight_law", std::string("constant"));
        const double param = j.value("weight_param", 1.0);
        if (law == "constant") s.weight_law = WeightLaw::constant();
        else if (law == "exponential") s.weight_law = WeightLaw::exponential(param);
        else if (law == "pareto") s.weight_law = WeightLaw::pareto(param);
        else throw Error(ErrorCode::InvalidSpec, "unknown weight_law '" + law + "'");
        s.seed = j.value("seed", s.seed);
        s.n_streams = j.value("n_streams", s.n_streams);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidSpec, e.what());
    }
    validate_spec(s);
    return s;
}

}  // namespace streamres
