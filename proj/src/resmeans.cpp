#include "streamres/resmeans.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "streamres/error.hpp"

namespace streamres {

std::string to_string(ClosedBy c) {
    switch (c) {
        case ClosedBy::full: return "full";
        case ClosedBy::timeout: return "timeout";
        case ClosedBy::end: return "end";
    }
    return "full";
}

ClosedBy closed_by_from_string(const std::string& s) {
    if (s == "full") return ClosedBy::full;
    if (s == "timeout") return ClosedBy::timeout;
    if (s == "end") return ClosedBy::end;
    throw Error(ErrorCode::SchemaMismatch, "unknown closed_by '" + s + "'");
}

void validate_config(const ClusterConfig& c) {
    auto fail = [](const std::string& why) { throw Error(ErrorCode::InvalidConfig, why); };
    if (c.k == 0) fail("k must be positive");
    if (c.window_size == 0) fail("window_size must be positive");
    if (c.k > c.window_size) {
        fail("k (" + std::to_string(c.k) + ") exceeds window_size (" +
             std::to_string(c.window_size) + ")");
    }
    if (!(c.q >= 1.0) || !std::isfinite(c.q)) {
        throw Error(ErrorCode::QOutOfRange, "q must be a finite value >= 1");
    }
    if (c.window_timeout == 0) fail("window_timeout must be positive");
    if (c.max_iterations == 0) fail("max_iterations must be positive");
    if (!(c.epsilon > 0.0)) fail("epsilon must be positive");
    if (c.restarts == 0) fail("restarts must be positive");
}

double minkowski(std::span<const double> a, std::span<const double> b, double q) {
    if (a.size() != b.size()) {
        throw Error(ErrorCode::DimensionMismatch, "vectors differ in dimensionality");
    }
    if (!(q >= 1.0) || !std::isfinite(q)) {
        throw Error(ErrorCode::QOutOfRange, "q must be a finite value >= 1");
    }
    double acc = 0.0;
    if (q == 1.0) {
        for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
        return acc;
    }
    if (q == 2.0) {
        for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
        return std::sqrt(acc);
    }
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::pow(std::abs(a[i] - b[i]), q);
    return std::pow(acc, 1.0 / q);
}

namespace {

double squared_euclidean(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return acc;
}

// Monotone in the Minkowski distance of order q.
double assignment_cost(std::span<const double> a, std::span<const double> b, double q) {
    return q == 2.0 ? squared_euclidean(a, b) : minkowski(a, b, q);
}

struct Sse {
    std::vector<double> per_cluster;
    std::vector<std::vector<double>> per_dimension;
    double total = 0.0;
};

Sse compute_sse(std::span<const Point> points, std::span<const std::size_t> assignment,
                std::span<const Point> centroids) {
    const std::size_t k = centroids.size();
    const std::size_t d = k ? centroids.front().size() : 0;
    Sse s;
    s.per_cluster.assign(k, 0.0);
    s.per_dimension.assign(k, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto c = assignment[i];
        for (std::size_t t = 0; t < d; ++t) {
            const double diff = points[i][t] - centroids[c][t];
            s.per_dimension[c][t] += diff * diff;
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        s.per_cluster[c] =
            std::accumulate(s.per_dimension[c].begin(), s.per_dimension[c].end(), 0.0);
        s.total += s.per_cluster[c];
    }
    return s;
}

double max_shift(std::span<const Point> a, std::span<const Point> b) {
    double worst = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c)
        worst = std::max(worst, std::sqrt(squared_euclidean(a[c], b[c])));
    return worst;
}

struct LloydResult {
    std::vector<Point> initial;
    std::vector<Point> centroids;
    std::vector<std::size_t> assignment;
    Sse sse;
    std::size_t iterations = 0;
    std::vector<double> history;
};

LloydResult lloyd(std::span<const Point> points, std::vector<Point> init,
                  const ClusterConfig& config) {
    LloydResult out;
    out.initial = init;
    std::vector<Point> centroids = std::move(init);
    for (std::size_t it = 1; it <= config.max_iterations; ++it) {
        const auto a = assign(points, centroids, config.q);
        auto next = update_centroids(points, a, centroids, config.q);
        const double shift = max_shift(centroids, next);
        centroids = std::move(next);
        out.history.push_back(compute_sse(points, a, centroids).total);
        out.iterations = it;
        if (shift < config.epsilon) break;
    }
    out.assignment = assign(points, centroids, config.q);
    out.sse = compute_sse(points, out.assignment, centroids);
    out.centroids = std::move(centroids);
    return out;
}

std::vector<Point> medoid_init(std::span<const Point> points, std::size_t k, Rng& rng) {
    std::vector<std::size_t> idx(points.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<Point> init;
    init.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + uniform_index(rng, idx.size() - i);
        std::swap(idx[i], idx[j]);
        init.push_back(points[idx[i]]);
    }
    return init;
}

}  // namespace

std::vector<std::size_t> assign(std::span<const Point> points,
                                std::span<const Point> centroids, double q) {
    std::vector<std::size_t> out(points.size(), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        double best = assignment_cost(points[i], centroids[0], q);
        for (std::size_t c = 1; c < centroids.size(); ++c) {
            const double cost = assignment_cost(points[i], centroids[c], q);
            if (cost < best) {
                best = cost;
                out[i] = c;
            }
        }
    }
    return out;
}

std::vector<Point> update_centroids(std::span<const Point> points,
                                    std::span<const std::size_t> assignment,
                                    std::span<const Point> centroids, double q) {
    const std::size_t k = centroids.size();
    const std::size_t d = k ? centroids.front().size() : 0;
    std::vector<Point> sums(k, Point(d, 0.0));
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto c = assignment[i];
        ++sizes[c];
        for (std::size_t t = 0; t < d; ++t) sums[c][t] += points[i][t];
    }
    std::vector<Point> next(k);
    std::vector<std::size_t> empty;
    for (std::size_t c = 0; c < k; ++c) {
        if (sizes[c] == 0) {
            empty.push_back(c);
            next[c] = centroids[c];
            continue;
        }
        next[c] = std::move(sums[c]);
        for (auto& v : next[c]) v /= static_cast<double>(sizes[c]);
    }
    if (empty.empty()) return next;

    std::vector<double> dist(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        dist[i] = minkowski(points[i], centroids[assignment[i]], q);
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dist[a] > dist[b]; });
    std::size_t cursor = 0;
    for (auto c : empty) {
        if (cursor >= order.size() || dist[order[cursor]] <= 0.0) break;
        next[c] = points[order[cursor++]];
    }
    return next;
}

double sse_cluster(std::span<const Point> members, std::span<const double> centroid) {
    double acc = 0.0;
    for (const auto& m : members) acc += squared_euclidean(m, centroid);
    return acc;
}

double sse_dimension(std::span<const Point> members, std::span<const double> centroid,
                     std::size_t t) {
    if (t >= centroid.size()) {
        throw Error(ErrorCode::DimensionOutOfRange,
                    "dimension " + std::to_string(t) + " out of range");
    }
    double acc = 0.0;
    for (const auto& m : members) acc += (m[t] - centroid[t]) * (m[t] - centroid[t]);
    return acc;
}

double sse_total(const WindowClustering& clustering) {
    return std::accumulate(clustering.sse_per_cluster.begin(),
                           clustering.sse_per_cluster.end(), 0.0);
}

std::vector<Point> points_of(const std::vector<Record>& records) {
    std::vector<Point> pts;
    pts.reserve(records.size());
    for (const auto& r : records) pts.push_back(r.features);
    return pts;
}

WindowClustering cluster_window(const Window& window, const ClusterConfig& config,
                                const std::optional<std::vector<Point>>& warm_start,
                                Rng& rng) {
    validate_config(config);
    const auto& records = window.records;
    if (records.empty() || (!warm_start && records.size() < config.k)) {
        throw Error(ErrorCode::WindowTooSmall,
                    "window of " + std::to_string(records.size()) +
                        " records cannot seed k=" + std::to_string(config.k));
    }
    const std::size_t d = records.front().features.size();
    for (const auto& r : records) {
        if (r.features.size() != d) {
            throw Error(ErrorCode::DimensionMismatch, "window mixes dimensionalities");
        }
        for (double f : r.features)
            if (!std::isfinite(f))
                throw Error(ErrorCode::NonFiniteFeature, "feature is not finite");
    }
    if (warm_start) {
        if (warm_start->size() != config.k) {
            throw Error(ErrorCode::InvalidConfig, "warm start must supply k centroids");
        }
        for (const auto& c : *warm_start)
            if (c.size() != d)
                throw Error(ErrorCode::DimensionMismatch, "warm start dimensionality");
    }

    const auto points = points_of(records);
    LloydResult best;
    if (warm_start) {
        best = lloyd(points, *warm_start, config);
    } else {
        for (std::size_t attempt = 0; attempt < config.restarts; ++attempt) {
            auto run = lloyd(points, medoid_init(points, config.k, rng), config);
            if (attempt == 0 || run.sse.total < best.sse.total) best = std::move(run);
        }
    }

    WindowClustering out;
    out.closed_by = window.closed_by;
    out.opened_at = window.opened_at;
    out.n_records = records.size();
    out.q = config.q;
    out.initial_centroids = std::move(best.initial);
    out.centroids = std::move(best.centroids);
    out.assignment = std::move(best.assignment);
    out.sse_per_cluster = std::move(best.sse.per_cluster);
    out.sse_per_dimension = std::move(best.sse.per_dimension);
    out.sse_total = best.sse.total;
    out.iterations = best.iterations;
    out.sse_history = std::move(best.history);
    return out;
}

std::size_t run_stream(RecordSource& source, const ClusterConfig& config,
                       const ClusteringSink& sink) {
    validate_config(config);
    Rng rng(derive_seed(config.seed, "resmeans"));
    std::optional<std::vector<Point>> warm;
    std::size_t emitted = 0;
    Window current;
    // Timeouts count from here; a short window merged forward restarts it.
    std::uint64_t clock_start = 0;

    auto emit = [&](ClosedBy why) {
        current.closed_by = why;
        auto clustering = cluster_window(current, config, warm, rng);
        clustering.window_seq = emitted++;
        warm = clustering.centroids;
        sink(clustering, current);
        current = Window{};
    };

    while (auto record = source.next()) {
        if (!current.records.empty() && record->timestamp >= clock_start &&
            record->timestamp - clock_start >= config.window_timeout) {
            if (current.records.size() >= config.k) emit(ClosedBy::timeout);
            else clock_start = record->timestamp;
        }
        if (current.records.empty()) current.opened_at = clock_start = record->timestamp;
        current.records.push_back(std::move(*record));
        if (current.records.size() >= config.window_size) emit(ClosedBy::full);
    }
    if (!current.records.empty() && (current.records.size() >= config.k || warm)) {
        emit(ClosedBy::end);
    }
    return emitted;
}

nlohmann::json clustering_to_json(const WindowClustering& c, const Window& window) {
    nlohmann::json j;
    j["window_seq"] = c.window_seq;
    j["closed_by"] = to_string(c.closed_by);
    j["opened_at"] = c.opened_at;
    j["n_records"] = c.n_records;
    j["q"] = c.q;
    j["iterations"] = c.iterations;
    j["centroids"] = c.centroids;
    j["sse_per_cluster"] = c.sse_per_cluster;
    j["sse_per_dimension"] = c.sse_per_dimension;
    j["sse_total"] = c.sse_total;
    j["assignment"] = c.assignment;
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : window.records) records.push_back(record_to_json(r));
    j["records"] = std::move(records);
    return j;
}

StoredWindow clustering_from_json(const nlohmann::json& j) {
    StoredWindow s;
    try {
        auto& c = s.clustering;
        c.window_seq = j.at("window_seq").get<std::uint64_t>();
        c.closed_by = closed_by_from_string(j.at("closed_by").get<std::string>());
        c.opened_at = j.value("opened_at", std::uint64_t{0});
        c.n_records = j.at("n_records").get<std::size_t>();
        c.q = j.value("q", 2.0);
        c.iterations = j.at("iterations").get<std::size_t>();
        c.centroids = j.at("centroids").get<std::vector<Point>>();
        c.sse_per_cluster = j.at("sse_per_cluster").get<std::vector<double>>();
        c.sse_per_dimension = j.at("sse_per_dimension").get<std::vector<std::vector<double>>>();
        c.sse_total = j.at("sse_total").get<double>();
        c.assignment = j.value("assignment", std::vector<std::size_t>{});
        for (const auto& r : j.value("records", nlohmann::json::array()))
            s.window.records.push_back(record_from_json(r));
        s.window.opened_at = c.opened_at;
        s.window.closed_by = c.closed_by;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaMismatch, e.what());
    }
    return s;
}

}  // namespace streamres
