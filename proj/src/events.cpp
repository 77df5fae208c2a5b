#include "streamres/events.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "streamres/error.hpp"

namespace streamres {

void validate_rule(const OutlierRule& rule) {
    if (!(rule.lambda > 0.0) || !std::isfinite(rule.lambda)) {
        throw Error(ErrorCode::InvalidConfig, "lambda must be positive");
    }
}

MetricsReport& MetricsReport::operator+=(const MetricsReport& other) {
    *this = metrics_from_counts(tp + other.tp, fp + other.fp, fn + other.fn);
    return *this;
}

namespace {

double median(std::vector<double> v) {
    const auto n = v.size();
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    const double upper = *mid;
    if (n % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), mid);
    return 0.5 * (lower + upper);
}

void check_alignment(const WindowClustering& clustering, const Window& window) {
    if (clustering.assignment.size() != window.records.size() ||
        clustering.n_records != window.records.size()) {
        throw Error(ErrorCode::MismatchedWindow,
                    "clustering covers " + std::to_string(clustering.assignment.size()) +
                        " records, window has " + std::to_string(window.records.size()));
    }
    for (auto c : clustering.assignment) {
        if (c >= clustering.k()) {
            throw Error(ErrorCode::MismatchedWindow, "assignment names an unknown cluster");
        }
    }
}

std::vector<double> member_distances(const WindowClustering& clustering, const Window& window) {
    std::vector<double> d(window.records.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        d[i] = minkowski(window.records[i].features,
                         clustering.centroids[clustering.assignment[i]], clustering.q);
    }
    return d;
}

}  // namespace

std::vector<ClusterSpread> cluster_spreads(const WindowClustering& clustering,
                                           const Window& window, const OutlierRule& rule) {
    validate_rule(rule);
    check_alignment(clustering, window);
    const auto dist = member_distances(clustering, window);
    std::vector<std::vector<double>> by_cluster(clustering.k());
    for (std::size_t i = 0; i < dist.size(); ++i)
        by_cluster[clustering.assignment[i]].push_back(dist[i]);

    std::vector<ClusterSpread> out(clustering.k());
    for (std::size_t c = 0; c < out.size(); ++c) {
        const auto& d = by_cluster[c];
        auto& s = out[c];
        s.members = d.size();
        if (d.empty()) continue;
        double sum = 0.0;
        for (double v : d) sum += v;
        s.mean_distance = sum / static_cast<double>(d.size());
        if (rule.robust) {
            s.center = median(d);
            std::vector<double> dev(d.size());
            for (std::size_t i = 0; i < d.size(); ++i) dev[i] = std::abs(d[i] - s.center);
            s.spread = 1.4826 * median(std::move(dev));
        } else {
            s.center = s.mean_distance;
            double ss = 0.0;
            for (double v : d) ss += (v - s.center) * (v - s.center);
            s.spread = std::sqrt(ss / static_cast<double>(d.size()));
        }
        s.threshold = s.center + rule.lambda * s.spread;
    }
    return out;
}

std::vector<Event> detect_outliers(const WindowClustering& clustering, const Window& window,
                                   const OutlierRule& rule) {
    const auto spreads = cluster_spreads(clustering, window, rule);
    const auto dist = member_distances(clustering, window);
    std::vector<Event> events;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        const auto c = clustering.assignment[i];
        const auto& s = spreads[c];
        if (s.members < 2 || !(dist[i] > s.threshold)) continue;
        events.push_back({clustering.window_seq, i, c, dist[i], dist[i] / s.mean_distance});
    }
    return events;
}

double event_score(std::size_t cluster_id, std::span<const Event> events,
                   double mean_distance) {
    if (events.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& e : events) {
        if (e.cluster_id != cluster_id) {
            throw Error(ErrorCode::AlignmentMismatch,
                        "event belongs to cluster " + std::to_string(e.cluster_id));
        }
        sum += e.distance;
    }
    if (!(mean_distance > 0.0)) {
        throw Error(ErrorCode::DegenerateCluster, "cluster has zero mean distance");
    }
    return sum / mean_distance;
}

double f_measure(double precision, double recall) {
    const double denom = precision + recall;
    return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

MetricsReport metrics_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
    MetricsReport m;
    m.tp = tp;
    m.fp = fp;
    m.fn = fn;
    m.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f_measure = f_measure(m.precision, m.recall);
    return m;
}

bool is_positive_label(const std::optional<std::string>& label) {
    return label && label->rfind("cluster-", 0) != 0;
}

MetricsReport evaluate(std::span<const Event> events, const Window& window) {
    const bool labelled = std::any_of(window.records.begin(), window.records.end(),
                                      [](const Record& r) { return r.label.has_value(); });
    if (!labelled) throw Error(ErrorCode::NoLabels, "window carries no labels");
    std::vector<char> flagged(window.records.size(), 0);
    for (const auto& e : events) {
        if (e.index >= flagged.size()) {
            throw Error(ErrorCode::MismatchedWindow, "event index outside the window");
        }
        flagged[e.index] = 1;
    }
    std::uint64_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < flagged.size(); ++i) {
        const bool positive = is_positive_label(window.records[i].label);
        if (flagged[i] && positive) ++tp;
        else if (flagged[i]) ++fp;
        else if (positive) ++fn;
    }
    return metrics_from_counts(tp, fp, fn);
}

EventReport build_report(const WindowClustering& clustering, const Window& window,
                         const OutlierRule& rule) {
    EventReport report;
    report.window_seq = clustering.window_seq;
    const auto spreads = cluster_spreads(clustering, window, rule);
    report.events = detect_outliers(clustering, window, rule);
    for (std::size_t c = 0; c < clustering.k(); ++c) {
        std::vector<Event> mine;
        for (const auto& e : report.events)
            if (e.cluster_id == c) mine.push_back(e);
        report.scores[c] = event_score(c, mine, spreads[c].mean_distance);
    }
    const bool labelled = std::any_of(window.records.begin(), window.records.end(),
                                      [](const Record& r) { return r.label.has_value(); });
    if (labelled) report.metrics = evaluate(report.events, window);
    return report;
}

nlohmann::json report_to_json(const EventReport& report) {
    nlohmann::json j;
    j["window_seq"] = report.window_seq;
    nlohmann::json events = nlohmann::json::array();
    for (const auto& e : report.events) {
        events.push_back({{"cluster_id", e.cluster_id},
                          {"index", e.index},
                          {"distance", e.distance}});
    }
    j["events"] = std::move(events);
    nlohmann::json scores = nlohmann::json::object();
    for (const auto& [c, s] : report.scores) scores[std::to_string(c)] = s;
    j["scores"] = std::move(scores);
    if (report.metrics) {
        const auto& m = *report.metrics;
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

EventReport report_from_json(const nlohmann::json& j) {
    EventReport r;
    try {
        r.window_seq = j.at("window_seq").get<std::uint64_t>();
        for (const auto& e : j.at("events")) {
            Event ev;
            ev.window_seq = r.window_seq;
            ev.cluster_id = e.at("cluster_id").get<std::size_t>();
            ev.index = e.at("index").get<std::size_t>();
            ev.distance = e.at("distance").get<double>();
            r.events.push_back(ev);
        }
        for (const auto& [key, value] : j.at("scores").items())
            r.scores[std::stoul(key)] = value.get<double>();
        if (auto it = j.find("metrics"); it != j.end() && !it->is_null()) {
            r.metrics = metrics_from_counts(it->at("tp").get<std::uint64_t>(),
                                            it->at("fp").get<std::uint64_t>(),
                                            it->at("fn").get<std::uint64_t>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaMismatch, e.what());
    } catch (const std::logic_error& e) {
        throw Error(ErrorCode::SchemaMismatch, e.what());
    }
    return r;
}

}  // namespace streamres
