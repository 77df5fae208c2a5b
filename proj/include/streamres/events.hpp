#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "streamres/resmeans.hpp"

namespace streamres {

// A record is an outlier when its distance to its centroid exceeds
// center + lambda * spread of its cluster's member distances. The robust
// form (default) uses median and 1.4826 * MAD; the plain form uses the mean
// and the population standard deviation.
struct OutlierRule {
    double lambda = 3.0;
    bool robust = true;
};

void validate_rule(const OutlierRule& rule);

struct ClusterSpread {
    std::size_t members = 0;
    double mean_distance = 0.0;
    double center = 0.0;
    double spread = 0.0;
    double threshold = 0.0;
};

struct Event {
    std::uint64_t window_seq = 0;
    std::size_t index = 0;  // record index inside the window
    std::size_t cluster_id = 0;
    double distance = 0.0;
    double score_contribution = 0.0;  // distance / mean member distance
};

struct MetricsReport {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;

    MetricsReport& operator+=(const MetricsReport& other);
};

// Per-cluster distance statistics for one clustered window.
std::vector<ClusterSpread> cluster_spreads(const WindowClustering& clustering,
                                           const Window& window, const OutlierRule& rule);

// Clusters with fewer than two members never flag. Events come out in
// record order. Throws MismatchedWindow.
std::vector<Event> detect_outliers(const WindowClustering& clustering, const Window& window,
                                   const OutlierRule& rule);

// Sum of the events' distances over the cluster's mean member distance;
// zero without events. Throws AlignmentMismatch when an event belongs to
// another cluster and DegenerateCluster when the mean distance is zero.
double event_score(std::size_t cluster_id, std::span<const Event> events,
                   double mean_distance);

// 2PR / (P + R), or 0 when P + R is 0.
double f_measure(double precision, double recall);

MetricsReport metrics_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn);

// Ground truth: a record is positive when it carries a label that is not a
// cluster label ("cluster-<n>"). Throws NoLabels when nothing is labelled.
bool is_positive_label(const std::optional<std::string>& label);
MetricsReport evaluate(std::span<const Event> events, const Window& window);

struct EventReport {
    std::uint64_t window_seq = 0;
    std::vector<Event> events;
    std::map<std::size_t, double> scores;  // every cluster id, zero when quiet
    std::optional<MetricsReport> metrics;  // absent for unlabelled windows
};

EventReport build_report(const WindowClustering& clustering, const Window& window,
                         const OutlierRule& rule);

// {window_seq, events:[{cluster_id,index,distance}], scores:{id: score},
//  metrics:{tp,fp,fn,precision,recall,f}}; metrics is null when absent.
nlohmann::json report_to_json(const EventReport& report);
EventReport report_from_json(const nlohmann::json& j);

}  // namespace streamres
