#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "streamres/ingest.hpp"
#include "streamres/record.hpp"
#include "streamres/rng.hpp"

namespace streamres {

enum class ClosedBy { full, timeout, end };

std::string to_string(ClosedBy c);
ClosedBy closed_by_from_string(const std::string& s);

struct Window {
    std::vector<Record> records;
    std::uint64_t opened_at = 0;
    ClosedBy closed_by = ClosedBy::full;
};

struct ClusterConfig {
    std::size_t k = 3;
    double q = 2.0;                   // Minkowski order used for assignment
    std::size_t window_size = 300;    // x
    std::uint64_t window_timeout = std::numeric_limits<std::uint64_t>::max();  // t
    std::size_t max_iterations = 100;
    double epsilon = 1e-6;            // max centroid shift at convergence
    std::uint64_t seed = 0;
    // Independent medoid draws tried on a cold start; the lowest sse_total wins.
    std::size_t restarts = 10;
};

void validate_config(const ClusterConfig& config);

struct WindowClustering {
    std::uint64_t window_seq = 0;
    ClosedBy closed_by = ClosedBy::full;
    std::uint64_t opened_at = 0;
    std::size_t n_records = 0;
    double q = 2.0;
    std::vector<Point> initial_centroids;
    std::vector<Point> centroids;
    std::vector<std::size_t> assignment;
    std::vector<double> sse_per_cluster;
    std::vector<std::vector<double>> sse_per_dimension;  // k x d
    double sse_total = 0.0;
    std::size_t iterations = 0;
    // sse_total after each Lloyd update, in iteration order.
    std::vector<double> sse_history;

    std::size_t k() const { return centroids.size(); }
};

// (sum_i |a_i - b_i|^q)^(1/q). Throws DimensionMismatch, QOutOfRange.
double minkowski(std::span<const double> a, std::span<const double> b, double q);

// Nearest centroid per point; ties go to the lowest cluster id. q == 2 uses
// squared Euclidean distance, which orders identically.
std::vector<std::size_t> assign(std::span<const Point> points,
                                std::span<const Point> centroids, double q = 2.0);

// Coordinate-wise mean per cluster. A cluster left empty is re-seeded at the
// point farthest from its currently assigned centroid (each point re-seeds at
// most one cluster); if no point is left at positive distance the previous
// centroid is kept.
std::vector<Point> update_centroids(std::span<const Point> points,
                                    std::span<const std::size_t> assignment,
                                    std::span<const Point> centroids, double q = 2.0);

// Sum of squared Euclidean distances to the centroid.
double sse_cluster(std::span<const Point> members, std::span<const double> centroid);

// Sum of squared deviations along dimension t. Throws DimensionOutOfRange.
double sse_dimension(std::span<const Point> members, std::span<const double> centroid,
                     std::size_t t);

double sse_total(const WindowClustering& clustering);

// Cold start (no warm_start): k distinct records picked uniformly without
// replacement as initial centroids. Warm start: the given centroids, which
// must number k. Lloyd iterations stop once the largest centroid shift drops
// below epsilon or after max_iterations; the reported assignment and SSEs
// use the final centroids.
// Throws WindowTooSmall, NonFiniteFeature, DimensionMismatch, InvalidConfig.
WindowClustering cluster_window(const Window& window, const ClusterConfig& config,
                                const std::optional<std::vector<Point>>& warm_start,
                                Rng& rng);

using ClusteringSink = std::function<void(const WindowClustering&, const Window&)>;

// Cuts the source into windows of `window_size` records, or fewer when a
// record arrives `window_timeout` or more after the window opened. Windows
// closed by timeout with fewer than k records are merged into the next one.
// A trailing partial window is clustered when it has k records or a warm
// start exists, otherwise it is dropped. Window 0 starts cold, every later
// window starts from its predecessor's final centroids. Returns the number
// of windows emitted.
std::size_t run_stream(RecordSource& source, const ClusterConfig& config,
                       const ClusteringSink& sink);

// One windows.jsonl line. The window's records and assignment are included
// so later stages can work from the file alone.
nlohmann::json clustering_to_json(const WindowClustering& clustering, const Window& window);

struct StoredWindow {
    WindowClustering clustering;
    Window window;
};

StoredWindow clustering_from_json(const nlohmann::json& j);

std::vector<Point> points_of(const std::vector<Record>& records);

}  // namespace streamres
