#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "streamres/error.hpp"
#include "streamres/resmeans.hpp"
#include "support.hpp"

using namespace streamres;
using testing_support::random_window;
using testing_support::rel_diff;
using testing_support::window_of;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no Error thrown";
    return ErrorCode::InvalidConfig;
}

// Straight double sum over records of squared distance to the assigned
// centroid, independent of the library's accumulation order.
double direct_sse(const WindowClustering& c, const Window& w) {
    double total = 0.0;
    for (std::size_t i = 0; i < w.records.size(); ++i) {
        const auto& x = w.records[i].features;
        const auto& m = c.centroids[c.assignment[i]];
        for (std::size_t t = 0; t < x.size(); ++t) total += (x[t] - m[t]) * (x[t] - m[t]);
    }
    return total;
}

std::vector<Point> members_of(const WindowClustering& c, const Window& w, std::size_t id) {
    std::vector<Point> out;
    for (std::size_t i = 0; i < w.records.size(); ++i)
        if (c.assignment[i] == id) out.push_back(w.records[i].features);
    return out;
}

ClusterConfig config_for(std::size_t k, std::size_t window) {
    ClusterConfig c;
    c.k = k;
    c.window_size = window;
    return c;
}

}  // namespace

TEST(Minkowski, Examples) {
    const Point a{0, 0}, b{3, 4};
    EXPECT_DOUBLE_EQ(minkowski(a, b, 2), 5.0);
    EXPECT_DOUBLE_EQ(minkowski(b, b, 2), 0.0);
    EXPECT_DOUBLE_EQ(minkowski(a, b, 1), 7.0);
    EXPECT_EQ(code_of([&] { minkowski(a, Point{1}, 2); }), ErrorCode::DimensionMismatch);
    EXPECT_EQ(code_of([&] { minkowski(a, b, 0.5); }), ErrorCode::QOutOfRange);
}

TEST(Assign, Examples) {
    const std::vector<Point> pts{{2, 0}, {5, 0}, {-3, 1}};
    EXPECT_EQ(assign(pts, std::vector<Point>{{7, 7}}), (std::vector<std::size_t>{0, 0, 0}));
    const std::vector<Point> two{{0, 0}, {10, 0}};
    EXPECT_EQ(assign(pts, two), (std::vector<std::size_t>{0, 0, 0}));
    EXPECT_EQ(assign(std::vector<Point>{{2, 0}}, two)[0], 0u);
    EXPECT_EQ(assign(std::vector<Point>{{5, 3}}, two)[0], 0u) << "tie goes to cluster 0";
    EXPECT_EQ(assign(std::vector<Point>{{9, 0}}, two, 1.0)[0], 1u);
}

TEST(UpdateCentroids, MeansSingletonsAndEmptyRepair) {
    const std::vector<Point> pts{{0, 0}, {2, 0}, {5, 5}};
    auto c = update_centroids(pts, std::vector<std::size_t>{0, 0, 1},
                              std::vector<Point>{{0, 0}, {4, 4}});
    EXPECT_EQ(c[0], (Point{1, 0}));
    EXPECT_EQ(c[1], (Point{5, 5}));

    // Cluster 1 gets no member; the record farthest from its centroid is (9,9).
    const std::vector<Point> window{{0, 0}, {1, 0}, {0, 1}, {9, 9}};
    c = update_centroids(window, std::vector<std::size_t>{0, 0, 0, 0},
                         std::vector<Point>{{0, 0}, {100, 100}});
    EXPECT_EQ(c[1], (Point{9, 9}));
}

TEST(Sse, Examples) {
    const std::vector<Point> same{{1, 1}, {1, 1}};
    EXPECT_EQ(sse_cluster(same, Point{1, 1}), 0.0);
    const std::vector<Point> pair{{0, 0}, {2, 0}};
    EXPECT_DOUBLE_EQ(sse_cluster(pair, Point{1, 0}), 2.0);
    EXPECT_DOUBLE_EQ(sse_cluster(std::vector<Point>{{3, 0}}, Point{0, 0}), 9.0);

    const std::vector<Point> row{{0, 5}, {2, 5}};
    EXPECT_EQ(sse_dimension(row, Point{1, 5}, 1), 0.0);
    EXPECT_DOUBLE_EQ(sse_dimension(row, Point{1, 5}, 0), 2.0);
    EXPECT_EQ(code_of([&] { sse_dimension(row, Point{1, 5}, 2); }),
              ErrorCode::DimensionOutOfRange);
}

TEST(ClusterWindow, SaturatedWindowHasZeroSse) {
    const auto w = window_of({{0, 0}, {5, 1}, {-3, 7}});
    Rng rng(1);
    const auto c = cluster_window(w, config_for(3, 3), std::nullopt, rng);
    EXPECT_EQ(c.sse_total, 0.0);
    std::vector<bool> used(3, false);
    for (auto a : c.assignment) used[a] = true;
    EXPECT_EQ(used, std::vector<bool>(3, true));
}

TEST(ClusterWindow, SingleClusterEqualsItsSse) {
    Rng rng(2);
    std::mt19937_64 gen(3);
    const auto w = random_window(gen, 20, 50, 3);
    const auto c = cluster_window(w, config_for(1, 50), std::nullopt, rng);
    EXPECT_EQ(c.sse_total, c.sse_per_cluster[0]);
    EXPECT_LT(rel_diff(sse_total(c), direct_sse(c, w)), 1e-9);
}

TEST(ClusterWindow, RecoversSeparatedBlobs) {
    SyntheticSpec spec;
    spec.stddev = 0.1;
    spec.seed = 404;
    Window w;
    w.records = generate_synthetic(spec, 300);
    Rng rng(5);
    const auto c = cluster_window(w, config_for(3, 300), std::nullopt, rng);
    std::vector<bool> used(3, false);
    for (const auto& mean : spec.means) {
        bool found = false;
        for (std::size_t j = 0; j < 3 && !found; ++j) {
            if (!used[j] && minkowski(mean, c.centroids[j], 2) < 0.15) used[j] = found = true;
        }
        EXPECT_TRUE(found) << mean[0] << "," << mean[1];
    }
}

TEST(ClusterWindow, WarmStartAtFixedPointIsStable) {
    std::mt19937_64 gen(6);
    const auto w = random_window(gen, 100, 200, 3);
    Rng rng(7);
    const auto cfg = config_for(4, 200);
    const auto first = cluster_window(w, cfg, std::nullopt, rng);
    const auto again = cluster_window(w, cfg, first.centroids, rng);
    EXPECT_EQ(again.iterations, 1u);
    EXPECT_EQ(again.initial_centroids, first.centroids);
    EXPECT_EQ(again.centroids, first.centroids);
    EXPECT_EQ(again.assignment, first.assignment);
    EXPECT_EQ(again.sse_total, first.sse_total);
}

TEST(ClusterWindow, ColdStartUsesDistinctRecords) {
    std::mt19937_64 gen(8);
    for (int t = 0; t < 50; ++t) {
        const auto w = random_window(gen, 5, 40, 2);
        Rng rng(t);
        const auto c = cluster_window(w, config_for(5, 40), std::nullopt, rng);
        for (std::size_t a = 0; a < 5; ++a) {
            bool is_record = false;
            for (const auto& r : w.records) is_record |= r.features == c.initial_centroids[a];
            EXPECT_TRUE(is_record);
            for (std::size_t b = 0; b < a; ++b)
                EXPECT_NE(c.initial_centroids[a], c.initial_centroids[b]);
        }
    }
}

TEST(ClusterWindow, Errors) {
    Rng rng(9);
    const auto small = window_of({{0, 0}, {1, 1}});
    EXPECT_EQ(code_of([&] { cluster_window(small, config_for(3, 10), std::nullopt, rng); }),
              ErrorCode::WindowTooSmall);
    auto bad = window_of({{0, 0}, {1, NAN}, {2, 2}});
    EXPECT_EQ(code_of([&] { cluster_window(bad, config_for(2, 10), std::nullopt, rng); }),
              ErrorCode::NonFiniteFeature);
    EXPECT_EQ(code_of([] { validate_config(config_for(11, 10)); }), ErrorCode::InvalidConfig);
}

TEST(ClusterWindow, SseIdentitiesOnRandomWindows) {
    std::mt19937_64 gen(10);
    std::uniform_int_distribution<std::size_t> kd(1, 6);
    for (int t = 0; t < 300; ++t) {
        const auto w = random_window(gen, 6, 150, 5);
        Rng rng(t);
        const auto c = cluster_window(w, config_for(kd(gen), 150), std::nullopt, rng);
        double sum = 0.0;
        for (std::size_t j = 0; j < c.k(); ++j) {
            sum += c.sse_per_cluster[j];
            double dims = 0.0;
            for (double v : c.sse_per_dimension[j]) dims += v;
            ASSERT_LT(rel_diff(dims, c.sse_per_cluster[j]), 1e-9);
            ASSERT_LT(rel_diff(sse_cluster(members_of(c, w, j), c.centroids[j]),
                               c.sse_per_cluster[j]),
                      1e-9);
        }
        ASSERT_LT(rel_diff(sum, c.sse_total), 1e-9);
        ASSERT_LT(rel_diff(direct_sse(c, w), c.sse_total), 1e-9);
    }
}

TEST(ClusterWindow, ObjectiveNeverIncreasesAndIterationsAreBounded) {
    std::mt19937_64 gen(11);
    std::uniform_int_distribution<std::size_t> kd(1, 8), iters(1, 30);
    for (int t = 0; t < 300; ++t) {
        const auto w = random_window(gen, 8, 300, 4);
        auto cfg = config_for(kd(gen), 300);
        cfg.max_iterations = iters(gen);
        cfg.restarts = 1;
        Rng rng(t);
        const auto c = cluster_window(w, cfg, std::nullopt, rng);
        ASSERT_LE(c.iterations, cfg.max_iterations);
        ASSERT_EQ(c.sse_history.size(), c.iterations);
        for (std::size_t i = 1; i < c.sse_history.size(); ++i)
            ASSERT_LE(c.sse_history[i], c.sse_history[i - 1]) << "window " << t << " step " << i;
        ASSERT_LE(c.sse_total, c.sse_history.back());
    }
}

TEST(ClusterWindow, SeedDeterminism) {
    std::mt19937_64 gen(12);
    const auto w = random_window(gen, 100, 100, 3);
    Rng a(5), b(5);
    const auto x = cluster_window(w, config_for(4, 100), std::nullopt, a);
    const auto y = cluster_window(w, config_for(4, 100), std::nullopt, b);
    EXPECT_EQ(x.centroids, y.centroids);
    EXPECT_EQ(x.assignment, y.assignment);
}

TEST(RunStream, SizeCutting) {
    SyntheticSpec spec;
    spec.seed = 13;
    VectorSource source(generate_synthetic(spec, 900));
    std::vector<std::uint64_t> seqs;
    std::vector<ClosedBy> closed;
    const auto n = run_stream(source, config_for(3, 300), [&](auto& c, auto&) {
        seqs.push_back(c.window_seq);
        closed.push_back(c.closed_by);
    });
    EXPECT_EQ(n, 3u);
    EXPECT_EQ(seqs, (std::vector<std::uint64_t>{0, 1, 2}));
    EXPECT_EQ(closed, std::vector<ClosedBy>(3, ClosedBy::full));
}

TEST(RunStream, EmptyStream) {
    VectorSource source({});
    int calls = 0;
    EXPECT_EQ(run_stream(source, config_for(3, 10), [&](auto&, auto&) { ++calls; }), 0u);
    EXPECT_EQ(calls, 0);
}

TEST(RunStream, WarmStartHandsOffFinalCentroids) {
    SyntheticSpec spec;
    spec.seed = 14;
    VectorSource source(generate_synthetic(spec, 1500));
    std::vector<WindowClustering> out;
    run_stream(source, config_for(3, 100), [&](auto& c, auto&) { out.push_back(c); });
    ASSERT_EQ(out.size(), 15u);
    for (std::size_t s = 1; s < out.size(); ++s)
        EXPECT_EQ(out[s].initial_centroids, out[s - 1].centroids);
}

TEST(RunStream, StationaryDriftSettles) {
    SyntheticSpec spec;
    spec.seed = 15;
    spec.stddev = 1.0;
    VectorSource source(generate_synthetic(spec, 1100));
    std::vector<WindowClustering> out;
    run_stream(source, config_for(3, 100), [&](auto& c, auto&) { out.push_back(c); });
    ASSERT_GE(out.size(), 11u);
    auto shift = [&](std::size_t s) {
        double m = 0.0;
        for (std::size_t j = 0; j < 3; ++j)
            m += minkowski(out[s].centroids[j], out[s - 1].centroids[j], 2);
        return m / 3.0;
    };
    double early = 0.0, late = 0.0;
    for (std::size_t s = 1; s <= 5; ++s) early += shift(s);
    for (std::size_t s = 6; s <= 10; ++s) late += shift(s);
    EXPECT_LT(late / 5.0, early / 5.0);
}

TEST(RunStream, TimeoutsCutAndShortWindowsMerge) {
    std::vector<Record> recs;
    // Records 0..4 close together, then a gap, then two, then a gap, then six.
    for (std::uint64_t ts : {0, 1, 2, 3, 4, 100, 101, 200, 201, 202, 203, 204, 205}) {
        recs.push_back(testing_support::point_record({double(ts % 7), double(ts % 3)}, ts));
    }
    VectorSource source(recs);
    auto cfg = config_for(3, 50);
    cfg.window_timeout = 50;
    std::vector<std::pair<std::size_t, ClosedBy>> seen;
    run_stream(source, cfg, [&](auto& c, auto&) { seen.emplace_back(c.n_records, c.closed_by); });
    // The two-record window at 100 is below k when 200 arrives, so it merges.
    ASSERT_EQ(seen.size(), 2u);
    EXPECT_EQ(seen[0], std::make_pair(std::size_t{5}, ClosedBy::timeout));
    EXPECT_EQ(seen[1], std::make_pair(std::size_t{8}, ClosedBy::end));
}

TEST(RunStream, ShortTrailingWindowWithoutWarmStartIsDropped) {
    VectorSource source({testing_support::point_record({0, 0}, 0),
                         testing_support::point_record({1, 1}, 1)});
    EXPECT_EQ(run_stream(source, config_for(3, 10), [](auto&, auto&) {}), 0u);
}

TEST(Persistence, JsonRoundTrip) {
    SyntheticSpec spec;
    spec.seed = 16;
    spec.anomaly_rate = 0.1;
    Window w;
    w.records = generate_synthetic(spec, 120);
    w.closed_by = ClosedBy::timeout;
    w.opened_at = 7;
    Rng rng(1);
    auto c = cluster_window(w, config_for(3, 120), std::nullopt, rng);
    c.window_seq = 4;
    const auto j = clustering_to_json(c, w);
    for (const auto* key : {"window_seq", "closed_by", "n_records", "iterations", "centroids",
                            "sse_per_cluster", "sse_per_dimension", "sse_total"})
        EXPECT_TRUE(j.contains(key)) << key;
    const auto back = clustering_from_json(j);
    EXPECT_EQ(back.window.records, w.records);
    EXPECT_EQ(back.clustering.window_seq, 4u);
    EXPECT_EQ(back.clustering.closed_by, ClosedBy::timeout);
    EXPECT_EQ(back.clustering.centroids, c.centroids);
    EXPECT_EQ(back.clustering.assignment, c.assignment);
    EXPECT_EQ(back.clustering.sse_total, c.sse_total);
    EXPECT_EQ(clustering_to_json(back.clustering, back.window), j);
}
