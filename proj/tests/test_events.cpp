#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>

#include "streamres/error.hpp"
#include "streamres/events.hpp"
#include "support.hpp"

using namespace streamres;
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

// One cluster centred at the origin of a line, members at the given offsets.
std::pair<WindowClustering, Window> line_cluster(const std::vector<double>& offsets) {
    std::vector<Point> pts;
    for (double d : offsets) pts.push_back({d});
    auto w = window_of(pts);
    WindowClustering c;
    c.n_records = pts.size();
    c.centroids = {{0.0}};
    c.assignment.assign(pts.size(), 0);
    return {c, w};
}

std::set<std::size_t> flagged(const WindowClustering& c, const Window& w, OutlierRule rule) {
    std::set<std::size_t> out;
    for (const auto& e : detect_outliers(c, w, rule)) out.insert(e.index);
    return out;
}

Event event_at(std::size_t cluster, double distance) {
    Event e;
    e.cluster_id = cluster;
    e.distance = distance;
    return e;
}

}  // namespace

TEST(Outliers, ZeroSpreadFlagsNothing) {
    auto [c, w] = line_cluster({0, 0, 0, 0});
    EXPECT_TRUE(detect_outliers(c, w, {}).empty());
    EXPECT_TRUE(detect_outliers(c, w, {3.0, false}).empty());
}

TEST(Outliers, HeavyTailUnderBothRules) {
    auto [c, w] = line_cluster({1, 1, 1, 1, 100});

    // Plain: mean 20.8, population sd sqrt(1568.16) = 39.6, threshold 139.6.
    const auto plain = cluster_spreads(c, w, {3.0, false})[0];
    EXPECT_NEAR(plain.center, 20.8, 1e-9);
    EXPECT_NEAR(plain.spread, 39.6, 1e-9);
    EXPECT_NEAR(plain.threshold, 139.6, 1e-9);
    EXPECT_TRUE(flagged(c, w, {3.0, false}).empty());

    // Robust: median 1, MAD 0, threshold 1.
    const auto robust = cluster_spreads(c, w, {})[0];
    EXPECT_EQ(robust.center, 1.0);
    EXPECT_EQ(robust.spread, 0.0);
    EXPECT_EQ(flagged(c, w, {}), (std::set<std::size_t>{4}));
}

TEST(Outliers, SingletonClustersNeverFlag) {
    auto [c, w] = line_cluster({5});
    EXPECT_TRUE(detect_outliers(c, w, {0.01, false}).empty());
}

TEST(Outliers, MismatchedWindowIsRejected) {
    auto [c, w] = line_cluster({1, 2, 3});
    w.records.pop_back();
    EXPECT_EQ(code_of([&] { detect_outliers(c, w, {}); }), ErrorCode::MismatchedWindow);
    EXPECT_EQ(code_of([&] { validate_rule({0.0, true}); }), ErrorCode::InvalidConfig);
}

TEST(Outliers, InjectedAnomaliesAreAllFlagged) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        SyntheticSpec spec;
        spec.seed = seed;
        spec.anomaly_rate = 0.05;
        Window w;
        w.records = generate_synthetic(spec, 300);
        ClusterConfig cfg;
        cfg.window_size = 300;
        Rng rng(seed);
        const auto c = cluster_window(w, cfg, std::nullopt, rng);
        for (double lambda : {1.0, 3.0, 5.0}) {
            const auto f = flagged(c, w, {lambda, true});
            for (std::size_t i = 0; i < w.records.size(); ++i) {
                if (is_positive_label(w.records[i].label))
                    EXPECT_TRUE(f.count(i)) << "seed " << seed << " lambda " << lambda;
            }
        }
    }
}

TEST(Outliers, LargerLambdaFlagsASubset) {
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> lam(0.05, 6.0);
    for (int t = 0; t < 200; ++t) {
        const auto w = testing_support::random_window(gen, 10, 120, 3);
        ClusterConfig cfg;
        cfg.k = 1 + t % 4;
        cfg.window_size = 120;
        Rng rng(t);
        const auto c = cluster_window(w, cfg, std::nullopt, rng);
        double lo = lam(gen), hi = lam(gen);
        if (lo > hi) std::swap(lo, hi);
        for (bool robust : {true, false}) {
            const auto loose = flagged(c, w, {lo, robust});
            const auto tight = flagged(c, w, {hi, robust});
            EXPECT_TRUE(std::includes(loose.begin(), loose.end(), tight.begin(), tight.end()));
        }
    }
}

TEST(EventScore, Examples) {
    EXPECT_EQ(event_score(0, {}, 1.0), 0.0);
    const std::vector<Event> one{event_at(2, 6.0)};
    EXPECT_DOUBLE_EQ(event_score(2, one, 3.0), 2.0);
    const std::vector<Event> three{event_at(0, 4), event_at(0, 5), event_at(0, 6)};
    EXPECT_DOUBLE_EQ(event_score(0, three, 1.0), 15.0);
    EXPECT_EQ(code_of([&] { event_score(1, three, 1.0); }), ErrorCode::AlignmentMismatch);
    EXPECT_EQ(code_of([&] { event_score(0, three, 0.0); }), ErrorCode::DegenerateCluster);
}

TEST(EventScore, AdditiveOverDisjointLists) {
    std::mt19937_64 gen(22);
    std::uniform_real_distribution<double> d(0.1, 50.0);
    for (int t = 0; t < 500; ++t) {
        std::vector<Event> a, b;
        for (int i = 0; i < t % 7; ++i) a.push_back(event_at(1, d(gen)));
        for (int i = 0; i < t % 5; ++i) b.push_back(event_at(1, d(gen)));
        auto both = a;
        both.insert(both.end(), b.begin(), b.end());
        const double mu = d(gen);
        EXPECT_NEAR(event_score(1, both, mu), event_score(1, a, mu) + event_score(1, b, mu),
                    1e-9 * (1.0 + event_score(1, both, mu)));
    }
}

TEST(Metrics, Examples) {
    const auto perfect = metrics_from_counts(1, 0, 0);
    EXPECT_EQ(perfect.precision, 1.0);
    EXPECT_EQ(perfect.recall, 1.0);
    EXPECT_EQ(perfect.f_measure, 1.0);

    EXPECT_NEAR(f_measure(51.2, 44.8), 47.787, 0.001);
    EXPECT_NEAR(f_measure(51.2, 44.8), 47.7, 0.1);
    EXPECT_NEAR(f_measure(0.512, 0.448), 0.47787, 1e-5);

    const auto empty = metrics_from_counts(0, 0, 0);
    EXPECT_EQ(empty.precision, 0.0);
    EXPECT_EQ(empty.recall, 0.0);
    EXPECT_EQ(empty.f_measure, 0.0);
}

TEST(Metrics, BoundsAndIndependentF) {
    std::mt19937_64 gen(23);
    std::uniform_int_distribution<std::uint64_t> n(0, 40);
    for (int t = 0; t < 2000; ++t) {
        const auto tp = n(gen), fp = n(gen), fn = n(gen);
        const auto m = metrics_from_counts(tp, fp, fn);
        for (double v : {m.precision, m.recall, m.f_measure}) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
        const double p = tp + fp ? double(tp) / double(tp + fp) : 0.0;
        const double r = tp + fn ? double(tp) / double(tp + fn) : 0.0;
        const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
        EXPECT_NEAR(m.f_measure, f, 1e-9);
    }
}

TEST(Metrics, LabelsDecidePositives) {
    EXPECT_FALSE(is_positive_label(std::nullopt));
    EXPECT_FALSE(is_positive_label(std::string("cluster-2")));
    EXPECT_TRUE(is_positive_label(std::string("anomaly")));
    EXPECT_TRUE(is_positive_label(std::string("spike")));

    auto [c, w] = line_cluster({1, 2, 3});
    EXPECT_EQ(code_of([&] { evaluate({}, w); }), ErrorCode::NoLabels);
}

TEST(Metrics, RecordOrderDoesNotMatter) {
    SyntheticSpec spec;
    spec.seed = 24;
    spec.anomaly_rate = 0.08;
    Window w;
    w.records = generate_synthetic(spec, 250);
    ClusterConfig cfg;
    cfg.window_size = 250;
    Rng rng(1);
    const auto c = cluster_window(w, cfg, std::nullopt, rng);
    const auto base = evaluate(detect_outliers(c, w, {}), w);

    std::mt19937_64 gen(25);
    for (int t = 0; t < 20; ++t) {
        std::vector<std::size_t> perm(w.records.size());
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), gen);
        Window w2;
        auto c2 = c;
        for (std::size_t i = 0; i < perm.size(); ++i) {
            w2.records.push_back(w.records[perm[i]]);
            c2.assignment[i] = c.assignment[perm[i]];
        }
        const auto m = evaluate(detect_outliers(c2, w2, {}), w2);
        EXPECT_EQ(m.tp, base.tp);
        EXPECT_EQ(m.fp, base.fp);
        EXPECT_EQ(m.fn, base.fn);
    }
}

TEST(Report, ScoresEveryClusterAndRoundTrips) {
    SyntheticSpec spec;
    spec.seed = 26;
    spec.anomaly_rate = 0.05;
    Window w;
    w.records = generate_synthetic(spec, 300);
    ClusterConfig cfg;
    cfg.window_size = 300;
    Rng rng(2);
    auto c = cluster_window(w, cfg, std::nullopt, rng);
    c.window_seq = 3;
    const auto report = build_report(c, w, {});
    EXPECT_EQ(report.window_seq, 3u);
    EXPECT_EQ(report.scores.size(), 3u);
    ASSERT_TRUE(report.metrics.has_value());
    EXPECT_GE(report.metrics->recall, 0.9);

    const auto back = report_from_json(report_to_json(report));
    EXPECT_EQ(report_to_json(back), report_to_json(report));
    EXPECT_EQ(back.events.size(), report.events.size());

    Window unlabelled = w;
    for (auto& r : unlabelled.records) r.label.reset();
    const auto quiet = build_report(c, unlabelled, {});
    EXPECT_FALSE(quiet.metrics.has_value());
    EXPECT_TRUE(report_to_json(quiet).at("metrics").is_null());
}
