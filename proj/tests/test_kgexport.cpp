#include <gtest/gtest.h>

#include <functional>
#include <map>
#include <sstream>

#include "kg_fixture.hpp"
#include "streamres/error.hpp"
#include "streamres/kgexport.hpp"
#include "support.hpp"

using namespace streamres;
using namespace streamres::kg;
using testing_support::read_file;

namespace {

const std::string kHeader =
    "@prefix sr: <http://streamres.local/ns#> .\n"
    "@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n";

// Statements are the non-directive, non-blank lines.
std::size_t count_statements(const std::string& turtle) {
    std::istringstream in(turtle);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) {
        if (line.empty() || line.rfind("@prefix", 0) == 0) continue;
        EXPECT_EQ(line.substr(line.size() - 2), " .") << line;
        ++n;
    }
    return n;
}

// Random windows with random events drawn against real member indices.
std::pair<std::vector<WindowClustering>, std::vector<EventReport>> random_graph(
    std::mt19937_64& gen) {
    std::uniform_int_distribution<std::size_t> windows(0, 4), k(1, 5), events(0, 6), dim(1, 3);
    std::uniform_real_distribution<double> val(-100.0, 100.0), pos(0.0, 50.0);
    std::vector<WindowClustering> cs;
    std::vector<EventReport> rs;
    const auto n_windows = windows(gen);
    for (std::size_t w = 0; w < n_windows; ++w) {
        WindowClustering c;
        c.window_seq = w;
        const auto kk = k(gen), d = dim(gen);
        for (std::size_t j = 0; j < kk; ++j) {
            Point p(d);
            for (auto& x : p) x = val(gen);
            c.centroids.push_back(p);
            c.sse_per_cluster.push_back(pos(gen));
        }
        EventReport r;
        r.window_seq = w;
        for (std::size_t j = 0; j < kk; ++j) r.scores[j] = pos(gen);
        const auto n_events = events(gen);
        for (std::size_t e = 0; e < n_events; ++e) {
            Event ev;
            ev.window_seq = w;
            ev.index = e * 3 + w;
            ev.cluster_id = std::uniform_int_distribution<std::size_t>(0, kk - 1)(gen);
            ev.distance = pos(gen);
            r.events.push_back(ev);
        }
        cs.push_back(c);
        rs.push_back(r);
    }
    return {cs, rs};
}

}  // namespace

TEST(Graph, EmptyInputs) { EXPECT_TRUE(build_graph({}, {}).empty()); }

TEST(Graph, SchemaCounts) {
    const auto cs = testing_support::golden_clusterings();
    auto rs = testing_support::golden_reports();
    EXPECT_EQ(build_graph(cs, rs).size(), 8u);
    Event e;
    e.index = 2;
    e.cluster_id = 1;
    e.distance = 4.5;
    rs[0].events.push_back(e);
    const auto g = build_graph(cs, rs);
    EXPECT_EQ(g.size(), 11u);
    EXPECT_NE(std::find(g.begin(), g.end(), Triple{"evt:0:2", "belongsTo", Term::iri("clu:0:1")}),
              g.end());
    EXPECT_NE(std::find(g.begin(), g.end(), Triple{"evt:0:2", "detectedIn", Term::iri("win:0")}),
              g.end());
}

TEST(Graph, MisalignedReportsAreRejected) {
    const auto cs = testing_support::golden_clusterings();
    auto rs = testing_support::golden_reports();
    rs[0].window_seq = 1;
    EXPECT_THROW(build_graph(cs, rs), Error);
    EXPECT_THROW(build_graph(cs, {}), Error);
}

TEST(Turtle, EmptyGraphIsPrefixBlockOnly) { EXPECT_EQ(serialize_turtle({}), kHeader); }

TEST(Turtle, SingleTriple) {
    const auto text = serialize_turtle({{"win:3", "hasCluster", Term::iri("clu:3:0")}});
    EXPECT_EQ(text, kHeader + "\nsr:win:3 sr:hasCluster sr:clu:3:0 .\n");
}

TEST(Turtle, GoldenFixture) {
    const auto g = build_graph(testing_support::golden_clusterings(),
                               testing_support::golden_reports());
    EXPECT_EQ(serialize_turtle(g), read_file(STREAMRES_FIXTURES "/kg_8.ttl"));
}

TEST(Turtle, LiteralsAndNames) {
    EXPECT_EQ(Term::decimal(1e-7).value, "0.0000001");
    EXPECT_EQ(Term::decimal(2.0).value, "2");
    EXPECT_EQ(Term::integer(-4).value, "-4");
    EXPECT_TRUE(is_valid_local_name("clu:0:1"));
    EXPECT_FALSE(is_valid_local_name(""));
    EXPECT_FALSE(is_valid_local_name("a b"));
    EXPECT_FALSE(is_valid_local_name("end."));
    EXPECT_THROW(serialize_turtle({{"bad name", "p", Term::iri("x")}}), Error);
    const auto quoted =
        serialize_turtle({{"x", "says", Term::literal("a \"b\"\n", LiteralType::string)}});
    EXPECT_NE(quoted.find("\"a \\\"b\\\"\\n\""), std::string::npos);
}

TEST(Dot, EmptyGraph) {
    EXPECT_EQ(serialize_dot({}),
              "digraph kg {\n"
              "  rankdir=LR;\n"
              "  node [shape=ellipse, fontname=\"Helvetica\"];\n"
              "  edge [fontname=\"Helvetica\"];\n"
              "}\n");
}

TEST(Dot, OneTriple) {
    const auto text = serialize_dot({{"win:0", "hasCluster", Term::iri("clu:0:0")}});
    EXPECT_NE(text.find("  \"sr:clu:0:0\";\n  \"sr:win:0\";\n"), std::string::npos)
        << text;
    EXPECT_NE(text.find("\"sr:win:0\" -> \"sr:clu:0:0\" [label=\"hasCluster\"]"),
              std::string::npos);
}

TEST(Dot, GoldenFixture) {
    const auto g = build_graph(testing_support::golden_clusterings(),
                               testing_support::golden_reports());
    EXPECT_EQ(serialize_dot(g), read_file(STREAMRES_FIXTURES "/kg_8.dot"));
}

TEST(Graph, RandomGraphsKeepCountsAndDeterminism) {
    std::mt19937_64 gen(41);
    for (int t = 0; t < 100; ++t) {
        const auto [cs, rs] = random_graph(gen);
        auto g = build_graph(cs, rs);
        const auto ttl = serialize_turtle(g);
        EXPECT_EQ(count_statements(ttl), g.size());

        std::size_t expected = 0;
        for (std::size_t w = 0; w < cs.size(); ++w)
            expected += 4 * cs[w].k() + 3 * rs[w].events.size();
        EXPECT_EQ(g.size(), expected);

        std::map<std::string, std::pair<int, int>> edges;
        for (const auto& tr : g) {
            if (tr.predicate == "detectedIn") ++edges[tr.subject].first;
            if (tr.predicate == "belongsTo") ++edges[tr.subject].second;
        }
        for (auto& [evt, n] : edges) EXPECT_EQ(n, std::make_pair(1, 1)) << evt;

        std::shuffle(g.begin(), g.end(), gen);
        EXPECT_EQ(serialize_turtle(g), ttl);
        EXPECT_EQ(serialize_dot(g), serialize_dot(build_graph(cs, rs)));
    }
}
