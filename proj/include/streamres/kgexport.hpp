#pragma once

#include <string>
#include <vector>

#include "streamres/events.hpp"
#include "streamres/resmeans.hpp"

namespace streamres::kg {

inline constexpr const char* kNamespace = "http://streamres.local/ns#";
inline constexpr const char* kPrefix = "sr";

enum class LiteralType { string, integer, decimal };

// Object position: either a prefixed name (IRI) or a typed literal.
struct Term {
    bool is_literal = false;
    std::string value;  // local name for IRIs, lexical form for literals
    LiteralType type = LiteralType::string;

    static Term iri(std::string local) { return {false, std::move(local), LiteralType::string}; }
    static Term literal(std::string v, LiteralType t) { return {true, std::move(v), t}; }
    static Term decimal(double v);
    static Term integer(long long v);

    bool operator==(const Term&) const = default;
};

// Subject and predicate are local names in the sr: namespace.
struct Triple {
    std::string subject;
    std::string predicate;
    Term object;

    bool operator==(const Triple&) const = default;
};

// Local names: non-empty, [A-Za-z0-9_:.-], not starting with '-', ':' or
// '.', not ending with '.'.
bool is_valid_local_name(const std::string& name);

// Entity ids: win:<seq>, clu:<seq>:<id>, evt:<seq>:<index>.
std::string window_id(std::uint64_t seq);
std::string cluster_id(std::uint64_t seq, std::size_t id);
std::string event_id(std::uint64_t seq, std::size_t index);

// Per window: hasCluster for every cluster; per cluster: hasCentroid,
// hasSSE, hasScore; per event: detectedIn, belongsTo, hasDistance.
// Reports must pair up with clusterings by window_seq (same order).
// Throws AlignmentMismatch.
std::vector<Triple> build_graph(const std::vector<WindowClustering>& clusterings,
                                const std::vector<EventReport>& reports);

// Turtle with one prefix block and one statement per line, sorted by
// (subject, predicate, object). Throws InvalidIRI.
std::string serialize_turtle(std::vector<Triple> triples);

// DOT digraph: entities are ellipses, each literal a box leaf, predicates
// label the edges. Deterministic for a given triple set.
std::string serialize_dot(std::vector<Triple> triples);

}  // namespace streamres::kg
