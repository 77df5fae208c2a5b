#include "streamres/kgexport.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "streamres/error.hpp"
#include "streamres/numfmt.hpp"

namespace streamres::kg {

Term Term::decimal(double v) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidIRI, "decimal literal must be finite");
    return literal(format_fixed(v), LiteralType::decimal);
}

Term Term::integer(long long v) { return literal(std::to_string(v), LiteralType::integer); }

bool is_valid_local_name(const std::string& name) {
    if (name.empty()) return false;
    const char first = name.front();
    if (first == '-' || first == '.' || first == ':') return false;
    if (name.back() == '.') return false;
    return std::all_of(name.begin(), name.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
               c == '_' || c == ':' || c == '.' || c == '-';
    });
}

std::string window_id(std::uint64_t seq) { return "win:" + std::to_string(seq); }

std::string cluster_id(std::uint64_t seq, std::size_t id) {
    return "clu:" + std::to_string(seq) + ":" + std::to_string(id);
}

std::string event_id(std::uint64_t seq, std::size_t index) {
    return "evt:" + std::to_string(seq) + ":" + std::to_string(index);
}

namespace {

std::string vector_literal(const Point& p) {
    std::string s = "(";
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) s += ", ";
        s += format_double(p[i]);
    }
    return s + ")";
}

std::string escape_quoted(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '"': out += "\\\""; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out;
}

std::string prefixed(const std::string& local) {
    if (!is_valid_local_name(local)) {
        throw Error(ErrorCode::InvalidIRI, "invalid local name '" + local + "'");
    }
    return std::string(kPrefix) + ":" + local;
}

std::string turtle_object(const Term& t) {
    if (!t.is_literal) return prefixed(t.value);
    std::string s = "\"" + escape_quoted(t.value) + "\"";
    switch (t.type) {
        case LiteralType::string: return s;
        case LiteralType::integer: return s + "^^xsd:integer";
        case LiteralType::decimal: return s + "^^xsd:decimal";
    }
    return s;
}

void sort_triples(std::vector<Triple>& triples) {
    std::stable_sort(triples.begin(), triples.end(), [](const Triple& a, const Triple& b) {
        if (a.subject != b.subject) return a.subject < b.subject;
        if (a.predicate != b.predicate) return a.predicate < b.predicate;
        return turtle_object(a.object) < turtle_object(b.object);
    });
}

}  // namespace

std::vector<Triple> build_graph(const std::vector<WindowClustering>& clusterings,
                                const std::vector<EventReport>& reports) {
    if (clusterings.size() != reports.size()) {
        throw Error(ErrorCode::AlignmentMismatch,
                    std::to_string(clusterings.size()) + " clusterings but " +
                        std::to_string(reports.size()) + " event reports");
    }
    std::vector<Triple> g;
    for (std::size_t w = 0; w < clusterings.size(); ++w) {
        const auto& c = clusterings[w];
        const auto& r = reports[w];
        if (c.window_seq != r.window_seq) {
            throw Error(ErrorCode::AlignmentMismatch,
                        "report for window " + std::to_string(r.window_seq) +
                            " paired with window " + std::to_string(c.window_seq));
        }
        const auto win = window_id(c.window_seq);
        for (std::size_t id = 0; id < c.k(); ++id) {
            const auto clu = cluster_id(c.window_seq, id);
            g.push_back({win, "hasCluster", Term::iri(clu)});
            g.push_back({clu, "hasCentroid",
                         Term::literal(vector_literal(c.centroids[id]), LiteralType::string)});
            const double sse = id < c.sse_per_cluster.size() ? c.sse_per_cluster[id] : 0.0;
            g.push_back({clu, "hasSSE", Term::decimal(sse)});
            const auto it = r.scores.find(id);
            g.push_back({clu, "hasScore", Term::decimal(it == r.scores.end() ? 0.0 : it->second)});
        }
        for (const auto& e : r.events) {
            if (e.cluster_id >= c.k()) {
                throw Error(ErrorCode::AlignmentMismatch, "event names an unknown cluster");
            }
            const auto evt = event_id(c.window_seq, e.index);
            g.push_back({evt, "detectedIn", Term::iri(win)});
            g.push_back({evt, "belongsTo", Term::iri(cluster_id(c.window_seq, e.cluster_id))});
            g.push_back({evt, "hasDistance", Term::decimal(e.distance)});
        }
    }
    return g;
}

std::string serialize_turtle(std::vector<Triple> triples) {
    sort_triples(triples);
    std::ostringstream out;
    out << "@prefix " << kPrefix << ": <" << kNamespace << "> .\n";
    out << "@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n";
    if (!triples.empty()) out << '\n';
    for (const auto& t : triples) {
        out << prefixed(t.subject) << ' ' << prefixed(t.predicate) << ' '
            << turtle_object(t.object) << " .\n";
    }
    return out.str();
}

std::string serialize_dot(std::vector<Triple> triples) {
    sort_triples(triples);
    std::set<std::string> entities;
    for (const auto& t : triples) {
        entities.insert(prefixed(t.subject));
        if (!t.object.is_literal) entities.insert(prefixed(t.object.value));
    }
    std::ostringstream out;
    out << "digraph kg {\n";
    out << "  rankdir=LR;\n";
    out << "  node [shape=ellipse, fontname=\"Helvetica\"];\n";
    out << "  edge [fontname=\"Helvetica\"];\n";
    for (const auto& e : entities) out << "  \"" << e << "\";\n";
    std::size_t literal_no = 0;
    std::vector<std::string> edges;
    for (const auto& t : triples) {
        std::string target;
        if (t.object.is_literal) {
            target = "lit" + std::to_string(literal_no++);
            out << "  " << target << " [shape=box, label=\"" << escape_quoted(t.object.value)
                << "\"];\n";
        } else {
            target = "\"" + prefixed(t.object.value) + "\"";
        }
        edges.push_back("  \"" + prefixed(t.subject) + "\" -> " + target + " [label=\"" +
                        escape_quoted(t.predicate) + "\"];\n");
    }
    for (const auto& e : edges) out << e;
    out << "}\n";
    return out.str();
}

}  // namespace streamres::kg
