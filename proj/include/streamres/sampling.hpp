#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include "streamres/record.hpp"
#include "streamres/rng.hpp"

namespace streamres {

// ln(u) / weight. Monotone in u^(1/weight), so ranking by it is ranking by
// the exponentiated key without the underflow. Throws NonPositiveWeight or
// UOutOfRange.
double log_key(double weight, double u);

// One-shot weighted sampling without replacement: every item draws a key
// and the k largest win (ties go to the lower index). Returned in key order.
std::vector<std::size_t> weighted_sample_indices(std::span<const double> weights,
                                                 std::size_t k, Rng& rng);
std::vector<Record> weighted_without_replacement(std::span<const Record> population,
                                                 std::size_t k, Rng& rng);

// k independent draws with probability w_j / sum(w).
std::vector<std::size_t> weighted_with_replacement_indices(std::span<const double> weights,
                                                           std::size_t k, Rng& rng);
std::vector<Record> weighted_with_replacement(std::span<const Record> population,
                                              std::size_t k, Rng& rng);

std::vector<Record> uniform_without_replacement(std::span<const Record> population,
                                                std::size_t k, Rng& rng);
std::vector<Record> uniform_with_replacement(std::span<const Record> population,
                                             std::size_t k, Rng& rng);

struct KeyedEntry {
    Record record;
    double log_key = 0.0;
    std::uint64_t arrival = 0;  // 1-based offer index
};

// Fixed-capacity stream sample. A reservoir is fed either by the uniform
// rule (Algorithm R) or by the weighted key rule, never both.
//
// Weighted entries are kept as a binary min-heap on (log_key, -arrival), so
// the eviction candidate is entries().front() and replacement is O(log k).
// Among equal keys the earlier arrival ranks higher.
//
// Not internally synchronised: one writer at a time.
class Reservoir {
public:
    enum class Discipline { unset, uniform, weighted };

    explicit Reservoir(std::size_t capacity);

    // Returns true when the record was stored.
    bool insert_uniform(const Record& record, Rng& rng);
    bool insert_weighted(const Record& record, Rng& rng);
    // Weighted admission with a caller-supplied key.
    bool offer_keyed(const Record& record, double log_key);

    // Current sample in arrival order.
    std::vector<Record> contents() const;
    const std::vector<KeyedEntry>& entries() const { return entries_; }

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return entries_.size(); }
    std::uint64_t seen() const { return seen_; }
    std::uint64_t replacements() const { return replacements_; }
    Discipline discipline() const { return discipline_; }

    // Shrinking evicts uniformly at random among incumbents; growing only
    // raises the limit and the reservoir refills through normal admission.
    void set_capacity(std::size_t capacity, Rng& rng);

    // Drops all entries and restarts the offer count. Capacity is kept.
    void clear();

private:
    void claim(Discipline d);

    std::size_t capacity_;
    std::vector<KeyedEntry> entries_;
    std::uint64_t seen_ = 0;
    std::uint64_t replacements_ = 0;
    Discipline discipline_ = Discipline::unset;
};

// JSONL snapshot: a header line {"capacity","seen","seed"} followed by one
// record object per entry (arrival order) carrying an extra "log_key".
void write_reservoir_jsonl(std::ostream& out, const Reservoir& reservoir, std::uint64_t seed);

struct ReservoirSnapshot {
    std::size_t capacity = 0;
    std::uint64_t seen = 0;
    std::uint64_t seed = 0;
    std::vector<Record> records;
    std::vector<double> log_keys;
};

ReservoirSnapshot read_reservoir_jsonl(std::istream& in);

}  // namespace streamres
