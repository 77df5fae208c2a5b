#include "streamres/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "streamres/error.hpp"

namespace streamres {

double log_key(double weight, double u) {
    if (!(weight > 0.0) || !std::isfinite(weight)) {
        throw Error(ErrorCode::NonPositiveWeight, "weight must be positive and finite");
    }
    if (!(u > 0.0 && u <= 1.0)) {
        throw Error(ErrorCode::UOutOfRange, "u must lie in (0, 1]");
    }
    return std::log(u) / weight;
}

namespace {

void check_weights(std::span<const double> weights) {
    for (double w : weights) {
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw Error(ErrorCode::NonPositiveWeight, "weight must be positive and finite");
        }
    }
}

std::vector<double> weights_of(std::span<const Record> population) {
    std::vector<double> w;
    w.reserve(population.size());
    for (const auto& r : population) w.push_back(r.weight);
    return w;
}

template <typename Index>
std::vector<Record> gather(std::span<const Record> population, const std::vector<Index>& idx) {
    std::vector<Record> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(population[i]);
    return out;
}

// Entry a ranks above entry b.
bool ranks_above(const KeyedEntry& a, const KeyedEntry& b) {
    if (a.log_key != b.log_key) return a.log_key > b.log_key;
    return a.arrival < b.arrival;
}

// std heap functions build a max-heap under `comp`; ordering by "ranks
// above" puts the lowest-ranked entry at the front.
constexpr auto kHeapOrder = [](const KeyedEntry& a, const KeyedEntry& b) {
    return ranks_above(a, b);
};

}  // namespace

std::vector<std::size_t> weighted_sample_indices(std::span<const double> weights,
                                                 std::size_t k, Rng& rng) {
    check_weights(weights);
    if (k > weights.size()) {
        throw Error(ErrorCode::KExceedsPopulation,
                    "k=" + std::to_string(k) + " exceeds population of " +
                        std::to_string(weights.size()));
    }
    std::vector<double> keys(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        keys[i] = log_key(weights[i], uniform_open_closed(rng));
    }
    std::vector<std::size_t> idx(weights.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (keys[a] != keys[b]) return keys[a] > keys[b];
                          return a < b;
                      });
    idx.resize(k);
    return idx;
}

std::vector<Record> weighted_without_replacement(std::span<const Record> population,
                                                 std::size_t k, Rng& rng) {
    const auto w = weights_of(population);
    return gather(population, weighted_sample_indices(w, k, rng));
}

std::vector<std::size_t> weighted_with_replacement_indices(std::span<const double> weights,
                                                           std::size_t k, Rng& rng) {
    if (k == 0) return {};
    if (weights.empty()) {
        throw Error(ErrorCode::EmptyPopulation, "cannot draw from an empty population");
    }
    check_weights(weights);
    std::vector<double> cumulative(weights.size());
    std::partial_sum(weights.begin(), weights.end(), cumulative.begin());
    const double total = cumulative.back();
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t draw = 0; draw < k; ++draw) {
        const double target = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
        auto i = static_cast<std::size_t>(it - cumulative.begin());
        out.push_back(std::min(i, weights.size() - 1));
    }
    return out;
}

std::vector<Record> weighted_with_replacement(std::span<const Record> population,
                                              std::size_t k, Rng& rng) {
    const auto w = weights_of(population);
    return gather(population, weighted_with_replacement_indices(w, k, rng));
}

std::vector<Record> uniform_without_replacement(std::span<const Record> population,
                                                std::size_t k, Rng& rng) {
    if (k > population.size()) {
        throw Error(ErrorCode::KExceedsPopulation,
                    "k=" + std::to_string(k) + " exceeds population of " +
                        std::to_string(population.size()));
    }
    std::vector<std::size_t> idx(population.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        auto j = i + uniform_index(rng, idx.size() - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return gather(population, idx);
}

std::vector<Record> uniform_with_replacement(std::span<const Record> population,
                                             std::size_t k, Rng& rng) {
    if (k == 0) return {};
    if (population.empty()) {
        throw Error(ErrorCode::EmptyPopulation, "cannot draw from an empty population");
    }
    std::vector<Record> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        out.push_back(population[uniform_index(rng, population.size())]);
    }
    return out;
}

// ---------------------------------------------------------------------------

Reservoir::Reservoir(std::size_t capacity) : capacity_(capacity) {
    entries_.reserve(capacity);
}

void Reservoir::claim(Discipline d) {
    if (discipline_ == Discipline::unset) {
        discipline_ = d;
    } else if (discipline_ != d) {
        throw Error(ErrorCode::MixedDiscipline,
                    "reservoir cannot mix uniform and weighted admission");
    }
}

bool Reservoir::insert_uniform(const Record& record, Rng& rng) {
    claim(Discipline::uniform);
    ++seen_;
    if (entries_.size() < capacity_) {
        entries_.push_back({record, 0.0, seen_});
        return true;
    }
    if (capacity_ == 0) return false;
    // Admit with probability capacity/seen, replacing a uniform incumbent.
    const auto j = uniform_index(rng, seen_);
    if (j >= capacity_) return false;
    entries_[j] = {record, 0.0, seen_};
    ++replacements_;
    return true;
}

bool Reservoir::insert_weighted(const Record& record, Rng& rng) {
    return offer_keyed(record, log_key(record.weight, uniform_open_closed(rng)));
}

bool Reservoir::offer_keyed(const Record& record, double key) {
    claim(Discipline::weighted);
    ++seen_;
    KeyedEntry entry{record, key, seen_};
    if (entries_.size() < capacity_) {
        entries_.push_back(std::move(entry));
        std::push_heap(entries_.begin(), entries_.end(), kHeapOrder);
        return true;
    }
    if (capacity_ == 0 || !ranks_above(entry, entries_.front())) return false;
    std::pop_heap(entries_.begin(), entries_.end(), kHeapOrder);
    entries_.back() = std::move(entry);
    std::push_heap(entries_.begin(), entries_.end(), kHeapOrder);
    ++replacements_;
    return true;
}

std::vector<Record> Reservoir::contents() const {
    std::vector<const KeyedEntry*> order;
    order.reserve(entries_.size());
    for (const auto& e : entries_) order.push_back(&e);
    std::sort(order.begin(), order.end(),
              [](const KeyedEntry* a, const KeyedEntry* b) { return a->arrival < b->arrival; });
    std::vector<Record> out;
    out.reserve(order.size());
    for (const auto* e : order) out.push_back(e->record);
    return out;
}

void Reservoir::set_capacity(std::size_t capacity, Rng& rng) {
    capacity_ = capacity;
    if (entries_.size() <= capacity_) return;
    while (entries_.size() > capacity_) {
        const auto victim = uniform_index(rng, entries_.size());
        std::swap(entries_[victim], entries_.back());
        entries_.pop_back();
    }
    if (discipline_ == Discipline::weighted) {
        std::make_heap(entries_.begin(), entries_.end(), kHeapOrder);
    }
}

void Reservoir::clear() {
    entries_.clear();
    seen_ = 0;
    replacements_ = 0;
    discipline_ = Discipline::unset;
}

// ---------------------------------------------------------------------------

void write_reservoir_jsonl(std::ostream& out, const Reservoir& reservoir, std::uint64_t seed) {
    nlohmann::json header;
    header["capacity"] = reservoir.capacity();
    header["seen"] = reservoir.seen();
    header["seed"] = seed;
    out << header.dump() << '\n';
    std::vector<const KeyedEntry*> order;
    for (const auto& e : reservoir.entries()) order.push_back(&e);
    std::sort(order.begin(), order.end(),
              [](const KeyedEntry* a, const KeyedEntry* b) { return a->arrival < b->arrival; });
    for (const auto* e : order) {
        auto j = record_to_json(e->record);
        j["log_key"] = e->log_key;
        out << j.dump() << '\n';
    }
}

ReservoirSnapshot read_reservoir_jsonl(std::istream& in) {
    ReservoirSnapshot snap;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorCode::SchemaMismatch, e.what(), line_no);
        }
        if (!have_header) {
            try {
                snap.capacity = j.at("capacity").get<std::size_t>();
                snap.seen = j.at("seen").get<std::uint64_t>();
                snap.seed = j.at("seed").get<std::uint64_t>();
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorCode::SchemaMismatch, e.what(), line_no);
            }
            have_header = true;
            continue;
        }
        snap.records.push_back(record_from_json(j, line_no));
        snap.log_keys.push_back(j.value("log_key", 0.0));
    }
    if (!have_header) throw Error(ErrorCode::SchemaMismatch, "missing snapshot header");
    return snap;
}

}  // namespace streamres
