#include "streamres/multires.hpp"

#include <algorithm>
#include <cmath>

#include "streamres/error.hpp"

namespace streamres {

void validate_policy(const AllocationPolicy& policy) {
    if (!(policy.e > 0.0 && policy.e < 1.0)) {
        throw Error(ErrorCode::EOutOfRange, "e must lie in (0, 1)");
    }
    if (policy.budget == 0) throw Error(ErrorCode::InvalidConfig, "budget M must be positive");
    if (policy.realloc_every == 0) {
        throw Error(ErrorCode::InvalidConfig, "realloc_every must be positive");
    }
}

double sample_size(std::uint64_t population, double e) {
    if (!(e > 0.0 && e < 1.0)) throw Error(ErrorCode::EOutOfRange, "e must lie in (0, 1)");
    if (population == 0) throw Error(ErrorCode::EOutOfRange, "population must be >= 1");
    const auto n = static_cast<double>(population);
    return n / (1.0 + n * e * e);
}

double required_size(std::uint64_t count, double e) {
    const auto k = static_cast<double>(count);
    return k / (1.0 + k * e * e);
}

namespace {

// floor() that forgives rounding just below an integer, e.g. 100*r/(2r).
std::size_t tolerant_floor(double x) {
    const double nearest = std::round(x);
    if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, std::abs(x))) {
        return static_cast<std::size_t>(nearest);
    }
    return static_cast<std::size_t>(std::floor(x));
}

}  // namespace

Capacities allocate(const Counts& counts, const AllocationPolicy& policy) {
    validate_policy(policy);
    double total = 0.0;
    for (const auto& [id, c] : counts) total += required_size(c, policy.e);
    if (total <= 0.0) throw Error(ErrorCode::NoActiveStreams, "no stream has arrivals");

    const auto budget = static_cast<double>(policy.budget);
    Capacities caps;
    std::size_t sum = 0;
    for (const auto& [id, c] : counts) {
        const std::size_t cap =
            c == 0 ? 0 : tolerant_floor(budget * (required_size(c, policy.e) / total));
        caps[id] = cap;
        sum += cap;
    }
    auto largest = [&caps]() {
        auto best = caps.begin();
        for (auto it = caps.begin(); it != caps.end(); ++it)
            if (it->second > best->second) best = it;
        return best;
    };
    while (sum > policy.budget) {
        --largest()->second;
        --sum;
    }
    // Starved streams get one slot each, funded by the largest allocation.
    for (const auto& [id, c] : counts) {
        auto& cap = caps[id];
        if (c == 0 || cap > 0) continue;
        if (sum < policy.budget) {
            cap = 1;
            ++sum;
            continue;
        }
        auto donor = largest();
        if (donor->second <= 1) break;
        --donor->second;
        cap = 1;
    }
    return caps;
}

// ---------------------------------------------------------------------------

ReservoirPool::ReservoirPool(AllocationPolicy policy) : policy_(policy) {
    validate_policy(policy_);
}

void ReservoirPool::on_arrival(const Record& record, Rng& rng) {
    auto it = streams_.find(record.stream_id);
    bool fresh = false;
    if (it == streams_.end()) {
        if (streams_.size() >= policy_.budget) {
            throw Error(ErrorCode::BudgetExhausted,
                        "stream '" + record.stream_id + "' would exceed the budget of " +
                            std::to_string(policy_.budget) + " entries");
        }
        it = streams_.emplace(record.stream_id, Stream{}).first;
        fresh = true;
    }
    ++it->second.count;
    ++arrivals_;
    if (fresh) reallocate(rng);
    it->second.reservoir.insert_weighted(record, rng);
    if (arrivals_ % policy_.realloc_every == 0) reallocate(rng);
}

void ReservoirPool::reallocate(Rng& rng) {
    const auto caps = allocate(counts(), policy_);
    // Shrink first so the budget holds at every intermediate step.
    for (auto& [id, s] : streams_) {
        const auto cap = caps.at(id);
        if (cap < s.reservoir.capacity()) s.reservoir.set_capacity(cap, rng);
    }
    for (auto& [id, s] : streams_) {
        const auto cap = caps.at(id);
        if (cap > s.reservoir.capacity()) s.reservoir.set_capacity(cap, rng);
    }
}

std::vector<Record> ReservoirPool::drain() {
    struct Item {
        const Record* record;
        std::uint64_t arrival;
    };
    std::vector<Item> items;
    for (const auto& [id, s] : streams_)
        for (const auto& e : s.reservoir.entries()) items.push_back({&e.record, e.arrival});
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
        if (a.record->timestamp != b.record->timestamp)
            return a.record->timestamp < b.record->timestamp;
        if (a.record->stream_id != b.record->stream_id)
            return a.record->stream_id < b.record->stream_id;
        return a.arrival < b.arrival;
    });
    std::vector<Record> out;
    out.reserve(items.size());
    for (const auto& item : items) out.push_back(*item.record);
    for (auto& [id, s] : streams_) s.reservoir.clear();
    return out;
}

Counts ReservoirPool::counts() const {
    Counts c;
    for (const auto& [id, s] : streams_) c[id] = s.count;
    return c;
}

Capacities ReservoirPool::capacities() const {
    Capacities c;
    for (const auto& [id, s] : streams_) c[id] = s.reservoir.capacity();
    return c;
}

std::size_t ReservoirPool::total_entries() const {
    std::size_t n = 0;
    for (const auto& [id, s] : streams_) n += s.reservoir.size();
    return n;
}

std::size_t ReservoirPool::total_capacity() const {
    std::size_t n = 0;
    for (const auto& [id, s] : streams_) n += s.reservoir.capacity();
    return n;
}

nlohmann::json ReservoirPool::snapshot() const {
    nlohmann::json j;
    j["policy"] = {{"e", policy_.e},
                   {"M", policy_.budget},
                   {"realloc_every", policy_.realloc_every}};
    j["arrivals"] = arrivals_;
    nlohmann::json streams = nlohmann::json::object();
    for (const auto& [id, s] : streams_) {
        nlohmann::json entries = nlohmann::json::array();
        for (const auto& r : s.reservoir.contents()) entries.push_back(record_to_json(r));
        streams[id] = {{"count", s.count},
                       {"capacity", s.reservoir.capacity()},
                       {"r_i", required_size(s.count, policy_.e)},
                       {"entries", std::move(entries)}};
    }
    j["streams"] = std::move(streams);
    return j;
}

}  // namespace streamres
