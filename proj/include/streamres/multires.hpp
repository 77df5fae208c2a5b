#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "streamres/record.hpp"
#include "streamres/rng.hpp"
#include "streamres/sampling.hpp"

namespace streamres {

struct AllocationPolicy {
    double e = 0.05;                  // 1 - confidence
    std::size_t budget = 1000;        // M, total reservoir entries
    std::uint64_t realloc_every = 1000;
};

void validate_policy(const AllocationPolicy& policy);

// N / (1 + N e^2). Throws EOutOfRange unless 0 < e < 1 and N >= 1.
double sample_size(std::uint64_t population, double e);

// count / (1 + count e^2); zero for an idle stream.
double required_size(std::uint64_t count, double e);

using Capacities = std::map<std::string, std::size_t, std::less<>>;
using Counts = std::map<std::string, std::uint64_t, std::less<>>;

// floor(M r_i / sum r_j) per stream with a positive count, after which every
// stream left at zero is raised to one entry taken from the currently largest
// allocation (ties: first stream id). Streams with a zero count get zero.
// The sum never exceeds M. Throws NoActiveStreams.
Capacities allocate(const Counts& counts, const AllocationPolicy& policy);

// One weighted reservoir per stream under a shared entry budget.
class ReservoirPool {
public:
    struct Stream {
        Reservoir reservoir{0};
        std::uint64_t count = 0;
    };

    explicit ReservoirPool(AllocationPolicy policy);

    // Routes the record to its stream's reservoir, registering new streams
    // (which triggers an immediate re-allocation so they start with at least
    // one slot) and re-allocating every `realloc_every` arrivals.
    // Throws BudgetExhausted when a new stream would exceed M streams.
    void on_arrival(const Record& record, Rng& rng);

    // Recomputes capacities from the current counts and applies them.
    void reallocate(Rng& rng);

    // Takes every sampled record out of the pool, ordered by (timestamp,
    // stream id, arrival). Counts and capacities persist; the reservoirs
    // restart their admission from empty.
    std::vector<Record> drain();

    Counts counts() const;
    Capacities capacities() const;
    std::size_t total_entries() const;
    std::size_t total_capacity() const;
    std::uint64_t arrivals() const { return arrivals_; }
    const AllocationPolicy& policy() const { return policy_; }
    const std::map<std::string, Stream, std::less<>>& streams() const { return streams_; }

    // {"policy": {...}, "streams": {id: {"count","capacity","r_i","entries"}}}
    nlohmann::json snapshot() const;

private:
    AllocationPolicy policy_;
    std::map<std::string, Stream, std::less<>> streams_;
    std::uint64_t arrivals_ = 0;
};

}  // namespace streamres
