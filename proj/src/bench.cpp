#include "streamres/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <sstream>

#include "streamres/error.hpp"
#include "streamres/ingest.hpp"
#include "streamres/sampling.hpp"

namespace streamres::bench {

namespace {

using Clock = std::chrono::steady_clock;

std::vector<Record> population_for(const BenchGrid& grid, const std::string& mode,
                                   std::uint64_t cell) {
    if (mode == "dataset") {
        if (grid.dataset.empty()) {
            throw Error(ErrorCode::MissingFile, "no dataset fixture configured");
        }
        return read_records(grid.dataset, Format::jsonl);
    }
    if (mode == "random") {
        SyntheticSpec spec;
        spec.weight_law = WeightLaw::exponential(1.0);
        spec.seed = derive_seed(grid.seed, "bench-random-" + std::to_string(cell));
        return generate_synthetic(spec, grid.population);
    }
    throw Error(ErrorCode::InvalidConfig, "unknown data mode '" + mode + "'");
}

std::size_t run_once(const std::vector<Record>& pop, std::size_t k, bool replacement,
                     const std::string& family, Rng& rng) {
    if (family == "uniform") {
        return replacement ? uniform_with_replacement(pop, k, rng).size()
                           : uniform_without_replacement(pop, k, rng).size();
    }
    if (family == "weighted") {
        return replacement ? weighted_with_replacement(pop, k, rng).size()
                           : weighted_without_replacement(pop, k, rng).size();
    }
    throw Error(ErrorCode::InvalidConfig, "unknown family '" + family + "'");
}

double elapsed_ns(Clock::time_point start) {
    return std::chrono::duration<double, std::nano>(Clock::now() - start).count();
}

void time_cell(const BenchGrid& grid, const std::vector<Record>& pop, BenchRow& row, Rng& rng) {
    // Warm-up, excluded from the statistics; also sizes the loop count.
    auto start = Clock::now();
    volatile std::size_t sink = run_once(pop, row.k, row.replacement, row.family, rng);
    const double once = std::max(1.0, elapsed_ns(start));
    row.loops = grid.loops ? grid.loops
                           : std::clamp<std::size_t>(static_cast<std::size_t>(2e6 / once), 1, 1000);
    std::vector<double> per_loop;
    for (std::size_t r = 0; r < std::max<std::size_t>(grid.repeats, 1); ++r) {
        start = Clock::now();
        for (std::size_t l = 0; l < row.loops; ++l)
            sink = sink + run_once(pop, row.k, row.replacement, row.family, rng);
        per_loop.push_back(elapsed_ns(start) / static_cast<double>(row.loops));
    }
    const double n = static_cast<double>(per_loop.size());
    row.mean_ns = std::accumulate(per_loop.begin(), per_loop.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : per_loop) ss += (v - row.mean_ns) * (v - row.mean_ns);
    row.std_ns = per_loop.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    std::sort(per_loop.begin(), per_loop.end());
    const auto mid = per_loop.size() / 2;
    row.median_ns = per_loop.size() % 2 ? per_loop[mid] : 0.5 * (per_loop[mid - 1] + per_loop[mid]);
}

std::string fmt(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

}  // namespace

std::vector<BenchRow> run_bench(const BenchGrid& grid) {
    std::vector<BenchRow> rows;
    Rng rng(derive_seed(grid.seed, "bench"));
    std::uint64_t cell = 0;
    std::optional<std::vector<Record>> dataset;
    std::string dataset_error;
    for (const auto& family : grid.families) {
        for (auto k : grid.ks) {
            for (bool replacement : grid.replacement) {
                for (const auto& mode : grid.data_modes) {
                    BenchRow row;
                    row.k = k;
                    row.data = mode;
                    row.replacement = replacement;
                    row.family = family;
                    try {
                        std::vector<Record> random_pop;
                        const std::vector<Record>* pop = nullptr;
                        if (mode == "dataset") {
                            if (!dataset && dataset_error.empty()) {
                                try {
                                    dataset = population_for(grid, mode, cell);
                                } catch (const std::exception& e) {
                                    dataset_error = e.what();
                                }
                            }
                            if (!dataset) throw std::runtime_error(dataset_error);
                            pop = &*dataset;
                        } else {
                            random_pop = population_for(grid, mode, cell);
                            pop = &random_pop;
                        }
                        time_cell(grid, *pop, row, rng);
                    } catch (const std::exception& e) {
                        row.ok = false;
                        row.error = e.what();
                    }
                    rows.push_back(std::move(row));
                    ++cell;
                }
            }
        }
    }
    return rows;
}

std::string to_csv(const std::vector<BenchRow>& rows) {
    std::ostringstream out;
    out << "K,data,replacement,family,time_ns,mean_ns,std_ns,loops\n";
    for (const auto& r : rows) {
        out << r.k << ',' << r.data << ',' << (r.replacement ? "yes" : "no") << ','
            << r.family << ',';
        if (r.ok) {
            out << fmt(r.median_ns, 1) << ',' << fmt(r.mean_ns, 1) << ',' << fmt(r.std_ns, 1)
                << ',' << r.loops;
        } else {
            out << "ERR,ERR,ERR,0";
        }
        out << '\n';
    }
    return out.str();
}

std::string to_table(const std::vector<BenchRow>& rows) {
    std::vector<std::vector<std::string>> cells;
    cells.push_back({"K", "Data (d/r)", "Replacement", "Family", "Time", "Mean +- std"});
    for (const auto& r : rows) {
        std::string data = r.data == "dataset" ? "Dataset" : r.data == "random" ? "Random" : r.data;
        cells.push_back({std::to_string(r.k), data, r.replacement ? "Yes" : "No", r.family,
                         r.ok ? fmt(r.median_ns, 1) + " ns" : "ERR",
                         r.ok ? fmt(r.mean_ns, 1) + " +- " + fmt(r.std_ns, 1) + " ns per loop"
                              : "ERR"});
    }
    std::vector<std::size_t> width(cells.front().size(), 0);
    for (const auto& row : cells)
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    std::ostringstream out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        for (std::size_t c = 0; c < cells[i].size(); ++c) {
            if (c) out << " | ";
            out << cells[i][c];
            if (c + 1 < cells[i].size()) out << std::string(width[c] - cells[i][c].size(), ' ');
        }
        out << '\n';
        if (i == 0) {
            for (std::size_t c = 0; c < width.size(); ++c) {
                if (c) out << "-+-";
                out << std::string(width[c], '-');
            }
            out << '\n';
        }
    }
    return out.str();
}

}  // namespace streamres::bench
