#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace streamres::bench {

// Axes of the sampling benchmark. The row count is the product of the
// axis lengths.
struct BenchGrid {
    std::vector<std::size_t> ks = {100, 4500, 9000};
    std::vector<std::string> data_modes = {"dataset", "random"};
    std::vector<bool> replacement = {true, false};
    std::vector<std::string> families = {"uniform", "weighted"};
    std::size_t repeats = 7;
    // Loops per repeat; 0 picks a count that makes one repeat last ~2 ms.
    std::size_t loops = 0;
    std::filesystem::path dataset;  // JSONL population for the "dataset" mode
    std::size_t population = 10000; // size of the "random" population
    std::uint64_t seed = 0;
};

struct BenchRow {
    std::size_t k = 0;
    std::string data;
    bool replacement = false;
    std::string family;
    bool ok = true;
    std::string error;
    std::size_t loops = 0;
    double median_ns = 0.0;  // per loop
    double mean_ns = 0.0;    // per loop, over repeats
    double std_ns = 0.0;
};

// Cells that fail are reported with ok == false instead of aborting.
std::vector<BenchRow> run_bench(const BenchGrid& grid);

// Header: K,data,replacement,family,time_ns,mean_ns,std_ns,loops
std::string to_csv(const std::vector<BenchRow>& rows);
std::string to_table(const std::vector<BenchRow>& rows);

}  // namespace streamres::bench
