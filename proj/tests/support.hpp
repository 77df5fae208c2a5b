#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "streamres/record.hpp"
#include "streamres/resmeans.hpp"
#include "streamres/rng.hpp"

namespace testing_support {

// Scratch directory removed on scope exit.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("streamres-test-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline streamres::Record point_record(streamres::Point p, std::uint64_t ts = 0) {
    streamres::Record r;
    r.stream_id = "s";
    r.timestamp = ts;
    r.features = std::move(p);
    return r;
}

inline streamres::Window window_of(const std::vector<streamres::Point>& points) {
    streamres::Window w;
    for (std::size_t i = 0; i < points.size(); ++i) w.records.push_back(point_record(points[i], i));
    return w;
}

// Gaussian cloud with random size, dimension and spread.
inline streamres::Window random_window(std::mt19937_64& rng, std::size_t min_n, std::size_t max_n,
                                       std::size_t max_dim) {
    std::uniform_int_distribution<std::size_t> n_dist(min_n, max_n), d_dist(1, max_dim);
    std::uniform_real_distribution<double> scale(0.1, 5.0);
    const auto n = n_dist(rng), d = d_dist(rng);
    std::normal_distribution<double> g(0.0, scale(rng));
    std::vector<streamres::Point> pts(n, streamres::Point(d));
    for (auto& p : pts)
        for (auto& x : p) x = g(rng);
    return window_of(pts);
}

inline double rel_diff(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

}  // namespace testing_support
