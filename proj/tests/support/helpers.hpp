#pragma once

#include "heatmetrics/heatmetrics.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace testing_support {

using namespace heatmetrics;

inline Heatmap heatmap_of(const Grid& g, std::vector<double> v) {
    return Heatmap(GridArray<double>(g, 1, std::move(v)));
}

inline BinaryMask random_mask(const Grid& g, std::uint64_t seed, double density = 0.4) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution bit(density);
    GridArray<std::uint8_t> m(g);
    for (auto& x : m.values()) x = bit(rng) ? 1 : 0;
    return BinaryMask(std::move(m));
}

inline std::vector<std::uint8_t> mask_bytes(const BinaryMask& m) {
    return {m.bits().values().begin(), m.bits().values().end()};
}

/// Every grid with extents in [1, max_t] x [1, max_h] x [1, max_w].
inline std::vector<Grid> small_grids(std::size_t max_t, std::size_t max_h, std::size_t max_w) {
    std::vector<Grid> out;
    for (std::size_t t = 1; t <= max_t; ++t)
        for (std::size_t h = 1; h <= max_h; ++h)
            for (std::size_t w = 1; w <= max_w; ++w) out.emplace_back(t, h, w);
    return out;
}

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        path_ = std::filesystem::temp_directory_path() /
                ("heatmetrics-" + tag + "-" + std::to_string(stamp) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const { return path_; }
    [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace testing_support
