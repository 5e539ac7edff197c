#pragma once

#include "heatmetrics/manipulation.hpp"
#include "heatmetrics/npy.hpp"
#include "heatmetrics/tensor.hpp"

#include <cmath>
#include <filesystem>

namespace heatmetrics {

namespace detail {

inline Grid grid_of(const NpyArray& a, std::size_t rank_lo, std::size_t rank_hi, const char* what) {
    if (a.shape.size() < rank_lo || a.shape.size() > rank_hi) {
        throw FormatError(std::string(what) + " must have rank " + std::to_string(rank_lo) +
                          (rank_lo == rank_hi ? "" : "-" + std::to_string(rank_hi)) + ", got " +
                          std::to_string(a.shape.size()));
    }
    for (std::size_t s : a.shape)
        if (s == 0) throw FormatError(std::string(what) + " has an empty axis");
    return Grid(a.shape[0], a.shape[1], a.shape[2]);
}

}  // namespace detail

/// T x H x W (one channel) or T x H x W x C clip. uint8 is scaled by 1/255;
/// float32 and float64 are taken as is and must lie in [0,1].
[[nodiscard]] inline Video video_from_array(const NpyArray& a) {
    const Grid g = detail::grid_of(a, 3, 4, "video");
    const std::size_t c = a.shape.size() == 4 ? a.shape[3] : 1;
    std::vector<double> v = a.as_doubles();
    if (a.dtype == Dtype::uint8)
        for (double& x : v) x /= 255.0;
    return Video(GridArray<double>(g, c, std::move(v)));
}

/// Stores a clip with the requested element type. uint8 output rounds x*255.
[[nodiscard]] inline NpyArray video_to_array(const Video& v, Dtype dtype = Dtype::float32) {
    const Grid& g = v.grid();
    std::vector<std::size_t> shape = {g.frames(), g.rows(), g.cols(), v.channels()};
    const auto values = v.values();
    switch (dtype) {
        case Dtype::float64: return NpyArray::from<double>(shape, values);
        case Dtype::float32: {
            std::vector<float> f(values.begin(), values.end());
            return NpyArray::from<float>(shape, f);
        }
        case Dtype::uint8: {
            std::vector<std::uint8_t> b(values.size());
            for (std::size_t i = 0; i < b.size(); ++i)
                b[i] = static_cast<std::uint8_t>(std::lround(values[i] * 255.0));
            return NpyArray::from<std::uint8_t>(shape, b);
        }
    }
    throw InvalidArgument("unknown dtype");
}

/// T x H x W relevance map. With `normalize`, the values are treated as a raw
/// attribution (absolute value, unit mass) instead of being required to
/// already form a heatmap.
[[nodiscard]] inline Heatmap heatmap_from_array(const NpyArray& a, bool normalize = false) {
    const Grid g = detail::grid_of(a, 3, 3, "heatmap");
    if (a.dtype == Dtype::uint8) throw UnsupportedDtype("heatmaps must be float32 or float64");
    GridArray<double> values(g, 1, a.as_doubles());
    if (normalize) return normalize_attribution(RawAttribution(std::move(values)));
    return Heatmap(std::move(values));
}

[[nodiscard]] inline NpyArray heatmap_to_array(const Heatmap& h) {
    const Grid& g = h.grid();
    return NpyArray::from<double>({g.frames(), g.rows(), g.cols()}, h.values());
}

[[nodiscard]] inline PartMask part_mask_from_array(const NpyArray& a) {
    const Grid g = detail::grid_of(a, 3, 3, "part mask");
    return PartMask(GridArray<std::uint8_t>(g, 1, a.values<std::uint8_t>()));
}

[[nodiscard]] inline BinaryMask binary_mask_from_array(const NpyArray& a) {
    const Grid g = detail::grid_of(a, 3, 3, "mask");
    return BinaryMask(GridArray<std::uint8_t>(g, 1, a.values<std::uint8_t>()));
}

[[nodiscard]] inline NpyArray mask_to_array(const GridArray<std::uint8_t>& m) {
    const Grid& g = m.grid();
    return NpyArray::from<std::uint8_t>({g.frames(), g.rows(), g.cols()}, m.values());
}

[[nodiscard]] inline Video load_video(const std::filesystem::path& p) { return video_from_array(read_array(p)); }
[[nodiscard]] inline Heatmap load_heatmap(const std::filesystem::path& p, bool normalize = false) {
    return heatmap_from_array(read_array(p), normalize);
}
[[nodiscard]] inline PartMask load_part_mask(const std::filesystem::path& p) {
    return part_mask_from_array(read_array(p));
}
[[nodiscard]] inline BinaryMask load_binary_mask(const std::filesystem::path& p) {
    return binary_mask_from_array(read_array(p));
}

}  // namespace heatmetrics
