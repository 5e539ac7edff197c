#pragma once

#include "heatmetrics/tensor.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace heatmetrics {

/// Default truncation radius for a Gaussian of standard deviation `std`.
[[nodiscard]] inline std::size_t default_radius(double std) {
    return std > 0.0 ? static_cast<std::size_t>(std::ceil(3.0 * std)) : 0;
}

/// Sampled Gaussian on offsets -radius..radius, normalized to unit sum.
/// A zero standard deviation yields the identity kernel {1}.
[[nodiscard]] inline std::vector<double> gaussian_kernel_1d(double std, std::size_t radius) {
    if (!(std >= 0.0)) throw InvalidArgument("Gaussian standard deviation must be >= 0");
    if (std == 0.0) return {1.0};
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        const double d = static_cast<double>(i) - static_cast<double>(radius);
        k[i] = std::exp(-d * d / (2.0 * std * std));
        sum += k[i];
    }
    for (double& x : k) x /= sum;
    return k;
}

enum class Axis { t = 0, u = 1, w = 2 };

/// Convolves every line along `axis` (each channel separately) with an
/// odd-length kernel centred on its middle tap. Taps falling outside the grid
/// are dropped and the remaining weights renormalized.
[[nodiscard]] inline GridArray<double> convolve_axis(const GridArray<double>& in, Axis axis,
                                                     std::span<const double> kernel) {
    if (kernel.size() % 2 != 1) throw InvalidArgument("kernel length must be odd");
    if (kernel.size() == 1) return in;
    const Grid& g = in.grid();
    const std::size_t c = in.channels();
    const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
    const std::size_t len = axis == Axis::t ? g.frames() : axis == Axis::u ? g.rows() : g.cols();
    const std::size_t stride =
        (axis == Axis::t ? g.rows() * g.cols() : axis == Axis::u ? g.cols() : 1) * c;

    GridArray<double> out(g, c, 0.0);
    for (std::size_t base_pixel = 0; base_pixel < g.size(); ++base_pixel) {
        const Coord bc = g.coord(base_pixel);
        const std::size_t along = axis == Axis::t ? bc.t : axis == Axis::u ? bc.u : bc.w;
        if (along != 0) continue;  // visit each line once, from its first element
        for (std::size_t ch = 0; ch < c; ++ch) {
            const std::size_t origin = base_pixel * c + ch;
            for (std::size_t i = 0; i < len; ++i) {
                double num = 0.0, den = 0.0;
                for (std::ptrdiff_t d = -radius; d <= radius; ++d) {
                    const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) + d;
                    if (j < 0 || j >= static_cast<std::ptrdiff_t>(len)) continue;
                    const double wgt = kernel[static_cast<std::size_t>(d + radius)];
                    num += wgt * in[origin + static_cast<std::size_t>(j) * stride];
                    den += wgt;
                }
                out[origin + i * stride] = num / den;
            }
        }
    }
    return out;
}

struct GaussianConfig {
    double spatial_std = 0.8;
    double temporal_std = 0.5;
    /// Truncation radii; ceil(3 std) when unset.
    std::optional<std::size_t> spatial_radius;
    std::optional<std::size_t> temporal_radius;
};

/// Separable Gaussian smoothing along t, u and w with boundary renormalization.
[[nodiscard]] inline GridArray<double> gaussian_filter_3d(const GridArray<double>& in,
                                                          const GaussianConfig& cfg) {
    if (!(cfg.spatial_std >= 0.0) || !(cfg.temporal_std >= 0.0)) {
        throw InvalidArgument("Gaussian standard deviations must be >= 0");
    }
    const auto kt = gaussian_kernel_1d(
        cfg.temporal_std, cfg.temporal_radius.value_or(default_radius(cfg.temporal_std)));
    const auto ks = gaussian_kernel_1d(
        cfg.spatial_std, cfg.spatial_radius.value_or(default_radius(cfg.spatial_std)));
    GridArray<double> out = convolve_axis(in, Axis::t, kt);
    out = convolve_axis(out, Axis::u, ks);
    return convolve_axis(out, Axis::w, ks);
}

[[nodiscard]] inline Video gaussian_filter_3d(const Video& v, const GaussianConfig& cfg) {
    return Video(gaussian_filter_3d(v.array(), cfg));
}

struct BilateralConfig {
    double spatial_std = 2.0;
    double range_std = 0.1;
    /// Window radius; ceil(3 spatial_std) when unset.
    std::optional<std::size_t> radius;
};

/// Edge-preserving per-frame filter. The range weight uses the Euclidean
/// distance between the channel vectors of the two pixels.
[[nodiscard]] inline Video bilateral_filter(const Video& v, const BilateralConfig& cfg) {
    if (!(cfg.spatial_std > 0.0) || !(cfg.range_std > 0.0)) {
        throw InvalidArgument("bilateral standard deviations must be > 0");
    }
    const Grid& g = v.grid();
    const std::size_t c = v.channels();
    const auto r = static_cast<std::ptrdiff_t>(cfg.radius.value_or(default_radius(cfg.spatial_std)));
    const double inv_s = 1.0 / (2.0 * cfg.spatial_std * cfg.spatial_std);
    const double inv_r = 1.0 / (2.0 * cfg.range_std * cfg.range_std);
    const auto rows = static_cast<std::ptrdiff_t>(g.rows());
    const auto cols = static_cast<std::ptrdiff_t>(g.cols());
    const GridArray<double>& in = v.array();

    GridArray<double> out(g, c, 0.0);
    std::vector<double> num(c);
    for (std::size_t t = 0; t < g.frames(); ++t) {
        for (std::ptrdiff_t u = 0; u < rows; ++u) {
            for (std::ptrdiff_t w = 0; w < cols; ++w) {
                const std::size_t p = g.index(t, std::size_t(u), std::size_t(w));
                std::fill(num.begin(), num.end(), 0.0);
                double den = 0.0;
                for (std::ptrdiff_t du = -r; du <= r; ++du) {
                    const std::ptrdiff_t qu = u + du;
                    if (qu < 0 || qu >= rows) continue;
                    for (std::ptrdiff_t dw = -r; dw <= r; ++dw) {
                        const std::ptrdiff_t qw = w + dw;
                        if (qw < 0 || qw >= cols) continue;
                        const std::size_t q = g.index(t, std::size_t(qu), std::size_t(qw));
                        double dist2 = 0.0;
                        for (std::size_t k = 0; k < c; ++k) {
                            const double d = in[p * c + k] - in[q * c + k];
                            dist2 += d * d;
                        }
                        const double wgt =
                            std::exp(-double(du * du + dw * dw) * inv_s - dist2 * inv_r);
                        for (std::size_t k = 0; k < c; ++k) num[k] += wgt * in[q * c + k];
                        den += wgt;
                    }
                }
                for (std::size_t k = 0; k < c; ++k) out[p * c + k] = num[k] / den;
            }
        }
    }
    return Video(std::move(out));
}

struct CutoutConfig {
    std::size_t patch_rows = 64;
    std::size_t patch_cols = 64;
    /// Spatial blur inside the patch.
    double blur_std = 4.0;
    /// Temporal blur inside the patch; 0 blurs each frame independently.
    double temporal_std = 0.0;
    double probability = 0.5;
    std::uint64_t seed = 0;
};

struct PatchLocation {
    std::size_t top = 0;
    std::size_t left = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;

    [[nodiscard]] bool contains(std::size_t u, std::size_t w) const {
        return u >= top && u < top + rows && w >= left && w < left + cols;
    }
};

struct CutoutResult {
    Video video;
    /// Empty when the coin flip left the clip untouched.
    std::optional<PatchLocation> patch;
};

/// Crops rows [top, top+rows) and columns [left, left+cols) of every frame.
[[nodiscard]] inline GridArray<double> crop(const GridArray<double>& in, const PatchLocation& p) {
    const Grid& g = in.grid();
    const std::size_t c = in.channels();
    GridArray<double> out(Grid(g.frames(), p.rows, p.cols), c, 0.0);
    for (std::size_t t = 0; t < g.frames(); ++t)
        for (std::size_t u = 0; u < p.rows; ++u)
            for (std::size_t w = 0; w < p.cols; ++w)
                for (std::size_t k = 0; k < c; ++k)
                    out.at(t, u, w, k) = in.at(t, p.top + u, p.left + w, k);
    return out;
}

/// With probability cfg.probability, replaces one uniformly placed patch
/// (the same location in every frame) with a heavily blurred copy of itself.
/// Pixels outside the patch are copied unchanged.
[[nodiscard]] inline CutoutResult video_cutout(const Video& v, const CutoutConfig& cfg) {
    const Grid& g = v.grid();
    if (cfg.patch_rows == 0 || cfg.patch_cols == 0 || cfg.patch_rows > g.rows() ||
        cfg.patch_cols > g.cols()) {
        throw InvalidArgument("cutout patch " + std::to_string(cfg.patch_rows) + "x" +
                              std::to_string(cfg.patch_cols) + " does not fit a " +
                              std::to_string(g.rows()) + "x" + std::to_string(g.cols()) + " frame");
    }
    if (!(cfg.probability >= 0.0 && cfg.probability <= 1.0)) {
        throw InvalidArgument("cutout probability must lie in [0,1]");
    }
    std::mt19937_64 rng(cfg.seed);
    std::bernoulli_distribution apply(cfg.probability);
    if (!apply(rng)) return CutoutResult{v, std::nullopt};

    std::uniform_int_distribution<std::size_t> top(0, g.rows() - cfg.patch_rows);
    std::uniform_int_distribution<std::size_t> left(0, g.cols() - cfg.patch_cols);
    PatchLocation patch;
    patch.top = top(rng);
    patch.left = left(rng);
    patch.rows = cfg.patch_rows;
    patch.cols = cfg.patch_cols;

    GaussianConfig blur;
    blur.spatial_std = cfg.blur_std;
    blur.temporal_std = cfg.temporal_std;
    const GridArray<double> blurred = gaussian_filter_3d(crop(v.array(), patch), blur);

    GridArray<double> out = v.array();
    const std::size_t c = v.channels();
    for (std::size_t t = 0; t < g.frames(); ++t)
        for (std::size_t u = 0; u < patch.rows; ++u)
            for (std::size_t w = 0; w < patch.cols; ++w)
                for (std::size_t k = 0; k < c; ++k)
                    out.at(t, patch.top + u, patch.left + w, k) = blurred.at(t, u, w, k);
    return CutoutResult{Video(std::move(out)), patch};
}

}  // namespace heatmetrics
