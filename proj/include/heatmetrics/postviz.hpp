#pragma once

#include "heatmetrics/filters.hpp"
#include "heatmetrics/manipulation.hpp"
#include "heatmetrics/tensor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <vector>

namespace heatmetrics {

/// Percentile `p` in [0,100] with linear interpolation between order statistics.
[[nodiscard]] inline double percentile(std::span<const double> values, double p) {
    if (values.empty()) throw InvalidArgument("percentile of an empty set");
    if (!(p >= 0.0 && p <= 100.0)) throw InvalidArgument("percentile must lie in [0,100]");
    std::vector<double> s(values.begin(), values.end());
    std::sort(s.begin(), s.end());
    const double pos = p / 100.0 * static_cast<double>(s.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    if (lo + 1 >= s.size()) return s.back();
    const double frac = pos - static_cast<double>(lo);
    return s[lo] + frac * (s[lo + 1] - s[lo]);
}

struct EnhanceConfig {
    double clip_percentile = 99.0;
    double smooth_std = 1.5;
    /// Optional smoothing across frames; 0 keeps frames independent.
    double temporal_std = 0.0;
};

/// Clips relevance above the given percentile, smooths, and renormalizes.
///
/// A percentile of zero would erase every pixel, so clipping is skipped for
/// heatmaps that are zero on more than (100 - clip_percentile)% of the grid.
[[nodiscard]] inline Heatmap enhance(const Heatmap& h, const EnhanceConfig& cfg = {}) {
    const double ceiling = percentile(h.values(), cfg.clip_percentile);
    GridArray<double> work = h.array();
    if (ceiling > 0.0) {
        for (double& x : work.values()) x = std::min(x, ceiling);
    }
    GaussianConfig smooth;
    smooth.spatial_std = cfg.smooth_std;
    smooth.temporal_std = cfg.temporal_std;
    work = gaussian_filter_3d(work, smooth);
    double total = 0.0;
    for (double x : work.values()) total += x;
    for (double& x : work.values()) x /= total;
    return Heatmap(std::move(work));
}

/// Gaussian summary of one frame's relevance, in (row, column) pixel units.
struct FrameEllipse {
    std::size_t frame = 0;
    double center_u = 0.0;
    double center_w = 0.0;
    /// Covariance eigenvalues, major first.
    double variance_major = 0.0;
    double variance_minor = 0.0;
    /// Half-axis lengths, n_std * sqrt(eigenvalue).
    double axis_major = 0.0;
    double axis_minor = 0.0;
    /// Angle of the major axis from the column (w) axis toward the row (u)
    /// axis, in [-pi/2, pi/2).
    double orientation = 0.0;
    /// Heatmap mass in this frame.
    double mass = 0.0;
};

struct EllipseOverlay {
    std::vector<FrameEllipse> frames;
};

/// Mean and covariance of each frame's normalized relevance. Frames without
/// mass are omitted.
[[nodiscard]] inline EllipseOverlay gaussian_match(const Heatmap& h, double n_std = 2.0) {
    const Grid& g = h.grid();
    EllipseOverlay out;
    for (std::size_t t = 0; t < g.frames(); ++t) {
        double mass = 0.0;
        Eigen::Vector2d mu = Eigen::Vector2d::Zero();  // (w, u)
        for (std::size_t u = 0; u < g.rows(); ++u)
            for (std::size_t w = 0; w < g.cols(); ++w) {
                const double x = h.array().at(t, u, w);
                mass += x;
                mu += x * Eigen::Vector2d(double(w), double(u));
            }
        if (!(mass > 0.0)) continue;
        mu /= mass;
        Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
        for (std::size_t u = 0; u < g.rows(); ++u)
            for (std::size_t w = 0; w < g.cols(); ++w) {
                const double x = h.array().at(t, u, w);
                if (x == 0.0) continue;
                const Eigen::Vector2d d = Eigen::Vector2d(double(w), double(u)) - mu;
                cov.noalias() += x * (d * d.transpose());
            }
        cov /= mass;

        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
        const double lmin = std::max(eig.eigenvalues()(0), 0.0);
        const double lmax = std::max(eig.eigenvalues()(1), 0.0);
        const Eigen::Vector2d major = eig.eigenvectors().col(1);
        double angle = std::atan2(major(1), major(0));
        if (angle >= std::numbers::pi / 2) angle -= std::numbers::pi;
        if (angle < -std::numbers::pi / 2) angle += std::numbers::pi;

        FrameEllipse e;
        e.frame = t;
        e.center_u = mu(1);
        e.center_w = mu(0);
        e.variance_major = lmax;
        e.variance_minor = lmin;
        e.axis_major = n_std * std::sqrt(lmax);
        e.axis_minor = n_std * std::sqrt(lmin);
        e.orientation = angle;
        e.mass = mass;
        out.frames.push_back(e);
    }
    return out;
}

struct Blob {
    std::size_t frame = 0;
    std::size_t u = 0;
    std::size_t w = 0;
    /// Finer standard deviation of the DoG pair where the blob peaked.
    double scale = 0.0;
    /// Scale-normalized DoG response at the peak.
    double response = 0.0;
    /// Heatmap mass within radius sqrt(2) * scale of the centre.
    double score = 0.0;
};

struct BlobSet {
    std::vector<Blob> blobs;
};

struct BlobConfig {
    std::vector<double> scales = {1.0, 2.0, 4.0, 8.0};
    /// Minimum response, relative to the frame's heatmap mass.
    double threshold = 1e-4;
};

namespace detail {

inline double disc_mass(const Heatmap& h, std::size_t t, std::size_t cu, std::size_t cw,
                        double radius) {
    const Grid& g = h.grid();
    const double r2 = radius * radius;
    const auto r = static_cast<std::ptrdiff_t>(std::floor(radius));
    double sum = 0.0;
    for (std::ptrdiff_t du = -r; du <= r; ++du) {
        const std::ptrdiff_t u = static_cast<std::ptrdiff_t>(cu) + du;
        if (u < 0 || u >= static_cast<std::ptrdiff_t>(g.rows())) continue;
        for (std::ptrdiff_t dw = -r; dw <= r; ++dw) {
            const std::ptrdiff_t w = static_cast<std::ptrdiff_t>(cw) + dw;
            if (w < 0 || w >= static_cast<std::ptrdiff_t>(g.cols())) continue;
            if (double(du * du + dw * dw) > r2) continue;
            sum += h.array().at(t, std::size_t(u), std::size_t(w));
        }
    }
    return sum;
}

}  // namespace detail

/// Difference-of-Gaussians blob detector run independently on every frame.
///
/// Layer i of the stack is (L(s_i) - L(s_{i+1})) * 2 s_i s_{i+1} / (s_{i+1}^2 - s_i^2),
/// an estimate of the scale-normalized negative Laplacian at the geometric
/// mean scale. Blobs are strict local maxima over the 3x3 spatial
/// neighbourhood in the same and adjacent layers, above threshold * frame mass.
[[nodiscard]] inline BlobSet detect_blobs(const Heatmap& h, const BlobConfig& cfg = {}) {
    const auto& scales = cfg.scales;
    if (scales.size() < 2) throw InvalidArgument("DoG needs at least two scales");
    for (std::size_t i = 0; i < scales.size(); ++i) {
        if (!(scales[i] > 0.0) || (i > 0 && !(scales[i] > scales[i - 1]))) {
            throw InvalidArgument("DoG scales must be positive and strictly increasing");
        }
    }
    const Grid& g = h.grid();
    const Grid frame_grid(1, g.rows(), g.cols());
    const std::size_t layers = scales.size() - 1;
    BlobSet out;

    for (std::size_t t = 0; t < g.frames(); ++t) {
        GridArray<double> frame(frame_grid);
        double mass = 0.0;
        for (std::size_t i = 0; i < frame_grid.size(); ++i) {
            frame[i] = h[t * frame_grid.size() + i];
            mass += frame[i];
        }
        if (!(mass > 0.0)) continue;

        std::vector<GridArray<double>> blurred;
        for (double s : scales) {
            GaussianConfig gc;
            gc.spatial_std = s;
            gc.temporal_std = 0.0;
            blurred.push_back(gaussian_filter_3d(frame, gc));
        }
        std::vector<GridArray<double>> dog;
        for (std::size_t i = 0; i < layers; ++i) {
            const double s0 = scales[i], s1 = scales[i + 1];
            const double norm = 2.0 * s0 * s1 / (s1 * s1 - s0 * s0);
            GridArray<double> d(frame_grid);
            for (std::size_t k = 0; k < d.size(); ++k) d[k] = (blurred[i][k] - blurred[i + 1][k]) * norm;
            dog.push_back(std::move(d));
        }

        const double floor = cfg.threshold * mass;
        const auto rows = static_cast<std::ptrdiff_t>(g.rows());
        const auto cols = static_cast<std::ptrdiff_t>(g.cols());
        for (std::size_t layer = 0; layer < layers; ++layer) {
            for (std::ptrdiff_t u = 0; u < rows; ++u) {
                for (std::ptrdiff_t w = 0; w < cols; ++w) {
                    const double v = dog[layer].at(0, std::size_t(u), std::size_t(w));
                    if (!(v > floor)) continue;
                    bool is_max = true;
                    for (std::ptrdiff_t dl = -1; dl <= 1 && is_max; ++dl) {
                        const std::ptrdiff_t l = static_cast<std::ptrdiff_t>(layer) + dl;
                        if (l < 0 || l >= static_cast<std::ptrdiff_t>(layers)) continue;
                        for (std::ptrdiff_t du = -1; du <= 1 && is_max; ++du) {
                            for (std::ptrdiff_t dw = -1; dw <= 1; ++dw) {
                                if (dl == 0 && du == 0 && dw == 0) continue;
                                const std::ptrdiff_t nu = u + du, nw = w + dw;
                                if (nu < 0 || nu >= rows || nw < 0 || nw >= cols) continue;
                                if (!(v > dog[std::size_t(l)].at(0, std::size_t(nu), std::size_t(nw)))) {
                                    is_max = false;
                                    break;
                                }
                            }
                        }
                    }
                    if (!is_max) continue;
                    Blob b;
                    b.frame = t;
                    b.u = std::size_t(u);
                    b.w = std::size_t(w);
                    b.scale = scales[layer];
                    b.response = v;
                    b.score = detail::disc_mass(h, t, b.u, b.w, std::numbers::sqrt2 * b.scale);
                    out.blobs.push_back(b);
                }
            }
        }
    }
    std::stable_sort(out.blobs.begin(), out.blobs.end(),
                     [](const Blob& a, const Blob& b) { return a.score > b.score; });
    return out;
}

/// Heatmap mass per part label; every vocabulary entry is present.
using PartRelevance = std::map<Part, double>;

[[nodiscard]] inline PartRelevance semantic_aggregate(const Heatmap& h, const PartMask& parts) {
    require_same_grid(h.grid(), parts.grid(), "semantic_aggregate");
    PartRelevance out;
    for (Part p : kAllParts) out[p] = mass_inside(h, BinaryMask::of_part(parts, p));
    return out;
}

}  // namespace heatmetrics
