#pragma once

#include "heatmetrics/classifier.hpp"
#include "heatmetrics/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

namespace heatmetrics {

struct SmoothGradConfig {
    std::size_t samples = 25;
    /// Noise standard deviation as a fraction of the intensity range [0,1].
    double noise_scale = 0.15;
    std::uint64_t seed = 0;
};

struct IntegratedGradConfig {
    std::size_t steps = 25;
    /// Path start; an all-black clip when unset.
    std::optional<Video> baseline;
};

namespace detail {

inline GridArray<double> checked_gradient(const DifferentiableClassifier& f,
                                          const GridArray<double>& v) {
    GridArray<double> g = f.gradient(v);
    if (g.grid() != v.grid() || g.channels() != v.channels()) {
        throw GridMismatch(f.name() + ": gradient shape differs from its input");
    }
    for (double x : g.values()) {
        if (!std::isfinite(x)) throw NonFiniteGradient(f.name() + ": gradient is not finite");
    }
    return g;
}

/// mean += (x - mean) / k. Exact when every sample is identical.
inline void running_mean_update(GridArray<double>& mean, const GridArray<double>& x,
                                std::size_t k) {
    const double inv = 1.0 / static_cast<double>(k);
    if (k == 1) {
        mean = x;
        return;
    }
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += (x[i] - mean[i]) * inv;
}

}  // namespace detail

/// Plain gradient of f at v.
[[nodiscard]] inline RawAttribution sensitivity(const DifferentiableClassifier& f, const Video& v) {
    return RawAttribution(detail::checked_gradient(f, v.array()));
}

[[nodiscard]] inline RawAttribution gradient_times_input(const DifferentiableClassifier& f,
                                                         const Video& v) {
    GridArray<double> g = detail::checked_gradient(f, v.array());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] *= v.array()[i];
    return RawAttribution(std::move(g));
}

/// Average gradient over `samples` copies of v with i.i.d. Gaussian noise of
/// standard deviation noise_scale added per element. Noisy inputs are not
/// clamped back to [0,1].
[[nodiscard]] inline RawAttribution smoothgrad(const DifferentiableClassifier& f, const Video& v,
                                               const SmoothGradConfig& cfg) {
    if (cfg.samples == 0) throw InvalidArgument("smoothgrad needs at least one sample");
    if (!(cfg.noise_scale >= 0.0)) throw InvalidArgument("smoothgrad noise_scale must be >= 0");
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    GridArray<double> mean(v.grid(), v.channels(), 0.0);
    GridArray<double> noisy = v.array();
    for (std::size_t s = 1; s <= cfg.samples; ++s) {
        if (cfg.noise_scale > 0.0) {
            for (std::size_t i = 0; i < noisy.size(); ++i)
                noisy[i] = v.array()[i] + cfg.noise_scale * normal(rng);
        }
        detail::running_mean_update(mean, detail::checked_gradient(f, noisy), s);
    }
    return RawAttribution(std::move(mean));
}

/// (v - v_b) times the midpoint-rule average of the gradient along the
/// straight path from v_b to v.
[[nodiscard]] inline RawAttribution integrated_gradients(const DifferentiableClassifier& f,
                                                         const Video& v,
                                                         const IntegratedGradConfig& cfg) {
    if (cfg.steps == 0) throw InvalidArgument("integrated gradients needs at least one step");
    const GridArray<double> baseline =
        cfg.baseline ? cfg.baseline->array() : GridArray<double>(v.grid(), v.channels(), 0.0);
    if (baseline.grid() != v.grid() || baseline.channels() != v.channels()) {
        throw GridMismatch("integrated gradients baseline shape differs from the input");
    }
    GridArray<double> mean(v.grid(), v.channels(), 0.0);
    GridArray<double> point(v.grid(), v.channels(), 0.0);
    for (std::size_t k = 0; k < cfg.steps; ++k) {
        const double alpha = (static_cast<double>(k) + 0.5) / static_cast<double>(cfg.steps);
        for (std::size_t i = 0; i < point.size(); ++i)
            point[i] = baseline[i] + alpha * (v.array()[i] - baseline[i]);
        detail::running_mean_update(mean, detail::checked_gradient(f, point), k + 1);
    }
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] *= v.array()[i] - baseline[i];
    return RawAttribution(std::move(mean));
}

/// Pixel removal order: descending relevance, ties by ascending (t,u,w).
[[nodiscard]] inline std::vector<std::size_t> relevance_order(const Heatmap& h) {
    std::vector<std::size_t> order(h.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return h[a] > h[b]; });
    return order;
}

/// Splits the relevance order into at most `bins` consecutive groups of about
/// equal relevance. Returns the exclusive end offset of each group.
///
/// Greedy: a group closes once its relevance reaches (remaining relevance) /
/// (remaining groups), always keeping at least one pixel for every later
/// group. The last group takes everything left. bins >= N gives one pixel
/// per group.
[[nodiscard]] inline std::vector<std::size_t> relevance_bins(const Heatmap& h,
                                                             std::span<const std::size_t> order,
                                                             std::size_t bins) {
    if (bins == 0) throw InvalidArgument("deletion needs at least one bin");
    const std::size_t n = order.size();
    bins = std::min(bins, n);
    std::vector<std::size_t> ends;
    ends.reserve(bins);
    double remaining = 0.0;
    for (std::size_t i : order) remaining += h[i];
    std::size_t pos = 0;
    for (std::size_t b = 0; b < bins; ++b) {
        const std::size_t groups_left = bins - b;
        if (groups_left == 1) {
            ends.push_back(n);
            break;
        }
        const double target = remaining / static_cast<double>(groups_left);
        const std::size_t last_allowed = n - (groups_left - 1);
        double acc = 0.0;
        do {
            acc += h[order[pos]];
            ++pos;
        } while (pos < last_allowed && acc < target * (1.0 - 1e-12));
        remaining -= acc;
        ends.push_back(pos);
    }
    return ends;
}

/// Confidence as a function of the cumulative relevance removed.
struct DeletionCurve {
    std::vector<double> alphas;
    std::vector<double> confidences;
    /// Number of pixels removed at each point of the curve.
    std::vector<std::size_t> removed;
    double score = 0.0;
};

/// Trapezoidal area under (alphas, confidences) divided by the alpha span.
[[nodiscard]] inline double curve_area(std::span<const double> alphas,
                                       std::span<const double> confidences) {
    double area = 0.0;
    for (std::size_t i = 1; i < alphas.size(); ++i)
        area += 0.5 * (alphas[i] - alphas[i - 1]) * (confidences[i] + confidences[i - 1]);
    const double span = alphas.back() - alphas.front();
    return span > 0.0 ? area / span : confidences.front();
}

/// Zeroes pixels (all channels) in decreasing relevance, one bin at a time,
/// recording f after every bin. Lower scores indicate a more faithful heatmap.
[[nodiscard]] inline DeletionCurve deletion_score(const DifferentiableClassifier& f, const Video& v,
                                                  const Heatmap& h, std::size_t bins = 25) {
    require_same_grid(v.grid(), h.grid(), "deletion_score");
    const std::vector<std::size_t> order = relevance_order(h);
    const std::vector<std::size_t> ends = relevance_bins(h, order, bins);

    double total = 0.0;
    for (std::size_t i : order) total += h[i];
    if (!(total > 0.0)) throw DegenerateHeatmap("deletion_score: heatmap has no mass");

    DeletionCurve curve;
    GridArray<double> masked = v.array();
    const std::size_t c = v.channels();
    curve.alphas.push_back(0.0);
    curve.confidences.push_back(f.evaluate(masked));
    curve.removed.push_back(0);

    double cumulative = 0.0;
    std::size_t pos = 0;
    for (std::size_t end : ends) {
        for (; pos < end; ++pos) {
            const std::size_t pixel = order[pos];
            cumulative += h[pixel];
            for (std::size_t k = 0; k < c; ++k) masked[pixel * c + k] = 0.0;
        }
        curve.alphas.push_back(cumulative / total);
        curve.confidences.push_back(f.evaluate(masked));
        curve.removed.push_back(end);
    }
    curve.score = curve_area(curve.alphas, curve.confidences);
    return curve;
}

}  // namespace heatmetrics
