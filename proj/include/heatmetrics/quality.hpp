#pragma once

#include "heatmetrics/tensor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace heatmetrics {

/// Smoothness, locality and sparsity of one heatmap.
struct QualityScores {
    double tv = 0.0;
    /// |det(covariance)|, in pixel^6.
    double sigma_det = 0.0;
    /// Cube root of sigma_det.
    double sigma_cuberoot = 0.0;
    double gini = 0.0;
    std::array<double, 3> mean{};
    Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
    /// Covariance has rank < 3, so sigma_det is zero up to rounding.
    bool rank_deficient = false;
};

/// Mean L1 norm of forward differences, (1/N) sum_p grad_l1(h, p).
[[nodiscard]] inline double total_variation(const Heatmap& h) {
    const Grid& g = h.grid();
    double sum = 0.0;
    for (std::size_t t = 0; t < g.frames(); ++t)
        for (std::size_t u = 0; u < g.rows(); ++u)
            for (std::size_t w = 0; w < g.cols(); ++w)
                sum += discrete_gradient_l1(h.array(), Coord{t, u, w});
    return sum / static_cast<double>(g.size());
}

struct Locality {
    std::array<double, 3> mean{};
    Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
    double sigma_det = 0.0;
    double sigma_cuberoot = 0.0;
    bool rank_deficient = false;
};

/// Moments of the heatmap viewed as a distribution over 0-based (t, u, w)
/// coordinates, and the volume |det| of its covariance.
[[nodiscard]] inline Locality locality(const Heatmap& h) {
    const Grid& g = h.grid();
    Locality out;
    Eigen::Vector3d mu = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Coord c = g.coord(i);
        mu += h[i] * Eigen::Vector3d(double(c.t), double(c.u), double(c.w));
    }
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (h[i] == 0.0) continue;
        const Coord c = g.coord(i);
        const Eigen::Vector3d d = Eigen::Vector3d(double(c.t), double(c.u), double(c.w)) - mu;
        for (int r = 0; r < 3; ++r)
            for (int k = r; k < 3; ++k) cov(r, k) += h[i] * d(r) * d(k);
    }
    for (int r = 0; r < 3; ++r)
        for (int k = 0; k < r; ++k) cov(r, k) = cov(k, r);
    out.mean = {mu(0), mu(1), mu(2)};
    out.covariance = cov;
    out.sigma_det = std::abs(cov.determinant());
    out.sigma_cuberoot = std::cbrt(out.sigma_det);

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov, Eigen::EigenvaluesOnly);
    const Eigen::Vector3d lambda = eig.eigenvalues();
    const double scale = std::max(lambda.cwiseAbs().maxCoeff(), 1.0);
    out.rank_deficient = lambda.minCoeff() <= 1e-12 * scale;
    return out;
}

/// Gini sparsity index of the values of `values` (any nonnegative weights,
/// not necessarily normalized). 0 for equal weights, (N-1)/N for one nonzero.
///
/// Evaluated as sum_i (2i - N - 1) h_(i) / (N sum_i h_(i)) over the ascending
/// order, with equal values grouped into runs whose integer rank weights are
/// accumulated exactly. Ties therefore never influence the result.
[[nodiscard]] inline double gini_index(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n == 0) throw InvalidArgument("gini index of an empty set");
    std::vector<double> sorted(values.begin(), values.end());
    std::stable_sort(sorted.begin(), sorted.end());
    const auto big_n = static_cast<std::int64_t>(n);
    double weighted = 0.0;
    double total = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && sorted[j] == sorted[i]) ++j;
        // 1-based ranks i+1 .. j
        const auto first = static_cast<std::int64_t>(i + 1);
        const auto last = static_cast<std::int64_t>(j);
        const std::int64_t count = last - first + 1;
        const std::int64_t rank_sum = (first + last) * count / 2;
        const std::int64_t weight = 2 * rank_sum - (big_n + 1) * count;
        weighted += sorted[i] * static_cast<double>(weight);
        total += sorted[i] * static_cast<double>(count);
        i = j;
    }
    if (!(total > 0.0)) throw InvalidArgument("gini index of an all-zero set");
    return weighted / (static_cast<double>(n) * total);
}

[[nodiscard]] inline double gini_index(const Heatmap& h) { return gini_index(h.values()); }

/// Sum of the 1D total variations of every axis-parallel line of a T x H x W
/// tensor, divided by T*H*W.
[[nodiscard]] inline double anisotropic_tv(const GridArray<double>& a) {
    if (a.channels() != 1) throw InvalidArgument("anisotropic_tv expects a single-channel tensor");
    const Grid& g = a.grid();
    double sum = 0.0;
    // Lines along w.
    for (std::size_t t = 0; t < g.frames(); ++t)
        for (std::size_t u = 0; u < g.rows(); ++u)
            for (std::size_t w = 0; w + 1 < g.cols(); ++w)
                sum += std::abs(a.at(t, u, w + 1) - a.at(t, u, w));
    // Lines along u.
    for (std::size_t t = 0; t < g.frames(); ++t)
        for (std::size_t w = 0; w < g.cols(); ++w)
            for (std::size_t u = 0; u + 1 < g.rows(); ++u)
                sum += std::abs(a.at(t, u + 1, w) - a.at(t, u, w));
    // Lines along t.
    for (std::size_t u = 0; u < g.rows(); ++u)
        for (std::size_t w = 0; w < g.cols(); ++w)
            for (std::size_t t = 0; t + 1 < g.frames(); ++t)
                sum += std::abs(a.at(t + 1, u, w) - a.at(t, u, w));
    return sum / static_cast<double>(g.size());
}

[[nodiscard]] inline QualityScores quality_scores(const Heatmap& h) {
    QualityScores s;
    s.tv = total_variation(h);
    const Locality loc = locality(h);
    s.mean = loc.mean;
    s.covariance = loc.covariance;
    s.sigma_det = loc.sigma_det;
    s.sigma_cuberoot = loc.sigma_cuberoot;
    s.rank_deficient = loc.rank_deficient;
    s.gini = gini_index(h);
    return s;
}

}  // namespace heatmetrics
