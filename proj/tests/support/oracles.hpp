#pragma once

// Independent brute-force reference computations. Nothing here calls into
// the library's metric code; only the plain data types are shared.

#include "heatmetrics/classifier.hpp"
#include "heatmetrics/tensor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <tuple>
#include <vector>

namespace oracle {

using heatmetrics::GridArray;

inline bool rel_close(double a, double b, double tol) {
    const double scale = std::max(std::abs(a), std::abs(b));
    if (scale < 1e-300) return true;
    return std::abs(a - b) <= tol * scale;
}

inline double at(const std::vector<double>& v, std::size_t H, std::size_t W, std::size_t t,
                 std::size_t u, std::size_t w) {
    return v[t * H * W + u * W + w];
}

/// (1/N) sum over pixels of the forward-difference L1 gradient.
inline double total_variation(const std::vector<double>& v, std::size_t T, std::size_t H,
                              std::size_t W) {
    double sum = 0.0;
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t u = 0; u < H; ++u)
            for (std::size_t w = 0; w < W; ++w) {
                const double here = at(v, H, W, t, u, w);
                if (t + 1 < T) sum += std::abs(here - at(v, H, W, t + 1, u, w));
                if (u + 1 < H) sum += std::abs(here - at(v, H, W, t, u + 1, w));
                if (w + 1 < W) sum += std::abs(here - at(v, H, W, t, u, w + 1));
            }
    return sum / double(T * H * W);
}

/// Sum of per-line 1D total variations, each line extracted into its own vector.
inline double anisotropic_tv(const std::vector<double>& v, std::size_t T, std::size_t H,
                             std::size_t W) {
    auto line_tv = [](const std::vector<double>& line) {
        double s = 0.0;
        for (std::size_t i = 1; i < line.size(); ++i) s += std::abs(line[i] - line[i - 1]);
        return s;
    };
    double sum = 0.0;
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t u = 0; u < H; ++u) {
            std::vector<double> line;
            for (std::size_t w = 0; w < W; ++w) line.push_back(at(v, H, W, t, u, w));
            sum += line_tv(line);
        }
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t w = 0; w < W; ++w) {
            std::vector<double> line;
            for (std::size_t u = 0; u < H; ++u) line.push_back(at(v, H, W, t, u, w));
            sum += line_tv(line);
        }
    for (std::size_t u = 0; u < H; ++u)
        for (std::size_t w = 0; w < W; ++w) {
            std::vector<double> line;
            for (std::size_t t = 0; t < T; ++t) line.push_back(at(v, H, W, t, u, w));
            sum += line_tv(line);
        }
    return sum / double(T * H * W);
}

/// Textbook Gini: ascending sort, (2/N) sum i h_i / sum h_i - (N+1)/N.
inline double gini(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const double n = double(v.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        num += double(i + 1) * v[i];
        den += v[i];
    }
    return 2.0 / n * num / den - (n + 1.0) / n;
}

using Mat3 = std::array<std::array<double, 3>, 3>;

/// Covariance via the pairwise identity Cov = 1/2 sum_ij h_i h_j (p_i - p_j)(p_i - p_j)^T,
/// valid for unit-mass weights.
inline Mat3 covariance_pairwise(const std::vector<double>& v, std::size_t T, std::size_t H,
                                std::size_t W) {
    (void)T;
    Mat3 c{};
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double pi[3] = {double(i / (H * W)), double((i / W) % H), double(i % W)};
        for (std::size_t j = 0; j < n; ++j) {
            const double pj[3] = {double(j / (H * W)), double((j / W) % H), double(j % W)};
            const double wgt = 0.5 * v[i] * v[j];
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) c[a][b] += wgt * (pi[a] - pj[a]) * (pi[b] - pj[b]);
        }
    }
    return c;
}

inline double det3(const Mat3& m) {
    return m[0][0] * m[1][1] * m[2][2] + m[0][1] * m[1][2] * m[2][0] + m[0][2] * m[1][0] * m[2][1] -
           m[0][2] * m[1][1] * m[2][0] - m[0][0] * m[1][2] * m[2][1] - m[0][1] * m[1][0] * m[2][2];
}

inline double masked_sum(const std::vector<double>& v, const std::vector<std::uint8_t>& mask) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (mask[i]) s += v[i];
    return s;
}

/// Full lexicographic sort on (-relevance, t, u, w), then count mask hits in the prefix.
inline double precision_at_k(const std::vector<double>& v, const std::vector<std::uint8_t>& mask,
                             std::size_t H, std::size_t W, std::size_t k) {
    std::vector<std::tuple<double, std::size_t, std::size_t, std::size_t, std::size_t>> keyed;
    for (std::size_t i = 0; i < v.size(); ++i)
        keyed.emplace_back(-v[i], i / (H * W), (i / W) % H, i % W, i);
    std::sort(keyed.begin(), keyed.end());
    const std::size_t take = std::min(k, v.size());
    std::size_t hits = 0;
    for (std::size_t r = 0; r < take; ++r) hits += mask[std::get<4>(keyed[r])] ? 1 : 0;
    return double(hits) / double(take);
}

struct Curve {
    std::vector<double> alphas;
    std::vector<double> confidences;
    double score = 0.0;
};

/// Removes pixels one at a time in (relevance desc, index asc) order and
/// evaluates f after every removal prefix.
inline Curve exhaustive_deletion(const heatmetrics::DifferentiableClassifier& f,
                                 const GridArray<double>& video, const std::vector<double>& h) {
    std::vector<std::size_t> order(h.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return h[a] != h[b] ? h[a] > h[b] : a < b;
    });
    double total = 0.0;
    for (std::size_t i : order) total += h[i];
    Curve c;
    c.alphas.push_back(0.0);
    c.confidences.push_back(f.evaluate(video));
    GridArray<double> work = video;
    double removed = 0.0;
    for (std::size_t pixel : order) {
        removed += h[pixel];
        for (double& x : work.pixel(pixel)) x = 0.0;
        c.alphas.push_back(removed / total);
        c.confidences.push_back(f.evaluate(work));
    }
    double area = 0.0;
    for (std::size_t i = 1; i < c.alphas.size(); ++i)
        area += 0.5 * (c.alphas[i] - c.alphas[i - 1]) * (c.confidences[i] + c.confidences[i - 1]);
    c.score = area / (c.alphas.back() - c.alphas.front());
    return c;
}

/// Central finite differences of f at v.
inline std::vector<double> finite_difference_gradient(const heatmetrics::DifferentiableClassifier& f,
                                                      const GridArray<double>& v,
                                                      double step = 1e-5) {
    std::vector<double> g(v.size());
    GridArray<double> probe = v;
    for (std::size_t i = 0; i < v.size(); ++i) {
        probe[i] = v[i] + step;
        const double hi = f.evaluate(probe);
        probe[i] = v[i] - step;
        const double lo = f.evaluate(probe);
        probe[i] = v[i];
        g[i] = (hi - lo) / (2.0 * step);
    }
    return g;
}

inline std::vector<double> gaussian_taps(double std, std::size_t radius) {
    std::vector<double> k;
    if (std == 0.0) return {1.0};
    for (std::size_t i = 0; i <= 2 * radius; ++i) {
        const double d = double(i) - double(radius);
        k.push_back(std::exp(-d * d / (2 * std * std)));
    }
    return k;
}

/// Non-separable 3D convolution with boundary renormalization over the full box.
inline GridArray<double> direct_gaussian_3d(const GridArray<double>& in, double temporal_std,
                                            std::size_t rt, double spatial_std, std::size_t rs) {
    const auto kt = gaussian_taps(temporal_std, rt);
    const auto ks = gaussian_taps(spatial_std, rs);
    const long Rt = long(kt.size() / 2), Rs = long(ks.size() / 2);
    const auto& g = in.grid();
    GridArray<double> out(g, in.channels(), 0.0);
    for (std::size_t t = 0; t < g.frames(); ++t)
        for (std::size_t u = 0; u < g.rows(); ++u)
            for (std::size_t w = 0; w < g.cols(); ++w)
                for (std::size_t c = 0; c < in.channels(); ++c) {
                    double num = 0.0, den = 0.0;
                    for (long dt = -Rt; dt <= Rt; ++dt)
                        for (long du = -Rs; du <= Rs; ++du)
                            for (long dw = -Rs; dw <= Rs; ++dw) {
                                const long qt = long(t) + dt, qu = long(u) + du, qw = long(w) + dw;
                                if (qt < 0 || qu < 0 || qw < 0 || qt >= long(g.frames()) ||
                                    qu >= long(g.rows()) || qw >= long(g.cols()))
                                    continue;
                                const double k = kt[std::size_t(dt + Rt)] * ks[std::size_t(du + Rs)] *
                                                 ks[std::size_t(dw + Rs)];
                                num += k * in.at(std::size_t(qt), std::size_t(qu), std::size_t(qw), c);
                                den += k;
                            }
                    out.at(t, u, w, c) = num / den;
                }
    return out;
}

/// Direct per-frame bilateral filter over a square window.
inline GridArray<double> direct_bilateral(const GridArray<double>& in, double spatial_std,
                                          double range_std, long radius) {
    const auto& g = in.grid();
    const std::size_t C = in.channels();
    GridArray<double> out(g, C, 0.0);
    for (std::size_t t = 0; t < g.frames(); ++t)
        for (long u = 0; u < long(g.rows()); ++u)
            for (long w = 0; w < long(g.cols()); ++w) {
                std::vector<double> num(C, 0.0);
                double den = 0.0;
                for (long qu = u - radius; qu <= u + radius; ++qu)
                    for (long qw = w - radius; qw <= w + radius; ++qw) {
                        if (qu < 0 || qw < 0 || qu >= long(g.rows()) || qw >= long(g.cols())) continue;
                        double d2 = 0.0;
                        for (std::size_t c = 0; c < C; ++c) {
                            const double d = in.at(t, std::size_t(u), std::size_t(w), c) -
                                             in.at(t, std::size_t(qu), std::size_t(qw), c);
                            d2 += d * d;
                        }
                        const double s2 = double((qu - u) * (qu - u) + (qw - w) * (qw - w));
                        const double k = std::exp(-s2 / (2 * spatial_std * spatial_std)) *
                                         std::exp(-d2 / (2 * range_std * range_std));
                        for (std::size_t c = 0; c < C; ++c)
                            num[c] += k * in.at(t, std::size_t(qu), std::size_t(qw), c);
                        den += k;
                    }
                for (std::size_t c = 0; c < C; ++c) out.at(t, std::size_t(u), std::size_t(w), c) = num[c] / den;
            }
    return out;
}

/// Random unit-mass weights; every fourth draw is quantized to force ties.
inline std::vector<double> random_heatmap_values(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const bool quantize = seed % 4 == 0;
    std::vector<double> v(n);
    double total = 0.0;
    for (double& x : v) {
        x = unit(rng);
        if (quantize) x = std::floor(x * 4.0) / 4.0;
        total += x;
    }
    if (total == 0.0) {
        v[0] = 1.0;
        total = 1.0;
    }
    for (double& x : v) x /= total;
    return v;
}

}  // namespace oracle
