#pragma once

// Deterministic synthetic clips, heatmaps and part layouts for tests and demos.

#include "heatmetrics/filters.hpp"
#include "heatmetrics/manipulation.hpp"
#include "heatmetrics/tensor.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>

namespace heatmetrics::fixtures {

enum class Pattern { uniform, one_hot, gaussian_blob, checkerboard, ramp, random };

struct HeatmapSpec {
    Pattern kind = Pattern::uniform;
    Grid grid;
    /// one_hot position.
    Coord at;
    /// gaussian_blob centre (t, u, w) and standard deviations.
    std::array<double, 3> center{};
    double std = 1.0;
    /// 0 puts all mass on the frame nearest center[0].
    double temporal_std = 0.0;
    std::uint64_t seed = 0;
};

[[nodiscard]] inline Heatmap make_heatmap(const HeatmapSpec& spec) {
    const Grid& g = spec.grid;
    GridArray<double> w(g, 1, 0.0);
    switch (spec.kind) {
        case Pattern::uniform:
            for (double& x : w.values()) x = 1.0;
            break;
        case Pattern::one_hot:
            if (!g.contains(spec.at)) throw OutOfGrid("one-hot position outside grid " + g.to_string());
            w.at(spec.at.t, spec.at.u, spec.at.w) = 1.0;
            break;
        case Pattern::gaussian_blob: {
            const double ext[3] = {double(g.frames()), double(g.rows()), double(g.cols())};
            for (int k = 0; k < 3; ++k) {
                if (!(spec.center[std::size_t(k)] >= 0.0 && spec.center[std::size_t(k)] <= ext[k] - 1.0)) {
                    throw OutOfGrid("blob centre outside grid " + g.to_string());
                }
            }
            if (!(spec.std > 0.0) || !(spec.temporal_std >= 0.0)) {
                throw InvalidArgument("blob standard deviations must be positive");
            }
            for (std::size_t t = 0; t < g.frames(); ++t) {
                const double dt = double(t) - spec.center[0];
                double wt;
                if (spec.temporal_std > 0.0) wt = std::exp(-dt * dt / (2 * spec.temporal_std * spec.temporal_std));
                else wt = std::abs(dt) < 0.5 ? 1.0 : 0.0;
                for (std::size_t u = 0; u < g.rows(); ++u)
                    for (std::size_t x = 0; x < g.cols(); ++x) {
                        const double du = double(u) - spec.center[1], dw = double(x) - spec.center[2];
                        w.at(t, u, x) = wt * std::exp(-(du * du + dw * dw) / (2 * spec.std * spec.std));
                    }
            }
            break;
        }
        case Pattern::checkerboard:
            for (std::size_t i = 0; i < g.size(); ++i) {
                const Coord c = g.coord(i);
                w[i] = (c.t + c.u + c.w) % 2 == 0 ? 1.0 : 0.0;
            }
            break;
        case Pattern::ramp:
            for (std::size_t i = 0; i < g.size(); ++i) w[i] = double(i + 1);
            break;
        case Pattern::random: {
            std::mt19937_64 rng(spec.seed);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            for (double& x : w.values()) x = unit(rng);
            break;
        }
    }
    return normalize_attribution(RawAttribution(std::move(w)));
}

/// Rectangular stand-in for a face parser: every pixel of every frame gets
/// exactly one label. Proportions depend only on the frame size.
[[nodiscard]] inline PartMask face_layout(const Grid& g) {
    GridArray<std::uint8_t> labels(g);
    const std::size_t H = g.rows(), W = g.cols();
    for (std::size_t t = 0; t < g.frames(); ++t) {
        for (std::size_t u = 0; u < H; ++u) {
            for (std::size_t x = 0; x < W; ++x) {
                // Positions in 40ths of the frame extent.
                const std::size_t fu = 40 * u, fw = 40 * x;
                Part p;
                if (fw < 5 * W || fw >= 35 * W) {
                    p = Part::background;
                } else if (fw < 10 * W || fw >= 30 * W) {
                    p = (fu >= 15 * H && fu < 25 * H) ? Part::ears : Part::background;
                } else if (fu < 10 * H) {
                    p = Part::face;
                } else if (fu < 16 * H) {
                    p = Part::eyes;
                } else if (fu < 24 * H) {
                    p = (fw >= 15 * W && fw < 25 * W) ? Part::nose : Part::face;
                } else if (fu < 32 * H) {
                    p = (fw >= 12 * W && fw < 28 * W) ? Part::mouth : Part::face;
                } else {
                    p = Part::face;
                }
                labels.at(t, u, x) = static_cast<std::uint8_t>(p);
            }
        }
    }
    return PartMask(std::move(labels));
}

struct VideoSpec {
    Pattern kind = Pattern::random;
    Grid grid;
    std::size_t channels = 3;
    /// Intensity of uniform clips; lower bound of the other patterns.
    double level = 0.2;
    /// Upper bound of ramp, checkerboard and random patterns.
    double high = 0.8;
    std::uint64_t seed = 0;
};

[[nodiscard]] inline Video make_video(const VideoSpec& spec) {
    if (!(spec.level >= 0.0 && spec.high <= 1.0 && spec.level <= spec.high)) {
        throw InvalidArgument("video levels must satisfy 0 <= level <= high <= 1");
    }
    const Grid& g = spec.grid;
    GridArray<double> v(g, spec.channels, spec.level);
    const double span = spec.high - spec.level;
    switch (spec.kind) {
        case Pattern::uniform: break;
        case Pattern::ramp:
            for (std::size_t i = 0; i < v.size(); ++i)
                v[i] = spec.level + span * double(i) / double(std::max<std::size_t>(v.size() - 1, 1));
            break;
        case Pattern::checkerboard:
            for (std::size_t i = 0; i < g.size(); ++i) {
                const Coord c = g.coord(i);
                for (double& x : v.pixel(i)) x = (c.t + c.u + c.w) % 2 == 0 ? spec.high : spec.level;
            }
            break;
        case Pattern::one_hot:
        case Pattern::gaussian_blob:
        case Pattern::random: {
            std::mt19937_64 rng(spec.seed);
            std::uniform_real_distribution<double> unit(spec.level, spec.high);
            for (double& x : v.values()) x = unit(rng);
            break;
        }
    }
    return Video(std::move(v));
}

struct PairSpec {
    Grid grid;
    std::size_t channels = 3;
    std::uint64_t seed = 0;
    Part planted = Part::mouth;
    /// Intensity added to the fake inside the planted part.
    double offset = 0.1;
};

struct AlignedPair {
    Video real;
    Video fake;
    PartMask parts;
};

/// Real clip with random content in [0.2, 0.8]; the fake equals it except
/// inside the planted part, where `offset` is added.
[[nodiscard]] inline AlignedPair make_aligned_pair(const PairSpec& spec) {
    if (!(spec.offset >= 0.0 && spec.offset <= 0.2)) throw InvalidArgument("offset must lie in [0, 0.2]");
    PartMask parts = face_layout(spec.grid);
    if (parts.count(spec.planted) == 0) {
        throw EmptyPart("frame " + spec.grid.to_string() + " too small for part '" +
                        std::string(part_name(spec.planted)) + "'");
    }
    VideoSpec vs;
    vs.kind = Pattern::random;
    vs.grid = spec.grid;
    vs.channels = spec.channels;
    vs.seed = spec.seed;
    Video real = make_video(vs);
    GridArray<double> fake = real.array();
    for (std::size_t i = 0; i < spec.grid.size(); ++i) {
        if (parts.at(i) != spec.planted) continue;
        for (double& x : fake.pixel(i)) x += spec.offset;
    }
    return AlignedPair{std::move(real), Video(std::move(fake)), std::move(parts)};
}

}  // namespace heatmetrics::fixtures
