#pragma once

#include "heatmetrics/error.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace heatmetrics {

/// Pixel coordinate (frame, row, column), 0-based.
struct Coord {
    std::size_t t = 0;
    std::size_t u = 0;
    std::size_t w = 0;

    friend bool operator==(const Coord&, const Coord&) = default;
};

/// The discrete spatio-temporal grid of a clip: frames x rows x columns.
class Grid {
public:
    Grid() = default;
    Grid(std::size_t frames, std::size_t rows, std::size_t cols)
        : frames_(frames), rows_(rows), cols_(cols) {
        if (frames == 0 || rows == 0 || cols == 0) {
            throw InvalidArgument("grid extents must all be >= 1, got " + to_string());
        }
    }

    [[nodiscard]] std::size_t frames() const { return frames_; }
    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }
    [[nodiscard]] std::size_t size() const { return frames_ * rows_ * cols_; }
    [[nodiscard]] std::size_t frame_size() const { return rows_ * cols_; }

    [[nodiscard]] bool contains(const Coord& c) const {
        return c.t < frames_ && c.u < rows_ && c.w < cols_;
    }

    [[nodiscard]] std::size_t index(std::size_t t, std::size_t u, std::size_t w) const {
        return (t * rows_ + u) * cols_ + w;
    }
    [[nodiscard]] std::size_t index(const Coord& c) const { return index(c.t, c.u, c.w); }

    [[nodiscard]] Coord coord(std::size_t index) const {
        Coord c;
        c.w = index % cols_;
        index /= cols_;
        c.u = index % rows_;
        c.t = index / rows_;
        return c;
    }

    [[nodiscard]] std::string to_string() const {
        return std::to_string(frames_) + "x" + std::to_string(rows_) + "x" + std::to_string(cols_);
    }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    std::size_t frames_ = 1;
    std::size_t rows_ = 1;
    std::size_t cols_ = 1;
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (a != b) {
        throw GridMismatch(std::string(what) + ": grid " + a.to_string() + " does not match " +
                           b.to_string());
    }
}

/// Dense row-major array over a grid with an optional trailing channel axis,
/// index order (t, u, w, c).
template <typename T>
class GridArray {
public:
    using value_type = T;

    GridArray() = default;

    explicit GridArray(Grid grid, std::size_t channels = 1, T fill = T{})
        : grid_(grid), channels_(channels), data_(grid.size() * channels, fill) {
        if (channels == 0) throw InvalidArgument("channel count must be >= 1");
    }

    GridArray(Grid grid, std::size_t channels, std::vector<T> data)
        : grid_(grid), channels_(channels), data_(std::move(data)) {
        if (channels == 0) throw InvalidArgument("channel count must be >= 1");
        if (data_.size() != grid.size() * channels) {
            throw InvalidArgument("array holds " + std::to_string(data_.size()) +
                                  " elements, grid " + grid.to_string() + " with " +
                                  std::to_string(channels) + " channel(s) needs " +
                                  std::to_string(grid.size() * channels));
        }
    }

    [[nodiscard]] const Grid& grid() const { return grid_; }
    [[nodiscard]] std::size_t channels() const { return channels_; }
    [[nodiscard]] std::size_t size() const { return data_.size(); }

    [[nodiscard]] std::span<const T> values() const { return data_; }
    [[nodiscard]] std::span<T> values() { return data_; }
    [[nodiscard]] const std::vector<T>& vector() const { return data_; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    T& at(std::size_t t, std::size_t u, std::size_t w, std::size_t c = 0) {
        return data_[grid_.index(t, u, w) * channels_ + c];
    }
    const T& at(std::size_t t, std::size_t u, std::size_t w, std::size_t c = 0) const {
        return data_[grid_.index(t, u, w) * channels_ + c];
    }

    /// Channels of pixel `pixel` (flat grid index).
    [[nodiscard]] std::span<const T> pixel(std::size_t pixel) const {
        return std::span<const T>(data_).subspan(pixel * channels_, channels_);
    }
    [[nodiscard]] std::span<T> pixel(std::size_t pixel) {
        return std::span<T>(data_).subspan(pixel * channels_, channels_);
    }

    friend bool operator==(const GridArray&, const GridArray&) = default;

private:
    Grid grid_;
    std::size_t channels_ = 1;
    std::vector<T> data_;
};

/// A clip of intensities in [0,1], T x H x W x C with C in {1, 3}.
class Video {
public:
    explicit Video(GridArray<double> data) : data_(std::move(data)) {
        if (data_.channels() != 1 && data_.channels() != 3) {
            throw InvalidArgument("video must have 1 or 3 channels, got " +
                                  std::to_string(data_.channels()));
        }
        for (double x : data_.values()) {
            if (!(x >= 0.0 && x <= 1.0)) {
                throw InvalidArgument("video intensity outside [0,1]: " + std::to_string(x));
            }
        }
    }

    [[nodiscard]] const Grid& grid() const { return data_.grid(); }
    [[nodiscard]] std::size_t channels() const { return data_.channels(); }
    [[nodiscard]] const GridArray<double>& array() const { return data_; }
    [[nodiscard]] std::span<const double> values() const { return data_.values(); }

    friend bool operator==(const Video&, const Video&) = default;

private:
    GridArray<double> data_;
};

/// Absolute tolerance on the unit-mass invariant of a heatmap.
inline constexpr double kMassTolerance = 1e-6;

/// Nonnegative per-pixel relevance with total mass 1.
class Heatmap {
public:
    explicit Heatmap(GridArray<double> data) : data_(std::move(data)) {
        if (data_.channels() != 1) throw InvalidArgument("heatmap must have a single channel");
        double total = 0.0;
        for (double x : data_.values()) {
            if (!std::isfinite(x) || x < 0.0) {
                throw InvalidArgument("heatmap values must be finite and nonnegative");
            }
            total += x;
        }
        if (std::abs(total - 1.0) > kMassTolerance) {
            throw InvalidArgument("heatmap mass is " + std::to_string(total) + ", expected 1");
        }
    }

    [[nodiscard]] const Grid& grid() const { return data_.grid(); }
    [[nodiscard]] std::size_t size() const { return data_.size(); }
    [[nodiscard]] const GridArray<double>& array() const { return data_; }
    [[nodiscard]] std::span<const double> values() const { return data_.values(); }
    double operator[](std::size_t i) const { return data_[i]; }
    [[nodiscard]] double at(const Coord& c) const { return data_.at(c.t, c.u, c.w); }

    friend bool operator==(const Heatmap&, const Heatmap&) = default;

private:
    GridArray<double> data_;
};

/// Signed, pre-normalization output of an explanation method.
class RawAttribution {
public:
    explicit RawAttribution(GridArray<double> data) : data_(std::move(data)) {
        for (double x : data_.values()) {
            if (!std::isfinite(x)) throw NonFiniteGradient("attribution contains NaN or Inf");
        }
    }

    [[nodiscard]] const Grid& grid() const { return data_.grid(); }
    [[nodiscard]] std::size_t channels() const { return data_.channels(); }
    [[nodiscard]] const GridArray<double>& array() const { return data_; }
    [[nodiscard]] std::span<const double> values() const { return data_.values(); }

private:
    GridArray<double> data_;
};

/// |h(p) - h(p+e_t)| + |h(p) - h(p+e_u)| + |h(p) - h(p+e_w)|, with terms whose
/// forward neighbour leaves the grid omitted.
[[nodiscard]] inline double discrete_gradient_l1(const GridArray<double>& field, const Coord& at) {
    const Grid& g = field.grid();
    if (!g.contains(at)) {
        throw OutOfGrid("coordinate (" + std::to_string(at.t) + "," + std::to_string(at.u) + "," +
                        std::to_string(at.w) + ") outside grid " + g.to_string());
    }
    const double here = field.at(at.t, at.u, at.w);
    double sum = 0.0;
    if (at.t + 1 < g.frames()) sum += std::abs(here - field.at(at.t + 1, at.u, at.w));
    if (at.u + 1 < g.rows()) sum += std::abs(here - field.at(at.t, at.u + 1, at.w));
    if (at.w + 1 < g.cols()) sum += std::abs(here - field.at(at.t, at.u, at.w + 1));
    return sum;
}

[[nodiscard]] inline double discrete_gradient_l1(const Heatmap& h, const Coord& at) {
    return discrete_gradient_l1(h.array(), at);
}

/// Collapses channels by summing absolute values and rescales to unit mass.
/// Throws DegenerateHeatmap when the attribution is identically zero.
[[nodiscard]] inline Heatmap normalize_attribution(const RawAttribution& a) {
    const GridArray<double>& in = a.array();
    const std::size_t n = in.grid().size();
    const std::size_t c = in.channels();
    std::vector<double> relevance(n, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = 0.0;
        for (std::size_t k = 0; k < c; ++k) r += std::abs(in[i * c + k]);
        relevance[i] = r;
        total += r;
    }
    if (!(total > 0.0)) {
        throw DegenerateHeatmap("attribution is identically zero; no heatmap can be formed");
    }
    for (double& r : relevance) r /= total;
    return Heatmap(GridArray<double>(in.grid(), 1, std::move(relevance)));
}

}  // namespace heatmetrics
