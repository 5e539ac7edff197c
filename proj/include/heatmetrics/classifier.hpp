#pragma once

#include "heatmetrics/manipulation.hpp"
#include "heatmetrics/tensor.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <string>

namespace heatmetrics {

/// A scalar detector f: clip -> [0,1] with an exact gradient.
///
/// Inputs are plain arrays rather than `Video` because explanation methods
/// probe points off the unit cube (noise, interpolation paths). Implementations
/// must be stateless with respect to evaluation so that concurrent calls are safe.
class DifferentiableClassifier {
public:
    virtual ~DifferentiableClassifier() = default;

    [[nodiscard]] virtual double evaluate(const GridArray<double>& v) const = 0;
    [[nodiscard]] virtual GridArray<double> gradient(const GridArray<double>& v) const = 0;
    [[nodiscard]] virtual std::string name() const = 0;
};

namespace detail {

inline void require_shape(const GridArray<double>& v, const Grid& grid, std::size_t channels,
                          const char* who) {
    require_same_grid(v.grid(), grid, who);
    if (v.channels() != channels) {
        throw GridMismatch(std::string(who) + ": expected " + std::to_string(channels) +
                           " channel(s), got " + std::to_string(v.channels()));
    }
}

}  // namespace detail

class ConstantClassifier final : public DifferentiableClassifier {
public:
    explicit ConstantClassifier(double value) : value_(value) {
        if (!(value >= 0.0 && value <= 1.0)) throw InvalidArgument("constant must lie in [0,1]");
    }

    [[nodiscard]] double evaluate(const GridArray<double>&) const override { return value_; }
    [[nodiscard]] GridArray<double> gradient(const GridArray<double>& v) const override {
        return GridArray<double>(v.grid(), v.channels(), 0.0);
    }
    [[nodiscard]] std::string name() const override { return "constant"; }

private:
    double value_;
};

/// f(v) = bias + <w, v>. Construction checks that f maps the unit cube into [0,1].
class LinearClassifier final : public DifferentiableClassifier {
public:
    LinearClassifier(GridArray<double> weights, double bias)
        : weights_(std::move(weights)), bias_(bias) {
        double lo = bias_, hi = bias_;
        for (double w : weights_.values()) {
            if (!std::isfinite(w)) throw InvalidArgument("linear weights must be finite");
            (w < 0.0 ? lo : hi) += w;
        }
        if (lo < -1e-12 || hi > 1.0 + 1e-12) {
            throw InvalidArgument("linear classifier does not map [0,1]^N into [0,1]");
        }
    }

    [[nodiscard]] const GridArray<double>& weights() const { return weights_; }

    [[nodiscard]] double evaluate(const GridArray<double>& v) const override {
        detail::require_shape(v, weights_.grid(), weights_.channels(), "linear classifier");
        double s = bias_;
        for (std::size_t i = 0; i < v.size(); ++i) s += weights_[i] * v[i];
        return s;
    }
    [[nodiscard]] GridArray<double> gradient(const GridArray<double>& v) const override {
        detail::require_shape(v, weights_.grid(), weights_.channels(), "linear classifier");
        return weights_;
    }
    [[nodiscard]] std::string name() const override { return "linear"; }

private:
    GridArray<double> weights_;
    double bias_;
};

/// Mean intensity over a pixel subset S (all channels).
class MaskedMeanClassifier final : public DifferentiableClassifier {
public:
    MaskedMeanClassifier(BinaryMask subset, std::size_t channels)
        : subset_(std::move(subset)), channels_(channels) {
        if (subset_.count() == 0) throw InvalidArgument("masked-mean subset is empty");
        if (channels_ == 0) throw InvalidArgument("channel count must be >= 1");
    }

    [[nodiscard]] const BinaryMask& subset() const { return subset_; }

    [[nodiscard]] double evaluate(const GridArray<double>& v) const override {
        detail::require_shape(v, subset_.grid(), channels_, "masked-mean classifier");
        double s = 0.0;
        for (std::size_t i = 0; i < subset_.grid().size(); ++i) {
            if (!subset_[i]) continue;
            for (std::size_t k = 0; k < channels_; ++k) s += v[i * channels_ + k];
        }
        return s / static_cast<double>(subset_.count() * channels_);
    }
    [[nodiscard]] GridArray<double> gradient(const GridArray<double>& v) const override {
        detail::require_shape(v, subset_.grid(), channels_, "masked-mean classifier");
        const double g = 1.0 / static_cast<double>(subset_.count() * channels_);
        GridArray<double> out(v.grid(), channels_, 0.0);
        for (std::size_t i = 0; i < subset_.grid().size(); ++i) {
            if (!subset_[i]) continue;
            for (std::size_t k = 0; k < channels_; ++k) out[i * channels_ + k] = g;
        }
        return out;
    }
    [[nodiscard]] std::string name() const override { return "masked-mean"; }

private:
    BinaryMask subset_;
    std::size_t channels_;
};

/// How the raw quadratic form is mapped into [0,1].
enum class Squash {
    /// 0.5 + s*q with s chosen so |s*q| <= 0.5 on the unit cube. Constant Hessian.
    affine,
    /// 1 / (1 + exp(-q)).
    logistic,
};

/// f(v) = squash(q(v)), q(v) = 1/2 (v-c)^T H (v-c) + b^T (v-c), H symmetric.
class QuadraticClassifier final : public DifferentiableClassifier {
public:
    QuadraticClassifier(Grid grid, std::size_t channels, Eigen::MatrixXd hessian,
                        Eigen::VectorXd linear, Eigen::VectorXd center, Squash squash)
        : grid_(grid),
          channels_(channels),
          hessian_(std::move(hessian)),
          linear_(std::move(linear)),
          center_(std::move(center)),
          squash_(squash) {
        const auto n = static_cast<Eigen::Index>(grid.size() * channels);
        if (hessian_.rows() != n || hessian_.cols() != n || linear_.size() != n ||
            center_.size() != n) {
            throw InvalidArgument("quadratic classifier parameters do not match the input size");
        }
        if (hessian_ != hessian_.transpose()) {
            throw InvalidArgument("quadratic classifier Hessian must be symmetric");
        }
        if ((center_.array() < 0.0).any() || (center_.array() > 1.0).any()) {
            throw InvalidArgument("quadratic classifier center must lie in the unit cube");
        }
        const double bound = 0.5 * hessian_.cwiseAbs().sum() + linear_.cwiseAbs().sum();
        affine_scale_ = bound > 0.5 ? 0.5 / bound : 1.0;
    }

    /// Random symmetric instance: H = curvature * (G + G^T) / (2 sqrt(n)),
    /// b = slope * g / sqrt(n), with G, g standard normal and c uniform.
    [[nodiscard]] static QuadraticClassifier random(Grid grid, std::size_t channels,
                                                    std::uint64_t seed, Squash squash,
                                                    double curvature = 1.0, double slope = 1.0) {
        const auto n = static_cast<Eigen::Index>(grid.size() * channels);
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        Eigen::MatrixXd g(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) g(i, j) = normal(rng);
        const double root_n = std::sqrt(static_cast<double>(n));
        Eigen::MatrixXd h = curvature * (g + g.transpose()) / (2.0 * root_n);
        Eigen::VectorXd b(n), c(n);
        for (Eigen::Index i = 0; i < n; ++i) b(i) = slope * normal(rng) / root_n;
        for (Eigen::Index i = 0; i < n; ++i) c(i) = unit(rng);
        return QuadraticClassifier(grid, channels, std::move(h), std::move(b), std::move(c),
                                   squash);
    }

    [[nodiscard]] Squash squash() const { return squash_; }
    [[nodiscard]] double affine_scale() const { return affine_scale_; }

    /// Raw quadratic form before squashing.
    [[nodiscard]] double raw(const GridArray<double>& v) const {
        const Eigen::VectorXd d = displacement(v);
        return 0.5 * d.dot(hessian_ * d) + linear_.dot(d);
    }

    [[nodiscard]] double evaluate(const GridArray<double>& v) const override {
        const double q = raw(v);
        return squash_ == Squash::affine ? 0.5 + affine_scale_ * q : 1.0 / (1.0 + std::exp(-q));
    }

    [[nodiscard]] GridArray<double> gradient(const GridArray<double>& v) const override {
        const Eigen::VectorXd d = displacement(v);
        Eigen::VectorXd g = hessian_ * d + linear_;
        if (squash_ == Squash::affine) {
            g *= affine_scale_;
        } else {
            const double q = 0.5 * d.dot(hessian_ * d) + linear_.dot(d);
            const double f = 1.0 / (1.0 + std::exp(-q));
            g *= f * (1.0 - f);
        }
        return GridArray<double>(grid_, channels_, std::vector<double>(g.data(), g.data() + g.size()));
    }

    [[nodiscard]] std::string name() const override { return "quadratic"; }

private:
    [[nodiscard]] Eigen::VectorXd displacement(const GridArray<double>& v) const {
        detail::require_shape(v, grid_, channels_, "quadratic classifier");
        Eigen::VectorXd d(center_.size());
        for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = v[static_cast<std::size_t>(i)] - center_(i);
        return d;
    }

    Grid grid_;
    std::size_t channels_;
    Eigen::MatrixXd hessian_;
    Eigen::VectorXd linear_;
    Eigen::VectorXd center_;
    Squash squash_;
    double affine_scale_ = 1.0;
};

}  // namespace heatmetrics
