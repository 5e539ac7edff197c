#include "support/helpers.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace heatmetrics;
namespace fx = heatmetrics::fixtures;

namespace {

double max_abs_diff(const GridArray<double>& a, const GridArray<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST(GaussianKernel, NormalizedAndSymmetric) {
    EXPECT_EQ(gaussian_kernel_1d(0.0, 5), std::vector<double>{1.0});
    EXPECT_EQ(default_radius(0.8), 3u);
    EXPECT_EQ(default_radius(0.5), 2u);
    EXPECT_EQ(default_radius(0.0), 0u);
    const auto k = gaussian_kernel_1d(1.3, 4);
    ASSERT_EQ(k.size(), 9u);
    double s = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        s += k[i];
        EXPECT_EQ(k[i], k[k.size() - 1 - i]);
    }
    EXPECT_NEAR(s, 1.0, 1e-15);
    EXPECT_THROW((void)gaussian_kernel_1d(-1.0, 2), InvalidArgument);
}

TEST(GaussianFilter, ConstantVideoUnchanged) {
    const Video v(GridArray<double>(Grid(4, 6, 5), 3, 0.3));
    const Video out = gaussian_filter_3d(v, GaussianConfig{});
    EXPECT_LE(max_abs_diff(out.array(), v.array()), 1e-15);
}

TEST(GaussianFilter, ZeroStdIsIdentity) {
    const Video v = fx::make_video({.grid = Grid(3, 4, 4), .seed = 2});
    EXPECT_EQ(gaussian_filter_3d(v, {.spatial_std = 0.0, .temporal_std = 0.0}), v);
}

TEST(GaussianFilter, ImpulseResponseIsOuterProductOfKernels) {
    // Margin of two radii on every side keeps the boundary renormalization out of reach.
    const Grid g(9, 13, 13);
    GridArray<double> impulse(g, 1, 0.0);
    impulse.at(4, 6, 6) = 1.0;
    const GaussianConfig cfg{.spatial_std = 0.8, .temporal_std = 0.5};
    const GridArray<double> out = gaussian_filter_3d(impulse, cfg);
    const auto kt = gaussian_kernel_1d(0.5, 2);
    const auto ks = gaussian_kernel_1d(0.8, 3);
    for (std::size_t t = 0; t < 9; ++t)
        for (std::size_t u = 0; u < 13; ++u)
            for (std::size_t w = 0; w < 13; ++w) {
                const long dt = long(t) - 4, du = long(u) - 6, dw = long(w) - 6;
                double expected = 0.0;
                if (std::abs(dt) <= 2 && std::abs(du) <= 3 && std::abs(dw) <= 3)
                    expected = kt[std::size_t(dt + 2)] * ks[std::size_t(du + 3)] * ks[std::size_t(dw + 3)];
                EXPECT_NEAR(out.at(t, u, w), expected, 1e-15);
            }
}

TEST(GaussianFilter, SeparableEqualsDirectConvolution) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Video v = fx::make_video({.grid = Grid(3, 5, 5), .seed = seed});
        for (const GaussianConfig& cfg : {GaussianConfig{}, GaussianConfig{.spatial_std = 1.7, .temporal_std = 1.1},
                                          GaussianConfig{.spatial_std = 2.0, .temporal_std = 0.0}}) {
            const GridArray<double> fast = gaussian_filter_3d(v.array(), cfg);
            const GridArray<double> slow = oracle::direct_gaussian_3d(
                v.array(), cfg.temporal_std, default_radius(cfg.temporal_std), cfg.spatial_std,
                default_radius(cfg.spatial_std));
            EXPECT_LE(max_abs_diff(fast, slow), 1e-10);
        }
    }
}

TEST(GaussianFilter, PreservesRange) {
    const Video v = fx::make_video({.grid = Grid(3, 8, 8), .level = 0.0, .high = 1.0, .seed = 4});
    const Video out = gaussian_filter_3d(v, {.spatial_std = 1.5, .temporal_std = 1.0});
    for (double x : out.values()) {
        EXPECT_GE(x, 0.0);
        EXPECT_LE(x, 1.0);
    }
}

TEST(Bilateral, ConstantFrameUnchanged) {
    const Video v(GridArray<double>(Grid(2, 7, 7), 3, 0.6));
    EXPECT_LE(max_abs_diff(bilateral_filter(v, {}).array(), v.array()), 1e-12);
}

TEST(Bilateral, HugeRangeStdConvergesToGaussianBlur) {
    const Video v = fx::make_video({.grid = Grid(2, 9, 9), .level = 0.0, .high = 1.0, .seed = 7});
    const Video bil = bilateral_filter(v, {.spatial_std = 2.0, .range_std = 1e6});
    const Video gau = gaussian_filter_3d(v, {.spatial_std = 2.0, .temporal_std = 0.0});
    EXPECT_LE(max_abs_diff(bil.array(), gau.array()), 1e-6);
}

TEST(Bilateral, BrightPixelMatchesDirectReference) {
    GridArray<double> a(Grid(1, 9, 9), 1, 0.05);
    a.at(0, 4, 4) = 0.95;
    const Video v(a);
    const Video out = bilateral_filter(v, {.spatial_std = 2.0, .range_std = 0.1});
    EXPECT_LE(max_abs_diff(out.array(), oracle::direct_bilateral(a, 2.0, 0.1, 6)), 1e-14);

    const Video rgb = fx::make_video({.grid = Grid(2, 6, 7), .seed = 3});
    const Video out3 = bilateral_filter(rgb, {.spatial_std = 1.0, .range_std = 0.2, .radius = 2});
    EXPECT_LE(max_abs_diff(out3.array(), oracle::direct_bilateral(rgb.array(), 1.0, 0.2, 2)), 1e-14);
}

TEST(Bilateral, OutputBetweenFrameExtremes) {
    const Video v = fx::make_video({.grid = Grid(2, 8, 8), .channels = 1, .level = 0.1, .high = 0.7, .seed = 9});
    const Video out = bilateral_filter(v, {});
    for (std::size_t t = 0; t < 2; ++t) {
        double lo = 1.0, hi = 0.0;
        for (std::size_t i = t * 64; i < (t + 1) * 64; ++i) {
            lo = std::min(lo, v.array()[i]);
            hi = std::max(hi, v.array()[i]);
        }
        for (std::size_t i = t * 64; i < (t + 1) * 64; ++i) {
            EXPECT_GE(out.array()[i], lo - 1e-15);
            EXPECT_LE(out.array()[i], hi + 1e-15);
        }
    }
    EXPECT_THROW((void)bilateral_filter(v, {.spatial_std = 0.0}), InvalidArgument);
}

TEST(Cutout, ProbabilityZeroIsIdentity) {
    const Video v = fx::make_video({.grid = Grid(2, 8, 8), .seed = 1});
    const CutoutResult r = video_cutout(v, {.patch_rows = 4, .patch_cols = 4, .probability = 0.0});
    EXPECT_FALSE(r.patch.has_value());
    EXPECT_EQ(r.video, v);
}

TEST(Cutout, OutsidePatchBitIdenticalInsideMatchesBlurredCrop) {
    const Grid g(3, 16, 20);
    const Video v = fx::make_video({.grid = g, .seed = 8});
    int applied = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const CutoutConfig cfg{.patch_rows = 6, .patch_cols = 7, .blur_std = 4.0, .probability = 0.5, .seed = seed};
        const CutoutResult r = video_cutout(v, cfg);
        if (!r.patch) {
            EXPECT_EQ(r.video, v);
            continue;
        }
        ++applied;
        const PatchLocation& p = *r.patch;
        EXPECT_LE(p.top + p.rows, g.rows());
        EXPECT_LE(p.left + p.cols, g.cols());
        const GridArray<double> blurred = gaussian_filter_3d(crop(v.array(), p), {.spatial_std = 4.0, .temporal_std = 0.0});
        for (std::size_t t = 0; t < g.frames(); ++t)
            for (std::size_t u = 0; u < g.rows(); ++u)
                for (std::size_t w = 0; w < g.cols(); ++w)
                    for (std::size_t c = 0; c < 3; ++c) {
                        const double got = r.video.array().at(t, u, w, c);
                        if (p.contains(u, w)) ASSERT_EQ(got, blurred.at(t, u - p.top, w - p.left, c));
                        else ASSERT_EQ(got, v.array().at(t, u, w, c));
                    }
    }
    EXPECT_GT(applied, 0);
    EXPECT_LT(applied, 20);
}

TEST(Cutout, DeterministicAndValidated) {
    const Video v = fx::make_video({.grid = Grid(1, 10, 10), .seed = 2});
    const CutoutConfig cfg{.patch_rows = 3, .patch_cols = 3, .probability = 1.0, .seed = 77};
    EXPECT_EQ(video_cutout(v, cfg).video, video_cutout(v, cfg).video);
    EXPECT_THROW((void)video_cutout(v, {.patch_rows = 11, .patch_cols = 3}), InvalidArgument);
    EXPECT_THROW((void)video_cutout(v, {.patch_rows = 3, .patch_cols = 3, .probability = 1.5}), InvalidArgument);
}
