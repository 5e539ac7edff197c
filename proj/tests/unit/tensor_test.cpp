#include "support/helpers.hpp"

#include <gtest/gtest.h>

using namespace heatmetrics;
using testing_support::heatmap_of;

TEST(Grid, RejectsEmptyExtent) {
    EXPECT_THROW(Grid(0, 2, 2), InvalidArgument);
    EXPECT_THROW(Grid(2, 0, 2), InvalidArgument);
    EXPECT_THROW(Grid(2, 2, 0), InvalidArgument);
}

TEST(Grid, IndexAndCoordAreInverse) {
    const Grid g(3, 4, 5);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Coord c = g.coord(i);
        EXPECT_TRUE(g.contains(c));
        EXPECT_EQ(g.index(c), i);
    }
    EXPECT_EQ(g.index(1, 2, 3), 1u * 20 + 2 * 5 + 3);
    EXPECT_FALSE(g.contains(Coord{3, 0, 0}));
}

TEST(GridArray, SizeMismatchIsRejected) {
    EXPECT_THROW(GridArray<double>(Grid(2, 2, 2), 1, std::vector<double>(7)), InvalidArgument);
    EXPECT_THROW(GridArray<double>(Grid(2, 2, 2), 0), InvalidArgument);
}

TEST(Video, ChecksChannelsAndRange) {
    const Grid g(1, 2, 2);
    EXPECT_NO_THROW(Video(GridArray<double>(g, 3, 0.5)));
    EXPECT_THROW(Video(GridArray<double>(g, 2, 0.5)), InvalidArgument);
    EXPECT_THROW(Video(GridArray<double>(g, 1, 1.5)), InvalidArgument);
    GridArray<double> nan(g, 1, 0.5);
    nan[1] = std::nan("");
    EXPECT_THROW(Video(std::move(nan)), InvalidArgument);
}

TEST(Heatmap, RequiresUnitMassAndNonnegativity) {
    const Grid g(1, 1, 4);
    EXPECT_NO_THROW(heatmap_of(g, {0.25, 0.25, 0.25, 0.25}));
    EXPECT_THROW(heatmap_of(g, {0.5, 0.5, 0.5, 0.5}), InvalidArgument);
    EXPECT_THROW(heatmap_of(g, {1.25, -0.25, 0.0, 0.0}), InvalidArgument);
    EXPECT_NO_THROW(heatmap_of(g, {0.25 + 5e-7, 0.25, 0.25, 0.25}));
}

TEST(RawAttribution, RejectsNonFinite) {
    GridArray<double> a(Grid(1, 1, 2), 1, 0.0);
    a[0] = INFINITY;
    EXPECT_THROW(RawAttribution(std::move(a)), NonFiniteGradient);
}

TEST(GradientL1, OmitsOutOfGridNeighbours) {
    // 1x2x2 with values a b / c d.
    GridArray<double> f(Grid(1, 2, 2), 1, std::vector<double>{1.0, 4.0, 2.0, 8.0});
    EXPECT_DOUBLE_EQ(discrete_gradient_l1(f, {0, 0, 0}), 3.0 + 1.0);
    EXPECT_DOUBLE_EQ(discrete_gradient_l1(f, {0, 0, 1}), 4.0);
    EXPECT_DOUBLE_EQ(discrete_gradient_l1(f, {0, 1, 0}), 6.0);
    EXPECT_DOUBLE_EQ(discrete_gradient_l1(f, {0, 1, 1}), 0.0);
    EXPECT_THROW((void)discrete_gradient_l1(f, {1, 0, 0}), OutOfGrid);
}

TEST(Normalize, SumsAbsoluteChannelsToUnitMass) {
    GridArray<double> a(Grid(1, 1, 2), 3, std::vector<double>{1, -1, 2, 0, 0, -4});
    const Heatmap h = normalize_attribution(RawAttribution(std::move(a)));
    EXPECT_DOUBLE_EQ(h[0], 0.5);
    EXPECT_DOUBLE_EQ(h[1], 0.5);
}

TEST(Normalize, ZeroAttributionIsDegenerate) {
    RawAttribution a(GridArray<double>(Grid(2, 2, 2), 3, 0.0));
    EXPECT_THROW((void)normalize_attribution(a), DegenerateHeatmap);
}

TEST(Normalize, PropertyMassIsOneAndNonnegative) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal(0.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        const Grid g(1 + trial % 3, 1 + trial % 5, 2 + trial % 4);
        GridArray<double> a(g, trial % 2 ? 3 : 1);
        for (double& x : a.values()) x = normal(rng);
        const Heatmap h = normalize_attribution(RawAttribution(a));
        double total = 0.0;
        for (double x : h.values()) {
            EXPECT_GE(x, 0.0);
            total += x;
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
    }
}
