#include "common.hpp"

#include "exitlab/agmon.hpp"
#include "exitlab/error.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace exitlab;
using testing_support::catalog_grid;
using testing_support::catalog_landscape;

namespace {

// integral of |f'| over (-1.2, 1.2) for (x^2-1)^2, split at -1, 0, 1
constexpr double kP1EndToEnd = 2.3872;

double p1_total_variation() {
    const auto f = [](double x) { return std::pow(x * x - 1.0, 2); };
    return (f(-1.2) - f(-1.0)) + (f(0.0) - f(-1.0)) + (f(0.0) - f(1.0)) + (f(1.2) - f(1.0));
}

}  // namespace

TEST(Agmon, SquareOnUnitIntervalEqualsPotentialGap) {
    const PotentialField p = make_polynomial(1, {{1.0, 2, 0}});
    for (int n : {257, 1025}) {
        const AgmonGraph g(p, DomainGrid::uniform(Domain::interval(0.0, 1.0), n));
        const double dx = 1.0 / (n - 1);
        EXPECT_NEAR(agmon_distance(g, Vec(1.0, 0), Vec(0.0, 0)), 1.0, 2.0 * dx) << n;
    }
}

TEST(Agmon, ZeroOnDiagonal) {
    const AgmonGraph g(catalog::p3(), catalog_grid("P3", 41));
    for (const Vec& x : {Vec(0, 0), Vec(0.3, -0.7), Vec(1, 1)}) EXPECT_EQ(agmon_distance(g, x, x), 0.0);
}

TEST(Agmon, P1EndToEndFromIntegralOracle) {
    EXPECT_NEAR(p1_total_variation(), kP1EndToEnd, 1e-12);
    const double c = 4.0 * 1.2 * (1.2 * 1.2 - 1.0);  // max |f'|
    for (int n : {513, 2049}) {
        const DomainGrid grid = catalog_grid("P1", n);
        const AgmonGraph g(catalog::p1(), grid);
        const double d = agmon_distance(g, Vec(-1.2, 0), Vec(1.2, 0));
        EXPECT_NEAR(d, kP1EndToEnd, c * grid.spacing(0)) << n;
    }
}

TEST(Agmon, DescentIdentityConvergesAtFirstOrder) {
    const PotentialField p = catalog::p1();
    double prev = 0.0;
    for (int n : {241, 481, 961, 1921}) {
        const DomainGrid grid = catalog_grid("P1", n);
        const AgmonGraph g(p, grid);
        // monotone segment from the boundary down to the minimum at -1
        const double err = std::abs(agmon_distance(g, Vec(-1.2, 0), Vec(-1.0, 0)) - (p.value1(-1.2) - p.value1(-1.0)));
        EXPECT_LE(err, 2.112 * grid.spacing(0));
        if (prev > 0.0) EXPECT_GT(std::log2(prev / err), 0.9) << n;
        prev = err;
    }
}

TEST(Agmon, SymmetricAndTriangleExact) {
    const AgmonGraph g(catalog::p3(), catalog_grid("P3", 41));
    const std::vector<Vec> pts = {Vec(0, 0), Vec(1, 0), Vec(-1, 0), Vec(0, 1), Vec(0.5, -0.5), Vec(-0.8, 0.9)};
    for (const Vec& x : pts)
        for (const Vec& y : pts) {
            EXPECT_EQ(agmon_distance(g, x, y), agmon_distance(g, y, x));
            for (const Vec& z : pts)
                EXPECT_LE(agmon_distance(g, x, z), (agmon_distance(g, x, y) + agmon_distance(g, y, z)) * (1 + 1e-14));
        }
}

TEST(Agmon, WeightsNonNegativeAndGraphConnected) {
    const AgmonGraph g(catalog::p1(), catalog_grid("P1", 257));
    EXPECT_TRUE(g.connected());
    for (std::size_t k = 0; k < g.size(); ++k)
        for (const auto& e : g.edges(k)) {
            EXPECT_GE(e.weight, 0.0);
            if (e.weight == 0.0) EXPECT_EQ(g.metric(k) + g.metric(e.to), 0.0);
        }
}

TEST(Agmon, DiagonalNeighboursIn2d) {
    const AgmonGraph g(catalog::p3(), catalog_grid("P3", 9));
    const DomainGrid& grid = g.grid();
    EXPECT_EQ(g.edges(grid.index(4, 4)).size(), 8u);
    EXPECT_EQ(g.edges(grid.index(0, 0)).size(), 3u);
}

TEST(DistanceConditions, P3Da1FailsOnEquality) {
    const Landscape l = catalog_landscape("P3", 64);
    const AgmonGraph g(l.potential, l.grid);
    const Th1Report r = check_th1_conditions(l, g);
    EXPECT_NEAR(r.da1_lhs, 1.0, 1e-12);
    EXPECT_NEAR(r.da1_rhs, 1.0, 1e-12);
    EXPECT_FALSE(r.da1);
    EXPECT_FALSE(r.all());
}

TEST(DistanceConditions, P1BothConditionsHold) {
    const Landscape l = catalog_landscape("P1", 2049);
    const AgmonGraph g(l.potential, l.grid);
    const Th1Report r = check_th1_conditions(l, g);
    EXPECT_TRUE(r.da1);
    EXPECT_NEAR(r.da1_lhs, 0.1936, 1e-9);
    EXPECT_NEAR(r.da1_rhs, 0.0, 1e-12);
    ASSERT_EQ(r.da2.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_TRUE(r.da2[i]);
        EXPECT_NEAR(r.da2_lhs[i], kP1EndToEnd, 2.112 * l.grid.spacing(0));
        // both ends sit at the same level
        EXPECT_EQ(r.da2_rhs[i], 0.0);
    }
    EXPECT_TRUE(r.all());
    std::ostringstream os;
    write_pairwise_csv(os, r);
    EXPECT_EQ(os.str().substr(0, 15), "i,j,distance\n1,");
}

TEST(DistanceConditions, SingleBoundaryMinimumReducesToDepth) {
    Landscape l = catalog_landscape("P3", 32);
    l.zs.resize(1);
    const AgmonGraph g(l.potential, l.grid);
    const Th1Report r = check_th1_conditions(l, g);
    EXPECT_EQ(r.da1_rhs, 0.0);
    EXPECT_TRUE(r.da1);
}

TEST(DistanceConditions, MissingReportThrows) {
    const Landscape l = catalog_landscape("P1", 257, false);
    const AgmonGraph g(l.potential, l.grid);
    try {
        (void)check_th1_conditions(l, g);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::HypothesesNotChecked);
    }
}
