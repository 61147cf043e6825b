#include <gtest/gtest.h>

#include <numeric>

#include "carpet/carpet.hpp"
#include "support/oracles.hpp"

using namespace carpet;

namespace {

struct Solved {
    PassageGraph g;
    ExtremalMetric m;
    HarmonicSolution s;
};

Solved solve(const CarpetConfig& c) {
    Solved out;
    out.g = build_passage_graph(c);
    out.m = solve_crossing_modulus(out.g, Side::theta1, Side::theta3);
    out.s = recover_potential(out.g, out.m);
    return out;
}

CarpetConfig strip(int k) {
    std::vector<Square> tiles;
    for (int i = 0; i < k; ++i) tiles.push_back({double(i) / k, 0.0, 1.0 / k});
    return generate_square_carpet(tiles, Box{0.0, 0.0, 1.0, 1.0 / k});
}

}  // namespace

TEST(Potential, GridColumnsStepByAThird) {
    const Solved r = solve(generate_standard_carpet(1));
    for (int i = 0; i < 9; ++i) {
        const int col = i % 3;
        EXPECT_NEAR(r.s.u_minus[static_cast<std::size_t>(i)], col / 3.0, 1e-9);
        EXPECT_NEAR(r.s.u_plus[static_cast<std::size_t>(i)], (col + 1) / 3.0, 1e-9);
    }
    EXPECT_NEAR(r.s.energy, 1.0, 1e-8);
    EXPECT_EQ(r.s.clamp_count, 0u);
    EXPECT_GE(r.s.reverse_min, 1.0 - 1e-6);
}

TEST(Potential, FourSquares) {
    const Solved r = solve(oracle::grid(2));
    const std::vector<double> um{0.0, 0.5, 0.0, 0.5};
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_NEAR(r.s.u_minus[i], um[i], 1e-9);
        EXPECT_NEAR(r.s.u_plus[i], um[i] + 0.5, 1e-9);
    }
    EXPECT_NEAR(r.s.energy, 1.0, 1e-8);
}

TEST(Potential, SingleChainTelescopes) {
    const int k = 6;
    const Solved r = solve(strip(k));
    for (int j = 0; j < k; ++j) EXPECT_NEAR(r.s.u_minus[static_cast<std::size_t>(j)], double(j) / k, 1e-9);
    EXPECT_NEAR(r.s.energy, 1.0 / k, 1e-10);
}

TEST(Potential, BoundsAndOscillation) {
    const Solved r = solve(generate_standard_carpet(3));
    for (std::size_t i = 0; i < r.s.u_minus.size(); ++i) {
        EXPECT_GE(r.s.u_minus[i], 0.0);
        EXPECT_LE(r.s.u_minus[i], r.s.u_plus[i]);
        EXPECT_LE(r.s.u_plus[i], 1.0);
        EXPECT_NEAR(r.s.u_plus[i] - r.s.u_minus[i], r.s.rho[i], 1e-12);
    }
    EXPECT_NEAR(r.s.energy, r.m.modulus, 1e-12);
}

TEST(Potential, SquareCarpetEnergyIsSumOfSquaredSides) {
    const CarpetConfig c = oracle::moron_rectangle();
    const Solved r = solve(c);
    double sides = 0.0;
    for (const auto& d : c.disks) sides += d.box.width() * d.box.width();
    EXPECT_NEAR(r.s.energy, sides, 1e-9);
    // The potential is the x coordinate.
    for (std::size_t i = 0; i < c.disks.size(); ++i) EXPECT_NEAR(r.s.u_minus[i], c.disks[i].box.xmin, 1e-9);
}

TEST(Potential, ExcludedDisksAreClampedAtOne) {
    const Solved r = solve(generate_standard_carpet(1));
    std::vector<char> ex(9, 0);
    ex[4] = 1;
    const HarmonicSolution s = recover_potential(r.g, r.m.lambda, ex);
    EXPECT_EQ(s.u_minus[4], 1.0);
    EXPECT_EQ(s.u_plus[4], 1.0);
    // Disk 5 is now reached only through disk 2, so its u_plus of 4/3 is clamped too.
    EXPECT_EQ(s.clamped, (std::vector<int>{4, 5}));
    EXPECT_EQ(s.clamp_count, 2u);
    EXPECT_EQ(s.u_plus[5], 1.0);
}

TEST(Potential, SizeMismatchRejected) {
    const Solved r = solve(generate_standard_carpet(1));
    const std::vector<double> w(5, 0.1);
    EXPECT_THROW((void)recover_potential(r.g, w), Error);
}

TEST(Potential, JsonFields) {
    const Solved r = solve(generate_standard_carpet(1));
    const auto j = solution_to_json(r.s, r.g);
    for (const char* k : {"u_minus", "u_plus", "rho", "D", "clamped"}) EXPECT_TRUE(j.contains(k)) << k;
}

TEST(MaximumPrinciple, MiddleColumn) {
    const Solved r = solve(generate_standard_carpet(1));
    const std::vector<int> region{1, 4, 7};
    EXPECT_NEAR(maximum_principle_deviation(r.s, r.g, region), 0.0, 1e-12);
}

TEST(MaximumPrinciple, SingletonAndWholeGraph) {
    const Solved r = solve(generate_standard_carpet(2));
    const std::vector<int> one{40};
    EXPECT_EQ(maximum_principle_deviation(r.s, r.g, one), 0.0);
    std::vector<int> all(73);
    std::iota(all.begin(), all.end(), 0);
    EXPECT_LE(maximum_principle_deviation(r.s, r.g, all), 1e-12);
}

TEST(MaximumPrinciple, DetectsAnInjectedInteriorPeak) {
    Solved r = solve(oracle::grid(5));
    // Interior 3 x 3 block; its boundary ring tops out at u_plus = 0.8.
    const std::vector<int> region{6, 7, 8, 11, 12, 13, 16, 17, 18};
    EXPECT_NEAR(maximum_principle_deviation(r.s, r.g, region), 0.0, 1e-12);
    r.s.u_plus[12] = 0.95;
    EXPECT_NEAR(maximum_principle_deviation(r.s, r.g, region), 0.15, 1e-12);
}

TEST(MaximumPrinciple, RandomRegionsAvoidSideDisks) {
    const Solved r = solve(generate_standard_carpet(3));
    for (std::uint64_t t = 0; t < 20; ++t) {
        Rng rng = Rng::stream(1, "regions", t);
        const auto region = random_region(r.g, rng, 32);
        EXPECT_FALSE(region.empty());
        for (int v : region) {
            for (int w : r.g.adjacency[static_cast<std::size_t>(v)]) {
                EXPECT_NE(w, r.g.terminal(Side::theta1));
                EXPECT_NE(w, r.g.terminal(Side::theta3));
            }
        }
    }
    const MaximumPrincipleReport rep = check_maximum_principle(r.s, r.g, 200, 0);
    EXPECT_EQ(rep.trials, 200u);
    EXPECT_EQ(rep.violations, 0u);
}

TEST(Comparison, IdenticalSolutionsAreEqual) {
    const Solved r = solve(generate_standard_carpet(1));
    const ComparisonReport c = check_comparison(r.s, r.s);
    EXPECT_TRUE(c.holds);
    EXPECT_EQ(c.worst, 0.0);
}

TEST(Comparison, RemovingALeftDiskRaisesThePotential) {
    const Solved r = solve(generate_standard_carpet(1));
    const std::vector<int> removed{0};
    const ComparisonReport c = comparison_surgery(r.g, r.s, removed);
    EXPECT_TRUE(c.holds);
    EXPECT_GE(c.worst, -1e-9);
    EXPECT_EQ(c.compared, 8u);
}

TEST(Comparison, DifferentGraphsRejected) {
    const Solved a = solve(generate_standard_carpet(1));
    const Solved b = solve(oracle::grid(2));
    try {
        (void)check_comparison(a.s, b.s);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::mismatch);
    }
}

TEST(Annular, DisjointDiskHasZeroOscillation) {
    const CarpetConfig c = generate_standard_carpet(2);
    const AnnularResult a = annular_test_function(c, {0.5, 0.5}, 0.3, 2);
    // The corner cell at the origin lies outside radius 0.3 of the centre.
    EXPECT_EQ(a.zeta[0], 0.0);
}

TEST(Annular, SlopeBoundInsideOneAnnulus) {
    const CarpetConfig c = generate_standard_carpet(3);
    const int rings = 4;
    const AnnularResult a = annular_test_function(c, {0.5, 0.5}, 0.5, rings);
    for (std::size_t i = 0; i < c.disks.size(); ++i) {
        const auto& poly = c.disks[i].polygon;
        const double dmin = region_distance(poly, {0.5, 0.5}), dmax = max_vertex_distance(poly, {0.5, 0.5});
        for (int j = 0; j < rings; ++j) {
            const double R = a.outer_radii[static_cast<std::size_t>(j)], r = a.inner_radii[static_cast<std::size_t>(j)];
            if (dmin >= r && dmax <= R) {
                EXPECT_LE(a.zeta[i], (dmax - dmin) / (rings * r) + 1e-12);
            }
        }
    }
}

TEST(Annular, CentralHoleIsExceptional) {
    const CarpetConfig c = generate_standard_carpet(3);
    const AnnularResult a = annular_test_function(c, {0.5, 0.5}, 0.5, 8);
    ASSERT_GE(a.exceptional, 0);
    EXPECT_NEAR(c.disks[static_cast<std::size_t>(a.exceptional)].box.width(), 1.0 / 3.0, 1e-15);
}

TEST(Annular, EnergyDecaysWithRingCount) {
    const CarpetConfig c = generate_standard_carpet(3);
    const double e2 = annular_test_function(c, {0.5, 0.5}, 0.5, 2).energy;
    const double e8 = annular_test_function(c, {0.5, 0.5}, 0.5, 8).energy;
    EXPECT_LE(e8 / e2, 0.35);
}

TEST(Annular, TooManyRingsReportsAchieved) {
    // At the shared corner of four cells no disk may serve as exceptional for
    // all of them, so the rings stop immediately.
    const CarpetConfig c = oracle::grid(2);
    try {
        (void)annular_test_function(c, {0.5, 0.5}, 0.5, 4);
        FAIL();
    } catch (const FewerRings& e) {
        EXPECT_EQ(e.kind(), ErrorKind::fewer_rings);
        EXPECT_GE(e.achieved(), 1);
        EXPECT_LT(e.achieved(), 4);
    }
}

TEST(Annular, InverseFitOfExactData) {
    const std::vector<int> ns{2, 4, 8, 16};
    const std::vector<double> e{1.5, 0.75, 0.375, 0.1875};
    const InverseFit f = fit_inverse(ns, e);
    EXPECT_NEAR(f.c, 3.0, 1e-12);
    EXPECT_NEAR(f.relative_residual, 0.0, 1e-12);
}

TEST(TriangleConsistency, RandomPairs) {
    const Solved r = solve(generate_standard_carpet(2));
    Rng rng = Rng::stream(0, "triangle");
    for (int k = 0; k < 200; ++k) {
        const int a = static_cast<int>(rng.below(73)), b = static_cast<int>(rng.below(73));
        const double d = rho_distance(r.g, r.s.rho, a, b);
        EXPECT_LE(std::abs(r.s.u_minus[static_cast<std::size_t>(a)] - r.s.u_minus[static_cast<std::size_t>(b)]), d + 1e-12);
    }
}
