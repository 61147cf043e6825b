#include <gtest/gtest.h>

#include <cstdlib>

#include "carpet/carpet.hpp"
#include "support/oracles.hpp"

using namespace carpet;

namespace {

CarpetConfig strip(int k) {
    std::vector<Square> tiles;
    for (int i = 0; i < k; ++i) tiles.push_back({double(i) / k, 0.0, 1.0 / k});
    return generate_square_carpet(tiles, Box{0.0, 0.0, 1.0, 1.0 / k});
}

CarpetConfig scaled(const CarpetConfig& c, double k) {
    CarpetConfig out;
    for (Point p : c.outer) out.outer.push_back(k * p);
    out.marks = c.marks;
    for (const auto& d : c.disks) {
        Polygon q;
        for (Point p : d.polygon) q.push_back(k * p);
        out.disks.push_back(make_disk(d.id, q));
    }
    return out;
}

// Small instances: full tilings and connected partial 4 x 4 grids with at
// most 12 disks.
std::vector<CarpetConfig> small_instances() {
    std::vector<CarpetConfig> out{oracle::grid(2), oracle::grid(3), strip(5), oracle::moron_rectangle(),
                                  generate_standard_carpet(1)};
    Rng rng = Rng::stream(2024, "small-instances");
    while (out.size() < 25) {
        std::vector<std::array<int, 2>> cells;
        for (int j = 0; j < 4; ++j)
            for (int i = 0; i < 4; ++i) cells.push_back({i, j});
        // Drop 4..8 cells at random.
        const std::size_t drop = 4 + rng.below(5);
        for (std::size_t k = 0; k < drop; ++k) cells.erase(cells.begin() + static_cast<long>(rng.below(cells.size())));
        const CarpetConfig c = oracle::grid_subset(4, cells);
        try {
            (void)build_passage_graph(c);
        } catch (const Error&) {
            continue;
        }
        out.push_back(c);
    }
    return out;
}

}  // namespace

TEST(OracleEquivalence, ColumnGenerationMatchesExplicitFamily) {
    for (const CarpetConfig& c : small_instances()) {
        ASSERT_LE(c.disks.size(), 12u);
        const PassageGraph g = build_passage_graph(c);
        for (auto [src, tgt] : {std::pair{Side::theta1, Side::theta3}, std::pair{Side::theta2, Side::theta4}}) {
            const auto family = oracle::simple_chains(g, src, tgt);
            if (family.empty()) continue;
            const ExtremalMetric a = solve_crossing_modulus(g, src, tgt);
            const ExtremalMetric b = solve_modulus_explicit(family, g.n_disks);
            EXPECT_NEAR(a.modulus, b.modulus, 1e-6 * b.modulus) << c.disks.size() << " disks";
            for (std::size_t i = 0; i < a.lambda.size(); ++i) EXPECT_NEAR(a.lambda[i], b.lambda[i], 1e-5);
            // The returned metric is admissible for the whole family.
            EXPECT_GE(oracle::min_chain_weight(family, a.lambda), 1.0 - 1e-6);
        }
    }
}

TEST(Monotonicity, AddingChainsNeverLowersTheModulus) {
    const PassageGraph g = build_passage_graph(generate_standard_carpet(1));
    auto family = oracle::simple_chains(g, Side::theta1, Side::theta3);
    Rng rng = Rng::stream(5, "monotone-family");
    for (int trial = 0; trial < 10; ++trial) {
        // Random nested families F1 ⊂ F2.
        for (std::size_t i = family.size(); i > 1; --i) std::swap(family[i - 1], family[rng.below(i)]);
        const std::size_t k1 = 1 + rng.below(8), k2 = k1 + 1 + rng.below(8);
        const std::vector<std::vector<int>> f1(family.begin(), family.begin() + static_cast<long>(k1));
        const std::vector<std::vector<int>> f2(family.begin(), family.begin() + static_cast<long>(k2));
        EXPECT_LE(solve_modulus_explicit(f1, 9).modulus, solve_modulus_explicit(f2, 9).modulus + 1e-9);
    }
}

TEST(Monotonicity, ReleasingExcludedDisksNeverLowersTheModulus) {
    const PassageGraph g = build_passage_graph(generate_standard_carpet(2));
    Rng rng = Rng::stream(6, "monotone-exclusion");
    for (int trial = 0; trial < 8; ++trial) {
        std::vector<char> ex(73, 0);
        std::vector<int> chosen;
        for (int k = 0; k < 6; ++k) {
            const int v = static_cast<int>(rng.below(73));
            ex[static_cast<std::size_t>(v)] = 1;
            chosen.push_back(v);
        }
        double with;
        try {
            with = solve_crossing_modulus(g, Side::theta1, Side::theta3, {}, ex).modulus;
        } catch (const Error&) {
            with = 0.0;  // no chain left: modulus 0
        }
        ex[static_cast<std::size_t>(chosen.front())] = 0;
        double released;
        try {
            released = solve_crossing_modulus(g, Side::theta1, Side::theta3, {}, ex).modulus;
        } catch (const Error&) {
            released = 0.0;
        }
        EXPECT_LE(with, released + 1e-9);
    }
}

TEST(Subadditivity, UnionOfFamilies) {
    const PassageGraph g = build_passage_graph(oracle::grid(3));
    auto family = oracle::simple_chains(g, Side::theta1, Side::theta3);
    Rng rng = Rng::stream(8, "subadditive");
    for (int trial = 0; trial < 20; ++trial) {
        for (std::size_t i = family.size(); i > 1; --i) std::swap(family[i - 1], family[rng.below(i)]);
        const std::size_t a = 1 + rng.below(5), b = 1 + rng.below(5);
        std::vector<std::vector<int>> f1(family.begin(), family.begin() + static_cast<long>(a));
        std::vector<std::vector<int>> f2(family.begin() + static_cast<long>(a), family.begin() + static_cast<long>(a + b));
        std::vector<std::vector<int>> both = f1;
        both.insert(both.end(), f2.begin(), f2.end());
        ASSERT_LE(both.size(), 10u);
        const double m1 = solve_modulus_explicit(f1, 9).modulus, m2 = solve_modulus_explicit(f2, 9).modulus;
        EXPECT_LE(solve_modulus_explicit(both, 9).modulus, m1 + m2 + 1e-9);
    }
}

TEST(ScaleInvariance, ModulusAndMetricAreBitIdentical) {
    const CarpetConfig base = generate_standard_carpet(2);
    const PassageGraph g0 = build_passage_graph(base);
    const ExtremalMetric m0 = solve_crossing_modulus(g0, Side::theta1, Side::theta3);
    for (double k : {0.25, 4.0, 3.0}) {
        const PassageGraph g = build_passage_graph(scaled(base, k));
        ASSERT_EQ(fingerprint(g), fingerprint(g0)) << "scale " << k;
        const ExtremalMetric m = solve_crossing_modulus(g, Side::theta1, Side::theta3);
        EXPECT_EQ(m.modulus, m0.modulus);
        EXPECT_EQ(m.lambda, m0.lambda);
    }
}

TEST(TriangleConsistency, ThousandPairsOnGenerationThree) {
    const PassageGraph g = build_passage_graph(generate_standard_carpet(3));
    const HarmonicSolution s = recover_potential(g, solve_crossing_modulus(g, Side::theta1, Side::theta3));
    Rng rng = Rng::stream(0, "triangle-pairs");
    const auto n = static_cast<std::uint64_t>(g.n_disks);
    int worst_pair = -1;
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const int a = static_cast<int>(rng.below(n)), b = static_cast<int>(rng.below(n));
        const double gap = std::abs(s.u_minus[static_cast<std::size_t>(a)] - s.u_minus[static_cast<std::size_t>(b)]) -
                           rho_distance(g, s.rho, a, b);
        if (gap > worst) {
            worst = gap;
            worst_pair = k;
        }
    }
    EXPECT_LE(worst, 1e-12) << "pair " << worst_pair;
}

TEST(Determinism, ThreadCountDoesNotChangeTheReport) {
    PipelineOptions opt;
    opt.extended = true;
    setenv("CARPET_THREADS", "1", 1);
    const std::string one = report_to_json(run_pipeline(generate_standard_carpet(2), opt), opt).dump();
    setenv("CARPET_THREADS", "4", 1);
    const std::string four = report_to_json(run_pipeline(generate_standard_carpet(2), opt), opt).dump();
    unsetenv("CARPET_THREADS");
    EXPECT_EQ(one, four);
}

TEST(Determinism, SeedChangesOnlySampledChecks) {
    PipelineOptions a, b;
    a.extended = b.extended = true;
    b.seed = 12345;
    const PipelineResult ra = run_pipeline(generate_standard_carpet(2), a);
    const PipelineResult rb = run_pipeline(generate_standard_carpet(2), b);
    EXPECT_EQ(ra.metric.lambda, rb.metric.lambda);
    EXPECT_EQ(ra.conjugate.v_hat, rb.conjugate.v_hat);
}
