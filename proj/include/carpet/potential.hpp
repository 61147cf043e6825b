#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <json.hpp>

#include "carpet/error.hpp"
#include "carpet/geometry.hpp"
#include "carpet/modulus.hpp"
#include "carpet/parallel.hpp"
#include "carpet/passage.hpp"
#include "carpet/rng.hpp"

namespace carpet {

struct HarmonicSolution {
    std::vector<double> u_minus;
    std::vector<double> u_plus;
    std::vector<double> rho;
    double energy = 0.0;  // D = Σ rho²
    std::size_t clamp_count = 0;
    std::vector<int> clamped;     // disk indices: unreachable, excluded, or u_plus overshooting 1
    std::vector<char> excluded;   // per disk, as solved
    double reverse_min = 0.0;     // min_i u_minus + rho + dist(i exclusive, Theta3)
    std::uint64_t graph_fingerprint = 0;
};

// Overshoot above 1 smaller than this is rounding, not a clamp.
inline constexpr double clamp_slack = 1e-9;

// Source and target default to Theta1 and Theta3; the conjugate cross-check
// runs the same recovery from Theta2 to Theta4.
[[nodiscard]] inline HarmonicSolution recover_potential(const PassageGraph& g, std::span<const double> lambda,
                                                        std::span<const char> excluded = {},
                                                        Side source = Side::theta1, Side target = Side::theta3) {
    const std::size_t n = static_cast<std::size_t>(g.n_disks);
    if (lambda.size() != n) throw Error(ErrorKind::mismatch, "metric size does not match the graph");
    HarmonicSolution s;
    s.rho.assign(lambda.begin(), lambda.end());
    s.u_minus.assign(n, 1.0);
    s.u_plus.assign(n, 1.0);
    s.excluded.assign(n, 0);
    if (!excluded.empty()) std::copy(excluded.begin(), excluded.end(), s.excluded.begin());
    s.graph_fingerprint = fingerprint(g);

    const PathTree from1 = node_dijkstra(g, lambda, source, s.excluded);
    const PathTree from3 = node_dijkstra(g, lambda, target, s.excluded);
    s.reverse_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        s.energy += lambda[i] * lambda[i];
        const int v = static_cast<int>(i);
        if (s.excluded[i] || !from1.reached(v)) {
            s.clamped.push_back(v);
            continue;
        }
        const double um = from1.dist[i] - lambda[i];
        const double up = um + lambda[i];
        if (from3.reached(v)) s.reverse_min = std::min(s.reverse_min, um + lambda[i] + (from3.dist[i] - lambda[i]));
        s.u_minus[i] = std::min(um, 1.0);
        s.u_plus[i] = std::min(up, 1.0);
        if (up > 1.0 + clamp_slack) s.clamped.push_back(v);
    }
    s.clamp_count = s.clamped.size();
    return s;
}

[[nodiscard]] inline HarmonicSolution recover_potential(const PassageGraph& g, const ExtremalMetric& m,
                                                        std::span<const char> excluded = {},
                                                        Side source = Side::theta1, Side target = Side::theta3) {
    return recover_potential(g, m.lambda, excluded, source, target);
}

[[nodiscard]] inline nlohmann::json solution_to_json(const HarmonicSolution& s, const PassageGraph& g) {
    nlohmann::json clamped = nlohmann::json::array();
    for (int i : s.clamped) clamped.push_back(g.disk_ids[static_cast<std::size_t>(i)]);
    return {{"u_minus", s.u_minus}, {"u_plus", s.u_plus}, {"rho", s.rho}, {"D", s.energy}, {"clamped", clamped}};
}

// Minimum Σ rho over all disks of a path from disk a to disk b, both ends
// included.
[[nodiscard]] inline double rho_distance(const PassageGraph& g, std::span<const double> rho, int a, int b) {
    const PathTree t = node_dijkstra(g, rho, a);
    return t.reached(b) ? t.dist[static_cast<std::size_t>(b)] : std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// Maximum principle
// ---------------------------------------------------------------------------

struct MaximumPrincipleReport {
    std::size_t trials = 0;
    std::size_t violations = 0;
    double worst_deviation = 0.0;
};

// Max of u_plus over the region minus its max over boundary disks, or the
// analogous min shortfall for u_minus, whichever is larger (0 if exact).
// Boundary disks are region disks adjacent to any node outside the region,
// terminals included.
[[nodiscard]] inline double maximum_principle_deviation(const HarmonicSolution& s, const PassageGraph& g,
                                                        std::span<const int> region) {
    if (region.empty()) return 0.0;
    std::vector<char> in(static_cast<std::size_t>(g.n_disks), 0);
    for (int v : region) in[static_cast<std::size_t>(v)] = 1;
    double max_all = -std::numeric_limits<double>::infinity(), max_bd = max_all;
    double min_all = std::numeric_limits<double>::infinity(), min_bd = min_all;
    for (int v : region) {
        const std::size_t i = static_cast<std::size_t>(v);
        max_all = std::max(max_all, s.u_plus[i]);
        min_all = std::min(min_all, s.u_minus[i]);
        bool boundary = false;
        for (int w : g.adjacency[i])
            if (g.is_terminal(w) || !in[static_cast<std::size_t>(w)]) boundary = true;
        if (boundary) {
            max_bd = std::max(max_bd, s.u_plus[i]);
            min_bd = std::min(min_bd, s.u_minus[i]);
        }
    }
    if (!std::isfinite(max_bd)) return 0.0;
    return std::max({0.0, max_all - max_bd, min_bd - min_all});
}

// Grows a random connected region from a random seed disk, avoiding disks
// adjacent to the Theta1 or Theta3 terminals.
[[nodiscard]] inline std::vector<int> random_region(const PassageGraph& g, Rng& rng, std::size_t max_size) {
    const std::size_t n = static_cast<std::size_t>(g.n_disks);
    std::vector<char> allowed(n, 1);
    for (Side side : {Side::theta1, Side::theta3})
        for (int v : g.adjacency[static_cast<std::size_t>(g.terminal(side))])
            if (!g.is_terminal(v)) allowed[static_cast<std::size_t>(v)] = 0;
    std::vector<int> candidates;
    for (std::size_t i = 0; i < n; ++i)
        if (allowed[i]) candidates.push_back(static_cast<int>(i));
    if (candidates.empty() || max_size == 0) return {};
    const std::size_t target = 1 + rng.below(max_size);
    std::vector<int> region{candidates[rng.below(candidates.size())]};
    std::vector<char> in(n, 0);
    in[static_cast<std::size_t>(region[0])] = 1;
    std::vector<int> frontier;
    auto push_neighbors = [&](int v) {
        for (int w : g.adjacency[static_cast<std::size_t>(v)])
            if (!g.is_terminal(w) && allowed[static_cast<std::size_t>(w)] && !in[static_cast<std::size_t>(w)])
                frontier.push_back(w);
    };
    push_neighbors(region[0]);
    while (region.size() < target && !frontier.empty()) {
        const std::size_t k = rng.below(frontier.size());
        const int w = frontier[k];
        frontier[k] = frontier.back();
        frontier.pop_back();
        if (in[static_cast<std::size_t>(w)]) continue;
        in[static_cast<std::size_t>(w)] = 1;
        region.push_back(w);
        push_neighbors(w);
    }
    std::sort(region.begin(), region.end());
    return region;
}

[[nodiscard]] inline MaximumPrincipleReport check_maximum_principle(const HarmonicSolution& s, const PassageGraph& g,
                                                                    std::size_t trials, std::uint64_t seed,
                                                                    double eps = 1e-9) {
    MaximumPrincipleReport rep;
    const std::size_t max_size = std::max<std::size_t>(1, std::min<std::size_t>(64, static_cast<std::size_t>(g.n_disks) / 4));
    std::vector<double> dev(trials, 0.0);
    parallel_for(trials, [&](std::size_t t) {
        Rng rng = Rng::stream(seed, "max-principle", t);
        dev[t] = maximum_principle_deviation(s, g, random_region(g, rng, max_size));
    });
    for (double d : dev) {
        ++rep.trials;
        rep.worst_deviation = std::max(rep.worst_deviation, d);
        if (d > eps) ++rep.violations;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Comparison principle
// ---------------------------------------------------------------------------

struct ComparisonReport {
    bool holds = true;
    double worst = 0.0;  // min over compared disks of upper.u_minus - lower.u_minus
    std::size_t compared = 0;
};

// Verifies upper.u_minus >= lower.u_minus - eps on every disk that is
// neither excluded nor clamped in either solution.
[[nodiscard]] inline ComparisonReport check_comparison(const HarmonicSolution& upper, const HarmonicSolution& lower,
                                                       double eps = 1e-9) {
    if (upper.graph_fingerprint != lower.graph_fingerprint || upper.u_minus.size() != lower.u_minus.size())
        throw Error(ErrorKind::mismatch, "solutions were computed on different graphs");
    const std::size_t n = upper.u_minus.size();
    std::vector<char> skip(n, 0);
    for (int v : upper.clamped) skip[static_cast<std::size_t>(v)] = 1;
    for (int v : lower.clamped) skip[static_cast<std::size_t>(v)] = 1;
    ComparisonReport rep;
    rep.worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        if (skip[i]) continue;
        ++rep.compared;
        const double diff = upper.u_minus[i] - lower.u_minus[i];
        rep.worst = std::min(rep.worst, diff);
        if (diff < -eps) rep.holds = false;
    }
    if (rep.compared == 0) rep.worst = 0.0;
    return rep;
}

// Removes the given disks (meant to be Theta1-adjacent), re-solves, and
// checks that the surgered potential dominates the original.
[[nodiscard]] inline ComparisonReport comparison_surgery(const PassageGraph& g, const HarmonicSolution& base,
                                                         std::span<const int> removed, const Tolerances& tol = {},
                                                         double eps = 1e-9) {
    std::vector<char> mask(static_cast<std::size_t>(g.n_disks), 0);
    for (int v : removed) mask[static_cast<std::size_t>(v)] = 1;
    const ExtremalMetric m = solve_crossing_modulus(g, Side::theta1, Side::theta3, tol, mask);
    const HarmonicSolution cut = recover_potential(g, m, mask);
    return check_comparison(cut, base, eps);
}

// ---------------------------------------------------------------------------
// Annular test function
// ---------------------------------------------------------------------------

struct AnnularResult {
    std::vector<double> zeta;   // oscillation per disk
    double energy = 0.0;        // Σ zeta², exceptional disk excluded
    int exceptional = -1;       // disk index or -1
    std::vector<double> outer_radii;  // R_j
    std::vector<double> inner_radii;  // r_j = R_j / 2
};

class FewerRings : public Error {
public:
    FewerRings(int achieved, int requested)
        : Error(ErrorKind::fewer_rings, "built " + std::to_string(achieved) + " of " + std::to_string(requested) + " rings"),
          achieved_(achieved) {}
    [[nodiscard]] int achieved() const noexcept { return achieved_; }

private:
    int achieved_;
};

// Radial function dropping by 1/N across each of N nested annuli
// [R_j/2, R_j], chosen so that no disk other than the one allowed exceptional
// disk (the one whose closure holds the center) meets two of them.
[[nodiscard]] inline AnnularResult annular_test_function(const CarpetConfig& config, Point center, double r_outer,
                                                         int rings) {
    if (rings < 2) throw Error(ErrorKind::invalid_argument, "ring count must be >= 2");
    if (!(r_outer > 0.0)) throw Error(ErrorKind::invalid_argument, "outer radius must be positive");
    const std::size_t n = config.disks.size();
    std::vector<double> dmin(n), dmax(n);
    AnnularResult res;
    const double touch = 1e-12 * r_outer;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& poly = config.disks[i].polygon;
        dmin[i] = region_distance(poly, center);
        dmax[i] = max_vertex_distance(poly, center);
        if (dmin[i] <= touch && res.exceptional < 0) res.exceptional = static_cast<int>(i);
    }

    double R = r_outer;
    for (int j = 1; j <= rings; ++j) {
        const double r = 0.5 * R;
        res.outer_radii.push_back(R);
        res.inner_radii.push_back(r);
        if (j == rings) break;
        double next = r;
        for (std::size_t i = 0; i < n; ++i) {
            if (static_cast<int>(i) == res.exceptional) continue;
            if (dmin[i] <= R && dmax[i] >= r) next = std::min(next, dmin[i]);
        }
        next *= 1.0 - 1e-9;
        if (!(next > touch)) throw FewerRings(j, rings);
        R = next;
    }

    const double N = static_cast<double>(rings);
    auto zeta_at = [&](double s) {
        if (s >= res.outer_radii[0]) return 0.0;
        for (int j = 1; j <= rings; ++j) {
            const double Rj = res.outer_radii[static_cast<std::size_t>(j - 1)];
            const double rj = res.inner_radii[static_cast<std::size_t>(j - 1)];
            if (s >= rj) return s >= Rj ? (j - 1) / N : (j - 1) / N + (Rj - s) / (N * rj);
        }
        return 1.0;
    };
    res.zeta.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        res.zeta[i] = zeta_at(dmin[i]) - zeta_at(dmax[i]);
        if (static_cast<int>(i) != res.exceptional) res.energy += res.zeta[i] * res.zeta[i];
    }
    return res;
}

// Least-squares fit energy(N) ≈ C/N; returns C and the relative residual
// ‖E - C/N‖₂ / ‖E‖₂.
struct InverseFit {
    double c = 0.0;
    double relative_residual = 0.0;
};

[[nodiscard]] inline InverseFit fit_inverse(std::span<const int> ns, std::span<const double> energies) {
    double num = 0.0, den = 0.0, ee = 0.0;
    for (std::size_t k = 0; k < ns.size(); ++k) {
        const double inv = 1.0 / ns[k];
        num += energies[k] * inv;
        den += inv * inv;
        ee += energies[k] * energies[k];
    }
    InverseFit fit;
    fit.c = den > 0.0 ? num / den : 0.0;
    double rr = 0.0;
    for (std::size_t k = 0; k < ns.size(); ++k) {
        const double e = energies[k] - fit.c / ns[k];
        rr += e * e;
    }
    fit.relative_residual = ee > 0.0 ? std::sqrt(rr / ee) : 0.0;
    return fit;
}

}  // namespace carpet
