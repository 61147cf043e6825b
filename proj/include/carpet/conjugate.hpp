#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include <json.hpp>

#include "carpet/error.hpp"
#include "carpet/modulus.hpp"
#include "carpet/parallel.hpp"
#include "carpet/passage.hpp"
#include "carpet/potential.hpp"

namespace carpet {

struct LevelCrossing {
    double t = 0.0;
    std::vector<int> crossed;  // disk indices in first-encounter order from Theta2
    double total_mass = 0.0;
    std::vector<Point> path;   // interface polyline (cell corners)
};

struct ConjugateSolution {
    std::vector<double> v_hat;
    std::vector<double> v_plus;
    std::vector<LevelCrossing> level_samples;
    double t_independence_error = 0.0;
    std::vector<int> inherited;  // disks whose value came from a neighbor (zero rho or never crossed)
};

// Values closer than this to a breakpoint count as the breakpoint.
inline constexpr double breakpoint_tolerance = 1e-12;

namespace detail {

inline bool is_level_breakpoint(const HarmonicSolution& s, double t) {
    std::vector<char> skip(s.u_minus.size(), 0);
    for (int v : s.clamped) skip[static_cast<std::size_t>(v)] = 1;
    for (std::size_t i = 0; i < s.u_minus.size(); ++i) {
        if (skip[i]) continue;
        if (std::abs(t - s.u_minus[i]) <= breakpoint_tolerance || std::abs(t - s.u_plus[i]) <= breakpoint_tolerance)
            return true;
    }
    return false;
}

// Sorted breakpoint values with near-duplicates merged, 0 and 1 included.
inline std::vector<double> breakpoints(const HarmonicSolution& s) {
    std::vector<char> skip(s.u_minus.size(), 0);
    for (int v : s.clamped) skip[static_cast<std::size_t>(v)] = 1;
    std::vector<double> b{0.0, 1.0};
    for (std::size_t i = 0; i < s.u_minus.size(); ++i)
        if (!skip[i]) {
            b.push_back(s.u_minus[i]);
            b.push_back(s.u_plus[i]);
        }
    std::sort(b.begin(), b.end());
    std::vector<double> merged;
    for (double v : b)
        if (merged.empty() || v - merged.back() > breakpoint_tolerance) merged.push_back(v);
    return merged;
}

inline double smallest_gap(const std::vector<double>& b) {
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < b.size(); ++i) gap = std::min(gap, b[i] - b[i - 1]);
    return gap;
}

// Moves t off any breakpoint by delta, preferring the side that stays
// inside (lo, hi).
inline double jitter(double t, const std::vector<double>& b, double delta, double lo, double hi) {
    const auto it = std::lower_bound(b.begin(), b.end(), t - delta);
    if (it == b.end() || *it > t + delta) return t;
    const double up = *it + delta, down = *it - delta;
    if (up < hi) return up;
    if (down > lo) return down;
    return t;
}

}  // namespace detail

// Walks the cell-edge interface between the below-t region (disks with
// u_plus <= t, together with the Theta1 exterior) and everything else,
// keeping the below region on the left. The walk starts where the Theta1
// exterior meets the Theta2 exterior and stops at the Theta4 exterior.
[[nodiscard]] inline LevelCrossing trace_level(const HarmonicSolution& s, const PassageGraph& g, double t) {
    if (!(t > 0.0 && t < 1.0)) throw Error(ErrorKind::invalid_argument, "level must lie in (0,1)");
    if (detail::is_level_breakpoint(s, t))
        throw Error(ErrorKind::breakpoint, "level " + std::to_string(t) + " coincides with a disk breakpoint");
    const Raster& r = g.raster;
    const std::size_t n = static_cast<std::size_t>(g.n_disks);
    std::vector<char> clamped(n, 0);
    for (int v : s.clamped) clamped[static_cast<std::size_t>(v)] = 1;

    // 0 = high side, 1 = below, 2 = crossing (also high side).
    std::vector<std::uint8_t> cls(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (clamped[i]) continue;
        if (s.u_plus[i] <= t)
            cls[i] = 1;
        else if (s.u_minus[i] < t)
            cls[i] = 2;
    }
    const std::int32_t ext1 = Raster::exterior(Side::theta1), ext4 = Raster::exterior(Side::theta4);
    auto low = [&](int ix, int iy) {
        if (!r.in_grid(ix, iy)) return false;
        const std::int32_t l = r.at(ix, iy);
        if (l >= 0) return cls[static_cast<std::size_t>(l)] == 1;
        return l == ext1;
    };

    // Start: lowest cell of the left border column that is in the Theta1
    // exterior while the cell below it is not.
    int start_y = -1;
    for (int iy = 1; iy < r.height; ++iy)
        if (r.at(0, iy) == ext1 && r.at(0, iy - 1) != ext1) {
            start_y = iy;
            break;
        }
    if (start_y < 0) throw Error(ErrorKind::topology, "Theta1 exterior not found on the raster border");

    LevelCrossing lc;
    lc.t = t;
    std::vector<char> seen(n, 0);
    // Directions: 0 east, 1 north, 2 west, 3 south.
    static constexpr std::array<int, 4> dx{1, 0, -1, 0}, dy{0, 1, 0, -1};
    int vx = 0, vy = start_y, dir = 0;
    lc.path.push_back(r.corner(vx, vy));
    const std::size_t max_steps = 4 * static_cast<std::size_t>(r.width + 1) * static_cast<std::size_t>(r.height + 1);
    for (std::size_t step = 0; step < max_steps; ++step) {
        // Cell on the right of the edge about to be traversed.
        int rx, ry;
        switch (dir) {
            case 0: rx = vx; ry = vy - 1; break;
            case 1: rx = vx; ry = vy; break;
            case 2: rx = vx - 1; ry = vy; break;
            default: rx = vx - 1; ry = vy - 1; break;
        }
        if (!r.in_grid(rx, ry)) throw Error(ErrorKind::topology, "level interface left the raster at t=" + std::to_string(t));
        const std::int32_t right = r.at(rx, ry);
        if (right == ext4) {
            if (!(lc.path.back() == r.corner(vx, vy))) lc.path.push_back(r.corner(vx, vy));
            for (int v : lc.crossed) lc.total_mass += s.rho[static_cast<std::size_t>(v)];
            return lc;
        }
        if (right >= 0 && cls[static_cast<std::size_t>(right)] == 2 && !seen[static_cast<std::size_t>(right)]) {
            seen[static_cast<std::size_t>(right)] = 1;
            lc.crossed.push_back(right);
        }
        vx += dx[static_cast<std::size_t>(dir)];
        vy += dy[static_cast<std::size_t>(dir)];
        if (vx == 0 && vy == start_y && dir == 0) break;

        int alx, aly, arx, ary;
        switch (dir) {
            case 0: alx = vx; aly = vy; arx = vx; ary = vy - 1; break;
            case 1: alx = vx - 1; aly = vy; arx = vx; ary = vy; break;
            case 2: alx = vx - 1; aly = vy - 1; arx = vx - 1; ary = vy; break;
            default: alx = vx; aly = vy - 1; arx = vx - 1; ary = vy - 1; break;
        }
        const int prev = dir;
        if (!low(alx, aly))
            dir = (dir + 1) % 4;
        else if (low(arx, ary))
            dir = (dir + 3) % 4;
        if (dir != prev) lc.path.push_back(r.corner(vx, vy));
    }
    throw Error(ErrorKind::topology, "level interface at t=" + std::to_string(t) + " never reached Theta4");
}

[[nodiscard]] inline nlohmann::json level_to_json(const LevelCrossing& lc, const PassageGraph& g) {
    nlohmann::json ids = nlohmann::json::array();
    for (int v : lc.crossed) ids.push_back(g.disk_ids[static_cast<std::size_t>(v)]);
    return {{"t", lc.t}, {"crossed", ids}, {"mass", lc.total_mass}};
}

// v_hat per disk: the rho-mass preceding the disk along level interfaces
// through it, averaged over levels_per_disk stratified levels in its band.
[[nodiscard]] inline ConjugateSolution compute_conjugate(const HarmonicSolution& s, const PassageGraph& g,
                                                         int levels_per_disk, double eps_lambda = 1e-9) {
    if (levels_per_disk < 1) throw Error(ErrorKind::invalid_argument, "levels per disk must be >= 1");
    const std::size_t n = static_cast<std::size_t>(g.n_disks);
    std::vector<char> clamped(n, 0);
    for (int v : s.clamped) clamped[static_cast<std::size_t>(v)] = 1;
    const std::vector<double> bps = detail::breakpoints(s);
    const double delta = detail::smallest_gap(bps) / 4.0;

    ConjugateSolution c;
    c.v_hat.assign(n, 0.0);
    c.v_plus.assign(n, 0.0);
    std::vector<char> assigned(n, 0);
    std::map<double, std::size_t> cache;  // t -> index into level_samples
    std::vector<std::vector<std::size_t>> position;  // per sample: disk -> rank + 1 (0 = absent)
    std::vector<std::vector<double>> prefix;          // per sample: mass before rank

    auto trace = [&](double t) -> std::size_t {
        const auto it = cache.find(t);
        if (it != cache.end()) return it->second;
        LevelCrossing lc = trace_level(s, g, t);
        std::vector<std::size_t> pos(n, 0);
        std::vector<double> pre(lc.crossed.size(), 0.0);
        double acc = 0.0;
        for (std::size_t k = 0; k < lc.crossed.size(); ++k) {
            pos[static_cast<std::size_t>(lc.crossed[k])] = k + 1;
            pre[k] = acc;
            acc += s.rho[static_cast<std::size_t>(lc.crossed[k])];
        }
        c.level_samples.push_back(std::move(lc));
        position.push_back(std::move(pos));
        prefix.push_back(std::move(pre));
        cache.emplace(t, c.level_samples.size() - 1);
        return c.level_samples.size() - 1;
    };

    for (std::size_t i = 0; i < n; ++i) {
        if (clamped[i] || !(s.rho[i] > eps_lambda)) continue;
        const double lo = s.u_minus[i], hi = s.u_plus[i];
        double sum = 0.0, mn = std::numeric_limits<double>::infinity(), mx = -mn;
        int count = 0;
        for (int k = 0; k < levels_per_disk; ++k) {
            double t = lo + (k + 0.5) / levels_per_disk * (hi - lo);
            t = detail::jitter(t, bps, delta, lo, hi);
            if (!(t > lo && t < hi) || !(t > 0.0 && t < 1.0) || detail::is_level_breakpoint(s, t)) continue;
            std::size_t idx;
            try {
                idx = trace(t);
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::topology)
                    throw Error(ErrorKind::topology, "disk " + std::to_string(g.disk_ids[i]) + ": " + e.detail());
                throw;
            }
            const std::size_t rank = position[idx][i];
            if (rank == 0) continue;
            const double v = prefix[idx][rank - 1];
            sum += v;
            mn = std::min(mn, v);
            mx = std::max(mx, v);
            ++count;
        }
        if (count == 0) continue;
        c.v_hat[i] = sum / count;
        c.t_independence_error = std::max(c.t_independence_error, mx - mn);
        assigned[i] = 1;
    }

    // Remaining disks take v_hat from a neighbor whose u-band holds their
    // value; repeated until nothing changes so chains of them resolve too.
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (assigned[i]) continue;
            int pick = -1;
            for (int w : g.adjacency[i]) {
                if (g.is_terminal(w) || !assigned[static_cast<std::size_t>(w)]) continue;
                const std::size_t j = static_cast<std::size_t>(w);
                if (s.u_minus[j] - breakpoint_tolerance <= s.u_minus[i] && s.u_minus[i] <= s.u_plus[j] + breakpoint_tolerance) {
                    pick = w;
                    break;
                }
                if (pick < 0) pick = w;
            }
            if (pick < 0) continue;
            c.v_hat[i] = c.v_hat[static_cast<std::size_t>(pick)];
            assigned[i] = 1;
            c.inherited.push_back(static_cast<int>(i));
            changed = true;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!assigned[i]) c.inherited.push_back(static_cast<int>(i));
        c.v_plus[i] = c.v_hat[i] + s.rho[i];
    }
    std::sort(c.inherited.begin(), c.inherited.end());
    std::sort(c.level_samples.begin(), c.level_samples.end(),
              [](const LevelCrossing& a, const LevelCrossing& b) { return a.t < b.t; });
    return c;
}

[[nodiscard]] inline nlohmann::json conjugate_to_json(const ConjugateSolution& c, const PassageGraph& g) {
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& lc : c.level_samples) levels.push_back(level_to_json(lc, g));
    return {{"v_hat", c.v_hat}, {"t_independence_error", c.t_independence_error}, {"levels", levels}};
}

// ---------------------------------------------------------------------------
// Checks
// ---------------------------------------------------------------------------

struct LevelMassReport {
    std::vector<double> levels;
    std::vector<double> masses;
    double max_relative_error = 0.0;
    double mean_relative_error = 0.0;
};

// Stratified levels (k + 1/2)/samples across (0,1), jittered off
// breakpoints; compares the crossed rho-mass with D.
[[nodiscard]] inline LevelMassReport verify_level_mass(const HarmonicSolution& s, const PassageGraph& g,
                                                       std::size_t samples) {
    LevelMassReport rep;
    const std::vector<double> bps = detail::breakpoints(s);
    const double delta = detail::smallest_gap(bps) / 4.0;
    const double d = s.energy;
    rep.levels.resize(samples);
    rep.masses.resize(samples);
    parallel_for(samples, [&](std::size_t k) {
        const double t0 = (static_cast<double>(k) + 0.5) / static_cast<double>(samples);
        rep.levels[k] = detail::jitter(t0, bps, delta, 0.0, 1.0);
        rep.masses[k] = trace_level(s, g, rep.levels[k]).total_mass;
    });
    double total = 0.0;
    for (double mass : rep.masses) {
        const double err = d > 0.0 ? std::abs(mass - d) / d : std::abs(mass);
        rep.max_relative_error = std::max(rep.max_relative_error, err);
        total += err;
    }
    rep.mean_relative_error = samples ? total / static_cast<double>(samples) : 0.0;
    return rep;
}

struct MonotoneReport {
    bool pass = true;
    std::size_t violations = 0;
    double worst = 0.0;  // most negative (increment - rho(previous))
};

// v_hat must increase along the crossing by at least the rho of the
// preceding disk.
[[nodiscard]] inline MonotoneReport verify_monotone(const LevelCrossing& lc, const ConjugateSolution& c,
                                                    std::span<const double> rho, double eps = 1e-9) {
    MonotoneReport rep;
    for (std::size_t k = 1; k < lc.crossed.size(); ++k) {
        const std::size_t a = static_cast<std::size_t>(lc.crossed[k - 1]), b = static_cast<std::size_t>(lc.crossed[k]);
        const double inc = c.v_hat[b] - c.v_hat[a];
        const double slack = inc - rho[a];
        rep.worst = std::min(rep.worst, slack);
        if (!(inc > 0.0) || slack < -eps) {
            rep.pass = false;
            ++rep.violations;
        }
    }
    return rep;
}

struct DualCheckReport {
    double dual_modulus = 0.0;  // Theta2 -> Theta4 crossing modulus
    double quantile90 = 0.0;    // of |v_hat - D * u'_minus|
    double max_error = 0.0;
    std::vector<double> v_dual;
};

// Independent route to v_hat: solve the Theta2 -> Theta4 problem and scale
// its potential by D.
[[nodiscard]] inline DualCheckReport dual_conjugate_check(const HarmonicSolution& s, const ConjugateSolution& c,
                                                          const PassageGraph& g, const Tolerances& tol = {}) {
    DualCheckReport rep;
    const ExtremalMetric m = solve_crossing_modulus(g, Side::theta2, Side::theta4, tol);
    rep.dual_modulus = m.modulus;
    const HarmonicSolution dual = recover_potential(g, m, {}, Side::theta2, Side::theta4);
    const std::size_t n = s.u_minus.size();
    std::vector<char> skip(n, 0);
    for (int v : s.clamped) skip[static_cast<std::size_t>(v)] = 1;
    for (int v : dual.clamped) skip[static_cast<std::size_t>(v)] = 1;
    rep.v_dual.assign(n, 0.0);
    std::vector<double> errs;
    for (std::size_t i = 0; i < n; ++i) {
        rep.v_dual[i] = s.energy * dual.u_minus[i];
        if (skip[i]) continue;
        errs.push_back(std::abs(c.v_hat[i] - rep.v_dual[i]));
    }
    if (!errs.empty()) {
        std::sort(errs.begin(), errs.end());
        rep.max_error = errs.back();
        const std::size_t k = static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(errs.size()))) - 1;
        rep.quantile90 = errs[std::min(k, errs.size() - 1)];
    }
    return rep;
}

}  // namespace carpet
