#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <set>
#include <span>
#include <vector>

#include <json.hpp>

#include "carpet/error.hpp"
#include "carpet/passage.hpp"
#include "carpet/qp.hpp"
#include "carpet/rng.hpp"

namespace carpet {

struct Tolerances {
    double gap = 1e-8;
    double chain = 1e-6;
    double kkt = 1e-6;
    double lambda = 1e-9;
    double conj = 0.02;  // relative to D
    std::size_t max_columns = 100000;
    int seed_chains = 16;
};

struct ActiveChain {
    std::vector<int> disks;  // disk node indices in chain order
    double mu = 0.0;
};

struct ExtremalMetric {
    std::vector<double> lambda;
    double modulus = 0.0;
    std::vector<ActiveChain> active;
    double duality_gap = 0.0;
    std::size_t iterations = 0;  // QP restarts (column generation) or sweeps (explicit)
    std::size_t columns = 0;     // stored chains at exit
    double min_chain_weight = 0.0;
    double kkt_residual = 0.0;
    bool converged = false;
};

class NoConvergence : public Error {
public:
    NoConvergence(const std::string& detail, ExtremalMetric partial)
        : Error(ErrorKind::no_convergence, detail), partial_(std::move(partial)) {}
    [[nodiscard]] const ExtremalMetric& partial() const noexcept { return partial_; }

private:
    ExtremalMetric partial_;
};

struct ModulusProblem {
    const PassageGraph* graph = nullptr;
    Side source = Side::theta1;
    Side target = Side::theta3;
    std::vector<std::vector<int>> family;  // explicit chains (disk indices); empty means use the oracle
    std::vector<char> excluded;            // per disk; empty means none
};

// max_i |λ_i - Σ_{γ∋i} μ_γ| over disks with λ_i > eps_lambda.
[[nodiscard]] inline double kkt_residual(const ExtremalMetric& m, double eps_lambda) {
    std::vector<double> s(m.lambda.size(), 0.0);
    for (const auto& a : m.active)
        for (int i : a.disks) s[static_cast<std::size_t>(i)] += a.mu;
    double worst = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (m.lambda[i] > eps_lambda) worst = std::max(worst, std::abs(m.lambda[i] - s[i]));
    return worst;
}

namespace detail {

inline std::vector<int> support_of(std::span<const int> chain) {
    std::vector<int> s(chain.begin(), chain.end());
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

inline double chain_weight(std::span<const double> x, std::span<const int> support) {
    double s = 0.0;
    for (int i : support) s += x[static_cast<std::size_t>(i)];
    return s;
}

// Fills lambda, modulus, gap and the minimum chain weight from a dual
// vector u over `rows` and the primal x = Σ u_p 1_{rows_p}.
inline void finish_metric(ExtremalMetric& m, std::span<const double> x, double w_min, double sum_u,
                          double eps_lambda) {
    const double scale = (w_min > 0.0 && w_min < 1.0) ? 1.0 / w_min : 1.0;
    m.lambda.assign(x.begin(), x.end());
    double primal = 0.0, xx = 0.0;
    for (double& l : m.lambda) {
        xx += l * l;
        l *= scale;
        primal += l * l;
    }
    m.modulus = primal;
    m.min_chain_weight = w_min;
    m.duality_gap = std::max(0.0, primal - (2.0 * sum_u - xx));
    if (!(w_min > 0.0)) m.duality_gap = std::numeric_limits<double>::infinity();
    m.kkt_residual = kkt_residual(m, eps_lambda);
}

}  // namespace detail

// Hildreth's coordinate ascent on the dual of the covering QP. Meant as an
// independent brute-force route for small explicit families.
[[nodiscard]] inline ExtremalMetric solve_modulus_explicit(const std::vector<std::vector<int>>& chains, int n_disks,
                                                           double gap_tol = 1e-10, std::size_t max_sweeps = 2'000'000) {
    if (chains.empty()) throw Error(ErrorKind::invalid_argument, "explicit family is empty");
    std::vector<std::vector<int>> rows;
    for (const auto& c : chains) {
        auto s = detail::support_of(c);
        if (s.empty()) throw Error(ErrorKind::invalid_argument, "chain without disks");
        for (int i : s)
            if (i < 0 || i >= n_disks) throw Error(ErrorKind::invalid_argument, "chain references unknown disk");
        rows.push_back(std::move(s));
    }
    const std::size_t n = static_cast<std::size_t>(n_disks);
    std::vector<double> x(n, 0.0), u(rows.size(), 0.0);
    ExtremalMetric m;
    double w_min = 0.0, sum_u = 0.0;
    for (std::size_t sweep = 1; sweep <= max_sweeps; ++sweep) {
        for (std::size_t p = 0; p < rows.size(); ++p) {
            const double size = static_cast<double>(rows[p].size());
            const double nu = std::max(0.0, u[p] + (1.0 - detail::chain_weight(x, rows[p])) / size);
            const double delta = nu - u[p];
            if (delta == 0.0) continue;
            u[p] = nu;
            for (int i : rows[p]) x[static_cast<std::size_t>(i)] += delta;
        }
        // Rebuild x from u occasionally so rounding drift cannot accumulate.
        if (sweep % 256 == 0) {
            std::fill(x.begin(), x.end(), 0.0);
            for (std::size_t p = 0; p < rows.size(); ++p)
                for (int i : rows[p]) x[static_cast<std::size_t>(i)] += u[p];
        }
        w_min = std::numeric_limits<double>::infinity();
        for (const auto& r : rows) w_min = std::min(w_min, detail::chain_weight(x, r));
        sum_u = 0.0;
        for (double v : u) sum_u += v;
        m.iterations = sweep;
        detail::finish_metric(m, x, w_min, sum_u, 0.0);
        if (m.duality_gap <= gap_tol) {
            m.converged = true;
            break;
        }
    }
    m.columns = rows.size();
    m.active.clear();
    for (std::size_t p = 0; p < rows.size(); ++p)
        if (u[p] > 0.0) m.active.push_back({rows[p], u[p]});
    m.kkt_residual = kkt_residual(m, 1e-9);
    return m;
}

// Column generation: restricted QP over stored chains, shortest-chain oracle
// under the current weights, repeat until no chain is short.
[[nodiscard]] inline ExtremalMetric solve_modulus(const ModulusProblem& problem, const Tolerances& tol = {}) {
    if (problem.graph == nullptr) throw Error(ErrorKind::invalid_argument, "modulus problem without graph");
    const PassageGraph& g = *problem.graph;
    const std::size_t n = static_cast<std::size_t>(g.n_disks);
    std::vector<char> excluded = problem.excluded;
    if (excluded.empty()) excluded.assign(n, 0);
    if (excluded.size() != n) throw Error(ErrorKind::invalid_argument, "excluded mask size does not match disk count");

    CoveringQP qp(n);
    std::vector<std::vector<int>> sequences;  // chain order, parallel to qp rows
    std::set<std::vector<int>> seen;
    auto add = [&](std::vector<int> seq) {
        auto key = detail::support_of(seq);
        if (key.empty() || !seen.insert(key).second) return false;
        qp.add_row(key);
        sequences.push_back(std::move(seq));
        return true;
    };

    const bool oracle = problem.family.empty();
    if (oracle) {
        const auto seeds = enumerate_seed_chains(g, problem.source, problem.target, std::max(1, tol.seed_chains), excluded);
        if (seeds.empty()) throw Error(ErrorKind::graph_disconnected, "no chain joins the requested sides");
        for (const auto& c : seeds) add(std::vector<int>(c.disks().begin(), c.disks().end()));
    } else {
        for (const auto& c : problem.family) {
            for (int i : c)
                if (i < 0 || static_cast<std::size_t>(i) >= n || excluded[static_cast<std::size_t>(i)])
                    throw Error(ErrorKind::invalid_argument, "explicit chain uses an unknown or excluded disk");
            add(c);
        }
        if (sequences.empty()) throw Error(ErrorKind::invalid_argument, "explicit family is empty");
    }

    ExtremalMetric m;
    auto snapshot = [&](double w_min) {
        const auto& x = qp.x();
        const auto& act = qp.active();
        const auto& u = qp.multipliers();
        // Dual objective evaluated on Σ u 1_γ rebuilt from scratch.
        std::vector<double> nu(n, 0.0);
        double sum_u = 0.0;
        for (std::size_t k = 0; k < act.size(); ++k) {
            sum_u += u[k];
            for (int i : qp.row(act[k])) nu[static_cast<std::size_t>(i)] += u[k];
        }
        double xx = 0.0, nn = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            xx += x[i] * x[i];
            nn += nu[i] * nu[i];
        }
        m.active.clear();
        for (std::size_t k = 0; k < act.size(); ++k)
            if (u[k] > 0.0) m.active.push_back({sequences[act[k]], u[k] * (w_min > 0.0 && w_min < 1.0 ? 1.0 / w_min : 1.0)});
        detail::finish_metric(m, x, w_min, sum_u, tol.lambda);
        // finish_metric assumed x = Nu; use the exact dual value instead.
        const double scale = (w_min > 0.0 && w_min < 1.0) ? 1.0 / w_min : 1.0;
        const double dual = 2.0 * sum_u - nn;
        m.duality_gap = w_min > 0.0 ? std::max(0.0, scale * scale * xx - dual) : std::numeric_limits<double>::infinity();
        m.columns = sequences.size();
        m.kkt_residual = kkt_residual(m, tol.lambda);
    };

    while (true) {
        ++m.iterations;
        if (!qp.solve()) {
            snapshot(0.0);
            throw NoConvergence("restricted QP exceeded its step budget", m);
        }
        double w_min;
        std::vector<int> candidate;
        if (oracle) {
            const ChainResult r = shortest_chain(g, qp.x(), problem.source, problem.target, excluded);
            w_min = r.weight;
            candidate.assign(r.chain.disks().begin(), r.chain.disks().end());
        } else {
            w_min = std::numeric_limits<double>::infinity();
            for (std::size_t p = 0; p < qp.row_count(); ++p) w_min = std::min(w_min, qp.row_value(p));
        }
        snapshot(w_min);
        const bool chain_ok = w_min >= 1.0 - tol.chain;
        const bool gap_ok = m.duality_gap <= tol.gap * std::max(1.0, m.modulus);
        if (chain_ok && gap_ok) {
            m.converged = true;
            return m;
        }
        if (!oracle || w_min >= 1.0 - 1e-13 || !add(std::move(candidate))) {
            // Nothing left to add; report what we have.
            m.converged = chain_ok && m.kkt_residual <= tol.kkt;
            return m;
        }
        if (sequences.size() > tol.max_columns) {
            snapshot(w_min);
            throw NoConvergence("column cap of " + std::to_string(tol.max_columns) + " exceeded", m);
        }
    }
}

[[nodiscard]] inline ExtremalMetric solve_crossing_modulus(const PassageGraph& g, Side source, Side target,
                                                           const Tolerances& tol = {},
                                                           std::vector<char> excluded = {}) {
    ModulusProblem p;
    p.graph = &g;
    p.source = source;
    p.target = target;
    p.excluded = std::move(excluded);
    return solve_modulus(p, tol);
}

[[nodiscard]] inline nlohmann::json metric_to_json(const ExtremalMetric& m, const PassageGraph& g) {
    nlohmann::json active = nlohmann::json::array();
    for (const auto& a : m.active) {
        nlohmann::json ids = nlohmann::json::array();
        for (int i : a.disks) ids.push_back(g.disk_ids[static_cast<std::size_t>(i)]);
        active.push_back({{"chain", ids}, {"mu", a.mu}});
    }
    return {{"lambda", m.lambda}, {"modulus", m.modulus}, {"gap", m.duality_gap}, {"active", active}};
}

// ---------------------------------------------------------------------------
// Admissibility sampling
// ---------------------------------------------------------------------------

struct AdmissibilityReport {
    std::size_t sampled = 0;
    double min_weight = std::numeric_limits<double>::infinity();
    std::size_t violations = 0;
    std::vector<int> worst_chain;  // disk indices
};

// Samples chains as shortest paths under randomly perturbed weights and
// measures them with the true weights.
[[nodiscard]] inline AdmissibilityReport check_admissible(const PassageGraph& g, std::span<const double> lambda,
                                                          std::size_t samples, std::uint64_t seed,
                                                          double eps_chain = 1e-6, Side source = Side::theta1,
                                                          Side target = Side::theta3) {
    AdmissibilityReport rep;
    Rng rng = Rng::stream(seed, "admissibility");
    double mean = 0.0;
    for (double l : lambda) mean += l;
    mean = lambda.empty() ? 0.0 : mean / static_cast<double>(lambda.size());
    const double floor = mean > 0.0 ? 0.05 * mean : 1.0;
    std::vector<double> w(lambda.size());
    for (std::size_t s = 0; s < samples; ++s) {
        for (std::size_t i = 0; i < w.size(); ++i)
            w[i] = s == 0 ? lambda[i] : lambda[i] * (0.5 + rng.uniform()) + floor * rng.uniform();
        const ChainResult r = shortest_chain(g, w, source, target);
        const auto disks = r.chain.disks();
        double total = 0.0;
        for (int i : disks) total += lambda[static_cast<std::size_t>(i)];
        ++rep.sampled;
        if (total < 1.0 - eps_chain) ++rep.violations;
        if (total < rep.min_weight) {
            rep.min_weight = total;
            rep.worst_chain.assign(disks.begin(), disks.end());
        }
    }
    return rep;
}

}  // namespace carpet
