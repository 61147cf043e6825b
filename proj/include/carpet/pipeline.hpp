#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "carpet/carpet_io.hpp"
#include "carpet/conjugate.hpp"
#include "carpet/error.hpp"
#include "carpet/geometry.hpp"
#include "carpet/layout.hpp"
#include "carpet/modulus.hpp"
#include "carpet/passage.hpp"
#include "carpet/potential.hpp"

namespace carpet {

struct PipelineOptions {
    double resolution = 0.0;  // 0 picks default_resolution
    Tolerances tol;
    int levels_per_disk = 3;
    std::size_t level_samples = 64;
    std::vector<double> levels;  // extra levels traced for the report and overlays
    std::uint64_t seed = 0;
    bool extended = false;       // pushforward, principles, admissibility sampling
    bool rigidity = false;
    std::size_t max_principle_trials = 200;
    std::size_t admissibility_samples = 100;
};

// A failure inside one pipeline stage; `stage` names it for the CLI.
class StageError : public Error {
public:
    StageError(std::string stage, const Error& inner)
        : Error(inner.kind(), inner.detail()), stage_(std::move(stage)) {}
    [[nodiscard]] const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

struct Check {
    std::string name;
    double value = 0.0;
    std::string relation;  // "<=", ">=", "=="
    double target = 0.0;
    bool pass = false;
};

struct RigidityReport {
    double displacement = 0.0;  // max corner displacement over squares
    double height = 0.0;        // A
    double energy_error = 0.0;  // |D - A|
};

struct PipelineResult {
    CarpetConfig config;
    GeometryReport geometry;
    PassageGraph graph;
    ExtremalMetric metric;
    HarmonicSolution solution;
    ConjugateSolution conjugate;
    SquareLayout layout;
    LayoutReport layout_report;
    LevelMassReport level_mass;
    DualCheckReport dual;
    std::vector<LevelCrossing> extra_levels;
    std::optional<PushforwardReport> pushforward;
    std::optional<MaximumPrincipleReport> max_principle;
    std::optional<AdmissibilityReport> admissibility;
    std::optional<ComparisonReport> comparison;
    std::optional<RigidityReport> rigidity;
    std::vector<Check> checks;
    std::vector<std::pair<std::string, double>> timings;  // seconds per stage

    [[nodiscard]] bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

namespace detail {

template <class Fn>
auto run_stage(PipelineResult& r, const char* name, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    auto finish = [&] {
        r.timings.emplace_back(name, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    };
    try {
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            finish();
        } else {
            auto out = fn();
            finish();
            return out;
        }
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(name, e);
    }
}

inline void add_check(std::vector<Check>& out, std::string name, double value, std::string relation, double target) {
    bool pass = false;
    if (relation == "<=") pass = value <= target;
    else if (relation == ">=") pass = value >= target;
    else pass = value == target;
    if (std::isnan(value)) pass = false;
    out.push_back({std::move(name), value, std::move(relation), target, pass});
}

inline bool is_axis_square(const Polygon& p) {
    if (p.size() != 4) return false;
    const Box b = bounding_box(p);
    if (std::abs(b.width() - b.height()) > 1e-12 * std::max(1.0, b.width())) return false;
    for (const Point& q : p)
        if ((q.x != b.xmin && q.x != b.xmax) || (q.y != b.ymin && q.y != b.ymax)) return false;
    return true;
}

}  // namespace detail

// Square-carpet input [x0, x0+1] x [y0, y0+A]: compares every output square,
// shifted to the input origin, with its input square.
[[nodiscard]] inline RigidityReport rigidity_from(const CarpetConfig& config, const SquareLayout& layout) {
    const Box outer = bounding_box(config.outer);
    if (config.outer.size() != 4 || std::abs(outer.width() - 1.0) > 1e-12)
        throw Error(ErrorKind::invalid_argument, "rigidity check needs a rectangle of width 1");
    RigidityReport rep;
    rep.height = outer.height();
    rep.energy_error = std::abs(layout.rect.height() - rep.height);
    for (std::size_t i = 0; i < config.disks.size(); ++i) {
        if (!detail::is_axis_square(config.disks[i].polygon))
            throw Error(ErrorKind::invalid_argument, "rigidity check needs axis-parallel square disks");
        const Box in = config.disks[i].box;
        const Square& s = layout.squares[i];
        const double x0 = s.x + outer.xmin, y0 = s.y + outer.ymin, x1 = x0 + s.side, y1 = y0 + s.side;
        rep.displacement = std::max({rep.displacement, std::hypot(x0 - in.xmin, y0 - in.ymin), std::hypot(x1 - in.xmax, y0 - in.ymin),
                                     std::hypot(x1 - in.xmax, y1 - in.ymax), std::hypot(x0 - in.xmin, y1 - in.ymax)});
    }
    return rep;
}

[[nodiscard]] inline PipelineResult run_pipeline(const CarpetConfig& input, const PipelineOptions& opt = {}) {
    PipelineResult r;
    const Tolerances& tol = opt.tol;

    detail::run_stage(r, "geometry", [&] {
        r.config = canonicalize(input);
        r.geometry = validate_carpet(r.config);
        if (!r.geometry.ok()) {
            std::string msg;
            for (const auto& f : r.geometry.failures) msg += (msg.empty() ? "" : "; ") + f;
            throw Error(ErrorKind::validation, msg);
        }
    });
    detail::run_stage(r, "passage", [&] {
        const double h = opt.resolution > 0.0 ? opt.resolution : default_resolution(r.config);
        r.graph = build_passage_graph(r.config, h);
    });
    detail::run_stage(r, "modulus", [&] { r.metric = solve_crossing_modulus(r.graph, Side::theta1, Side::theta3, tol); });
    detail::run_stage(r, "potential", [&] { r.solution = recover_potential(r.graph, r.metric); });
    detail::run_stage(r, "conjugate", [&] {
        r.conjugate = compute_conjugate(r.solution, r.graph, opt.levels_per_disk, tol.lambda);
        r.level_mass = verify_level_mass(r.solution, r.graph, opt.level_samples);
        r.dual = dual_conjugate_check(r.solution, r.conjugate, r.graph, tol);
        for (double t : opt.levels) r.extra_levels.push_back(trace_level(r.solution, r.graph, t));
    });
    detail::run_stage(r, "layout", [&] {
        r.layout = build_layout(r.solution, r.conjugate, tol.lambda);
        r.layout_report = verify_layout(r.layout, r.solution, r.conjugate, r.graph);
    });
    if (opt.extended) {
        detail::run_stage(r, "verify", [&] {
            r.pushforward = modulus_pushforward_check(r.graph, r.metric.modulus, r.layout, tol);
            r.max_principle = check_maximum_principle(r.solution, r.graph, opt.max_principle_trials, opt.seed);
            r.admissibility = check_admissible(r.graph, r.metric.lambda, opt.admissibility_samples, opt.seed, tol.chain);
            // Surgery: drop the lowest-index disk touching Theta1 unless it is
            // the only one.
            std::vector<int> left;
            for (int v : r.graph.adjacency[static_cast<std::size_t>(r.graph.terminal(Side::theta1))])
                if (!r.graph.is_terminal(v)) left.push_back(v);
            if (left.size() > 1) {
                const std::vector<int> removed{left.front()};
                r.comparison = comparison_surgery(r.graph, r.solution, removed, tol);
            }
        });
    }
    if (opt.rigidity) detail::run_stage(r, "rigidity", [&] { r.rigidity = rigidity_from(r.config, r.layout); });

    // Checks against configured targets.
    const double d = r.metric.modulus;
    const double dscale = std::max(1.0, d);
    auto& c = r.checks;
    detail::add_check(c, "geometry.valid", static_cast<double>(r.geometry.failures.size()), "==", 0.0);
    detail::add_check(c, "modulus.duality_gap", r.metric.duality_gap, "<=", tol.gap * dscale);
    detail::add_check(c, "modulus.min_chain_weight", r.metric.min_chain_weight, ">=", 1.0 - tol.chain);
    detail::add_check(c, "modulus.kkt_residual", r.metric.kkt_residual, "<=", tol.kkt);
    detail::add_check(c, "potential.reverse_consistency", r.solution.reverse_min, ">=", 1.0 - tol.chain);
    detail::add_check(c, "conjugate.t_independence", r.conjugate.t_independence_error, "<=", tol.conj * d);
    detail::add_check(c, "conjugate.dual_q90", r.dual.quantile90, "<=", tol.conj * d);
    detail::add_check(c, "level_mass.max_relative_error", r.level_mass.max_relative_error, "<=", 0.02);
    detail::add_check(c, "layout.overlap_relative", r.layout_report.overlap_area / d, "<=", 1e-4);
    detail::add_check(c, "layout.containment", r.layout_report.containment_worst, "<=", 1e-6 * dscale);
    detail::add_check(c, "layout.left", r.layout_report.left_worst, "<=", tol.chain);
    detail::add_check(c, "layout.right", r.layout_report.right_worst, "<=", tol.chain);
    detail::add_check(c, "layout.bottom", r.layout_report.bottom_worst, "<=", tol.chain * dscale);
    detail::add_check(c, "layout.top", r.layout_report.top_worst, "<=", tol.chain * dscale);
    if (r.pushforward) {
        const auto& p = *r.pushforward;
        detail::add_check(c, "pushforward.image_ok", p.error.empty() ? 0.0 : 1.0, "==", 0.0);
        detail::add_check(c, "pushforward.mismatch_lr", p.mismatch_lr, "<=", 0.05);
        detail::add_check(c, "pushforward.mismatch_bt", p.mismatch_bt, "<=", 0.05);
        detail::add_check(c, "pushforward.product_low", p.product, ">=", 0.95);
        detail::add_check(c, "pushforward.product_high", p.product, "<=", 1.05);
    }
    if (r.max_principle)
        detail::add_check(c, "max_principle.violations", static_cast<double>(r.max_principle->violations), "==", 0.0);
    if (r.admissibility)
        detail::add_check(c, "admissibility.min_weight", r.admissibility->min_weight, ">=", 1.0 - tol.chain);
    if (r.comparison) detail::add_check(c, "comparison.worst", r.comparison->worst, ">=", -1e-9);
    if (r.rigidity) {
        detail::add_check(c, "rigidity.displacement", r.rigidity->displacement, "<=", 1e-6);
        detail::add_check(c, "rigidity.energy_error", r.rigidity->energy_error, "<=", 1e-8);
    }
    return r;
}

// Everything in the report is a deterministic function of the input and the
// options; wall times go to a separate file.
[[nodiscard]] inline nlohmann::json report_to_json(const PipelineResult& r, const PipelineOptions& opt) {
    using nlohmann::json;
    const auto& g = r.graph;
    json report;
    report["input"] = {{"disks", r.config.disks.size()}, {"meta", r.config.meta}, {"resolution", g.cell_resolution},
                       {"edges", g.edges.size()}};
    report["settings"] = {{"tol_gap", opt.tol.gap},          {"tol_chain", opt.tol.chain},
                          {"tol_kkt", opt.tol.kkt},          {"tol_conj", opt.tol.conj},
                          {"levels_per_disk", opt.levels_per_disk}, {"level_samples", opt.level_samples},
                          {"seed", opt.seed}};
    report["geometry"] = {{"min_k0", r.geometry.min_k0},
                          {"max_k0", r.geometry.max_k0},
                          {"min_k1", r.geometry.min_k1},
                          {"min_relative_distance", r.geometry.min_relative_distance},
                          {"failures", r.geometry.failures}};
    report["modulus"] = {{"D", r.metric.modulus},
                         {"gap", r.metric.duality_gap},
                         {"iterations", r.metric.iterations},
                         {"columns", r.metric.columns},
                         {"active_chains", r.metric.active.size()},
                         {"min_chain_weight", r.metric.min_chain_weight},
                         {"kkt_residual", r.metric.kkt_residual}};
    report["potential"] = {{"clamp_count", r.solution.clamp_count}, {"reverse_min", r.solution.reverse_min}};
    json inherited = json::array();
    for (int v : r.conjugate.inherited) inherited.push_back(g.disk_ids[static_cast<std::size_t>(v)]);
    report["conjugate"] = {{"t_independence_error", r.conjugate.t_independence_error},
                           {"levels_traced", r.conjugate.level_samples.size()},
                           {"inherited", inherited},
                           {"dual_modulus", r.dual.dual_modulus},
                           {"dual_q90", r.dual.quantile90},
                           {"dual_max", r.dual.max_error}};
    report["level_mass"] = {{"samples", r.level_mass.levels.size()},
                            {"max_relative_error", r.level_mass.max_relative_error},
                            {"mean_relative_error", r.level_mass.mean_relative_error}};
    json levels = json::array();
    for (const auto& lc : r.extra_levels) levels.push_back(level_to_json(lc, g));
    report["levels"] = levels;
    json degenerate = json::array();
    for (int v : r.layout.degenerate) degenerate.push_back(g.disk_ids[static_cast<std::size_t>(v)]);
    report["layout"] = {{"overlap_area", r.layout_report.overlap_area},
                        {"coverage_deficit", r.layout_report.coverage_deficit},
                        {"union_area", r.layout_report.union_area},
                        {"containment_worst", r.layout_report.containment_worst},
                        {"left_worst", r.layout_report.left_worst},
                        {"right_worst", r.layout_report.right_worst},
                        {"bottom_worst", r.layout_report.bottom_worst},
                        {"top_worst", r.layout_report.top_worst},
                        {"degenerate", degenerate}};
    if (r.pushforward) {
        const auto& p = *r.pushforward;
        report["pushforward"] = {{"domain_lr", p.domain_lr}, {"domain_bt", p.domain_bt}, {"image_lr", p.image_lr},
                                 {"image_bt", p.image_bt},   {"mismatch_lr", p.mismatch_lr}, {"mismatch_bt", p.mismatch_bt},
                                 {"product", p.product},     {"error", p.error}};
    }
    if (r.max_principle)
        report["max_principle"] = {{"trials", r.max_principle->trials},
                                   {"violations", r.max_principle->violations},
                                   {"worst_deviation", r.max_principle->worst_deviation}};
    if (r.admissibility)
        report["admissibility"] = {{"sampled", r.admissibility->sampled},
                                   {"min_weight", r.admissibility->min_weight},
                                   {"violations", r.admissibility->violations}};
    if (r.comparison)
        report["comparison"] = {{"holds", r.comparison->holds}, {"worst", r.comparison->worst}, {"compared", r.comparison->compared}};
    if (r.rigidity)
        report["rigidity"] = {{"displacement", r.rigidity->displacement},
                              {"height", r.rigidity->height},
                              {"energy_error", r.rigidity->energy_error}};
    json checks = json::array();
    for (const auto& c : r.checks)
        checks.push_back({{"name", c.name}, {"value", c.value}, {"relation", c.relation}, {"target", c.target}, {"pass", c.pass}});
    report["checks"] = checks;
    report["pass"] = r.all_pass();
    return report;
}

}  // namespace carpet
