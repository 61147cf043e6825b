// carpet: command-line driver for the uniformization pipeline.
//
// Exit codes: 0 ok, 1 stage or file error, 2 bad arguments, 3 some check
// failed (outputs are still written).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "carpet/carpet.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_stage = 1;
constexpr int exit_args = 2;
constexpr int exit_check = 3;

struct Source {
    int standard = 0;
    std::string input;

    void attach(CLI::App* app) {
        auto* s = app->add_option("--standard", standard, "generation of the standard carpet")->check(CLI::Range(1, 7));
        auto* i = app->add_option("--input", input, "carpet JSON file");
        s->excludes(i);
    }
    [[nodiscard]] bool given() const { return standard > 0 || !input.empty(); }
    [[nodiscard]] carpet::CarpetConfig load() const {
        if (standard > 0) return carpet::generate_standard_carpet(standard);
        return carpet::parse_carpet(carpet::read_text_file(input));
    }
};

struct SolveArgs {
    Source source;
    carpet::PipelineOptions opt;
    std::string out = ".";
};

void attach_solve(CLI::App* app, SolveArgs& a) {
    a.source.attach(app);
    auto& o = a.opt;
    app->add_option("--resolution", o.resolution, "raster pitch h (default: min disk extent / 4)")->check(CLI::PositiveNumber);
    app->add_option("--tol-gap", o.tol.gap, "relative duality gap target")->check(CLI::PositiveNumber);
    app->add_option("--tol-chain", o.tol.chain, "chain admissibility slack")->check(CLI::PositiveNumber);
    app->add_option("--tol-kkt", o.tol.kkt, "KKT residual target")->check(CLI::PositiveNumber);
    app->add_option("--tol-conj", o.tol.conj, "conjugate tolerance as a fraction of D")->check(CLI::PositiveNumber);
    app->add_option("--levels", o.levels, "extra levels t1,t2,... traced into the report")->delimiter(',')->check(CLI::Range(0.0, 1.0));
    app->add_option("--levels-per-disk", o.levels_per_disk, "levels sampled per disk for the conjugate")->check(CLI::Range(1, 1000));
    app->add_option("--seed", o.seed, "seed for every sampled check");
    app->add_flag("--rigidity", o.rigidity, "compare output squares with input squares");
    app->add_option("-o,--out", a.out, "output directory");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw carpet::Error(carpet::ErrorKind::io, "cannot create " + dir + ": " + ec.message());
}

int report_error(const std::string& stage, const carpet::Error& e) {
    std::cerr << stage << ": " << e.what() << "\n";
    return exit_stage;
}

int run_solve(SolveArgs& a, bool extended) {
    if (!a.source.given()) {
        std::cerr << "one of --standard or --input is required\n";
        return exit_args;
    }
    a.opt.extended = extended;
    carpet::CarpetConfig config;
    try {
        config = a.source.load();
    } catch (const carpet::Error& e) {
        return report_error("input", e);
    }
    carpet::PipelineResult r;
    try {
        r = carpet::run_pipeline(config, a.opt);
    } catch (const carpet::StageError& e) {
        return report_error(e.stage(), e);
    }
    try {
        ensure_dir(a.out);
        const fs::path dir(a.out);
        json solution = {{"metric", carpet::metric_to_json(r.metric, r.graph)},
                         {"potential", carpet::solution_to_json(r.solution, r.graph)},
                         {"conjugate", carpet::conjugate_to_json(r.conjugate, r.graph)}};
        carpet::write_text_file((dir / "solution.json").string(), dump(solution));
        carpet::write_text_file((dir / "layout.json").string(), dump(carpet::layout_to_json(r.layout, r.graph)));
        carpet::write_text_file((dir / "report.json").string(), dump(carpet::report_to_json(r, a.opt)));
        json timings = json::array();
        for (const auto& [stage, seconds] : r.timings) timings.push_back({{"stage", stage}, {"seconds", seconds}});
        carpet::write_text_file((dir / "timings.json").string(), dump({{"stages", timings}, {"threads", carpet::thread_count()}}));
    } catch (const carpet::Error& e) {
        return report_error("output", e);
    }
    std::cout << "D = " << carpet::format_double(r.metric.modulus) << ", disks = " << r.config.disks.size() << "\n";
    for (const auto& c : r.checks)
        if (!c.pass)
            std::cout << "FAIL " << c.name << ": " << carpet::format_double(c.value) << " " << c.relation << " "
                      << carpet::format_double(c.target) << "\n";
    return r.all_pass() ? exit_ok : exit_check;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Square-carpet uniformization of planar carpets"};
    app.require_subcommand(1);

    // gen
    int gen_n = 0;
    std::string gen_out;
    auto* gen = app.add_subcommand("gen", "write a standard carpet as JSON");
    gen->add_option("--standard", gen_n, "generation n (1..7)")->required()->check(CLI::Range(1, 7));
    gen->add_option("-o,--out", gen_out, "output file (default: stdout)");

    SolveArgs solve_args, verify_args;
    auto* solve = app.add_subcommand("solve", "run the pipeline and write solution, layout and report");
    attach_solve(solve, solve_args);
    auto* verify = app.add_subcommand("verify", "like solve, plus pushforward, principle and admissibility checks");
    attach_solve(verify, verify_args);

    // render
    Source render_src;
    std::string render_layout, render_out = ".";
    std::vector<double> render_levels;
    auto* render = app.add_subcommand("render", "write input.svg and/or layout.svg");
    render_src.attach(render);
    render->add_option("--layout", render_layout, "layout JSON written by solve");
    render->add_option("--levels", render_levels, "levels drawn on the layout")->delimiter(',');
    render->add_option("-o,--out", render_out, "output directory");

    // report
    std::string report_path;
    auto* report = app.add_subcommand("report", "summarize a report.json; exit 3 if any check failed");
    report->add_option("report", report_path, "report JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_args;
    }

    if (*gen) {
        const std::string text = carpet::carpet_to_json(carpet::generate_standard_carpet(gen_n));
        if (gen_out.empty()) {
            std::cout << text;
            return exit_ok;
        }
        try {
            carpet::write_text_file(gen_out, text);
        } catch (const carpet::Error& e) {
            return report_error("output", e);
        }
        return exit_ok;
    }
    if (*solve) return run_solve(solve_args, false);
    if (*verify) return run_solve(verify_args, true);

    if (*render) {
        if (!render_src.given() && render_layout.empty()) {
            std::cerr << "render needs --standard, --input or --layout\n";
            return exit_args;
        }
        try {
            ensure_dir(render_out);
            const fs::path dir(render_out);
            if (render_src.given())
                carpet::write_text_file((dir / "input.svg").string(), carpet::render_input_svg(carpet::canonicalize(render_src.load())));
            if (!render_layout.empty()) {
                const auto loaded = carpet::parse_layout(json::parse(carpet::read_text_file(render_layout)));
                carpet::write_text_file((dir / "layout.svg").string(),
                                        carpet::render_layout_svg(loaded.layout, loaded.ids, render_levels));
            }
        } catch (const json::exception& e) {
            std::cerr << "render: parse: " << e.what() << "\n";
            return exit_stage;
        } catch (const carpet::Error& e) {
            return report_error("render", e);
        }
        return exit_ok;
    }

    if (*report) {
        json j;
        try {
            j = json::parse(carpet::read_text_file(report_path));
        } catch (const json::exception& e) {
            std::cerr << "report: parse: " << e.what() << "\n";
            return exit_stage;
        } catch (const carpet::Error& e) {
            return report_error("report", e);
        }
        if (!j.contains("checks") || !j["checks"].is_array()) {
            std::cerr << "report: parse: no checks array\n";
            return exit_stage;
        }
        bool all = true;
        for (const auto& c : j["checks"]) {
            const bool pass = c.value("pass", false);
            all = all && pass;
            std::printf("%-4s %-34s %-12.4g %s %.4g\n", pass ? "ok" : "FAIL", c.value("name", "").c_str(), c.value("value", 0.0),
                        c.value("relation", "").c_str(), c.value("target", 0.0));
        }
        return all ? exit_ok : exit_check;
    }
    return exit_args;
}
