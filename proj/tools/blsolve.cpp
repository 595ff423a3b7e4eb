#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "bl/errors.hpp"
#include "bl/scenario_cli.hpp"

using namespace bl;

namespace {

void print_report(const VerifyReport& report) {
    for (const auto& c : report.checks)
        std::printf("%-24s %-4s measured=%-12.5g threshold=%.5g\n",
                    c.name.c_str(),
                    c.passed ? "pass" : (c.informational ? "warn" : "FAIL"),
                    c.measured, c.threshold);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Prandtl boundary-layer solver suite"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir = "out", stages_override;
    bool strict = false;
    app.add_option("--config", config_path, "scenario config file")
        ->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--stages", stages_override,
                   "comma-separated stage override");
    app.add_flag("--strict", strict, "warnings become failures");

    app.add_subcommand("similarity", "Falkner-Skan profile only");
    app.add_subcommand("profile", "initial Crocco slice");
    app.add_subcommand("march", "xi-march of the Crocco field");
    app.add_subcommand("reconstruct", "physical velocity fields");
    app.add_subcommand("verify", "full pipeline plus invariant report");
    auto* sweep_cmd =
        app.add_subcommand("sweep", "verify over an (m, scale) matrix");
    std::vector<double> m_values;
    std::vector<double> scales = {0.0};
    sweep_cmd->add_option("--m-values", m_values, "m values")->required();
    sweep_cmd->add_option("--scales", scales, "perturbation scales");

    CLI11_PARSE(app, argc, argv);

    try {
        const Scenario sc = load_scenario(config_path);

        if (app.got_subcommand("sweep")) {
            const auto cells = sweep(sc, m_values, scales);
            int exit_code = 0;
            for (const auto& cell : cells) {
                char name[64];
                std::snprintf(name, sizeof name, "cell_m%g_s%g", cell.m,
                              cell.scale);
                const auto dir = std::filesystem::path(out_dir) / name;
                std::filesystem::create_directories(dir);
                write_report_csv((dir / "report.csv").string(),
                                 cell.report);
                const bool ok =
                    cell.solver_ok && cell.report.passed() &&
                    !(strict && cell.report.has_warnings());
                std::printf("m=%-6g scale=%-6g %s%s%s\n", cell.m,
                            cell.scale, ok ? "pass" : "FAIL",
                            cell.solver_ok ? "" : " (solver: ",
                            cell.solver_ok
                                ? ""
                                : (cell.failure_reason + ")").c_str());
                if (!cell.solver_ok)
                    exit_code = std::max(exit_code, 3);
                else if (!ok)
                    exit_code = std::max(exit_code, 4);
            }
            return exit_code;
        }

        std::vector<Stage> stages;
        if (!stages_override.empty()) {
            stages = parse_stages(stages_override);
        } else if (app.got_subcommand("similarity")) {
            stages = {Stage::similarity};
        } else if (app.got_subcommand("profile")) {
            stages = {Stage::profile};
        } else if (app.got_subcommand("march")) {
            stages = {Stage::march};
        } else if (app.got_subcommand("reconstruct")) {
            stages = {Stage::reconstruct};
        } else {
            stages = {Stage::verify};
        }

        const PipelineResult res = run_pipeline(sc, stages, out_dir, strict);
        if (!res.report.checks.empty()) print_report(res.report);
        std::printf("attained_X=%.17g exit=%d\n", res.attained_X,
                    res.exit_code);
        if (!res.failure_reason.empty())
            std::printf("failure: %s\n", res.failure_reason.c_str());
        return res.exit_code;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return 3;
    }
}
