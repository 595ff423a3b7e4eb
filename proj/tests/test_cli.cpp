#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bl/errors.hpp"
#include "bl/grid.hpp"
#include "bl/scenario_cli.hpp"

using namespace bl;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    return dir;
}

const char* kMinimalConfig = R"(
# minimal planar scenario
scenario.m = 1
scenario.a = 1
scenario.nu = 1
march.X = 0.5
)";

Scenario small_scenario() {
    Scenario sc;
    sc.m = 1.0;
    sc.a1_coeffs = {0.1};
    sc.v1_coeffs = {0.05};
    sc.X = 0.1;
    sc.N = 256;
    return sc;
}

PipelineArtifacts small_artifacts(const Scenario& sc) {
    PipelineArtifacts art;
    const SimilarityProblem p = sc.similarity_problem();
    const auto [beta, L] = normalize(p);
    art.similarity = solve_falkner_skan(beta, p.f0 / L, p.f1);
    art.have_similarity = true;
    IntegralOptions iopts;
    art.profile = solve_integral_equation(
        sc.m, sc.a, sc.nu, sc.kappa(), graded_eta_grid(sc.N, sc.grading_p),
        iopts);
    art.have_profile = true;
    art.field = march(sc, sc.X, sc.h);
    REQUIRE_FALSE(art.field.truncated);
    art.have_field = true;
    art.physical = reconstruct(art.field, sc);
    art.have_physical = true;
    return art;
}

}  // namespace

TEST_CASE("parse_scenario: minimal config takes defaults") {
    const Scenario sc = parse_scenario(kMinimalConfig);
    CHECK(sc.variant == Variant::planar);
    CHECK(sc.m == 1.0);
    CHECK(sc.X == 0.5);
    CHECK(sc.a1_coeffs.empty());
    CHECK(sc.v1_coeffs.empty());
    CHECK(sc.b == 0.0);
    CHECK(sc.N == 512);
}

TEST_CASE("parse_scenario: named validation errors") {
    CHECK_THROWS_AS(parse_scenario("scenario.m = 0.5\nperturbation.b = -0.1"),
                    ValidationError);
    CHECK_THROWS_AS(
        parse_scenario(
            "scenario.variant = axisymmetric\ngeometry.r1_c = 0"),
        ValidationError);
    CHECK_THROWS_AS(parse_scenario("bogus.key = 1"), ValidationError);
    CHECK_THROWS_AS(parse_scenario("scenario.m = banana"), ValidationError);
    CHECK_THROWS_AS(parse_scenario("scenario.m = 1\nscenario.m = 2"),
                    ValidationError);
    CHECK_THROWS_AS(parse_scenario("scenario.m 1"), ValidationError);
    CHECK_THROWS_AS(parse_scenario("scenario.m = -1"), ValidationError);

    // suction is admissible only for m >= 1
    const Scenario ok =
        parse_scenario("scenario.m = 1.5\nperturbation.b = -0.2");
    CHECK(ok.b == -0.2);
}

TEST_CASE("parse_stages: names map and junk is rejected") {
    const auto stages = parse_stages("similarity, march");
    REQUIRE(stages.size() == 2);
    CHECK(stages[0] == Stage::similarity);
    CHECK(stages[1] == Stage::march);
    CHECK_THROWS_AS(parse_stages("similarity,warp"), ValidationError);
    CHECK_THROWS_AS(parse_stages(""), ValidationError);
}

TEST_CASE("scenario_hash: stable and sensitive") {
    const Scenario a = parse_scenario(kMinimalConfig);
    Scenario b = a;
    CHECK(scenario_hash(a) == scenario_hash(b));
    CHECK(scenario_hash(a).size() == 16);
    b.m = 2.0;
    CHECK(scenario_hash(a) != scenario_hash(b));
    b = a;
    b.a1_coeffs = {0.1};
    CHECK(scenario_hash(a) != scenario_hash(b));
}

TEST_CASE("stage filter: similarity alone emits only the profile CSV") {
    const fs::path dir = fresh_dir("bl_cli_similarity");
    const auto res =
        run_pipeline(small_scenario(), {Stage::similarity}, dir.string());
    CHECK(res.exit_code == 0);
    CHECK(fs::exists(dir / "profile.csv"));
    CHECK(fs::exists(dir / "manifest.txt"));
    CHECK_FALSE(fs::exists(dir / "field.csv"));
    CHECK_FALSE(fs::exists(dir / "crocco_profile.csv"));
    const std::string head = slurp(dir / "profile.csv").substr(0, 11);
    CHECK(head == "z,f,fp,fpp\n");
}

TEST_CASE("determinism: identical scenario gives bit-identical CSVs") {
    const Scenario sc = small_scenario();
    const fs::path d1 = fresh_dir("bl_cli_det1");
    const fs::path d2 = fresh_dir("bl_cli_det2");
    const std::vector<Stage> stages = {Stage::reconstruct};
    REQUIRE(run_pipeline(sc, stages, d1.string()).exit_code == 0);
    REQUIRE(run_pipeline(sc, stages, d2.string()).exit_code == 0);
    for (const char* name : {"field.csv", "physical.csv"})
        CHECK(slurp(d1 / name) == slurp(d2 / name));
}

TEST_CASE("full pipeline: verify passes and the manifest is complete") {
    const Scenario sc = small_scenario();
    const fs::path dir = fresh_dir("bl_cli_full");
    const auto res = run_pipeline(sc, {Stage::verify}, dir.string());
    CHECK(res.exit_code == 0);
    CHECK(res.report.passed());
    CHECK(res.attained_X == doctest::Approx(sc.X));
    for (const char* name :
         {"profile.csv", "crocco_profile.csv", "field.csv", "physical.csv",
          "report.csv", "manifest.txt"})
        CHECK(fs::exists(dir / name));
    const std::string manifest = slurp(dir / "manifest.txt");
    CHECK(manifest.find("scenario_hash=" + scenario_hash(sc)) !=
          std::string::npos);
    CHECK(manifest.find("status=ok") != std::string::npos);
    CHECK(manifest.find("attained_X=") != std::string::npos);
}

TEST_CASE("solver failure: exit 3 with the attained extent recorded") {
    Scenario sc = small_scenario();
    sc.newton_tol = 1e-18;  // below the attainable residual floor
    const fs::path dir = fresh_dir("bl_cli_fail");
    const auto res = run_pipeline(sc, {Stage::march}, dir.string());
    CHECK(res.exit_code == 3);
    CHECK(fs::exists(dir / "field.csv"));  // partial artifacts retained
    const std::string manifest = slurp(dir / "manifest.txt");
    CHECK(manifest.find("status=solver_failure") != std::string::npos);
    CHECK(manifest.find("attained_X=") != std::string::npos);
}

TEST_CASE("corrupted field: positivity check fails by name") {
    const Scenario sc = small_scenario();
    PipelineArtifacts art = small_artifacts(sc);
    for (double& w : art.field.omega[1]) w = -w;
    const VerifyReport rep = verify(sc, art);
    CHECK_FALSE(rep.passed());
    bool found = false;
    for (const auto& c : rep.checks)
        if (c.name == "field_positivity") {
            found = true;
            CHECK_FALSE(c.passed);
        }
    CHECK(found);
}

TEST_CASE("report schema round-trips through emit/parse") {
    VerifyReport rep;
    rep.checks.push_back({"alpha", true, 1.25, 2.0, false});
    rep.checks.push_back({"beta", false, -3.5e-7, 1e-6, false});
    rep.checks.push_back({"gamma_window", false, 0.0, 1.0, true});
    const fs::path dir = fresh_dir("bl_cli_report");
    fs::create_directories(dir);
    const std::string path = (dir / "report.csv").string();
    write_report_csv(path, rep);
    const VerifyReport back = parse_report_csv(path);
    REQUIRE(back.checks.size() == rep.checks.size());
    for (std::size_t i = 0; i < rep.checks.size(); ++i) {
        CHECK(back.checks[i].name == rep.checks[i].name);
        CHECK(back.checks[i].passed == rep.checks[i].passed);
        CHECK(back.checks[i].measured == rep.checks[i].measured);
        CHECK(back.checks[i].threshold == rep.checks[i].threshold);
        CHECK(back.checks[i].informational == rep.checks[i].informational);
    }
    CHECK_FALSE(back.passed());
    CHECK(back.has_warnings());
}

TEST_CASE("sweep: zero-perturbation matrix passes, empty m errors") {
    Scenario base = small_scenario();
    const auto cells = sweep(base, {0.2, 1.0}, {0.0});
    REQUIRE(cells.size() == 2);
    for (const auto& cell : cells) {
        CHECK(cell.solver_ok);
        CHECK(cell.report.passed());
        CHECK(cell.scale == 0.0);
    }
    CHECK_THROWS_AS(sweep(base, {}, {0.0}), ValidationError);
    CHECK_THROWS_AS(sweep(base, {1.0}, {}), ValidationError);
}
