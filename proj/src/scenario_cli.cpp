#include "bl/scenario_cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <set>
#include <sstream>
#include <string>

#include "bl/errors.hpp"
#include "bl/grid.hpp"

namespace bl {
namespace {

namespace fs = std::filesystem;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        throw ValidationError("config key '" + key +
                              "' has a malformed number: " + value);
    }
    if (used != value.size())
        throw ValidationError("config key '" + key +
                              "' has trailing characters: " + value);
    return v;
}

std::vector<double> parse_list(const std::string& key,
                               const std::string& value) {
    std::vector<double> out;
    std::istringstream in(value);
    std::string tok;
    while (in >> tok) out.push_back(parse_double(key, tok));
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void require_artifact(bool have, const char* what) {
    if (!have)
        throw ValidationError(std::string("verify: missing artifact: ") +
                              what);
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open for writing: " + path);
    return out;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
    Scenario sc;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config line is not 'key = value': " +
                                  line);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!seen.insert(key).second)
            throw ValidationError("duplicate config key: " + key);

        if (key == "scenario.variant") {
            if (value == "planar")
                sc.variant = Variant::planar;
            else if (value == "axisymmetric")
                sc.variant = Variant::axisymmetric;
            else
                throw ValidationError(
                    "scenario.variant must be planar or axisymmetric");
        } else if (key == "scenario.m") {
            sc.m = parse_double(key, value);
        } else if (key == "scenario.a") {
            sc.a = parse_double(key, value);
        } else if (key == "scenario.nu") {
            sc.nu = parse_double(key, value);
        } else if (key == "perturbation.a1") {
            sc.a1_coeffs = parse_list(key, value);
        } else if (key == "perturbation.v1") {
            sc.v1_coeffs = parse_list(key, value);
        } else if (key == "perturbation.b") {
            sc.b = parse_double(key, value);
        } else if (key == "geometry.r1_c") {
            sc.r1_c = parse_double(key, value);
        } else if (key == "geometry.r1") {
            sc.r1_coeffs = parse_list(key, value);
        } else if (key == "march.X") {
            sc.X = parse_double(key, value);
        } else if (key == "march.h") {
            sc.h = parse_double(key, value);
        } else if (key == "march.N") {
            const double n = parse_double(key, value);
            if (n < 1.0 || n != std::floor(n))
                throw ValidationError("march.N must be a positive integer");
            sc.N = static_cast<std::size_t>(n);
        } else if (key == "march.grading_p") {
            sc.grading_p = parse_double(key, value);
        } else if (key == "march.mu_star") {
            sc.mu_star = parse_double(key, value);
        } else if (key == "tolerances.newton_tol") {
            sc.newton_tol = parse_double(key, value);
        } else if (key == "tolerances.fp_tol") {
            sc.fp_tol = parse_double(key, value);
        } else {
            throw ValidationError("unknown config key: " + key);
        }
    }
    sc.validate();
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config file: " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenario(text.str());
}

std::string scenario_hash(const Scenario& sc) {
    std::ostringstream canon;
    canon << "variant="
          << (sc.variant == Variant::planar ? "planar" : "axisymmetric")
          << ";m=" << fmt(sc.m) << ";a=" << fmt(sc.a) << ";nu=" << fmt(sc.nu)
          << ";b=" << fmt(sc.b) << ";r1_c=" << fmt(sc.r1_c)
          << ";X=" << fmt(sc.X) << ";h=" << fmt(sc.h) << ";N=" << sc.N
          << ";p=" << fmt(sc.grading_p) << ";ntol=" << fmt(sc.newton_tol)
          << ";ftol=" << fmt(sc.fp_tol) << ";mu=" << fmt(sc.mu_star);
    canon << ";a1=";
    for (double c : sc.a1_coeffs) canon << fmt(c) << " ";
    canon << ";v1=";
    for (double c : sc.v1_coeffs) canon << fmt(c) << " ";
    canon << ";r1=";
    for (double c : sc.r1_coeffs) canon << fmt(c) << " ";

    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : canon.str()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

bool VerifyReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) {
        return c.passed || c.informational;
    });
}

bool VerifyReport::has_warnings() const {
    return std::any_of(checks.begin(), checks.end(), [](const Check& c) {
        return c.informational && !c.passed;
    });
}

std::vector<Stage> parse_stages(const std::string& csv_list) {
    std::vector<Stage> out;
    std::istringstream in(csv_list);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        tok = trim(tok);
        if (tok == "similarity")
            out.push_back(Stage::similarity);
        else if (tok == "profile")
            out.push_back(Stage::profile);
        else if (tok == "march")
            out.push_back(Stage::march);
        else if (tok == "reconstruct")
            out.push_back(Stage::reconstruct);
        else if (tok == "verify")
            out.push_back(Stage::verify);
        else
            throw ValidationError("unknown stage: " + tok);
    }
    if (out.empty()) throw ValidationError("empty stage list");
    return out;
}

void write_profile_csv(const std::string& path, const ProfileSolution& sol) {
    auto out = open_out(path);
    out << "z,f,fp,fpp\n";
    for (std::size_t j = 0; j < sol.z_grid.size(); ++j)
        out << fmt(sol.z_grid[j]) << ',' << fmt(sol.f[j]) << ','
            << fmt(sol.fp[j]) << ',' << fmt(sol.fpp[j]) << '\n';
}

void write_crocco_profile_csv(const std::string& path,
                              const CroccoProfile& profile,
                              const SigmaEnvelope& envelope) {
    auto out = open_out(path);
    out << "eta,Y,Yp,envelope_lo,envelope_hi\n";
    const std::size_t n = profile.eta_grid.size();
    for (std::size_t j = 0; j < n; ++j) {
        const double eta = profile.eta_grid[j];
        double lo = 0.0, hi = 0.0;
        if (j + 1 < n) {
            const double s = sigma(eta, envelope.mu);
            lo = envelope.M5 * (1.0 - eta) * s;
            hi = envelope.M6 * (1.0 - eta) * s;
        }
        out << fmt(eta) << ',' << fmt(profile.Y[j]) << ','
            << fmt(profile.Yp[j]) << ',' << fmt(lo) << ',' << fmt(hi)
            << '\n';
    }
}

void write_field_csv(const std::string& path, const CroccoField& field) {
    auto out = open_out(path);
    out << "k,xi,eta,omega\n";
    for (std::size_t k = 0; k < field.omega.size(); ++k)
        for (std::size_t j = 0; j < field.eta_grid.size(); ++j)
            out << k << ',' << fmt(field.xi_nodes[k]) << ','
                << fmt(field.eta_grid[j]) << ',' << fmt(field.omega[k][j])
                << '\n';
}

void write_physical_csv(const std::string& path,
                        const PhysicalField& phys) {
    auto out = open_out(path);
    out << "x,y,u,v,one_minus_u_over_U\n";
    for (std::size_t ix = 0; ix < phys.x_nodes.size(); ++ix)
        for (std::size_t iy = 0; iy < phys.y_nodes.size(); ++iy)
            out << fmt(phys.x_nodes[ix]) << ',' << fmt(phys.y_nodes[iy])
                << ',' << fmt(phys.u[ix][iy]) << ',' << fmt(phys.v[ix][iy])
                << ','
                << fmt(1.0 - phys.u[ix][iy] / phys.U_of_x[ix]) << '\n';
}

void write_report_csv(const std::string& path, const VerifyReport& report) {
    auto out = open_out(path);
    out << "check_name,status,measured,threshold\n";
    for (const Check& c : report.checks)
        out << c.name << ','
            << (c.passed ? "pass" : (c.informational ? "warn" : "fail"))
            << ',' << fmt(c.measured) << ',' << fmt(c.threshold) << '\n';
}

VerifyReport parse_report_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read report: " + path);
    std::string line;
    if (!std::getline(in, line) ||
        trim(line) != "check_name,status,measured,threshold")
        throw ValidationError("report header mismatch in " + path);
    VerifyReport rep;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string name, status, measured, threshold;
        if (!std::getline(row, name, ',') ||
            !std::getline(row, status, ',') ||
            !std::getline(row, measured, ',') ||
            !std::getline(row, threshold, ','))
            throw ValidationError("malformed report row: " + line);
        if (status != "pass" && status != "fail" && status != "warn")
            throw ValidationError("bad report status: " + status);
        rep.checks.push_back({name, status == "pass",
                              parse_double("measured", measured),
                              parse_double("threshold", threshold),
                              status == "warn"});
    }
    return rep;
}

namespace {

PipelineArtifacts build_artifacts(const Scenario& sc) {
    PipelineArtifacts art;
    const SimilarityProblem p = sc.similarity_problem();
    const auto [beta, L] = normalize(p);
    art.similarity = solve_falkner_skan(beta, p.f0 / L, p.f1);
    art.have_similarity = true;

    const std::vector<double> eta = graded_eta_grid(sc.N, sc.grading_p);
    if (sc.b == 0.0) {
        IntegralOptions iopts;
        iopts.fp_tol = sc.fp_tol;
        art.profile = solve_integral_equation(sc.m, sc.a, sc.nu, sc.kappa(),
                                              eta, iopts);
    } else {
        art.profile = from_similarity(art.similarity, p, eta);
    }
    art.have_profile = true;

    art.field = march(sc, sc.X, sc.h);
    art.have_field = true;
    if (art.field.truncated)
        throw ConvergenceError("march truncated: " + art.field.failure_reason,
                               art.field.attained_X);

    art.physical = reconstruct(art.field, sc);
    art.have_physical = true;
    return art;
}

}  // namespace

VerifyReport verify(const Scenario& sc, const PipelineArtifacts& art) {
    require_artifact(art.have_similarity, "similarity");
    require_artifact(art.have_profile, "profile");
    require_artifact(art.have_field, "field");
    require_artifact(art.have_physical, "physical");

    VerifyReport rep;
    auto add = [&](const std::string& name, double measured,
                   double threshold, bool pass) {
        rep.checks.push_back({name, pass, measured, threshold});
    };

    // similarity
    {
        const auto& sol = art.similarity;
        double min_step = std::numeric_limits<double>::infinity();
        bool in_range = true;
        for (std::size_t j = 0; j < sol.fp.size(); ++j) {
            if (j > 0)
                min_step = std::min(min_step, sol.fp[j] - sol.fp[j - 1]);
            if (sol.fp[j] < sol.f1 || sol.fp[j] >= 1.0) in_range = false;
        }
        add("similarity_monotone", min_step, 0.0,
            in_range && min_step >= 0.0);
        const double nres =
            normalization_residual(sol, sc.similarity_problem());
        add("similarity_normalization", nres, 1e-6, nres <= 1e-6);
        const AsymptoticFit fit = asymptotic_fit(sol, 1e-10, 1e-2);
        add("asymptotic_rms", fit.rms_residual, 0.05,
            fit.rms_residual <= 0.05);
        add("asymptotic_c1", fit.c1, 0.0, fit.c1 > 0.0);
    }

    // initial Crocco profile
    {
        const auto& prof = art.profile;
        if (sc.b == 0.0) {
            const SimilarityProblem p = sc.similarity_problem();
            const CroccoProfile other =
                from_similarity(art.similarity, p, prof.eta_grid);
            double gap = 0.0;
            for (std::size_t j = 0; j < prof.Y.size(); ++j)
                gap = std::max(gap, std::abs(prof.Y[j] - other.Y[j]));
            add("profile_route_gap", gap, 5e-3, gap <= 5e-3);
        }
        const double robin = std::abs(sc.nu * prof.Y[0] * prof.Yp[0] -
                                      sc.b * prof.Y[0] + sc.m * sc.a);
        add("profile_wall_robin", robin, 1e-6, robin <= 1e-6);
        const SigmaEnvelope env = envelope_fit(prof);
        const double env_min =
            std::min({env.M5, env.M6, env.M7, env.M8, env.M9, env.M10});
        const double env_max =
            std::max({env.M5, env.M6, env.M7, env.M8, env.M9, env.M10});
        add("envelope_positive", env_min, 0.0,
            env_min > 0.0 && std::isfinite(env_max));
    }

    // marched field
    {
        const auto& field = art.field;
        double min_omega = std::numeric_limits<double>::infinity();
        for (const auto& slice : field.omega)
            for (std::size_t j = 0; j + 1 < slice.size(); ++j)
                min_omega = std::min(min_omega, slice[j]);
        add("field_positivity", min_omega, 0.0, min_omega > 0.0);
        add("field_extent", field.attained_X, sc.X,
            !field.truncated &&
                field.attained_X >= sc.X * (1.0 - 1e-12));

        if (min_omega > 0.0) {
            const SandwichReport sw =
                sandwich_check(field, field.omega.front());
            add("sandwich_violations",
                static_cast<double>(sw.violations.size()), 0.0,
                sw.violations.empty());
            add("sandwich_M11X", sw.M11 * field.attained_X, 1.0,
                sw.M11 * field.attained_X <= 1.0);
            add("sandwich_M12X", sw.M12 * field.attained_X, 1.0,
                sw.M12 * field.attained_X <= 1.0);
            add("sandwich_M19", sw.M19, 0.0,
                sw.M19 > 0.0 && std::isfinite(sw.M18));
        }
    }

    // physical reconstruction
    {
        const auto& phys = art.physical;
        double abs_err = 0.0, rel_err = 0.0, v0_scale = 0.0;
        for (std::size_t ix = 0; ix < phys.x_nodes.size(); ++ix) {
            const double x = phys.x_nodes[ix];
            const double v0 =
                std::pow(x, 0.5 * (sc.m - 1.0)) * sc.wall_v1(x);
            v0_scale = std::max(v0_scale, std::abs(v0));
            const double err = std::abs(phys.v[ix][0] - v0);
            abs_err = std::max(abs_err, err);
            if (std::abs(v0) > 0.0)
                rel_err = std::max(rel_err, err / std::abs(v0));
        }
        if (v0_scale > 0.0)
            add("wall_transpiration", rel_err, 1e-4, rel_err <= 1e-4);
        else
            add("wall_transpiration", abs_err, 1e-6, abs_err <= 1e-6);

        const double cont = continuity_residual(phys, sc).max_residual;
        add("continuity_residual", cont, 1e-2, cont <= 1e-2);
        const double mom = momentum_residual(phys, sc).max_residual;
        add("momentum_residual", mom, 1e-2, mom <= 1e-2);

        const DecayReport decay = decay_check(phys, sc);
        rep.checks.push_back({"decay_window", decay.window_ok,
                              decay.window_ok ? 1.0 : 0.0, 1.0, true});
        double min_r2 = 1.0;
        bool slopes_neg = true;
        for (const auto& fit : decay.per_x) {
            if (fit.samples < 2) continue;
            min_r2 = std::min(min_r2, fit.r2);
            if (!(fit.slope < 0.0)) slopes_neg = false;
        }
        add("decay_r2", min_r2, 0.99, slopes_neg && min_r2 >= 0.99);
        add("decay_ordered", decay.M2 - decay.M4, 0.0,
            decay.M4 > 0.0 && decay.M4 <= decay.M2);
    }
    return rep;
}

VerifyReport verify(const Scenario& sc) {
    return verify(sc, build_artifacts(sc));
}

PipelineResult run_pipeline(const Scenario& sc,
                            const std::vector<Stage>& stages,
                            const std::string& out_dir, bool strict) {
    const auto t0 = std::chrono::steady_clock::now();
    PipelineResult res;
    fs::create_directories(out_dir);

    std::set<Stage> want(stages.begin(), stages.end());
    // dependency closure
    if (want.count(Stage::verify)) {
        want.insert(Stage::similarity);
        want.insert(Stage::profile);
        want.insert(Stage::march);
        want.insert(Stage::reconstruct);
    }
    if (want.count(Stage::reconstruct)) want.insert(Stage::march);
    if (want.count(Stage::profile)) want.insert(Stage::similarity);

    auto emit = [&](const std::string& name) {
        res.artifacts.push_back(name);
        return (fs::path(out_dir) / name).string();
    };

    std::string status = "ok";
    PipelineArtifacts art;
    try {
        sc.validate();
        if (want.count(Stage::similarity)) {
            const SimilarityProblem p = sc.similarity_problem();
            const auto [beta, L] = normalize(p);
            art.similarity = solve_falkner_skan(beta, p.f0 / L, p.f1);
            art.have_similarity = true;
            write_profile_csv(emit("profile.csv"), art.similarity);
        }
        if (want.count(Stage::profile)) {
            const std::vector<double> eta =
                graded_eta_grid(sc.N, sc.grading_p);
            if (sc.b == 0.0) {
                IntegralOptions iopts;
                iopts.fp_tol = sc.fp_tol;
                art.profile = solve_integral_equation(
                    sc.m, sc.a, sc.nu, sc.kappa(), eta, iopts);
            } else {
                art.profile = from_similarity(
                    art.similarity, sc.similarity_problem(), eta);
            }
            art.have_profile = true;
            write_crocco_profile_csv(emit("crocco_profile.csv"),
                                     art.profile,
                                     envelope_fit(art.profile));
        }
        if (want.count(Stage::march)) {
            art.field = march(sc, sc.X, sc.h);
            art.have_field = true;
            res.attained_X = art.field.attained_X;
            write_field_csv(emit("field.csv"), art.field);
            if (art.field.truncated)
                throw ConvergenceError(
                    "march truncated: " + art.field.failure_reason,
                    art.field.attained_X);
        }
        if (want.count(Stage::reconstruct)) {
            art.physical = reconstruct(art.field, sc);
            art.have_physical = true;
            write_physical_csv(emit("physical.csv"), art.physical);
        }
        if (want.count(Stage::verify)) {
            res.report = verify(sc, art);
            write_report_csv(emit("report.csv"), res.report);
            if (!res.report.passed() ||
                (strict && res.report.has_warnings())) {
                res.exit_code = 4;
                status = "verify_failure";
            }
        }
    } catch (const ValidationError& e) {
        res.exit_code = 2;
        status = "validation_error";
        res.failure_reason = e.what();
    } catch (const Error& e) {
        res.exit_code = 3;
        status = "solver_failure";
        res.failure_reason = e.what();
    }

    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    auto manifest = open_out((fs::path(out_dir) / "manifest.txt").string());
    manifest << "scenario_hash=" << scenario_hash(sc) << '\n'
             << "format_version=1\n"
             << "newton_tol=" << fmt(sc.newton_tol) << '\n'
             << "fp_tol=" << fmt(sc.fp_tol) << '\n'
             << "attained_X=" << fmt(res.attained_X) << '\n'
             << "wall_clock_ms=" << ms << '\n'
             << "status=" << status << '\n';
    if (!res.failure_reason.empty())
        manifest << "failure_reason=" << res.failure_reason << '\n';
    res.artifacts.push_back("manifest.txt");
    return res;
}

std::vector<SweepCell> sweep(const Scenario& base,
                             const std::vector<double>& m_values,
                             const std::vector<double>& scales) {
    if (m_values.empty())
        throw ValidationError("sweep needs at least one m value");
    if (scales.empty())
        throw ValidationError("sweep needs at least one perturbation scale");

    std::vector<SweepCell> cells;
    std::vector<std::future<SweepCell>> jobs;
    for (double m : m_values)
        for (double scale : scales) {
            Scenario sc = base;
            sc.m = m;
            for (double& c : sc.a1_coeffs) c *= scale;
            for (double& c : sc.v1_coeffs) c *= scale;
            if (m < 1.0) sc.b = 0.0;
            jobs.push_back(std::async(std::launch::async, [sc, m, scale] {
                SweepCell cell;
                cell.m = m;
                cell.scale = scale;
                try {
                    cell.report = verify(sc);
                } catch (const Error& e) {
                    cell.solver_ok = false;
                    cell.failure_reason = e.what();
                }
                return cell;
            }));
        }
    for (auto& job : jobs) cells.push_back(job.get());
    return cells;
}

}  // namespace bl
