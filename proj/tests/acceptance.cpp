// Acceptance gate: runs every top-level criterion end to end and prints one
// PASS/FAIL line per criterion.  Exit status is 0 iff all criteria pass.
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bl/crocco_profile.hpp"
#include "bl/grid.hpp"
#include "bl/line_method.hpp"
#include "bl/physical_reconstruct.hpp"
#include "bl/scenario.hpp"
#include "bl/similarity.hpp"
#include "oracle_falkner_skan.hpp"

using namespace bl;

namespace {

// Frozen fine-grid oracle wall shears for beta in {0, 1/2, 1}.
constexpr double kShearTargets[3] = {0.46960, 0.92768, 1.23259};

struct Gate {
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail << (detail.str().empty() ? "" : "; ") << what;
        }
    }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

Scenario self_similar(double m, Variant variant = Variant::planar) {
    Scenario sc;
    sc.variant = variant;
    sc.m = m;
    return sc;
}

Scenario perturbed(double m, Variant variant = Variant::planar) {
    Scenario sc = self_similar(m, variant);
    sc.a1_coeffs = {0.1};
    sc.v1_coeffs = {0.05};
    return sc;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j)
        d = std::max(d, std::abs(a[j] - b[j]));
    return d;
}

SimilarityProblem make_problem(double m, Variant variant) {
    SimilarityProblem p;
    p.variant = variant;
    p.m = m;
    return p;
}

CroccoProfile similarity_route(double m, std::size_t n_cells,
                               Variant variant = Variant::planar) {
    const auto p = make_problem(m, variant);
    const auto sol = solve_falkner_skan(normalize(p).beta, 0.0, 0.0);
    return from_similarity(sol, p, graded_eta_grid(n_cells, 2.0));
}

double sup_gap(const CroccoProfile& lhs, const CroccoProfile& rhs) {
    double gap = 0.0;
    for (std::size_t j = 0; j < lhs.Y.size(); ++j)
        gap = std::max(gap, std::abs(lhs.Y[j] - rhs.Y[j]));
    return gap;
}

void check_profile_shape(Gate& g, const ProfileSolution& sol,
                         const std::string& tag) {
    for (std::size_t j = 0; j < sol.z_grid.size(); ++j) {
        const bool resolved = 1.0 - sol.fp[j] > 1e-12;
        if (resolved)
            g.require(sol.fpp[j] > 0.0, tag + ": f'' <= 0 inside the layer");
        if (j > 0)
            g.require(sol.fp[j] > 0.0 && sol.fp[j] < 1.0 + 1e-12,
                      tag + ": f' outside (0, 1)");
    }
}

// --- criterion 1: Falkner-Skan wall shear vs independent oracle ------------

bool criterion1(std::string& detail) {
    Gate g;
    const double betas[3] = {0.0, 0.5, 1.0};
    for (int i = 0; i < 3; ++i) {
        const auto sol = solve_falkner_skan(betas[i], 0.0, 0.0);
        const double oracle_shear = oracle::fs_wall_shear(betas[i]);
        g.require(std::abs(sol.wall_shear - kShearTargets[i]) <= 1e-3,
                  "beta=" + fmt(betas[i]) + " shear " + fmt(sol.wall_shear) +
                      " vs target " + fmt(kShearTargets[i]));
        g.require(std::abs(sol.wall_shear - oracle_shear) <= 1e-3,
                  "beta=" + fmt(betas[i]) + " shear " + fmt(sol.wall_shear) +
                      " vs oracle " + fmt(oracle_shear));
        check_profile_shape(g, sol, "beta=" + fmt(betas[i]));
    }
    detail = g.ok ? "shears within 1e-3 of targets and oracle; profiles "
                    "monotone"
                  : g.detail.str();
    return g.ok;
}

// --- criterion 2: asymptotic tail law --------------------------------------

bool criterion2(std::string& detail) {
    Gate g;
    std::ostringstream out;
    for (double beta : {0.0, 1.0}) {
        const auto sol = solve_falkner_skan(beta, 0.0, 0.0);
        const auto fit = asymptotic_fit(sol, 1e-10, 1e-2);
        g.require(fit.rms_residual <= 0.05,
                  "beta=" + fmt(beta) + " rms " + fmt(fit.rms_residual));
        g.require(fit.c1 > 0.0, "beta=" + fmt(beta) + " c1 <= 0");
        g.require(fit.n_points >= 10,
                  "beta=" + fmt(beta) + " window too thin");
        out << (beta == 0.0 ? "" : ", ") << "beta=" << fmt(beta)
            << " rms=" << fmt(fit.rms_residual) << " c1=" << fmt(fit.c1);
    }
    detail = g.ok ? out.str() : g.detail.str();
    return g.ok;
}

// --- criterion 3: route equivalence for the initial profile ----------------

bool criterion3(std::string& detail) {
    Gate g;
    double worst = 0.0;
    for (double m : {0.2, 0.5, 1.0, 2.0}) {
        const auto sim = similarity_route(m, 512);
        const auto ie =
            solve_integral_equation(m, 1.0, 1.0, 0.5 * (m + 1.0),
                                    sim.eta_grid);
        const double gap = sup_gap(sim, ie);
        worst = std::max(worst, gap);
        g.require(gap <= 5e-3, "m=" + fmt(m) + " gap " + fmt(gap));
    }
    const auto sim256 = similarity_route(1.0, 256);
    const auto sim512 = similarity_route(1.0, 512);
    const auto ie256 =
        solve_integral_equation(1.0, 1.0, 1.0, 1.0, sim256.eta_grid);
    const auto ie512 =
        solve_integral_equation(1.0, 1.0, 1.0, 1.0, sim512.eta_grid);
    const double ratio = sup_gap(sim512, ie512) / sup_gap(sim256, ie256);
    g.require(ratio <= 0.6,
              "refinement ratio " + fmt(ratio) + " (gap did not halve)");
    if (g.ok)
        detail = "worst gap " + fmt(worst) + " (<= 5e-3), refinement ratio " +
                 fmt(ratio);
    else
        detail = g.detail.str();
    return g.ok;
}

// --- criterion 4: tail envelopes and wall Robin residual -------------------

bool criterion4(std::string& detail) {
    Gate g;
    for (double m : {0.2, 0.5, 1.0, 2.0}) {
        const auto prof = similarity_route(m, 512);
        const auto env = envelope_fit(prof);
        for (double c : {env.M5, env.M6, env.M7, env.M8, env.M9, env.M10})
            g.require(std::isfinite(c) && c > 0.0,
                      "m=" + fmt(m) + " envelope constant " + fmt(c));
        const double robin =
            std::abs(prof.nu * prof.Y[0] * prof.Yp[0] + m * prof.a);
        g.require(robin <= 1e-6, "m=" + fmt(m) + " Robin " + fmt(robin));
    }
    detail = g.ok ? "M5..M10 finite positive, wall Robin <= 1e-6 for all m"
                  : g.detail.str();
    return g.ok;
}

// --- criterion 5: self-similar marching fidelity ---------------------------

double march_drift(const Scenario& sc, double X, double h) {
    const auto field = march(sc, X, h);
    if (field.truncated) return std::numeric_limits<double>::infinity();
    double drift = 0.0;
    for (const auto& w : field.omega)
        drift = std::max(drift, sup_diff(w, field.omega.front()));
    return drift;
}

bool criterion5(std::string& detail) {
    Gate g;
    double worst = 0.0;
    for (double m : {0.2, 1.0, 2.0}) {
        const Scenario sc = self_similar(m);
        const double drift = march_drift(sc, 0.5, 0.01);
        worst = std::max(worst, drift);
        g.require(drift <= 1e-4 + 10.0 * sc.newton_tol,
                  "m=" + fmt(m) + " drift " + fmt(drift));
    }
    detail = g.ok ? "worst slice drift " + fmt(worst) + " (<= 1e-4 + 10 tol)"
                  : g.detail.str();
    return g.ok;
}

// --- criterion 6: sandwich estimates on perturbed runs ---------------------

bool criterion6(std::string& detail) {
    Gate g;
    for (double m : {0.2, 0.5, 1.0, 2.0}) {
        Scenario sc = perturbed(m);
        const auto field = march(sc, 0.5, 0.01);
        g.require(!field.truncated, "m=" + fmt(m) + " march truncated");
        if (field.truncated) continue;
        const auto rep = sandwich_check(field, field.omega.front());
        g.require(rep.violations.empty(),
                  "m=" + fmt(m) + " " +
                      std::to_string(rep.violations.size()) + " violations");
        // a fitted minimal constant of 0 means the one-sided bound holds
        // with margin, so positive constants exist a fortiori
        for (double c : {rep.M11, rep.M12})
            g.require(std::isfinite(c) && c >= 0.0,
                      "m=" + fmt(m) + " sandwich constant " + fmt(c));
        g.require(std::isfinite(rep.M13) && rep.M13 > 0.0,
                  "m=" + fmt(m) + " M13 " + fmt(rep.M13));
        g.require(rep.M11 * 0.5 <= 1.0, "m=" + fmt(m) + " M11 X > 1");
        g.require(rep.M12 * 0.5 <= 1.0, "m=" + fmt(m) + " M12 X > 1");
        g.require(rep.M19 > 0.0, "m=" + fmt(m) + " M19 <= 0");
    }
    detail = g.ok ? "zero violations, M11 X <= 1, M12 X <= 1, M19 > 0 for "
                    "all m"
                  : g.detail.str();
    return g.ok;
}

// --- criterion 7: self-convergence orders ----------------------------------

struct Manufactured {
    std::vector<double> exact;
    SliceSource src;
};

// w*(eta) = (1 - eta) e^{eta/2} with the xi = 0 coefficient set, so the
// difference-quotient term vanishes when omega_prev = w*.
Manufactured make_mms(const std::vector<double>& eta, const Coefficients& c,
                      double nu) {
    Manufactured out;
    out.exact.resize(eta.size());
    out.src.g.assign(eta.size(), 0.0);
    for (std::size_t j = 0; j < eta.size(); ++j) {
        const double e = eta[j];
        const double ex = std::exp(0.5 * e);
        const double w = (1.0 - e) * ex;
        const double wp = -0.5 * (1.0 + e) * ex;
        const double wpp = -0.25 * (3.0 + e) * ex;
        out.exact[j] = w;
        out.src.g[j] =
            -(nu * w * w * wpp + (e * e - 1.0) * c.B * wp - e * c.C * w);
    }
    out.src.wall = 0.5 * nu + c.v1 - c.B;
    return out;
}

double mms_error(std::size_t n_cells) {
    const auto eta = graded_eta_grid(n_cells, 2.0);
    const Scenario sc = self_similar(1.0);
    const Coefficients c = coefficients(sc, 0.0);
    const auto mms = make_mms(eta, c, sc.nu);
    const auto w = solve_slice(eta, mms.exact, mms.exact, c, sc.nu, 0.01,
                               0.0, LineOptions{}, nullptr, &mms.src);
    return sup_diff(w, mms.exact);
}

bool criterion7(std::string& detail) {
    Gate g;
    Scenario sc = perturbed(0.5);
    const auto coarse = march(sc, 0.4, 0.02);
    const auto fine = march(sc, 0.4, 0.01);
    const auto finer = march(sc, 0.4, 0.005);
    g.require(!coarse.truncated && !fine.truncated && !finer.truncated,
              "march truncated");
    double d1 = 0.0, d2 = 0.0;
    if (g.ok)
        for (std::size_t k = 0; k < coarse.omega.size(); ++k) {
            d1 = std::max(d1, sup_diff(coarse.omega[k], fine.omega[2 * k]));
            d2 = std::max(d2, sup_diff(fine.omega[2 * k],
                                       finer.omega[4 * k]));
        }
    const double richardson = d1 / d2;
    g.require(richardson >= 1.8, "Richardson ratio " + fmt(richardson));

    const double e1 = mms_error(128);
    const double e2 = mms_error(256);
    const double order = std::log2(e1 / e2);
    g.require(order >= 1.9, "manufactured-solution order " + fmt(order));
    detail = g.ok ? "Richardson ratio " + fmt(richardson) +
                        " (>= 1.8), slice order " + fmt(order) + " (>= 1.9)"
                  : g.detail.str();
    return g.ok;
}

// --- criterion 8: physical reconstruction ----------------------------------

void check_reconstruction(Gate& g, const Scenario& base,
                          const std::string& tag) {
    Scenario sc = base;
    const auto field = march(sc, 0.2, 0.01);
    g.require(!field.truncated, tag + ": march truncated");
    if (field.truncated) return;
    const auto phys = reconstruct(field, sc);
    for (std::size_t ix = 0; ix < phys.x_nodes.size(); ++ix) {
        const double x = phys.x_nodes[ix];
        g.require(phys.u[ix][0] == 0.0, tag + ": u(x, 0) != 0");
        const double v0 = std::pow(x, 0.5 * (sc.m - 1.0)) * sc.wall_v1(x);
        g.require(std::abs(phys.v[ix][0] - v0) <= 1e-4 * std::abs(v0),
                  tag + ": wall v off at x=" + fmt(x));
    }
    const double cont = continuity_residual(phys, sc).max_residual;
    const double mom = momentum_residual(phys, sc).max_residual;
    g.require(cont <= 1e-2, tag + ": continuity residual " + fmt(cont));
    g.require(mom <= 1e-2, tag + ": momentum residual " + fmt(mom));

    // refinement order on a fixed physical window; three levels, measured
    // on the finest pair so a pre-asymptotic coarse level cannot mask the
    // rate
    auto run = [&](std::size_t n_eta, double h, std::size_t ny,
                   double y_top) {
        Scenario ref = self_similar(base.m, base.variant);
        ref.N = n_eta;
        const auto f = march(ref, 0.2, h);
        std::vector<double> x_nodes(f.xi_nodes.begin() + 1,
                                    f.xi_nodes.end());
        std::vector<double> y_nodes(ny + 1);
        for (std::size_t j = 0; j <= ny; ++j)
            y_nodes[j] =
                y_top * static_cast<double>(j) / static_cast<double>(ny);
        const auto p = reconstruct(f, ref, x_nodes, y_nodes);
        return std::pair{continuity_residual(p, ref).max_residual,
                         momentum_residual(p, ref).max_residual};
    };
    Scenario probe = self_similar(base.m, base.variant);
    const auto probe_field = march(probe, 0.2, 0.02);
    const EtaMap map = y_of_eta(probe_field, 0.2);
    const MonotoneCubic y_h(map.eta, map.y);
    const double y_top = 2.0 * y_h(0.99);
    const auto [l0_cont, l0_mom] = run(128, 0.02, 64, y_top);
    const auto [l1_cont, l1_mom] = run(256, 0.01, 128, y_top);
    const auto [l2_cont, l2_mom] = run(512, 0.005, 256, y_top);
    const double rate = std::pow(2.0, 0.9);
    g.require(l1_cont < l0_cont && l1_mom < l0_mom,
              tag + ": residuals not decreasing under refinement");
    g.require(l2_cont <= l1_cont / rate,
              tag + ": continuity order < 0.9 (" + fmt(l1_cont) + " -> " +
                  fmt(l2_cont) + ")");
    g.require(l2_mom <= l1_mom / rate, tag + ": momentum order < 0.9 (" +
                                           fmt(l1_mom) + " -> " +
                                           fmt(l2_mom) + ")");
}

bool criterion8(std::string& detail) {
    Gate g;
    check_reconstruction(g, perturbed(1.0), "planar");
    detail = g.ok ? "wall values exact, residuals <= 1e-2, refinement order "
                    ">= 0.9"
                  : g.detail.str();
    return g.ok;
}

// --- criterion 9: Gaussian decay law ---------------------------------------

bool criterion9(std::string& detail) {
    Gate g;
    Scenario sc = perturbed(1.0);
    const auto field = march(sc, 0.2, 0.01);
    g.require(!field.truncated, "march truncated");
    if (!g.ok) {
        detail = g.detail.str();
        return false;
    }
    const auto phys = reconstruct(field, sc);
    const auto rep = decay_check(phys, sc);
    g.require(rep.window_ok, "tail window too thin at some x");
    double min_r2 = 1.0;
    for (const auto& fit : rep.per_x) {
        g.require(fit.slope < 0.0, "non-negative slope");
        min_r2 = std::min(min_r2, fit.r2);
    }
    g.require(min_r2 >= 0.99, "min R^2 " + fmt(min_r2));
    g.require(rep.M4 > 0.0 && rep.M4 <= rep.M2, "decay rates unordered");
    const double spread = (rep.M2 - rep.M4) / rep.M2;
    g.require(spread <= 0.05, "m=1 slope spread " + fmt(spread));
    detail = g.ok ? "min R^2 " + fmt(min_r2) + ", slope spread " +
                        fmt(spread) + " (<= 5%)"
                  : g.detail.str();
    return g.ok;
}

// --- criterion 10: axisymmetric variant ------------------------------------

bool criterion10(std::string& detail) {
    Gate g;
    // criterion 1 via beta = 2m/(m+3); m in {1, 3} hits beta in {1/2, 1}
    // (beta = 0 would need m = 0, outside the admissible range).
    const double m_beta[2][2] = {{1.0, 0.5}, {3.0, 1.0}};
    for (const auto& [m, beta] : m_beta) {
        const auto p = make_problem(m, Variant::axisymmetric);
        const double got_beta = normalize(p).beta;
        g.require(std::abs(got_beta - beta) <= 1e-12,
                  "m=" + fmt(m) + " beta " + fmt(got_beta));
        const auto sol = solve_falkner_skan(got_beta, 0.0, 0.0);
        const double target = beta == 0.5 ? kShearTargets[1]
                                          : kShearTargets[2];
        g.require(std::abs(sol.wall_shear - target) <= 1e-3,
                  "m=" + fmt(m) + " shear " + fmt(sol.wall_shear));
        g.require(std::abs(sol.wall_shear - oracle::fs_wall_shear(beta)) <=
                      1e-3,
                  "m=" + fmt(m) + " shear vs oracle");
        check_profile_shape(g, sol, "m=" + fmt(m));
    }
    // criterion 3: route equivalence with kappa = (m+3)/2
    for (double m : {0.2, 0.5, 1.0, 2.0}) {
        const auto sim = similarity_route(m, 512, Variant::axisymmetric);
        const auto ie = solve_integral_equation(
            m, 1.0, 1.0, 0.5 * (m + 3.0), sim.eta_grid);
        const double gap = sup_gap(sim, ie);
        g.require(gap <= 5e-3, "m=" + fmt(m) + " route gap " + fmt(gap));
    }
    // criterion 5: self-similar marching fidelity
    for (double m : {0.2, 1.0, 2.0}) {
        const Scenario sc = self_similar(m, Variant::axisymmetric);
        const double drift = march_drift(sc, 0.5, 0.01);
        g.require(drift <= 1e-4 + 10.0 * sc.newton_tol,
                  "m=" + fmt(m) + " drift " + fmt(drift));
    }
    // criterion 8: physical reconstruction
    check_reconstruction(g, perturbed(1.0, Variant::axisymmetric), "cone");
    detail = g.ok ? "criteria 1, 3, 5, 8 repeated for the cone (r1 = 1) at "
                    "the planar thresholds"
                  : g.detail.str();
    return g.ok;
}

// --- criterion 11: uniqueness probe ----------------------------------------

bool criterion11(std::string& detail) {
    Gate g;
    Scenario sc = perturbed(1.0);
    const auto field = march(sc, 0.1, 0.01);
    g.require(!field.truncated, "march truncated");
    if (!g.ok) {
        detail = g.detail.str();
        return false;
    }
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    double worst = 0.0;
    const LineOptions opts;
    for (std::size_t k = 1; k < field.omega.size(); ++k) {
        const auto& prev = field.omega[k - 1];
        const auto c = coefficients(sc, field.xi_nodes[k]);
        std::vector<std::vector<double>> sols;
        for (int trial = 0; trial < 2; ++trial) {
            std::vector<double> warm = prev;
            for (std::size_t j = 0; j + 1 < warm.size(); ++j)
                warm[j] *= 1.0 + u(rng);
            sols.push_back(solve_slice(field.eta_grid, warm, prev, c, sc.nu,
                                       0.01, field.mu_schedule[k], opts));
        }
        const double gap = sup_diff(sols[0], sols[1]);
        worst = std::max(worst, gap);
        g.require(gap <= 10.0 * opts.newton_tol,
                  "slice " + std::to_string(k) + " gap " + fmt(gap));
    }
    detail = g.ok ? "worst restart gap " + fmt(worst) + " (<= 10 tol) over " +
                        std::to_string(field.omega.size() - 1) + " slices"
                  : g.detail.str();
    return g.ok;
}

struct Criterion {
    int id;
    const char* title;
    bool (*run)(std::string&);
};

const Criterion kCriteria[] = {
    {1, "Falkner-Skan wall shear and monotonicity", criterion1},
    {2, "asymptotic tail law fit", criterion2},
    {3, "route equivalence for the initial profile", criterion3},
    {4, "tail envelopes and wall Robin residual", criterion4},
    {5, "self-similar marching fidelity", criterion5},
    {6, "sandwich estimates on perturbed scenarios", criterion6},
    {7, "self-convergence orders", criterion7},
    {8, "physical reconstruction", criterion8},
    {9, "Gaussian decay law", criterion9},
    {10, "axisymmetric variant", criterion10},
    {11, "uniqueness probe", criterion11},
};

}  // namespace

int main() {
    int failures = 0;
    for (const Criterion& c : kCriteria) {
        std::string detail;
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("%s criterion %2d: %s — %s\n", ok ? "PASS" : "FAIL",
                    c.id, c.title, detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    if (failures == 0)
        std::printf("acceptance: all %zu criteria passed\n",
                    std::size(kCriteria));
    else
        std::printf("acceptance: %d criteria FAILED\n", failures);
    return failures == 0 ? 0 : 1;
}
