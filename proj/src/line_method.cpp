#include "bl/line_method.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bl/errors.hpp"
#include "bl/grid.hpp"

namespace bl {
namespace {

constexpr double kWeightFloor = 1e-8;

// Residual rows are scaled by B (omega + floor): the balance of the slice
// equation is nu w^2 w_ee ~ B w, so this makes newton_tol dimensionless
// and meaningful near eta = 1 where everything vanishes.
double weighted_norm(const std::vector<double>& F,
                     const std::vector<double>& omega, double B) {
    const double scale = std::max(std::abs(B), 1e-12);
    double worst = 0.0;
    for (std::size_t j = 0; j < F.size(); ++j)
        worst = std::max(worst,
                         std::abs(F[j]) / (scale * (omega[j] + kWeightFloor)));
    return worst;
}

struct Tridiag {
    std::vector<double> lower, diag, upper;
    double row0_extra = 0.0;
};

// Residual and (optionally) Jacobian of the regularized slice system.
void assemble(const std::vector<double>& eta, const std::vector<double>& w,
              const std::vector<double>& w_prev, const Coefficients& c,
              double nu, double h, double eps, double mu_k,
              const SliceSource* src, std::vector<double>& F, Tridiag* J) {
    const std::size_t n = eta.size();
    F.assign(n, 0.0);
    if (J) {
        J->lower.assign(n, 0.0);
        J->diag.assign(n, 0.0);
        J->upper.assign(n, 0.0);
        J->row0_extra = 0.0;
    }

    // wall Robin row: nu w w_e - v1 w + B = 0 with a one-sided stencil
    {
        const auto s = d1_left(eta[1] - eta[0], eta[2] - eta[1]);
        const double we = s.m * w[0] + s.c * w[1] + s.p * w[2];
        F[0] = nu * w[0] * we - c.v1 * w[0] + c.B;
        if (src) F[0] += src->wall;
        if (J) {
            J->diag[0] = nu * (we + w[0] * s.m) - c.v1;
            J->upper[0] = nu * w[0] * s.c;
            J->row0_extra = nu * w[0] * s.p;
        }
    }

    for (std::size_t j = 1; j + 1 < n; ++j) {
        const double hl = eta[j] - eta[j - 1], hr = eta[j + 1] - eta[j];
        const auto s1 = d1_central(hl, hr);
        const auto s2 = d2_central(hl, hr);
        const double we = s1.m * w[j - 1] + s1.c * w[j] + s1.p * w[j + 1];
        const double wee = s2.m * w[j - 1] + s2.c * w[j] + s2.p * w[j + 1];
        const double diff = eta[j] * (c.A + mu_k * h) / h;
        const double adv = (eta[j] * eta[j] - 1.0) * c.B;
        const double coef2 = nu * w[j] * w[j] + eps;
        F[j] = coef2 * wee - diff * (w[j] - w_prev[j]) + adv * we -
               eta[j] * c.C * w[j];
        if (src) F[j] += src->g[j];
        if (J) {
            J->lower[j] = coef2 * s2.m + adv * s1.m;
            J->diag[j] = 2.0 * nu * w[j] * wee + coef2 * s2.c - diff +
                         adv * s1.c - eta[j] * c.C;
            J->upper[j] = coef2 * s2.p + adv * s1.p;
        }
    }

    // Dirichlet row at eta = 1
    F[n - 1] = w[n - 1];
    if (J) J->diag[n - 1] = 1.0;
}

// One Newton stage at fixed eps.  Returns the final weighted residual.
// Intermediate continuation stages (strict = false) are warm-up homotopy
// steps: the large eps term amplifies assembly roundoff far above
// newton_tol in the weighted norm near eta = 1, so they stop at their
// best-effort residual instead of throwing.  The final eps = 0 stage is
// strict.
double newton_stage(const std::vector<double>& eta, std::vector<double>& w,
                    const std::vector<double>& w_prev, const Coefficients& c,
                    double nu, double h, double eps, double mu_k,
                    const LineOptions& opts, const SliceSource* src,
                    bool strict, int& iters) {
    std::vector<double> F;
    Tridiag J;
    assemble(eta, w, w_prev, c, nu, h, eps, mu_k, src, F, &J);
    double res = weighted_norm(F, w, c.B);
    for (int it = 0; it < opts.max_newton; ++it) {
        if (res <= 0.1 * opts.newton_tol) return res;
        ++iters;
        std::vector<double> rhs(F.size());
        for (std::size_t j = 0; j < F.size(); ++j) rhs[j] = -F[j];
        const std::vector<double> delta = solve_almost_tridiagonal(
            J.lower, J.diag, J.upper, J.row0_extra, rhs);

        // The line-search merit freezes the weights at the current iterate:
        // a Newton step is a descent direction for any fixed norm of F, but
        // not for a norm whose weights move with the trial point.
        const std::vector<double> w_ref = w;
        const double merit0 = weighted_norm(F, w_ref, c.B);

        // fraction-to-boundary cap: no node may lose more than 90% of its
        // (positive) value in one step, so the trial stays positive and the
        // step remains an undistorted multiple of the Newton direction
        double lambda = 1.0;
        for (std::size_t j = 0; j + 1 < w.size(); ++j)
            if (delta[j] < 0.0)
                lambda = std::min(lambda, -0.9 * w[j] / delta[j]);
        bool accepted = false;
        std::vector<double> trial(w.size());
        for (int halving = 0; halving <= opts.max_halvings; ++halving) {
            for (std::size_t j = 0; j + 1 < w.size(); ++j)
                trial[j] = w[j] + lambda * delta[j];
            trial.back() = 0.0;
            assemble(eta, trial, w_prev, c, nu, h, eps, mu_k, src, F, &J);
            if (weighted_norm(F, w_ref, c.B) < merit0) {
                w = trial;
                res = weighted_norm(F, w, c.B);
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) {
            if (!strict || res <= opts.newton_tol) return res;
            throw ConvergenceError(
                "Newton step rejected after damping at eps = " +
                    std::to_string(eps),
                res);
        }
    }
    if (strict && res > opts.newton_tol)
        throw ConvergenceError("Newton stagnated at eps = " +
                                   std::to_string(eps),
                               res);
    return res;
}

}  // namespace

Coefficients coefficients(const Scenario& scenario, double xi) {
    if (xi < 0.0 || xi > scenario.X)
        throw ValidationError("xi outside [0, X]");
    const double V = scenario.V(xi);
    const double Vx = scenario.V_xi(xi);
    Coefficients c;
    c.A = xi * V;
    c.B = scenario.m * V + xi * Vx;
    if (scenario.variant == Variant::planar || scenario.planar_C_override) {
        c.C = 0.5 * (3.0 * scenario.m - 1.0) * V + xi * Vx;
    } else {
        const double r1 = scenario.r1(xi);
        if (!(r1 > 0.0)) throw ValidationError("r1(xi) must be > 0");
        c.C = 1.5 * (scenario.m - 1.0) * V + xi * Vx -
              xi * scenario.r1_xi(xi) / r1 * V;
    }
    c.v1 = scenario.wall_v1(xi);
    return c;
}

std::vector<double> assemble_slice_residual(
    const std::vector<double>& eta, const std::vector<double>& omega,
    const std::vector<double>& omega_prev, const Coefficients& c, double nu,
    double h, double eps, double mu_k, const SliceSource* src) {
    std::vector<double> F;
    assemble(eta, omega, omega_prev, c, nu, h, eps, mu_k, src, F, nullptr);
    return F;
}

std::vector<double> solve_slice(const std::vector<double>& eta,
                                std::vector<double> warm_start,
                                const std::vector<double>& omega_prev,
                                const Coefficients& c, double nu, double h,
                                double mu_k, const LineOptions& opts,
                                SliceDiag* diag, const SliceSource* src) {
    const std::size_t n = eta.size();
    if (warm_start.size() != n || omega_prev.size() != n)
        throw ValidationError("slice arrays must match the eta grid");
    std::vector<double> w = std::move(warm_start);
    w.back() = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j)
        w[j] = std::max(w[j], 1e-12 * (1.0 - eta[j]));

    double w_max = 0.0;
    for (double v : omega_prev) w_max = std::max(w_max, v);
    if (w_max == 0.0)
        for (double v : w) w_max = std::max(w_max, v);

    SliceDiag local;
    SliceDiag& d = diag ? *diag : local;
    d = SliceDiag{};

    // The continuation must start above the roughness of the warm start:
    // eps0 is bumped by the initial weighted residual so the first stages
    // behave like a heat-equation smoother when the hint is noisy.
    std::vector<double> F0;
    assemble(eta, w, omega_prev, c, nu, h, 0.0, mu_k, src, F0, nullptr);
    const double r0 = weighted_norm(F0, w, c.B);
    const double eps0 =
        opts.eps0_scale * w_max * w_max * std::max(1.0, r0);
    std::vector<double> eps_list;
    for (double eps = eps0; eps > opts.eps_min; eps /= opts.eps_factor)
        eps_list.push_back(eps);
    eps_list.push_back(0.0);

    std::vector<double> prev_stage = w;
    for (double eps : eps_list) {
        const bool strict = eps == 0.0;
        d.final_residual = newton_stage(eta, w, omega_prev, c, nu, h, eps,
                                        mu_k, opts, src, strict,
                                        d.newton_iters);
        d.eps_path.push_back(eps);
        double delta = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            delta = std::max(delta, std::abs(w[j] - prev_stage[j]));
        d.stage_deltas.push_back(delta);
        prev_stage = w;
    }

    d.min_omega = std::numeric_limits<double>::infinity();
    d.K1 = std::numeric_limits<double>::infinity();
    d.K2 = 0.0;
    const double mu = default_envelope_mu();
    for (std::size_t j = 0; j + 1 < n; ++j) {
        d.min_omega = std::min(d.min_omega, w[j]);
        d.K1 = std::min(d.K1, w[j] / (1.0 - eta[j]));
        d.K2 = std::max(d.K2, w[j] / ((1.0 - eta[j]) * sigma(eta[j], mu)));
    }
    if (!(d.min_omega > 0.0))
        throw QualitativeError("slice lost positivity after convergence");
    return w;
}

CroccoField march(const Scenario& scenario, double X, double h,
                  const LineOptions& opts) {
    scenario.validate();
    if (!(X > 0.0 && h > 0.0 && h <= X))
        throw ValidationError("march: need 0 < h <= X");

    CroccoField field;
    field.eta_grid = graded_eta_grid(scenario.N, scenario.grading_p);
    field.m = scenario.m;
    field.a = scenario.a;
    field.nu = scenario.nu;

    LineOptions local = opts;
    local.newton_tol = scenario.newton_tol;

    const std::size_t K =
        static_cast<std::size_t>(std::llround(X / h));

    // mu* for the m >= 1 difference-quotient augmentation
    double mu_star = opts.mu_star > 0.0 ? opts.mu_star : scenario.mu_star;
    if (mu_star <= 0.0) {
        double sup_b = 0.0;
        for (std::size_t k = 0; k <= K; ++k)
            sup_b = std::max(
                sup_b, std::abs(coefficients(scenario,
                                             static_cast<double>(k) * h)
                                    .B));
        mu_star = 2.0 * sup_b;
    }

    // initial slice from crocco_profile, then a Newton polish so the k = 0
    // slice satisfies the discrete system to newton_tol
    try {
        CroccoProfile slice0;
        if (scenario.b == 0.0) {
            IntegralOptions iopts;
            iopts.fp_tol = scenario.fp_tol;
            slice0 = solve_integral_equation(scenario.m, scenario.a,
                                             scenario.nu, scenario.kappa(),
                                             field.eta_grid, iopts);
        } else {
            const SimilarityProblem p = scenario.similarity_problem();
            const auto [beta, L] = normalize(p);
            const auto sol = solve_falkner_skan(beta, p.f0 / L, p.f1);
            slice0 = from_similarity(sol, p, field.eta_grid);
        }
        SliceDiag diag0;
        std::vector<double> w =
            solve_slice(field.eta_grid, slice0.Y, slice0.Y,
                        coefficients(scenario, 0.0), scenario.nu, h, 0.0,
                        local, &diag0);
        field.xi_nodes.push_back(0.0);
        field.omega.push_back(std::move(w));
        field.slice_diag.push_back(diag0);
        field.mu_schedule.push_back(0.0);
        field.attained_X = 0.0;
    } catch (const Error& e) {
        field.truncated = true;
        field.failure_reason = e.what();
        return field;
    }

    for (std::size_t k = 1; k <= K; ++k) {
        const double xi = static_cast<double>(k) * h;
        const double mu_k = scenario.m < 1.0 ? 0.0 : mu_star;
        SliceDiag diag;
        try {
            std::vector<double> next =
                solve_slice(field.eta_grid, field.omega.back(),
                            field.omega.back(), coefficients(scenario, xi),
                            scenario.nu, h, mu_k, local, &diag);
            field.xi_nodes.push_back(xi);
            field.omega.push_back(std::move(next));
            field.slice_diag.push_back(diag);
            field.mu_schedule.push_back(mu_k);
            field.attained_X = xi;
        } catch (const Error& e) {
            field.truncated = true;
            field.failure_reason = e.what();
            break;
        }
    }
    return field;
}

SandwichReport sandwich_check(const CroccoField& field,
                              const std::vector<double>& Y, double mu) {
    const auto& eta = field.eta_grid;
    const std::size_t n = eta.size();
    if (Y.size() != n)
        throw ValidationError("sandwich_check: Y must match the eta grid");
    if (mu == 0.0) mu = default_envelope_mu();

    SandwichReport rep;
    rep.sigma_band = field.m < 1.0 / 3.0;
    rep.M15 = rep.M17 = rep.M19 = std::numeric_limits<double>::infinity();

    // reference derivative and sigma at interior nodes
    std::vector<double> Ye(n, 0.0), sig(n, 0.0);
    for (std::size_t j = 1; j + 1 < n; ++j) {
        const auto s = d1_central(eta[j] - eta[j - 1], eta[j + 1] - eta[j]);
        Ye[j] = s.m * Y[j - 1] + s.c * Y[j] + s.p * Y[j + 1];
        sig[j] = sigma(eta[j], mu);
    }
    const std::size_t j_curv = static_cast<std::size_t>(0.95 * (n - 1));

    for (std::size_t k = 0; k < field.omega.size(); ++k) {
        const auto& w = field.omega[k];
        const double kh = field.xi_nodes[k];
        bool bad = false;
        for (std::size_t j = 0; j + 1 < n; ++j) {
            if (!(w[j] > 0.0) || !(Y[j] > 0.0)) {
                bad = true;
                continue;
            }
            const double ratio = w[j] / Y[j];
            if (kh > 0.0) {
                if (ratio < 1.0)
                    rep.M11 = std::max(rep.M11, (1.0 - ratio) / kh);
                else
                    rep.M12 = std::max(rep.M12, (ratio - 1.0) / kh);
            }
            if (k > 0) {
                const double dq = std::abs(w[j] - field.omega[k - 1][j]) /
                                  (field.xi_nodes[k] - field.xi_nodes[k - 1]);
                rep.M13 = std::max(rep.M13, dq / Y[j]);
            }
        }
        for (std::size_t j = 1; j + 1 < n; ++j) {
            const auto s1 =
                d1_central(eta[j] - eta[j - 1], eta[j + 1] - eta[j]);
            const double we =
                s1.m * w[j - 1] + s1.c * w[j] + s1.p * w[j + 1];
            if (rep.sigma_band) {
                const double r = -we / sig[j];
                if (!(r > 0.0)) {
                    bad = true;
                    continue;
                }
                rep.M16 = std::max(rep.M16, r);
                rep.M17 = std::min(rep.M17, r);
            } else {
                if (!(Ye[j] < 0.0) || !(we < 0.0)) {
                    bad = true;
                    continue;
                }
                const double r = we / Ye[j];
                rep.M14 = std::max(rep.M14, r);
                rep.M15 = std::min(rep.M15, r);
            }
            if (j < j_curv) {
                const auto s2 =
                    d2_central(eta[j] - eta[j - 1], eta[j + 1] - eta[j]);
                const double wee =
                    s2.m * w[j - 1] + s2.c * w[j] + s2.p * w[j + 1];
                const double q = -w[j] * wee;
                if (!(q > 0.0)) {
                    bad = true;
                    continue;
                }
                rep.M18 = std::max(rep.M18, q);
                rep.M19 = std::min(rep.M19, q);
            }
        }
        if (bad) rep.violations.push_back(k);
    }
    return rep;
}

}  // namespace bl
