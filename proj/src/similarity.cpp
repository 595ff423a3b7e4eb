#include "bl/similarity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "bl/errors.hpp"

namespace bl {
namespace {

// The shooting tail is the delicate part: perturbations of the wall shear
// grow by ~exp(2 sqrt(2 beta z)) before 1 - f' reaches the far-field floor,
// so the integration and the bisection run in extended precision.
using real = long double;

struct State {
    real f, fp, fpp;
};

State rhs(const State& y, real beta) {
    return {y.fp, y.fpp, -(y.f * y.fpp + beta * (1.0L - y.fp * y.fp))};
}

State axpy(const State& y, real h, const State& d) {
    return {y.f + h * d.f, y.fp + h * d.fp, y.fpp + h * d.fpp};
}

// Cash-Karp embedded RK45 step; err estimates against the embedded
// 4th-order solution.
State rk45_step(const State& y, real h, real beta, real& err) {
    const State k1 = rhs(y, beta);
    const State k2 = rhs(axpy(y, h / 5, k1), beta);
    State t = y;
    t = axpy(t, h * 3.0L / 40, k1);
    t = axpy(t, h * 9.0L / 40, k2);
    const State k3 = rhs(t, beta);
    t = y;
    t = axpy(t, h * 3.0L / 10, k1);
    t = axpy(t, h * -9.0L / 10, k2);
    t = axpy(t, h * 6.0L / 5, k3);
    const State k4 = rhs(t, beta);
    t = y;
    t = axpy(t, h * -11.0L / 54, k1);
    t = axpy(t, h * 5.0L / 2, k2);
    t = axpy(t, h * -70.0L / 27, k3);
    t = axpy(t, h * 35.0L / 27, k4);
    const State k5 = rhs(t, beta);
    t = y;
    t = axpy(t, h * 1631.0L / 55296, k1);
    t = axpy(t, h * 175.0L / 512, k2);
    t = axpy(t, h * 575.0L / 13824, k3);
    t = axpy(t, h * 44275.0L / 110592, k4);
    t = axpy(t, h * 253.0L / 4096, k5);
    const State k6 = rhs(t, beta);

    State y5 = y;
    y5 = axpy(y5, h * 37.0L / 378, k1);
    y5 = axpy(y5, h * 250.0L / 621, k3);
    y5 = axpy(y5, h * 125.0L / 594, k4);
    y5 = axpy(y5, h * 512.0L / 1771, k6);

    State y4 = y;
    y4 = axpy(y4, h * 2825.0L / 27648, k1);
    y4 = axpy(y4, h * 18575.0L / 48384, k3);
    y4 = axpy(y4, h * 13525.0L / 55296, k4);
    y4 = axpy(y4, h * 277.0L / 14336, k5);
    y4 = axpy(y4, h * 1.0L / 4, k6);

    err = std::max({std::abs((double)(y5.f - y4.f)),
                    std::abs((double)(y5.fp - y4.fp)),
                    std::abs((double)(y5.fpp - y4.fpp))});
    return y5;
}

struct IntegrationResult {
    State final;
    double z_final;
    bool escaped_up = false;    // f' ran past 1
    bool escaped_down = false;  // f'' went negative with f' short of 1
    std::vector<double> z, f, fp, fpp;
};

IntegrationResult integrate(real beta, real f0, real f1, real shear,
                            const ShootingOptions& opts, bool store) {
    IntegrationResult out;
    State y{f0, f1, shear};
    real z = 0.0L;
    real h = 1e-3L;
    const real tol = static_cast<real>(opts.ode_tol) * 1e-3L;
    const real h_max = store ? opts.max_store_step : 0.1;
    auto record = [&](real zz, const State& s) {
        if (!store) return;
        out.z.push_back(static_cast<double>(zz));
        out.f.push_back(static_cast<double>(s.f));
        out.fp.push_back(static_cast<double>(s.fp));
        out.fpp.push_back(static_cast<double>(s.fpp));
    };
    record(0.0L, y);
    while (z < opts.z_max) {
        h = std::min({h, h_max, static_cast<real>(opts.z_max) - z});
        real err;
        const State y_new = rk45_step(y, h, beta, err);
        if (err <= tol) {
            z += h;
            y = y_new;
            record(z, y);
            if (y.fp > 1.5L) {
                out.escaped_up = true;
                break;
            }
            if (y.fpp < -1e-14L && y.fp < 0.999L) {
                out.escaped_down = true;
                break;
            }
        }
        const real safety =
            0.9L * std::pow(static_cast<double>(tol / std::max(err, (real)1e-300)),
                            0.2);
        h *= std::clamp(safety, (real)0.2L, (real)5.0L);
        h = std::max(h, (real)1e-12L);
    }
    out.final = y;
    out.z_final = static_cast<double>(z);
    return out;
}

// Shooting objective: f'(z_max) - 1, with escape classification folded into
// the sign.
real shoot(real beta, real f0, real f1, real shear,
           const ShootingOptions& opts) {
    const IntegrationResult r = integrate(beta, f0, f1, shear, opts, false);
    if (r.escaped_up) return std::max(r.final.fp - 1.0L, (real)1e-14L);
    if (r.escaped_down) return std::min(r.final.fp - 1.0L, (real)-1e-14L);
    return r.final.fp - 1.0L;
}

}  // namespace

void SimilarityProblem::validate() const {
    if (!(m > 0.0)) throw ValidationError("m must be > 0");
    if (!(a > 0.0)) throw ValidationError("a must be > 0");
    if (!(nu > 0.0)) throw ValidationError("nu must be > 0");
    if (!(f1 >= 0.0 && f1 < 1.0)) throw ValidationError("f1 must be in [0,1)");
    const double beta = normalize(*this).beta;
    if (!(beta > 0.0 && beta < 2.0))
        throw ValidationError("derived beta outside (0,2)");
}

double SimilarityProblem::kappa() const {
    return variant == Variant::planar ? (m + 1.0) / 2.0 : (m + 3.0) / 2.0;
}

double wedge_angle(double m) {
    if (!(m > 0.0)) throw ValidationError("wedge_angle: m must be > 0");
    return std::numbers::pi * 2.0 * m / (m + 1.0);
}

Normalization normalize(const SimilarityProblem& problem) {
    const double denom =
        problem.variant == Variant::planar ? problem.m + 1.0 : problem.m + 3.0;
    return {2.0 * problem.m / denom,
            std::sqrt(2.0 * problem.nu / (denom * problem.a))};
}

ProfileSolution solve_falkner_skan(double beta, double f0, double f1,
                                   const ShootingOptions& opts) {
    if (beta < 0.0) throw ValidationError("beta must be >= 0");
    if (!(f1 >= 0.0 && f1 < 1.0)) throw ValidationError("f1 must be in [0,1)");
    const real b = beta, g0 = f0, g1 = f1;

    // Bracket the wall shear: phi < 0 undershoot, phi > 0 overshoot.
    real lo = opts.bracket_lo, hi = opts.bracket_hi;
    real phi_lo = shoot(b, g0, g1, lo, opts);
    real phi_hi = shoot(b, g0, g1, hi, opts);
    int expansions = 0;
    while (phi_lo * phi_hi > 0.0L && expansions < opts.bracket_expansions) {
        if (phi_lo > 0.0L) {
            lo *= 0.5L;
            phi_lo = shoot(b, g0, g1, lo, opts);
        } else {
            hi *= 2.0L;
            phi_hi = shoot(b, g0, g1, hi, opts);
        }
        ++expansions;
    }
    if (phi_lo * phi_hi > 0.0L)
        throw ConvergenceError(
            "shooting bracket not found in [" + std::to_string((double)lo) +
                ", " + std::to_string((double)hi) + "]",
            std::min(std::abs((double)phi_lo), std::abs((double)phi_hi)));

    // Bisection-bracketed secant on f''(0), driven to the bracket's machine
    // width; the residual tolerance alone cannot pin the unstable tail.
    for (int iter = 0; iter < 300 && hi - lo > 1e-18L * std::max((real)1.0L, hi);
         ++iter) {
        real s_next = (phi_hi != phi_lo)
                          ? hi - phi_hi * (hi - lo) / (phi_hi - phi_lo)
                          : 0.5L * (lo + hi);
        if (!(s_next > lo && s_next < hi)) s_next = 0.5L * (lo + hi);
        const real phi_s = shoot(b, g0, g1, s_next, opts);
        if (phi_s < 0.0L) {
            lo = s_next;
            phi_lo = phi_s;
        } else {
            hi = s_next;
            phi_hi = phi_s;
        }
    }
    // take the undershoot edge so f' approaches 1 from below
    const real s = lo;
    if (std::abs((double)phi_lo) > opts.shoot_tol)
        throw ConvergenceError("shooting did not reach shoot_tol",
                               std::abs((double)phi_lo));

    IntegrationResult r = integrate(b, g0, g1, s, opts, true);
    if (r.z_final < opts.z_max)
        throw QualitativeError("converged shear escaped before z_max");

    ProfileSolution sol;
    sol.z_grid = std::move(r.z);
    sol.f = std::move(r.f);
    sol.fp = std::move(r.fp);
    sol.fpp = std::move(r.fpp);
    sol.beta = beta;
    sol.wall_shear = static_cast<double>(s);
    sol.f0 = f0;
    sol.f1 = f1;
    sol.far_field_tol = opts.far_field_tol;

    // Below this gap the double-precision tail is flat; clamp it monotone.
    const double flat_gap = 1e-13;
    const double below_one = std::nextafter(1.0, 0.0);
    for (std::size_t j = 1; j < sol.z_grid.size(); ++j) {
        if (1.0 - sol.fp[j] < flat_gap) {
            sol.fp[j] = std::clamp(sol.fp[j], sol.fp[j - 1], below_one);
            sol.fpp[j] = std::max(sol.fpp[j], 0.0);
        }
    }

    // qualitative shape invariants of the profile
    for (std::size_t j = 0; j + 1 < sol.z_grid.size(); ++j) {
        const bool resolved = 1.0 - sol.fp[j] > flat_gap;
        if (j > 0 && !(sol.fp[j] > 0.0 && sol.fp[j] < 1.0))
            throw QualitativeError("f' left (0,1) at interior node " +
                                   std::to_string(j));
        if (resolved && !(sol.fpp[j] > 0.0))
            throw QualitativeError("f'' lost positivity at node " +
                                   std::to_string(j));
        if (resolved ? !(sol.fp[j + 1] > sol.fp[j])
                     : !(sol.fp[j + 1] >= sol.fp[j]))
            throw QualitativeError("f' not increasing at node " +
                                   std::to_string(j));
    }
    if (sol.fp.back() < 1.0 - opts.far_field_tol)
        throw QualitativeError("f' did not reach the far field");
    sol.fp.back() = std::min(sol.fp.back(), 1.0);

    sol.fp_interp = MonotoneCubic(sol.z_grid, sol.fp);
    sol.fpp_interp = MonotoneCubic(sol.z_grid, sol.fpp);
    sol.f_interp = MonotoneCubic::hermite(sol.z_grid, sol.f, sol.fp);
    return sol;
}

AsymptoticFit asymptotic_fit(const ProfileSolution& sol, double window_lo,
                             double window_hi) {
    std::vector<double> zs, ys;
    for (std::size_t j = 0; j < sol.z_grid.size(); ++j) {
        const double gap = 1.0 - sol.fp[j];
        if (gap > window_lo && gap < window_hi && sol.z_grid[j] > 0.0) {
            zs.push_back(sol.z_grid[j]);
            ys.push_back(std::log(gap) +
                         (1.0 + 2.0 * sol.beta) * std::log(sol.z_grid[j]) +
                         0.5 * sol.z_grid[j] * sol.z_grid[j]);
        }
    }
    if (zs.size() < 20)
        throw ValidationError("asymptotic fit window holds only " +
                              std::to_string(zs.size()) + " nodes");
    // least squares for y = ln c1 - c2 z
    const double n = static_cast<double>(zs.size());
    double sz = 0, szz = 0, sy = 0, szy = 0;
    for (std::size_t i = 0; i < zs.size(); ++i) {
        sz += zs[i];
        szz += zs[i] * zs[i];
        sy += ys[i];
        szy += zs[i] * ys[i];
    }
    const double det = n * szz - sz * sz;
    const double ln_c1 = (szz * sy - sz * szy) / det;
    const double c2 = -(n * szy - sz * sy) / det;
    double ss = 0;
    for (std::size_t i = 0; i < zs.size(); ++i) {
        const double r = ys[i] - (ln_c1 - c2 * zs[i]);
        ss += r * r;
    }
    AsymptoticFit fit;
    fit.c1 = std::exp(ln_c1);
    fit.c2 = c2;
    fit.fit_window_lo = zs.front();
    fit.fit_window_hi = zs.back();
    fit.rms_residual = std::sqrt(ss / n);
    fit.n_points = zs.size();
    return fit;
}

ProfileValues eval_profile(const ProfileSolution& sol, double z) {
    if (z < 0.0) throw ValidationError("eval_profile: z must be >= 0");
    if (z >= sol.z_max())
        return {sol.f.back() + (z - sol.z_max()), 1.0, 0.0};
    return {sol.f_interp(z), sol.fp_interp(z), sol.fpp_interp(z)};
}

double normalization_residual(const ProfileSolution& sol,
                              const SimilarityProblem& problem) {
    const auto [beta, L] = normalize(problem);
    const double kappa = problem.kappa();
    double worst = 0.0;
    for (std::size_t j = 1; j + 1 < sol.z_grid.size(); ++j) {
        const double g = sol.f[j], gp = sol.fp[j], gpp = sol.fpp[j];
        const double gppp = -(g * gpp + beta * (1.0 - gp * gp));
        // f(z) = L g(z/L): f''' = g'''/L^2, f = L g, f'' = g''/L
        const double res = problem.nu * gppp / (L * L) +
                           kappa * problem.a * (L * g) * (gpp / L) +
                           problem.m * problem.a * (1.0 - gp * gp);
        worst = std::max(worst, std::abs(res));
    }
    return worst;
}

}  // namespace bl
