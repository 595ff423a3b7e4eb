#include "bl/crocco_profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bl/errors.hpp"
#include "bl/grid.hpp"

namespace bl {
namespace {

void check_eta_grid(const std::vector<double>& eta) {
    if (eta.size() < 8) throw ValidationError("eta_grid too small");
    if (eta.front() != 0.0 || eta.back() != 1.0)
        throw ValidationError("eta_grid must span [0, 1] exactly");
    for (std::size_t j = 1; j < eta.size(); ++j)
        if (!(eta[j] > eta[j - 1]))
            throw ValidationError("eta_grid must be strictly increasing");
}

// Cumulative integral of s / Y(s) from 0 to each node.  Every cell writes
// the integrand as s / (C (1-s) sigma) with the local amplitude C fitted
// from the nodal values and uses the closed form
// int ds / ((1-s) sigma) = 2 (sigma(s1) - sigma(s0)); this is midpoint-
// accurate where Y is smooth and exact in the tail, with no scheme switch
// that could kink the fixed point.  The final cell touching
// eta = 1 diverges and is never consumed (the equation multiplies it
// by 1 - eta = 0), so the array just repeats the last finite value there.
std::vector<double> cumulative_s_over_Y(const std::vector<double>& eta,
                                        const std::vector<double>& Y,
                                        double mu) {
    const std::size_t n = eta.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t j = 0; j + 1 < n; ++j) {
        if (j + 2 == n) {
            out[j + 1] = out[j];
            break;
        }
        const double s0 = sigma(eta[j], mu), s1 = sigma(eta[j + 1], mu);
        const double c0 = Y[j] / ((1.0 - eta[j]) * s0);
        const double c1 = Y[j + 1] / ((1.0 - eta[j + 1]) * s1);
        const double c_hat = 0.5 * (c0 + c1);
        out[j + 1] = out[j] + 0.5 * (eta[j] + eta[j + 1]) / c_hat * 2.0 *
                                 (s1 - s0);
    }
    return out;
}

// Right-hand side of the integral equation (times 1, i.e. equals nu * Y at
// the fixed point), evaluated at every node from the current iterate.
std::vector<double> integral_rhs(const std::vector<double>& eta,
                                 const std::vector<double>& Y, double m,
                                 double a, double kappa, double mu) {
    const std::size_t n = eta.size();
    const std::vector<double> i2 = cumulative_s_over_Y(eta, Y, mu);

    // I1(eta) = int_eta^1 (1-s)(m + m s + kappa s) a / Y ds, accumulated
    // from the top.  The integrand tends to 0 at s = 1 like
    // (2m + kappa) a / (C sigma); the last cell uses its midpoint value.
    std::vector<double> i1(n, 0.0);
    std::vector<double> w(n, 0.0);
    for (std::size_t j = 0; j + 1 < n; ++j)
        w[j] = (1.0 - eta[j]) * (m + m * eta[j] + kappa * eta[j]) * a / Y[j];
    {
        const std::size_t j = n - 2;
        const double t0 = 1.0 - eta[j];
        const double c_hat = Y[j] / (t0 * sigma(eta[j], mu));
        const double s_mid = sigma(1.0 - 0.5 * t0, mu);
        i1[j] = (2.0 * m + kappa) * a / c_hat * t0 / s_mid;
    }
    for (std::size_t j = n - 2; j-- > 0;)
        i1[j] = i1[j + 1] +
                0.5 * (w[j] + w[j + 1]) * (eta[j + 1] - eta[j]);

    std::vector<double> rhs(n, 0.0);
    for (std::size_t j = 0; j + 1 < n; ++j)
        rhs[j] = i1[j] + (1.0 - eta[j]) * kappa * a * i2[j];
    return rhs;
}

}  // namespace

double default_envelope_mu() { return 0.9 * std::exp(-0.5); }

double sigma(double eta, double mu) {
    if (!(mu > 0.0 && mu < 1.0))
        throw ValidationError("sigma: mu must be in (0, 1)");
    if (!(eta >= 0.0 && eta < 1.0))
        throw ValidationError("sigma: eta must be in [0, 1)");
    return std::sqrt(-std::log(mu * (1.0 - eta)));
}

CroccoProfile from_similarity(const ProfileSolution& sol,
                              const SimilarityProblem& problem,
                              const std::vector<double>& eta_grid) {
    check_eta_grid(eta_grid);
    problem.validate();
    const auto [beta, L] = normalize(problem);
    const std::size_t n = eta_grid.size();

    // Hermite interpolants with ODE-exact nodal derivatives: f' carries f''
    // and f'' carries f''' = -(f f'' + beta(1 - f'^2)).
    std::vector<double> fppp(sol.z_grid.size());
    for (std::size_t j = 0; j < sol.z_grid.size(); ++j)
        fppp[j] = -(sol.f[j] * sol.fpp[j] +
                    beta * (1.0 - sol.fp[j] * sol.fp[j]));
    const MonotoneCubic fp_h =
        MonotoneCubic::hermite(sol.z_grid, sol.fp, sol.fpp);
    const MonotoneCubic fpp_h =
        MonotoneCubic::hermite(sol.z_grid, sol.fpp, fppp);

    CroccoProfile out;
    out.eta_grid = eta_grid;
    out.Y.assign(n, 0.0);
    out.Yp.assign(n, 0.0);
    out.source = CroccoSource::similarity;
    out.m = problem.m;
    out.a = problem.a;
    out.nu = problem.nu;
    out.kappa = problem.kappa();
    out.mu = default_envelope_mu();

    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double eta = eta_grid[j];
        if (eta < sol.f1)
            throw ValidationError("eta below the wall slip f1");
        if (1.0 - eta <= 1e-2 * sol.far_field_tol)
            throw ValidationError(
                "eta node " + std::to_string(j) +
                " beyond the attained f' range of the profile");
        const double z = (j == 0 && sol.f1 == 0.0) ? 0.0 : fp_h.invert(eta);
        const double g2 = fpp_h(z);
        const double g3 = -(sol.f_interp(z) * g2 + beta * (1.0 - eta * eta));
        out.Y[j] = g2 / L;
        out.Yp[j] = g3 / (L * g2);
    }
    out.Y[n - 1] = 0.0;
    out.Yp[n - 1] = -out.Y[n - 2] / (1.0 - eta_grid[n - 2]);
    return out;
}

CroccoProfile solve_integral_equation(double m, double a, double nu,
                                      double kappa,
                                      const std::vector<double>& eta_grid,
                                      const IntegralOptions& opts) {
    check_eta_grid(eta_grid);
    if (!(m > 0.0 && a > 0.0 && nu > 0.0))
        throw ValidationError("m, a, nu must be > 0");
    if (!(kappa > 0.0)) throw ValidationError("kappa must be > 0");
    const double mu = opts.mu > 0.0 ? opts.mu : default_envelope_mu();
    const std::size_t n = eta_grid.size();

    CroccoProfile out;
    out.eta_grid = eta_grid;
    out.source = CroccoSource::integral_equation;
    out.m = m;
    out.a = a;
    out.nu = nu;
    out.kappa = kappa;
    out.mu = mu;

    // initial iterate matching the wall Robin balance and the tail shape
    std::vector<double> Y(n, 0.0);
    const double y_guess = std::sqrt(2.0 * m * a * nu);
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double t = 1.0 - eta_grid[j];
        Y[j] = y_guess * t * std::sqrt(-std::log(0.5 * t));
    }

    double last_defect = 0.0;
    bool clamped_last = false;
    bool converged = false;
    for (int it = 0; it < opts.max_iter; ++it) {
        const std::vector<double> rhs =
            integral_rhs(eta_grid, Y, m, a, kappa, mu);
        double step_norm = 0.0;
        last_defect = 0.0;
        clamped_last = false;
        for (std::size_t j = 0; j + 1 < n; ++j) {
            const double g = rhs[j] / nu;
            last_defect = std::max(last_defect, std::abs(nu * Y[j] - rhs[j]));
            const double step = opts.damping * (g - Y[j]);
            step_norm = std::max(step_norm, std::abs(step));
            Y[j] += step;
            const double floor = 1e-12 * (1.0 - eta_grid[j]);
            if (Y[j] < floor) {
                Y[j] = floor;
                clamped_last = true;
            }
        }
        if (step_norm <= opts.fp_tol) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw ConvergenceError("integral-equation fixed point stalled",
                               last_defect);
    if (clamped_last)
        throw QualitativeError(
            "integral-equation iterate lost positivity persistently");

    out.Y = std::move(Y);
    out.Yp = derivative_from_integral(out);
    return out;
}

std::vector<double> derivative_from_integral(const CroccoProfile& profile) {
    const auto& eta = profile.eta_grid;
    const auto& Y = profile.Y;
    const std::size_t n = eta.size();
    for (std::size_t j = 0; j + 1 < n; ++j)
        if (!(Y[j] > 0.0))
            throw ValidationError("Y must be positive below eta = 1");
    const std::vector<double> i2 = cumulative_s_over_Y(eta, Y, profile.mu);
    std::vector<double> yp(n, 0.0);
    for (std::size_t j = 0; j + 1 < n; ++j)
        yp[j] = (-profile.m * profile.a * (1.0 - eta[j] * eta[j]) / Y[j] -
                 profile.kappa * profile.a * i2[j]) /
                profile.nu;
    yp[n - 1] = -Y[n - 2] / (1.0 - eta[n - 2]);
    return yp;
}

double integral_equation_residual(const CroccoProfile& profile) {
    const std::vector<double> rhs =
        integral_rhs(profile.eta_grid, profile.Y, profile.m, profile.a,
                     profile.kappa, profile.mu);
    double worst = 0.0;
    for (std::size_t j = 0; j + 1 < profile.eta_grid.size(); ++j)
        worst = std::max(worst, std::abs(profile.nu * profile.Y[j] - rhs[j]));
    return worst;
}

double begin_residual(const CroccoProfile& profile, double eps_w) {
    const auto& eta = profile.eta_grid;
    const auto& Y = profile.Y;
    const double gamma = 2.0 * profile.m - profile.kappa;
    const std::size_t n = eta.size();
    const std::size_t j_max = static_cast<std::size_t>(0.95 * (n - 1));
    double worst = 0.0;
    for (std::size_t j = 1; j < j_max; ++j) {
        const auto s = d2_central(eta[j] - eta[j - 1], eta[j + 1] - eta[j]);
        const double yee = s.m * Y[j - 1] + s.c * Y[j] + s.p * Y[j + 1];
        const double res =
            profile.nu * Y[j] * Y[j] * yee +
            (eta[j] * eta[j] - 1.0) * profile.m * profile.a * profile.Yp[j] -
            eta[j] * gamma * profile.a * Y[j];
        worst = std::max(worst, std::abs(res) / (Y[j] + eps_w));
    }
    return worst;
}

SigmaEnvelope envelope_fit(const CroccoProfile& profile, double mu) {
    if (mu == 0.0) mu = profile.mu > 0.0 ? profile.mu : default_envelope_mu();
    if (!(mu > 0.0 && mu < 1.0))
        throw ValidationError("envelope_fit: mu must be in (0, 1)");
    const auto& eta = profile.eta_grid;
    const auto& Y = profile.Y;
    const std::size_t n = eta.size();

    SigmaEnvelope env;
    env.mu = mu;
    env.M5 = env.M8 = std::numeric_limits<double>::infinity();
    env.M10 = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j + 1 < n; ++j) {
        const double s = sigma(eta[j], mu);
        const double amp = Y[j] / ((1.0 - eta[j]) * s);
        if (!(amp > 0.0))
            throw QualitativeError("envelope amplitude not positive at node " +
                                   std::to_string(j));
        env.M5 = std::min(env.M5, amp);
        env.M6 = std::max(env.M6, amp);
        const double slope = -profile.Yp[j] / s;
        if (!(slope > 0.0))
            throw QualitativeError("Y_eta not negative at node " +
                                   std::to_string(j));
        env.M8 = std::min(env.M8, slope);
        env.M7 = std::max(env.M7, slope);
        if (j + 2 < n) {
            const auto st =
                d2_central(eta[j] - eta[j - 1], eta[j + 1] - eta[j]);
            const double yee =
                st.m * Y[j - 1] + st.c * Y[j] + st.p * Y[j + 1];
            const double q = -Y[j] * yee;
            if (!(q > 0.0))
                throw QualitativeError("Y Y_ee not negative at node " +
                                       std::to_string(j));
            env.M10 = std::min(env.M10, q);
            env.M9 = std::max(env.M9, q);
        }
    }
    env.K = 1.0;
    // sigma(eta0) = 1 exactly when mu > e^{-1}; otherwise sigma > 1 throughout
    env.eta0 = std::max(0.0, 1.0 - std::exp(-1.0) / mu);
    return env;
}

}  // namespace bl
