#pragma once
#include <vector>

#include "bl/grid.hpp"

namespace bl {

enum class Variant { planar, axisymmetric };

// Self-similar problem in the un-normalized variables:
//   nu f''' + kappa a f f'' + m a (1 - f'^2) = 0,
// kappa = (m+1)/2 for the wedge and (m+3)/2 for the cone.
struct SimilarityProblem {
    Variant variant = Variant::planar;
    double m = 1.0;
    double a = 1.0;
    double nu = 1.0;
    double f0 = 0.0;  // wall stream-function value (suction/blowing)
    double f1 = 0.0;  // wall tangential slip, 0 <= f1 < 1

    void validate() const;
    double kappa() const;  // coefficient on f f''
};

struct Normalization {
    double beta;     // Falkner-Skan parameter
    double scale_L;  // z = scale_L * s links the two variables
};

// Normalized Falkner-Skan profile f''' + f f'' + beta(1 - f'^2) = 0 sampled
// on its integration grid.
struct ProfileSolution {
    std::vector<double> z_grid;
    std::vector<double> f, fp, fpp;
    double beta = 0.0;
    double scale_L = 1.0;
    double wall_shear = 0.0;  // f''(0), normalized variables
    double f0 = 0.0, f1 = 0.0;
    double far_field_tol = 1e-8;

    // interpolants over z_grid, built once at construction
    MonotoneCubic f_interp, fp_interp, fpp_interp;

    double z_max() const { return z_grid.back(); }
};

struct AsymptoticFit {
    double c1 = 0.0;
    double c2 = 0.0;
    double fit_window_lo = 0.0, fit_window_hi = 0.0;  // in z
    double rms_residual = 0.0;
    std::size_t n_points = 0;
};

struct ShootingOptions {
    double z_max = 12.0;
    double shoot_tol = 1e-8;      // on |f'(z_max) - 1|
    double ode_tol = 1e-12;       // adaptive step error control
    double far_field_tol = 1e-8;
    double max_store_step = 0.05;
    double bracket_lo = 0.05, bracket_hi = 3.0;
    int bracket_expansions = 5;
};

// phi = pi * 2m/(m+1)
double wedge_angle(double m);

Normalization normalize(const SimilarityProblem& problem);

ProfileSolution solve_falkner_skan(double beta, double f0, double f1,
                                   const ShootingOptions& opts = {});

// Fits ln(1-f') = ln c1 - (1+2beta) ln z - z^2/2 - c2 z over the nodes with
// window_lo < 1 - f' < window_hi.
AsymptoticFit asymptotic_fit(const ProfileSolution& sol,
                             double window_lo = 1e-12,
                             double window_hi = 0.1);

struct ProfileValues {
    double f, fp, fpp;
};

// Interpolation inside the grid, linear-in-f continuation past z_max.
ProfileValues eval_profile(const ProfileSolution& sol, double z);

// Sup-norm residual of the un-normalized ODE under the rescaling
// f(z) = L g(z/L); f''' is taken from the normalized equation so the check
// isolates the (beta, scale_L) reduction.
double normalization_residual(const ProfileSolution& sol,
                              const SimilarityProblem& problem);

}  // namespace bl
