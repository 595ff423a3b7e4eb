#pragma once
#include <vector>

#include "bl/similarity.hpp"

namespace bl {

enum class CroccoSource { similarity, integral_equation };

// Initial Crocco-plane slice Y(eta) = omega(0, eta): the shear profile as a
// function of the velocity ratio eta = u/U.  Satisfies
//   nu Y^2 Y_ee + (eta^2 - 1) m a Y_e - eta gamma a Y = 0,  gamma = 2m - kappa,
// with Y(1) = 0 and the wall Robin condition nu Y Y_e + m a = 0 at eta = 0.
struct CroccoProfile {
    std::vector<double> eta_grid;  // graded toward 1, last node exactly 1
    std::vector<double> Y;
    std::vector<double> Yp;  // Y_eta; one-sided slope at the eta = 1 node
    CroccoSource source = CroccoSource::similarity;
    double m = 1.0, a = 1.0, nu = 1.0;
    double kappa = 1.0;  // (m+1)/2 planar, (m+3)/2 axisymmetric
    double mu = 0.0;     // sigma parameter used for tail quadrature
};

// Tail-envelope constants of the form
//   M5 (1-eta) sigma <= Y <= M6 (1-eta) sigma,
//   -M7 sigma <= Y_eta <= -M8 sigma,  -M9 <= Y Y_ee <= -M10.
struct SigmaEnvelope {
    double mu = 0.0;
    double M5 = 0.0, M6 = 0.0;
    double M7 = 0.0, M8 = 0.0;
    double M9 = 0.0, M10 = 0.0;
    double K = 0.0, eta0 = 0.0;  // sigma > K for eta > eta0
};

struct IntegralOptions {
    double fp_tol = 1e-10;  // sup-norm damped-update stopping tolerance
    int max_iter = 500;
    double damping = 0.5;
    double mu = 0.0;  // 0 -> default 0.9 e^{-1/2}
};

double default_envelope_mu();

// sigma(eta) = sqrt(-ln(mu (1 - eta)))
double sigma(double eta, double mu);

// Push the similarity profile through eta = f'(z): Y = f''(z)/L in the
// un-normalized variables, Y_eta by the chain rule through the ODE.
CroccoProfile from_similarity(const ProfileSolution& sol,
                              const SimilarityProblem& problem,
                              const std::vector<double>& eta_grid);

// Damped fixed-point iteration on
//   nu Y(eta) = int_eta^1 (1-s)(m + m s + kappa s) a / Y ds
//             + (1-eta) kappa a int_0^eta s / Y ds.
CroccoProfile solve_integral_equation(double m, double a, double nu,
                                      double kappa,
                                      const std::vector<double>& eta_grid,
                                      const IntegralOptions& opts = {});

// Closed form nu Y_eta = -m a (1-eta^2)/Y - kappa a int_0^eta s/Y ds.
std::vector<double> derivative_from_integral(const CroccoProfile& profile);

// Sup-norm defect of the integral equation at the profile's own nodes.
double integral_equation_residual(const CroccoProfile& profile);

// Weighted sup-norm residual |R|/(Y + eps_w) of the slice ODE at interior
// nodes, excluding the last 5% nearest eta = 1 where the finite-difference
// curvature is unreliable.
double begin_residual(const CroccoProfile& profile, double eps_w = 1e-6);

SigmaEnvelope envelope_fit(const CroccoProfile& profile, double mu = 0.0);

}  // namespace bl
