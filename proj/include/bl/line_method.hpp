#pragma once
#include <cstddef>
#include <string>
#include <vector>

#include "bl/crocco_profile.hpp"
#include "bl/scenario.hpp"

namespace bl {

// Coefficients of the Crocco-plane equation
//   nu w^2 w_ee - eta A w_xi + (eta^2 - 1) B w_e - eta C w = 0
// at a fixed station xi, plus the wall transpiration coefficient.
struct Coefficients {
    double A = 0.0;
    double B = 0.0;
    double C = 0.0;
    double v1 = 0.0;
};

Coefficients coefficients(const Scenario& scenario, double xi);

struct LineOptions {
    double newton_tol = 1e-9;  // weighted residual sup norm
    int max_newton = 60;
    int max_halvings = 8;
    double eps0_scale = 1e-2;  // eps_0 = scale * (max omega_prev)^2
    double eps_factor = 4.0;
    double eps_min = 1e-10;
    double mu_star = 0.0;  // 0 -> 2 sup_xi B over the march extent
};

// Optional manufactured-solution source: g is added to the interior
// residual rows, wall to the Robin row.
struct SliceSource {
    std::vector<double> g;
    double wall = 0.0;
};

struct SliceDiag {
    int newton_iters = 0;
    double final_residual = 0.0;
    std::vector<double> eps_path;
    std::vector<double> stage_deltas;  // sup change between eps stages
    double min_omega = 0.0;
    double K1 = 0.0, K2 = 0.0;  // shape bounds K1(1-eta) <= w <= K2(1-eta)s
};

// Residual of the regularized slice system at every node:
// row 0 is the wall Robin residual, the last row the Dirichlet defect.
std::vector<double> assemble_slice_residual(
    const std::vector<double>& eta, const std::vector<double>& omega,
    const std::vector<double>& omega_prev, const Coefficients& c, double nu,
    double h, double eps, double mu_k, const SliceSource* src = nullptr);

// Damped-Newton solve of one slice with eps-continuation down to eps = 0.
std::vector<double> solve_slice(const std::vector<double>& eta,
                                std::vector<double> warm_start,
                                const std::vector<double>& omega_prev,
                                const Coefficients& c, double nu, double h,
                                double mu_k, const LineOptions& opts,
                                SliceDiag* diag = nullptr,
                                const SliceSource* src = nullptr);

struct CroccoField {
    std::vector<double> xi_nodes;  // k h, k = 0..K
    std::vector<double> eta_grid;
    std::vector<std::vector<double>> omega;  // one slice per xi node
    std::vector<SliceDiag> slice_diag;
    std::vector<double> mu_schedule;
    double attained_X = 0.0;
    bool truncated = false;
    std::string failure_reason;
    double m = 1.0, a = 1.0, nu = 1.0;
};

// Marches xi = 0..X in steps h.  Slice 0 is the crocco_profile initial
// profile polished by the slice Newton (at xi = 0 the difference-quotient
// term vanishes, so the slice system reduces to the initial-profile ODE
// itself).  A failing
// slice truncates the field and records the attained extent.
CroccoField march(const Scenario& scenario, double X, double h,
                  const LineOptions& opts = {});

struct SandwichReport {
    double M11 = 0.0, M12 = 0.0, M13 = 0.0;
    bool sigma_band = false;      // true for 0 < m < 1/3
    double M14 = 0.0, M15 = 0.0;  // w_e / Y_e band (m >= 1/3)
    double M16 = 0.0, M17 = 0.0;  // -w_e / sigma band (m < 1/3)
    double M18 = 0.0, M19 = 0.0;  // -w w_ee band
    std::vector<std::size_t> violations;  // slice indices with wrong signs
};

// Fits the smallest constants of the sandwich estimates
//   Y(1 - M11 k h) <= w^k <= Y(1 + M12 k h),  |w^k - w^{k-1}|/h <= M13 Y,
// plus the derivative and curvature bands, against the reference profile Y
// on the field's grid.
SandwichReport sandwich_check(const CroccoField& field,
                              const std::vector<double>& Y,
                              double mu = 0.0);

}  // namespace bl
