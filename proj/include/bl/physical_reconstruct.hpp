#pragma once
#include <cstddef>
#include <vector>

#include "bl/line_method.hpp"
#include "bl/scenario.hpp"

namespace bl {

// y(eta) map at a station x,
//   y_j = int_0^{eta_j} ds / (x^{(m-1)/2} w(x, s)).
// Nodes run over the field's eta grid up to the last interior node; y
// diverges (square-root-of-log in 1 - eta) at eta = 1 and is not emitted
// there.
struct EtaMap {
    std::vector<double> eta;  // field eta nodes 0 .. n-2
    std::vector<double> y;    // strictly increasing, y[0] = 0
};

EtaMap y_of_eta(const CroccoField& field, double x);

// Cell classification for the tensor grid.
enum class CellFlag : char {
    ok = 0,
    top = 1,          // eta > 0.999: inverse-map tail, kept out of residuals
    extrapolated = 2  // above the last mapped node, Gaussian tail fit
};

struct PhysicalField {
    std::vector<double> x_nodes;
    std::vector<double> y_nodes;
    std::vector<double> U_of_x;
    // [ix][iy]; the derived arrays use the Crocco-frame chain rules
    std::vector<std::vector<double>> u, v, u_y, u_x, u_yy;
    std::vector<std::vector<CellFlag>> flag;
    double m = 1.0;
    double nu = 1.0;
    Variant variant = Variant::planar;
};

// u on a tensor grid: u = U(x) eta(y) by monotone interpolation of the
// inverse map; above the last mapped node the fitted Gaussian tail
// 1 - u/U = exp(c0 + c1 x^{m-1} y^2) extrapolates.
std::vector<std::vector<double>> velocity_u(
    const CroccoField& field, const Scenario& scenario,
    const std::vector<double>& x_nodes, const std::vector<double>& y_nodes);

// Full reconstruction: u, the chain-rule derivatives and
// v = (-u u_x + nu u_yy + U U_x) / u_y on the tensor grid.  u_x comes from
// the Crocco-frame integral formula, not from xi-differencing of u.
PhysicalField reconstruct(const CroccoField& field, const Scenario& scenario,
                          const std::vector<double>& x_nodes,
                          const std::vector<double>& y_nodes);

// Default grids: x = the field's positive xi nodes; y_j = j Delta with
// Delta = max_x y(eta = 0.99) / 64 and nodes up to twice that thickness.
PhysicalField reconstruct(const CroccoField& field, const Scenario& scenario);

struct ResidualReport {
    double max_residual = 0.0;
    // interior tensor cells only; untouched cells hold 0
    std::vector<std::vector<double>> residual;
};

// Centered-difference divergence u_x + v_y (planar) or (ru)_x + (rv)_y
// (axisymmetric), normalized by U(x)/x.  Only cells whose full stencil is
// unmasked contribute; stations with x < 5 (station spacing) are excluded
// because u ~ x^m makes the centered x-quotient itself inaccurate near the
// tip for m != 1, independent of the solver.
ResidualReport continuity_residual(const PhysicalField& physical,
                                   const Scenario& scenario);

// Centered-difference residual of u u_x + v u_y - U U_x - nu u_yy,
// normalized by U^2/x.
ResidualReport momentum_residual(const PhysicalField& physical,
                                 const Scenario& scenario);

struct DecayFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t samples = 0;
};

struct DecayReport {
    std::vector<DecayFit> per_x;  // ln(1 - u/U) against x^{m-1} y^2
    double M2 = 0.0;              // largest fitted decay rate (-slope)
    double M4 = 0.0;              // smallest fitted decay rate
    bool window_ok = true;        // every x had >= 10 tail samples
};

// Per-x regression of ln(1 - u/U) on x^{m-1} y^2 over the tail window
// 1e-8 < 1 - u/U < 0.1 (extrapolated cells excluded).
DecayReport decay_check(const PhysicalField& physical,
                        const Scenario& scenario);

}  // namespace bl
