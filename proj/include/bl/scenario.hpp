#pragma once
#include <cstddef>
#include <vector>

#include "bl/similarity.hpp"

namespace bl {

// Physical problem definition.  The outer flow is U(x) = x^m V(x) with
// V = a + a1(x); the wall transpiration is v0(x) = x^{(m-1)/2} v1(x); the
// axisymmetric body radius is r(x) = x r1(x).  Perturbations are polynomials
// with an x-factored leading term so the assumption bounds are checkable
// from the coefficients alone:
//   a1(x) = x (p0 + p1 x + ...),  v1(x) = b + x (q0 + ...),
//   r1(x) = c + x (s0 + ...).
struct Scenario {
    Variant variant = Variant::planar;
    double m = 1.0;
    double a = 1.0;
    double nu = 1.0;
    std::vector<double> a1_coeffs;
    double b = 0.0;  // suction constant, b <= 0; must be 0 for 0 < m < 1
    std::vector<double> v1_coeffs;
    double r1_c = 1.0;  // axisymmetric only, 0 < c <= 1
    std::vector<double> r1_coeffs;
    double X = 0.5;
    double h = 0.01;
    std::size_t N = 512;      // eta cells
    double grading_p = 2.0;
    double newton_tol = 1e-9;
    double fp_tol = 1e-10;
    double mu_star = 0.0;            // 0 -> 2 sup B default
    bool planar_C_override = false;  // axisymmetric sensitivity knob

    void validate() const;

    double V(double xi) const;       // a + a1(xi)
    double V_xi(double xi) const;
    double wall_v1(double xi) const;
    double r1(double xi) const;
    double r1_xi(double xi) const;

    double kappa() const;  // (m+1)/2 planar, (m+3)/2 axisymmetric
    // Lipschitz bounds: |a1| <= N1 x, |v1 - b| <= N3 x on [0, X]
    double N1() const;
    double N3() const;

    SimilarityProblem similarity_problem() const;
};

}  // namespace bl
