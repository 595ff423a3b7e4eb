#include "bl/scenario.hpp"

#include <cmath>

#include "bl/errors.hpp"

namespace bl {
namespace {

// p(x) = x * (c0 + c1 x + ...)
double poly_x(const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
    return x * acc;
}

// d/dx [x * (c0 + c1 x + ...)] = c0 + 2 c1 x + 3 c2 x^2 + ...
double poly_x_deriv(const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (std::size_t i = c.size(); i-- > 0;)
        acc = acc * x + static_cast<double>(i + 1) * c[i];
    return acc;
}

// sum |c_i| X^{i+1}: bound for |x (c0 + c1 x + ...)| on [0, X]
double abs_bound(const std::vector<double>& c, double X) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it)
        acc = acc * X + std::abs(*it);
    return X * acc;
}

}  // namespace

void Scenario::validate() const {
    if (!(m > 0.0)) throw ValidationError("m must be > 0");
    if (!(a > 0.0)) throw ValidationError("a must be > 0");
    if (!(nu > 0.0)) throw ValidationError("nu must be > 0");
    if (!(X > 0.0)) throw ValidationError("X must be > 0");
    if (!(h > 0.0 && h <= X)) throw ValidationError("h must be in (0, X]");
    if (N < 16) throw ValidationError("N must be >= 16");
    if (!(grading_p >= 1.0)) throw ValidationError("grading p must be >= 1");
    if (b > 0.0) throw ValidationError("b must be <= 0 (suction only)");
    if (b < 0.0 && m < 1.0)
        throw ValidationError("b < 0 requires m >= 1");
    if (!(newton_tol > 0.0)) throw ValidationError("newton_tol must be > 0");
    if (!(fp_tol > 0.0)) throw ValidationError("fp_tol must be > 0");
    // V must stay positive (favorable gradient) over the extent
    if (abs_bound(a1_coeffs, X) >= a)
        throw ValidationError("a1 perturbation overwhelms a on [0, X]");
    if (variant == Variant::axisymmetric) {
        if (!(r1_c > 0.0 && r1_c <= 1.0))
            throw ValidationError("r1 constant c must be in (0, 1]");
        if (abs_bound(r1_coeffs, X) >= r1_c)
            throw ValidationError("r1 not positive on [0, X]");
    }
}

double Scenario::V(double xi) const { return a + poly_x(a1_coeffs, xi); }

double Scenario::V_xi(double xi) const {
    return poly_x_deriv(a1_coeffs, xi);
}

double Scenario::wall_v1(double xi) const {
    return b + poly_x(v1_coeffs, xi);
}

double Scenario::r1(double xi) const { return r1_c + poly_x(r1_coeffs, xi); }

double Scenario::r1_xi(double xi) const {
    return poly_x_deriv(r1_coeffs, xi);
}

double Scenario::kappa() const {
    return variant == Variant::planar ? (m + 1.0) / 2.0 : (m + 3.0) / 2.0;
}

double Scenario::N1() const { return abs_bound(a1_coeffs, X) / X; }

double Scenario::N3() const { return abs_bound(v1_coeffs, X) / X; }

SimilarityProblem Scenario::similarity_problem() const {
    SimilarityProblem p;
    p.variant = variant;
    p.m = m;
    p.a = a;
    p.nu = nu;
    // v(x,0) = -kappa a x^{(m-1)/2} f(0) for the self-similar flow, so the
    // suction constant maps to the wall stream-function value
    p.f0 = -b / (kappa() * a);
    p.f1 = 0.0;
    return p;
}

}  // namespace bl
