#pragma once
#include <cstddef>
#include <span>
#include <vector>

namespace bl {

// eta_j = 1 - (1 - j/N)^p, j = 0..N.  Nodes cluster toward eta = 1 where the
// Crocco equation degenerates.  eta_0 = 0 and eta_N = 1 exactly.
std::vector<double> graded_eta_grid(std::size_t n_cells, double p);

// Three-point finite-difference weights on a nonuniform grid.
struct Stencil3 {
    double m, c, p;  // weights for u_{j-1}, u_j, u_{j+1}
};

// Central first/second derivative at an interior node with left spacing hl
// and right spacing hr.
Stencil3 d1_central(double hl, double hr);
Stencil3 d2_central(double hl, double hr);

// One-sided second-order first derivative at the left end; weights apply to
// u_0, u_1, u_2 with spacings h1 = x1-x0, h2 = x2-x1.
Stencil3 d1_left(double h1, double h2);

// Solves a tridiagonal system with an optional extra entry in the first row
// (row 0 may couple x0, x1, x2, as a one-sided boundary stencil does), by
// banded elimination with partial pivoting.  lower[i] multiplies x_{i-1} in
// row i, upper[i] multiplies x_{i+1}.
std::vector<double> solve_almost_tridiagonal(std::vector<double> lower,
                                             std::vector<double> diag,
                                             std::vector<double> upper,
                                             double row0_extra,
                                             std::vector<double> rhs);

// Monotone (Fritsch-Carlson) piecewise-cubic interpolant.  Preserves the
// monotonicity of the data, which keeps eta = f'(z) a valid coordinate.
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> x, std::vector<double> y);

    // Hermite variant with prescribed nodal derivatives (no limiting).
    static MonotoneCubic hermite(std::vector<double> x, std::vector<double> y,
                                 std::vector<double> d);

    double operator()(double xq) const;
    double derivative(double xq) const;

    // Solves (*this)(x) = yq by bisection; data must be monotone increasing.
    double invert(double yq) const;

    const std::vector<double>& abscissae() const { return x_; }

private:
    std::size_t locate(double xq) const;
    std::vector<double> x_, y_, d_;
};

// Cumulative trapezoid of sampled values: out[0] = 0,
// out[j] = out[j-1] + 0.5*(f[j-1]+f[j])*(x[j]-x[j-1]).
std::vector<double> cumulative_trapezoid(std::span<const double> x,
                                         std::span<const double> f);

}  // namespace bl
