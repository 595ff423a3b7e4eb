#include "bl/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bl/errors.hpp"

namespace bl {

std::vector<double> graded_eta_grid(std::size_t n_cells, double p) {
    if (n_cells < 2) throw ValidationError("eta grid needs at least 2 cells");
    if (p < 1.0) throw ValidationError("grading exponent p must be >= 1");
    std::vector<double> eta(n_cells + 1);
    for (std::size_t j = 0; j <= n_cells; ++j) {
        const double t = static_cast<double>(j) / static_cast<double>(n_cells);
        eta[j] = 1.0 - std::pow(1.0 - t, p);
    }
    eta.front() = 0.0;
    eta.back() = 1.0;
    return eta;
}

Stencil3 d1_central(double hl, double hr) {
    return {-hr / (hl * (hl + hr)), (hr - hl) / (hl * hr),
            hl / (hr * (hl + hr))};
}

Stencil3 d2_central(double hl, double hr) {
    return {2.0 / (hl * (hl + hr)), -2.0 / (hl * hr),
            2.0 / (hr * (hl + hr))};
}

Stencil3 d1_left(double h1, double h2) {
    return {-(2.0 * h1 + h2) / (h1 * (h1 + h2)), (h1 + h2) / (h1 * h2),
            -h1 / (h2 * (h1 + h2))};
}

std::vector<double> solve_almost_tridiagonal(std::vector<double> lower,
                                             std::vector<double> diag,
                                             std::vector<double> upper,
                                             double row0_extra,
                                             std::vector<double> rhs) {
    const std::size_t n = diag.size();
    if (n < 3) throw ValidationError("system too small");
    // Banded elimination with partial pivoting.  Pivoting a tridiagonal
    // matrix fills a second superdiagonal, which also holds the extra
    // (0, 2) entry of the wall row.
    std::vector<double> upper2(n, 0.0);
    upper2[0] = row0_extra;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (std::abs(lower[k + 1]) > std::abs(diag[k])) {
            std::swap(diag[k], lower[k + 1]);
            std::swap(upper[k], diag[k + 1]);
            std::swap(upper2[k], upper[k + 1]);
            std::swap(rhs[k], rhs[k + 1]);
        }
        if (diag[k] == 0.0)
            throw ValidationError("singular tridiagonal system");
        const double w = lower[k + 1] / diag[k];
        diag[k + 1] -= w * upper[k];
        upper[k + 1] -= w * upper2[k];
        rhs[k + 1] -= w * rhs[k];
    }
    if (diag[n - 1] == 0.0)
        throw ValidationError("singular tridiagonal system");
    std::vector<double> x(n);
    x[n - 1] = rhs[n - 1] / diag[n - 1];
    x[n - 2] = (rhs[n - 2] - upper[n - 2] * x[n - 1]) / diag[n - 2];
    for (std::size_t i = n - 2; i-- > 0;)
        x[i] = (rhs[i] - upper[i] * x[i + 1] - upper2[i] * x[i + 2]) /
               diag[i];
    return x;
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n)
        throw ValidationError("MonotoneCubic needs matching arrays, n >= 2");
    d_.assign(n, 0.0);
    std::vector<double> delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
        delta[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
    d_[0] = delta[0];
    d_[n - 1] = delta[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (delta[i - 1] * delta[i] <= 0.0) {
            d_[i] = 0.0;
        } else {
            const double hl = x_[i] - x_[i - 1];
            const double hr = x_[i + 1] - x_[i];
            const double w1 = 2.0 * hr + hl;
            const double w2 = hr + 2.0 * hl;
            d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    // Fritsch-Carlson endpoint limiting
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (delta[i] == 0.0) {
            d_[i] = d_[i + 1] = 0.0;
        } else {
            const double a = d_[i] / delta[i];
            const double b = d_[i + 1] / delta[i];
            const double s = std::hypot(a, b);
            if (s > 3.0) {
                d_[i] = 3.0 * delta[i] * a / s;
                d_[i + 1] = 3.0 * delta[i] * b / s;
            }
        }
    }
}

MonotoneCubic MonotoneCubic::hermite(std::vector<double> x,
                                     std::vector<double> y,
                                     std::vector<double> d) {
    if (x.size() != y.size() || x.size() != d.size() || x.size() < 2)
        throw ValidationError("hermite needs matching arrays, n >= 2");
    MonotoneCubic c;
    c.x_ = std::move(x);
    c.y_ = std::move(y);
    c.d_ = std::move(d);
    return c;
}

std::size_t MonotoneCubic::locate(double xq) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), xq);
    std::size_t i = (it == x_.begin()) ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    if (i + 1 >= x_.size()) i = x_.size() - 2;
    return i;
}

double MonotoneCubic::operator()(double xq) const {
    const std::size_t i = locate(xq);
    const double h = x_[i + 1] - x_[i];
    const double t = (xq - x_[i]) / h;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
    const double h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t);
    const double h11 = t * t * (t - 1);
    return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
}

double MonotoneCubic::derivative(double xq) const {
    const std::size_t i = locate(xq);
    const double h = x_[i + 1] - x_[i];
    const double t = (xq - x_[i]) / h;
    const double g00 = 6 * t * t - 6 * t;
    const double g10 = 3 * t * t - 4 * t + 1;
    const double g01 = -g00;
    const double g11 = 3 * t * t - 2 * t;
    return (g00 * y_[i] + g01 * y_[i + 1]) / h + g10 * d_[i] + g11 * d_[i + 1];
}

double MonotoneCubic::invert(double yq) const {
    if (yq <= y_.front()) return x_.front();
    if (yq >= y_.back()) return x_.back();
    auto it = std::upper_bound(y_.begin(), y_.end(), yq);
    std::size_t i = static_cast<std::size_t>(it - y_.begin()) - 1;
    double lo = x_[i], hi = x_[i + 1];
    for (int iter = 0; iter < 200 && hi - lo > 1e-15 * (1.0 + std::abs(hi)); ++iter) {
        const double mid = 0.5 * (lo + hi);
        if ((*this)(mid) < yq)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> cumulative_trapezoid(std::span<const double> x,
                                         std::span<const double> f) {
    std::vector<double> out(x.size(), 0.0);
    for (std::size_t j = 1; j < x.size(); ++j)
        out[j] = out[j - 1] + 0.5 * (f[j - 1] + f[j]) * (x[j] - x[j - 1]);
    return out;
}

}  // namespace bl
