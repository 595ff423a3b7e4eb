#pragma once
// Independent fine-grid shooting oracle: fixed-step classical RK4 and plain
// bisection on the wall shear.  Deliberately shares no code with the library
// integrator.
#include <cmath>
#include <stdexcept>
#include <vector>

namespace oracle {

struct FsState {
    double f, fp, fpp;
};

inline FsState fs_rhs(const FsState& y, double beta) {
    return {y.fp, y.fpp, -(y.f * y.fpp + beta * (1.0 - y.fp * y.fp))};
}

// Integrates with fixed step h; stops early once f' clearly escapes.
// Returns f'(end) - 1.
inline double fs_shoot_rk4(double beta, double f0, double f1, double shear,
                           double z_max = 12.0, double h = 1e-4) {
    FsState y{f0, f1, shear};
    const long n = static_cast<long>(z_max / h + 0.5);
    for (long i = 0; i < n; ++i) {
        const FsState k1 = fs_rhs(y, beta);
        const FsState y2{y.f + 0.5 * h * k1.f, y.fp + 0.5 * h * k1.fp,
                         y.fpp + 0.5 * h * k1.fpp};
        const FsState k2 = fs_rhs(y2, beta);
        const FsState y3{y.f + 0.5 * h * k2.f, y.fp + 0.5 * h * k2.fp,
                         y.fpp + 0.5 * h * k2.fpp};
        const FsState k3 = fs_rhs(y3, beta);
        const FsState y4{y.f + h * k3.f, y.fp + h * k3.fp, y.fpp + h * k3.fpp};
        const FsState k4 = fs_rhs(y4, beta);
        y.f += h / 6.0 * (k1.f + 2 * k2.f + 2 * k3.f + k4.f);
        y.fp += h / 6.0 * (k1.fp + 2 * k2.fp + 2 * k3.fp + k4.fp);
        y.fpp += h / 6.0 * (k1.fpp + 2 * k2.fpp + 2 * k3.fpp + k4.fpp);
        if (y.fp > 1.5) return 1.0;
        if (y.fpp < -1e-10 && y.fp < 1.0 - 1e-4) return y.fp - 1.0;
    }
    return y.fp - 1.0;
}

// Bisects f''(0) to bracket width 1e-10.
inline double fs_wall_shear(double beta, double f0 = 0.0, double f1 = 0.0) {
    double lo = 0.01, hi = 4.0;
    double phi_lo = fs_shoot_rk4(beta, f0, f1, lo);
    double phi_hi = fs_shoot_rk4(beta, f0, f1, hi);
    if (phi_lo * phi_hi > 0.0) throw std::runtime_error("oracle: no bracket");
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (fs_shoot_rk4(beta, f0, f1, mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace oracle
