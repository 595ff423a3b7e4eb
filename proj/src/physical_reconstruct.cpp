#include "bl/physical_reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bl/errors.hpp"
#include "bl/grid.hpp"

namespace bl {
namespace {

constexpr double kTopEta = 0.999;
constexpr double kTailLo = 1e-8;  // fit window on 1 - u/U
constexpr double kTailHi = 0.1;

// Crocco-frame data interpolated to a station x strictly inside the extent.
struct Station {
    double x = 0.0, U = 0.0, Ux = 0.0, xpow = 0.0;  // xpow = x^{(m-1)/2}
    std::vector<double> omega, omega_eta, omega_xi;
};

std::vector<double> slice_xi_derivative(const CroccoField& field,
                                        std::size_t k) {
    const auto& xi = field.xi_nodes;
    const std::size_t last = xi.size() - 1;
    const std::size_t lo = k == 0 ? 0 : k - 1;
    const std::size_t hi = k == last ? last : k + 1;
    const double span = xi[hi] - xi[lo];
    std::vector<double> d(field.eta_grid.size());
    for (std::size_t j = 0; j < d.size(); ++j)
        d[j] = (field.omega[hi][j] - field.omega[lo][j]) / span;
    return d;
}

Station make_station(const CroccoField& field, const Scenario& scenario,
                     double x) {
    if (field.omega.size() < 2)
        throw ValidationError("field has no positive stations");
    if (!(x > 0.0) || x > field.attained_X * (1.0 + 1e-12))
        throw ValidationError("x outside (0, attained X]");

    const auto& xi = field.xi_nodes;
    std::size_t k = std::upper_bound(xi.begin(), xi.end(), x) - xi.begin();
    k = std::min(std::max<std::size_t>(k, 1), xi.size() - 1) - 1;
    const double theta = (x - xi[k]) / (xi[k + 1] - xi[k]);

    const std::vector<double> dk = slice_xi_derivative(field, k);
    const std::vector<double> dk1 = slice_xi_derivative(field, k + 1);

    Station st;
    st.x = x;
    const std::size_t n = field.eta_grid.size();
    st.omega.resize(n);
    st.omega_xi.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        st.omega[j] = (1.0 - theta) * field.omega[k][j] +
                      theta * field.omega[k + 1][j];
        st.omega_xi[j] = (1.0 - theta) * dk[j] + theta * dk1[j];
    }
    st.omega_eta.assign(n, 0.0);
    const auto& eta = field.eta_grid;
    {
        const auto s = d1_left(eta[1] - eta[0], eta[2] - eta[1]);
        st.omega_eta[0] =
            s.m * st.omega[0] + s.c * st.omega[1] + s.p * st.omega[2];
    }
    for (std::size_t j = 1; j + 1 < n; ++j) {
        const auto s = d1_central(eta[j] - eta[j - 1], eta[j + 1] - eta[j]);
        st.omega_eta[j] = s.m * st.omega[j - 1] + s.c * st.omega[j] +
                          s.p * st.omega[j + 1];
    }

    const double m = field.m;
    const double V = scenario.V(x);
    st.U = std::pow(x, m) * V;
    st.Ux = m * std::pow(x, m - 1.0) * V + std::pow(x, m) * scenario.V_xi(x);
    st.xpow = std::pow(x, 0.5 * (m - 1.0));
    return st;
}

// Cumulative integral of numer(s)/omega(s) over the eta grid up to the last
// interior node, with the sigma-substitution cell rule (amplitude fitted
// from the nodal values, closed form for ds/((1-s) sigma)); the integrand's
// near-eta = 1 behavior is captured without a scheme switch.
std::vector<double> cumulative_over_omega(const std::vector<double>& eta,
                                          const std::vector<double>& omega,
                                          const std::vector<double>& numer,
                                          double mu) {
    const std::size_t n_map = eta.size() - 1;  // nodes 0 .. n-2
    std::vector<double> out(n_map, 0.0);
    for (std::size_t j = 0; j + 1 < n_map; ++j) {
        const double s0 = sigma(eta[j], mu), s1 = sigma(eta[j + 1], mu);
        const double c0 = omega[j] / ((1.0 - eta[j]) * s0);
        const double c1 = omega[j + 1] / ((1.0 - eta[j + 1]) * s1);
        const double c_hat = 0.5 * (c0 + c1);
        if (!(c_hat > 0.0))
            throw ValidationError("omega must be positive below eta = 1");
        out[j + 1] = out[j] + 0.5 * (numer[j] + numer[j + 1]) / c_hat * 2.0 *
                                  (s1 - s0);
    }
    return out;
}

DecayFit fit_line(const std::vector<double>& xs,
                  const std::vector<double>& ys) {
    DecayFit fit;
    fit.samples = xs.size();
    if (xs.size() < 2) return fit;
    const double n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
        syy += ys[i] * ys[i];
    }
    const double vxx = sxx - sx * sx / n;
    const double vxy = sxy - sx * sy / n;
    const double vyy = syy - sy * sy / n;
    if (!(vxx > 0.0)) return fit;
    fit.slope = vxy / vxx;
    fit.intercept = (sy - fit.slope * sx) / n;
    fit.r2 = vyy > 0.0 ? vxy * vxy / (vxx * vyy) : 1.0;
    return fit;
}

// Everything needed to reconstruct one station: the inverse map, the
// Crocco-frame interpolants in eta, and the Gaussian tail fit.
struct StationRecon {
    Station st;
    EtaMap map;
    MonotoneCubic eta_of_y, omega_h, omega_eta_h, I_h;
    DecayFit tail;
    double eta_last = 0.0, y_top = 0.0;
};

StationRecon build_station(const CroccoField& field,
                           const Scenario& scenario, double x) {
    StationRecon r;
    r.st = make_station(field, scenario, x);
    const auto& eta = field.eta_grid;
    const std::size_t n_map = eta.size() - 1;
    const double mu = default_envelope_mu();

    const std::vector<double> ones(eta.size(), 1.0);
    std::vector<double> y = cumulative_over_omega(eta, r.st.omega, ones, mu);
    for (double& v : y) v /= r.st.xpow;

    r.map.eta.assign(eta.begin(), eta.begin() + n_map);
    r.map.y = std::move(y);
    r.eta_last = r.map.eta.back();
    r.y_top = r.map.y.back();
    r.eta_of_y = MonotoneCubic(r.map.y, r.map.eta);
    r.omega_h = MonotoneCubic(
        r.map.eta, {r.st.omega.begin(), r.st.omega.begin() + n_map});
    r.omega_eta_h = MonotoneCubic(
        r.map.eta, {r.st.omega_eta.begin(), r.st.omega_eta.begin() + n_map});

    std::vector<double> numer(eta.size(), 0.0);
    for (std::size_t j = 0; j + 1 < eta.size(); ++j)
        numer[j] = r.st.omega_xi[j] / r.st.omega[j] +
                   0.5 * (field.m - 1.0) / x;
    r.I_h = MonotoneCubic(r.map.eta,
                          cumulative_over_omega(eta, r.st.omega, numer, mu));

    const double xm1 = std::pow(x, field.m - 1.0);
    std::vector<double> abscissa, ordinate;
    for (std::size_t j = 0; j < n_map; ++j) {
        const double gap = 1.0 - r.map.eta[j];
        if (gap > kTailLo && gap < kTailHi) {
            abscissa.push_back(xm1 * r.map.y[j] * r.map.y[j]);
            ordinate.push_back(std::log(gap));
        }
    }
    r.tail = fit_line(abscissa, ordinate);
    return r;
}

struct CellValue {
    double eta = 0.0;
    CellFlag flag = CellFlag::ok;
};

CellValue cell_eta(const StationRecon& r, double m, double y) {
    CellValue c;
    if (y <= r.y_top) {
        c.eta = std::clamp(r.eta_of_y(y), 0.0, r.eta_last);
        c.flag = c.eta > kTopEta ? CellFlag::top : CellFlag::ok;
    } else {
        const double xm1 = std::pow(r.st.x, m - 1.0);
        const double q =
            std::exp(r.tail.intercept + r.tail.slope * xm1 * y * y);
        c.eta = std::min(1.0 - 1e-15, std::max(1.0 - q, r.eta_last));
        c.flag = CellFlag::extrapolated;
    }
    return c;
}

}  // namespace

EtaMap y_of_eta(const CroccoField& field, double x) {
    // the scenario enters only through U(x), which the map does not need
    Scenario plain;
    plain.m = field.m;
    plain.a = field.a;
    plain.nu = field.nu;
    const Station st = make_station(field, plain, x);
    const auto& eta = field.eta_grid;
    const std::size_t n_map = eta.size() - 1;
    const std::vector<double> ones(eta.size(), 1.0);
    EtaMap map;
    map.y = cumulative_over_omega(eta, st.omega, ones,
                                  default_envelope_mu());
    for (double& v : map.y) v /= st.xpow;
    map.eta.assign(eta.begin(), eta.begin() + n_map);
    return map;
}

std::vector<std::vector<double>> velocity_u(
    const CroccoField& field, const Scenario& scenario,
    const std::vector<double>& x_nodes, const std::vector<double>& y_nodes) {
    std::vector<std::vector<double>> u(x_nodes.size());
    for (std::size_t ix = 0; ix < x_nodes.size(); ++ix) {
        const StationRecon r = build_station(field, scenario, x_nodes[ix]);
        u[ix].resize(y_nodes.size());
        for (std::size_t iy = 0; iy < y_nodes.size(); ++iy)
            u[ix][iy] = r.st.U * cell_eta(r, field.m, y_nodes[iy]).eta;
    }
    return u;
}

PhysicalField reconstruct(const CroccoField& field, const Scenario& scenario,
                          const std::vector<double>& x_nodes,
                          const std::vector<double>& y_nodes) {
    PhysicalField phys;
    phys.x_nodes = x_nodes;
    phys.y_nodes = y_nodes;
    phys.m = field.m;
    phys.nu = field.nu;
    phys.variant = scenario.variant;

    const std::size_t nx = x_nodes.size(), ny = y_nodes.size();
    phys.U_of_x.resize(nx);
    auto grid2 = [&](auto value) {
        return std::vector<std::vector<decltype(value)>>(
            nx, std::vector<decltype(value)>(ny, value));
    };
    phys.u = grid2(0.0);
    phys.v = grid2(0.0);
    phys.u_y = grid2(0.0);
    phys.u_x = grid2(0.0);
    phys.u_yy = grid2(0.0);
    phys.flag = grid2(CellFlag::ok);

    for (std::size_t ix = 0; ix < nx; ++ix) {
        const StationRecon r = build_station(field, scenario, x_nodes[ix]);
        const double U = r.st.U, Ux = r.st.Ux;
        phys.U_of_x[ix] = U;
        const double uy_floor = 1e-12 * r.st.xpow * U;
        for (std::size_t iy = 0; iy < ny; ++iy) {
            const CellValue c = cell_eta(r, field.m, y_nodes[iy]);
            phys.flag[ix][iy] = c.flag;
            phys.u[ix][iy] = U * c.eta;
            if (c.flag == CellFlag::extrapolated) continue;
            const double w = r.omega_h(c.eta);
            const double uy = r.st.xpow * U * w;
            if (!(uy > uy_floor)) {
                phys.flag[ix][iy] = CellFlag::top;
                continue;
            }
            phys.u_y[ix][iy] = uy;
            phys.u_x[ix][iy] =
                phys.u[ix][iy] * Ux / U + w * U * r.I_h(c.eta);
            phys.u_yy[ix][iy] = r.st.xpow * r.omega_eta_h(c.eta) * uy;
            phys.v[ix][iy] = (-phys.u[ix][iy] * phys.u_x[ix][iy] +
                              field.nu * phys.u_yy[ix][iy] + U * Ux) /
                             uy;
        }
    }
    return phys;
}

PhysicalField reconstruct(const CroccoField& field,
                          const Scenario& scenario) {
    if (field.omega.size() < 2)
        throw ValidationError("field has no positive stations");
    std::vector<double> x_nodes(field.xi_nodes.begin() + 1,
                                field.xi_nodes.end());
    double y99 = 0.0;
    for (double x : x_nodes) {
        const EtaMap map = y_of_eta(field, x);
        const MonotoneCubic y_h(map.eta, map.y);
        y99 = std::max(y99, y_h(0.99));
    }
    const double delta = y99 / 64.0;
    std::vector<double> y_nodes(129);
    for (std::size_t j = 0; j < y_nodes.size(); ++j)
        y_nodes[j] = static_cast<double>(j) * delta;
    return reconstruct(field, scenario, x_nodes, y_nodes);
}

ResidualReport continuity_residual(const PhysicalField& phys,
                                   const Scenario& scenario) {
    const std::size_t nx = phys.x_nodes.size(), ny = phys.y_nodes.size();
    ResidualReport rep;
    rep.residual.assign(nx, std::vector<double>(ny, 0.0));
    const bool axisym = phys.variant == Variant::axisymmetric;
    for (std::size_t ix = 1; ix + 1 < nx; ++ix) {
        const double x = phys.x_nodes[ix];
        // tip exclusion: u ~ x^m has unbounded x-curvature at the tip for
        // m != 1, so the centered quotient is meaningless until the station
        // spacing resolves x
        if (x < 2.5 * (phys.x_nodes[ix + 1] - phys.x_nodes[ix - 1]))
            continue;
        const double r0 = axisym ? phys.x_nodes[ix - 1] *
                                       scenario.r1(phys.x_nodes[ix - 1])
                                 : 1.0;
        const double rc = axisym ? x * scenario.r1(x) : 1.0;
        const double r1r = axisym ? phys.x_nodes[ix + 1] *
                                        scenario.r1(phys.x_nodes[ix + 1])
                                  : 1.0;
        const double dx = phys.x_nodes[ix + 1] - phys.x_nodes[ix - 1];
        const double scale = phys.U_of_x[ix] / x;
        const double denom = scale > 0.0 ? rc * scale : 1.0;
        for (std::size_t iy = 1; iy + 1 < ny; ++iy) {
            if (phys.flag[ix][iy] != CellFlag::ok ||
                phys.flag[ix - 1][iy] != CellFlag::ok ||
                phys.flag[ix + 1][iy] != CellFlag::ok ||
                phys.flag[ix][iy - 1] != CellFlag::ok ||
                phys.flag[ix][iy + 1] != CellFlag::ok)
                continue;
            const double dru =
                (r1r * phys.u[ix + 1][iy] - r0 * phys.u[ix - 1][iy]) / dx;
            const double dvy =
                (phys.v[ix][iy + 1] - phys.v[ix][iy - 1]) /
                (phys.y_nodes[iy + 1] - phys.y_nodes[iy - 1]);
            const double res = (dru + rc * dvy) / denom;
            rep.residual[ix][iy] = res;
            rep.max_residual = std::max(rep.max_residual, std::abs(res));
        }
    }
    return rep;
}

ResidualReport momentum_residual(const PhysicalField& phys,
                                 const Scenario& scenario) {
    const std::size_t nx = phys.x_nodes.size(), ny = phys.y_nodes.size();
    ResidualReport rep;
    rep.residual.assign(nx, std::vector<double>(ny, 0.0));
    for (std::size_t ix = 1; ix + 1 < nx; ++ix) {
        const double x = phys.x_nodes[ix];
        // same tip exclusion as the continuity report
        if (x < 2.5 * (phys.x_nodes[ix + 1] - phys.x_nodes[ix - 1]))
            continue;
        const double U = phys.U_of_x[ix];
        const double m = phys.m;
        const double Ux = m * std::pow(x, m - 1.0) * scenario.V(x) +
                          std::pow(x, m) * scenario.V_xi(x);
        const double dx = phys.x_nodes[ix + 1] - phys.x_nodes[ix - 1];
        const double scale = U > 0.0 ? U * U / x : 1.0;
        for (std::size_t iy = 1; iy + 1 < ny; ++iy) {
            if (phys.flag[ix][iy] != CellFlag::ok ||
                phys.flag[ix - 1][iy] != CellFlag::ok ||
                phys.flag[ix + 1][iy] != CellFlag::ok ||
                phys.flag[ix][iy - 1] != CellFlag::ok ||
                phys.flag[ix][iy + 1] != CellFlag::ok)
                continue;
            const double hl = phys.y_nodes[iy] - phys.y_nodes[iy - 1];
            const double hr = phys.y_nodes[iy + 1] - phys.y_nodes[iy];
            const auto s1 = d1_central(hl, hr);
            const auto s2 = d2_central(hl, hr);
            const double dux =
                (phys.u[ix + 1][iy] - phys.u[ix - 1][iy]) / dx;
            const double duy = s1.m * phys.u[ix][iy - 1] +
                               s1.c * phys.u[ix][iy] +
                               s1.p * phys.u[ix][iy + 1];
            const double duyy = s2.m * phys.u[ix][iy - 1] +
                                s2.c * phys.u[ix][iy] +
                                s2.p * phys.u[ix][iy + 1];
            const double res = (phys.u[ix][iy] * dux +
                                phys.v[ix][iy] * duy - U * Ux -
                                phys.nu * duyy) /
                               scale;
            rep.residual[ix][iy] = res;
            rep.max_residual = std::max(rep.max_residual, std::abs(res));
        }
    }
    return rep;
}

DecayReport decay_check(const PhysicalField& phys, const Scenario&) {
    DecayReport rep;
    rep.M2 = 0.0;
    rep.M4 = std::numeric_limits<double>::infinity();
    for (std::size_t ix = 0; ix < phys.x_nodes.size(); ++ix) {
        const double xm1 = std::pow(phys.x_nodes[ix], phys.m - 1.0);
        const double U = phys.U_of_x[ix];
        std::vector<double> abscissa, ordinate;
        for (std::size_t iy = 0; iy < phys.y_nodes.size(); ++iy) {
            if (phys.flag[ix][iy] == CellFlag::extrapolated) continue;
            const double gap = 1.0 - phys.u[ix][iy] / U;
            if (gap > kTailLo && gap < kTailHi) {
                const double y = phys.y_nodes[iy];
                abscissa.push_back(xm1 * y * y);
                ordinate.push_back(std::log(gap));
            }
        }
        DecayFit fit = fit_line(abscissa, ordinate);
        if (fit.samples < 10) rep.window_ok = false;
        rep.per_x.push_back(fit);
        if (fit.samples >= 2) {
            rep.M2 = std::max(rep.M2, -fit.slope);
            rep.M4 = std::min(rep.M4, -fit.slope);
        }
    }
    if (!std::isfinite(rep.M4)) rep.M4 = 0.0;
    return rep;
}

}  // namespace bl
