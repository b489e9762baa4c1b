#pragma once

/// \file physical.hpp
/// Map from the rescaled solution (u, V) back to the physical profile
/// (phi, v, omega), with charge, energy and a finite-difference residual of
/// the physical equations
///
///   phi'' + (d-1)/x phi' - [d=2] m^2/x^2 phi = (gamma v - omega') phi
///   v''   + (d-1)/x v'                       = phi^2
///
/// where omega' = omega - Omega m in 2D and omega in 1D. The potential is
/// normalized as v = G_d * phi^2 with G_1(s) = s/2 and G_2(s) = ln(s)/(2 pi).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "profile.hpp"
#include "quadrature.hpp"

namespace snewton {

struct PhysicalSolution
{
    int d = 1;
    /// angular momentum m in 2D, parity p in 1D
    double m = 0.0;
    double gamma = 1.0;
    double sigma = 1.0;
    /// rotation rate (2D only)
    double Omega = 0.0;
    double omega = std::numeric_limits<double>::quiet_NaN();
    /// v_G(0); NaN until the potential is normalized
    double v_origin = std::numeric_limits<double>::quiet_NaN();
    double energy = std::numeric_limits<double>::quiet_NaN();
    double charge = std::numeric_limits<double>::quiet_NaN();

    std::vector<double> x;
    std::vector<double> phi;
    std::vector<double> dphi;
    std::vector<double> v;
    std::vector<double> dv;

    bool normalized() const { return std::isfinite(v_origin); }
    double omega_shifted() const { return d == 2 ? omega - Omega * m : omega; }
};

/// Scale factors of the physical problem: phi = sigma^2/sqrt(gamma) (sigma x)^m u(sigma x),
/// v = sigma^2/gamma V(sigma x) + const. The additive constant of v is left at
/// 0 here and fixed by normalize_potential.
inline PhysicalSolution rescale_to_physical(const Profile& prof, double gamma, double sigma, double Omega = 0.0)
{
    require(gamma > 0.0 && std::isfinite(gamma), ErrorKind::InvalidArgument, "gamma must be positive");
    require(sigma > 0.0 && std::isfinite(sigma), ErrorKind::InvalidArgument, "sigma must be positive");
    require(std::isfinite(Omega), ErrorKind::InvalidArgument, "Omega must be finite");
    PhysicalSolution sol;
    sol.d = prof.params.dim();
    sol.m = prof.params.m();
    sol.gamma = gamma;
    sol.sigma = sigma;
    sol.Omega = sol.d == 2 ? Omega : 0.0;
    const double amp = sigma * sigma / std::sqrt(gamma);
    const double vs = sigma * sigma / gamma;
    const double m = sol.m;
    const std::size_t n = prof.size();
    sol.x.resize(n);
    sol.phi.resize(n);
    sol.dphi.resize(n);
    sol.v.resize(n);
    sol.dv.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = prof.samples[i].r;
        const ShootState& s = prof.samples[i].s;
        const double rm = m == 0.0 ? 1.0 : std::pow(r, m);
        sol.x[i] = r / sigma;
        sol.phi[i] = amp * rm * s.u;
        // d/dx of (sigma x)^m u(sigma x) = sigma (sigma x)^(m-1) (m u + r u')
        sol.dphi[i] = amp * sigma * (rm / r) * (m * s.u + r * s.du);
        sol.v[i] = vs * s.V;
        sol.dv[i] = vs * sigma * s.dV;
    }
    return sol;
}

namespace detail {

/// int_0^X s^k ln(s) ds for k > -1.
inline double power_log_integral(double X, double k)
{
    const double k1 = k + 1.0;
    return std::pow(X, k1) * (std::log(X) / k1 - 1.0 / (k1 * k1));
}

/// Decay rate -phi'/phi at the last sample, required positive.
inline double tail_rate(std::span<const double> phi, std::span<const double> dphi)
{
    const double f = phi.back(), df = dphi.back();
    if (f == 0.0) return std::numeric_limits<double>::infinity();
    const double k = -df / f;
    return k > 0 ? k : std::numeric_limits<double>::infinity();
}

inline void require_decayed(std::span<const double> phi)
{
    require(!phi.empty(), ErrorKind::InvalidArgument, "empty profile");
    double peak = 0.0;
    for (double f : phi) peak = std::max(peak, std::abs(f));
    require(std::abs(phi.back()) < 1e-6 * peak || peak == 0.0, ErrorKind::TailNotDecayed,
            "last sample |phi| is not below 1e-6 max|phi|");
}

/// Measure weight of the radial integral: 2 in 1D (both half-lines), 2 pi s in 2D.
inline double measure(int d, double s) { return d == 1 ? 2.0 : 2.0 * std::numbers::pi * s; }

/// int_0^inf f(s) phi(s)^2 dmu(s) for f = s^j (log_weight false) or
/// f = s^j ln s (log_weight true). The piece below the first sample uses
/// phi ~ phi(x0) (s/x0)^m; beyond the last sample phi decays like exp(-k s).
inline double density_moment(std::span<const double> x, std::span<const double> phi, std::span<const double> dphi,
                             int d, double m, double j, bool log_weight)
{
    const std::size_t n = x.size();
    std::vector<double> f(n);
    const double mj = d == 2 ? j + 1.0 : j;
    const double w = d == 1 ? 2.0 : 2.0 * std::numbers::pi;
    for (std::size_t i = 0; i < n; ++i) {
        const double base = std::pow(x[i], mj) * phi[i] * phi[i];
        f[i] = w * (log_weight ? base * std::log(x[i]) : base);
    }
    double total = integrate_samples(x, f);
    // origin piece: phi^2 ~ phi0^2 (s/x0)^(2m)
    const double x0 = x.front();
    const double c0 = w * phi.front() * phi.front() / std::pow(x0, 2.0 * m);
    const double k = mj + 2.0 * m;
    total += log_weight ? c0 * power_log_integral(x0, k) : c0 * std::pow(x0, k + 1.0) / (k + 1.0);
    // exponential tail
    const double rate = tail_rate(phi, dphi);
    if (std::isfinite(rate)) total += f.back() / (2.0 * rate);
    return total;
}

} // namespace detail

/// v_G(0) = int G_d(|y|) phi(|y|)^2 dy.
inline double greens_potential_origin(std::span<const double> x, std::span<const double> phi,
                                      std::span<const double> dphi, int d, double m)
{
    require(d == 1 || d == 2, ErrorKind::InvalidArgument, "dimension must be 1 or 2");
    require(x.size() == phi.size() && x.size() == dphi.size() && x.size() >= 4, ErrorKind::InvalidArgument,
            "need at least four samples of equal length");
    detail::require_decayed(phi);
    if (d == 1) {
        return 0.5 * detail::density_moment(x, phi, dphi, 1, m, 1.0, false);
    }
    return detail::density_moment(x, phi, dphi, 2, m, 0.0, true) / (2.0 * std::numbers::pi);
}

inline double greens_potential_origin(const PhysicalSolution& sol)
{
    return greens_potential_origin(sol.x, sol.phi, sol.dphi, sol.d, sol.m);
}

/// omega = gamma v_G0 + sigma^2 (+ Omega m in 2D).
inline double extract_frequency(double v_g0, double gamma, double sigma, double Omega, double m, int d)
{
    return gamma * v_g0 + sigma * sigma + (d == 2 ? Omega * m : 0.0);
}

/// Fixes the additive constant of v so that v(0) = v_G(0), and sets omega.
inline void normalize_potential(PhysicalSolution& sol)
{
    const double vg = greens_potential_origin(sol);
    // v currently holds sigma^2/gamma V with V(0) = 0
    for (double& v : sol.v) v += vg;
    sol.v_origin = vg;
    sol.omega = extract_frequency(vg, sol.gamma, sol.sigma, sol.Omega, sol.m, sol.d);
}

/// N = int |psi|^2.
inline double charge(std::span<const double> x, std::span<const double> phi, std::span<const double> dphi, int d,
                     double m)
{
    require(x.size() == phi.size() && x.size() == dphi.size(), ErrorKind::InvalidArgument, "length mismatch");
    if (std::all_of(phi.begin(), phi.end(), [](double f) { return f == 0.0; })) return 0.0;
    detail::require_decayed(phi);
    return detail::density_moment(x, phi, dphi, d, m, 0.0, false);
}

inline double charge(const PhysicalSolution& sol) { return charge(sol.x, sol.phi, sol.dphi, sol.d, sol.m); }

/// Radial potential v = G_d * phi^2 on the grid x, built from v'(0) = 0 and
/// v(0) = v_G(0) by cumulative quadrature of the radial Poisson equation.
inline std::vector<double> potential_from_density(std::span<const double> x, std::span<const double> phi,
                                                  std::span<const double> dphi, int d, double m)
{
    const double v0 = greens_potential_origin(x, phi, dphi, d, m);
    const std::size_t n = x.size();
    const double c = d == 2 ? 1.0 : 0.0;
    // x^c v' = int_0^x s^c phi^2 ds
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = std::pow(x[i], c) * phi[i] * phi[i];
    auto G = cumulative_integral(x, g);
    const double x0 = x.front();
    const double k = c + 2.0 * m;
    const double origin_flux = phi.front() * phi.front() / std::pow(x0, 2.0 * m) * std::pow(x0, k + 1.0) / (k + 1.0);
    std::vector<double> dv(n);
    for (std::size_t i = 0; i < n; ++i) dv[i] = (G[i] + origin_flux) / std::pow(x[i], c);
    auto V = cumulative_integral(x, dv);
    // v(x0) - v(0): v' ~ x0^(k+1)/((k+1) x^c) scaled, integrated from 0
    const double origin_rise = phi.front() * phi.front() / std::pow(x0, 2.0 * m) * std::pow(x0, k + 2.0 - c) /
                               ((k + 1.0) * (k + 2.0 - c));
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = v0 + origin_rise + V[i];
    return v;
}

/// E = 1/2 int (phi'^2 + [d=2] m^2 phi^2 / s^2) dmu - gamma/4 int v phi^2 dmu.
/// v must already be normalized to v = G_d * phi^2.
inline double energy(std::span<const double> x, std::span<const double> phi, std::span<const double> dphi,
                     std::span<const double> v, double gamma, int d, double m)
{
    require(x.size() == phi.size() && x.size() == dphi.size() && x.size() == v.size(), ErrorKind::InvalidArgument,
            "length mismatch");
    if (std::all_of(phi.begin(), phi.end(), [](double f) { return f == 0.0; })) return 0.0;
    detail::require_decayed(phi);
    const double vg = greens_potential_origin(x, phi, dphi, d, m);
    require(std::abs(v.front() - vg) <= 1e-6 * std::max(1.0, std::abs(vg)), ErrorKind::InvalidArgument,
            "potential is not normalized to G * phi^2 (v(0) differs from v_G(0))");
    const std::size_t n = x.size();
    std::vector<double> kin(n), inter(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double mu = detail::measure(d, x[i]);
        const double ang = d == 2 && m != 0.0 ? m * m * phi[i] * phi[i] / (x[i] * x[i]) : 0.0;
        kin[i] = 0.5 * (dphi[i] * dphi[i] + ang) * mu;
        inter[i] = v[i] * phi[i] * phi[i] * mu;
    }
    double K = integrate_samples(x, kin);
    double I = integrate_samples(x, inter);
    const double rate = detail::tail_rate(phi, dphi);
    if (std::isfinite(rate)) {
        K += kin.back() / (2.0 * rate);
        I += inter.back() / (2.0 * rate);
    }
    // below the first sample: phi' ~ m phi0 s^(m-1)/x0^m, v ~ v(x0)
    const double x0 = x.front();
    const double mu_pow = d == 2 ? 1.0 : 0.0;
    const double wmu = d == 1 ? 2.0 : 2.0 * std::numbers::pi;
    const double p0 = phi.front() / std::pow(x0, m);
    if (m > 0.0) {
        const double kin_exp = 2.0 * m - 2.0 + mu_pow;
        const double ang_coeff = d == 2 ? m * m : 0.0;
        K += 0.5 * wmu * (m * m + ang_coeff) * p0 * p0 * std::pow(x0, kin_exp + 1.0) / (kin_exp + 1.0);
    } else {
        K += 0.5 * wmu * dphi.front() * dphi.front() * std::pow(x0, mu_pow + 1.0) / (mu_pow + 3.0) * 1.0;
    }
    I += wmu * v.front() * p0 * p0 * std::pow(x0, 2.0 * m + mu_pow + 1.0) / (2.0 * m + mu_pow + 1.0);
    return K - 0.25 * gamma * I;
}

inline double energy(const PhysicalSolution& sol)
{
    require(sol.normalized(), ErrorKind::InvalidArgument, "normalize the potential before computing the energy");
    return energy(sol.x, sol.phi, sol.dphi, sol.v, sol.gamma, sol.d, sol.m);
}

struct ResidualReport
{
    /// max |phi-equation residual| / max|phi|
    double phi_equation = 0.0;
    /// max |v-equation residual| / max|phi|^2
    double v_equation = 0.0;
    double x_worst_phi = 0.0;
    double x_worst_v = 0.0;

    double max() const { return std::max(phi_equation, v_equation); }
};

/// Finite-difference residual of the physical equations (7-point stencils on
/// the nonuniform grid). The samples are first thinned to spacing at least
/// `min_spacing` / sigma: near the origin the integrator steps are so short
/// that round-off in the stencils would dominate. phi' and v' are taken from
/// the stencils as well, so the analytic derivatives play no role.
inline ResidualReport residual(const PhysicalSolution& sol, double min_spacing = 0.005)
{
    require(sol.normalized(), ErrorKind::InvalidArgument, "normalize the potential before evaluating the residual");
    ResidualReport rep;
    if (sol.x.empty()) return rep;
    std::vector<double> x, phi, v;
    const double gap = min_spacing / sol.sigma;
    for (std::size_t i = 0; i < sol.x.size(); ++i) {
        if (!x.empty() && sol.x[i] - x.back() < gap && i + 1 != sol.x.size()) continue;
        x.push_back(sol.x[i]);
        phi.push_back(sol.phi[i]);
        v.push_back(sol.v[i]);
    }
    const std::size_t n = x.size();
    if (n < 7) return rep;
    double peak = 0.0;
    for (double f : phi) peak = std::max(peak, std::abs(f));
    if (peak == 0.0) return rep;
    const auto d1p = stencil_derivative(x, phi, 1);
    const auto d2p = stencil_derivative(x, phi, 2);
    const auto d1v = stencil_derivative(x, v, 1);
    const auto d2v = stencil_derivative(x, v, 2);
    const double fr = sol.d - 1.0;
    const double ang = sol.d == 2 ? sol.m * sol.m : 0.0;
    const double w = sol.omega_shifted();
    for (std::size_t i = 3; i + 3 < n; ++i) {
        const double xi = x[i];
        const double f = phi[i];
        const double rp = d2p[i] + fr / xi * d1p[i] - ang / (xi * xi) * f - (sol.gamma * v[i] - w) * f;
        const double rv = d2v[i] + fr / xi * d1v[i] - f * f;
        if (std::abs(rp) / peak > rep.phi_equation) {
            rep.phi_equation = std::abs(rp) / peak;
            rep.x_worst_phi = xi;
        }
        if (std::abs(rv) / (peak * peak) > rep.v_equation) {
            rep.v_equation = std::abs(rv) / (peak * peak);
            rep.x_worst_v = xi;
        }
    }
    return rep;
}

/// Rescaling, normalization of v, omega, charge and energy in one call.
inline PhysicalSolution to_physical(const Profile& prof, double gamma, double sigma, double Omega = 0.0)
{
    PhysicalSolution sol = rescale_to_physical(prof, gamma, sigma, Omega);
    normalize_potential(sol);
    sol.charge = charge(sol);
    sol.energy = energy(sol);
    return sol;
}

} // namespace snewton
