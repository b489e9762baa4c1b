#pragma once

/// \file core.hpp
/// Rescaled radial Schrodinger-Newton system
///
///   u'' + ((2m+d-1)/r) u' = (V-1) u
///   V'' + ((d-1)/r)    V' = u^2 r^{2m}
///
/// with u(0) = u0 > 0, u'(0) = V(0) = V'(0) = 0, and its regular start
/// just off the coordinate singularity at r = 0.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "error.hpp"

namespace snewton {

/// Which right-hand side is integrated.
enum class System {
    /// The general system above; authoritative for d = 1 and d = 2.
    General,
    /// The 2D system with frictions 2(m+1)/r and 2/r, as displayed for d = 2.
    /// Kept only to compare against the general system.
    Literal2dDisplay,
    /// General u-equation with V frozen at 0; the linear comparison problem
    /// u'' + (2m+d-1)/r u' + u = 0 solved by Bessel functions.
    FrozenPotential,
};

/// Dimension d and angular parameter m (parity p in 1D) of the problem.
class ProblemParams
{
  public:
    int dim() const noexcept { return d_; }
    double m() const noexcept { return m_; }
    System system() const noexcept { return system_; }

    /// Friction coefficient of the u-equation.
    double friction_u() const noexcept
    {
        return system_ == System::Literal2dDisplay ? 2.0 * (m_ + 1.0) : 2.0 * m_ + d_ - 1.0;
    }
    /// Friction coefficient of the V-equation.
    double friction_v() const noexcept { return system_ == System::Literal2dDisplay ? 2.0 : d_ - 1.0; }
    /// Exponent of r in the source term of the V-equation.
    double source_exponent() const noexcept { return 2.0 * m_; }

    /// 2m+d for the general system: u''(0) = -u0 / k_u().
    double k_u() const noexcept { return friction_u() + 1.0; }
    /// 2m+d for the general system: V'(r) ~ u0^2 r^{2m+1} / k_v() near 0.
    double k_v() const noexcept { return 2.0 * m_ + 1.0 + friction_v(); }
    /// Radius sqrt(2(2m+d)) of the quadratic lower bound on u.
    double r0() const noexcept { return std::sqrt(2.0 * k_u()); }
    /// Order of the Bessel comparison function, (2m+d-2)/2.
    double bessel_order() const noexcept { return (friction_u() - 1.0) / 2.0; }

    /// Lower bound ((m+1)(2m+d)/(2 u0^2))^{1/(2(m+1))} on the radius where V = 1/2.
    double half_radius_lower_bound(double u0) const
    {
        return std::pow((m_ + 1.0) * k_v() / (2.0 * u0 * u0), 1.0 / (2.0 * (m_ + 1.0)));
    }

    std::string describe() const
    {
        std::string s = "d=" + std::to_string(d_) + (d_ == 1 ? " parity=" : " m=") + std::to_string(m_);
        if (system_ == System::Literal2dDisplay) {
            s += " (literal 2D display system)";
        } else if (system_ == System::FrozenPotential) {
            s += " (frozen potential)";
        }
        return s;
    }

    friend ProblemParams make_params(int d, double m_or_parity, System system);

  private:
    ProblemParams(int d, double m, System s)
        : d_(d)
        , m_(m)
        , system_(s)
    {
    }

    int d_;
    double m_;
    System system_;
};

/// Builds the parameters for dimension d; m_or_parity is the angular
/// momentum m >= 0 in 2D and the parity p in {0, 1} in 1D (which enters
/// the system exactly like m).
inline ProblemParams make_params(int d, double m_or_parity, System system = System::General)
{
    require(d == 1 || d == 2, ErrorKind::InvalidArgument, "dimension must be 1 or 2, got " + std::to_string(d));
    require(std::isfinite(m_or_parity) && m_or_parity >= 0.0, ErrorKind::InvalidArgument,
            "m must be a finite nonnegative number");
    if (d == 1) {
        require(m_or_parity == 0.0 || m_or_parity == 1.0, ErrorKind::InvalidArgument,
                "in 1D the parity must be 0 or 1");
    }
    require(system != System::Literal2dDisplay || d == 2, ErrorKind::InvalidArgument,
            "the literal display system only exists for d = 2");
    return ProblemParams(d, m_or_parity, system);
}

/// Phase point (u, u', V, V') of the rescaled system.
struct ShootState
{
    double u = 0.0;
    double du = 0.0;
    double V = 0.0;
    double dV = 0.0;

    /// u and u' nonzero with opposite signs (|u| decreasing). Compares signs
    /// rather than the product, which underflows deep in a decaying tail.
    bool toward_zero() const { return (u > 0 && du < 0) || (u < 0 && du > 0); }
    /// u and u' nonzero with equal signs (|u| increasing).
    bool away_from_zero() const { return (u > 0 && du > 0) || (u < 0 && du < 0); }

    std::array<double, 4> as_array() const { return {u, du, V, dV}; }
    static ShootState from_array(const std::array<double, 4>& a) { return {a[0], a[1], a[2], a[3]}; }
};

/// Derivative (u', u'', V', V'') of the system at radius r > 0.
inline ShootState rhs(double r, const ShootState& s, const ProblemParams& p)
{
    require(r > 0.0, ErrorKind::InvalidArgument, "rhs evaluated at r <= 0");
    const double source_power = p.m() == 0.0 ? 1.0 : std::pow(r, p.source_exponent());
    if (p.system() == System::FrozenPotential) {
        return {s.du, -s.u - p.friction_u() * s.du / r, 0.0, 0.0};
    }
    return {
        s.du,
        (s.V - 1.0) * s.u - p.friction_u() * s.du / r,
        s.dV,
        s.u * s.u * source_power - p.friction_v() * s.dV / r,
    };
}

/// Default radius of the regular start: 1e-4 * max(1, sqrt(2(2m+d))).
inline double default_origin_offset(const ProblemParams& p) { return 1e-4 * std::max(1.0, p.r0()); }

/// Leading-order regular solution at r = eps. The neglected terms are
/// O(eps^4) in u and relative O(eps^2) in V.
inline ShootState origin_series(double u0, const ProblemParams& p, double eps)
{
    require(eps > 0.0, ErrorKind::InvalidArgument, "origin offset must be positive");
    require(u0 > 0.0 && std::isfinite(u0), ErrorKind::InvalidArgument, "u0 must be positive");
    const double ku = p.k_u();
    ShootState s;
    s.u = u0 * (1.0 - eps * eps / (2.0 * ku));
    s.du = -u0 * eps / ku;
    if (p.system() == System::FrozenPotential) {
        return s;
    }
    const double kv = p.k_v();
    const double e2m1 = std::pow(eps, 2.0 * p.m() + 1.0);
    s.dV = u0 * u0 * e2m1 / kv;
    s.V = u0 * u0 * e2m1 * eps / ((2.0 * p.m() + 2.0) * kv);
    return s;
}

} // namespace snewton
