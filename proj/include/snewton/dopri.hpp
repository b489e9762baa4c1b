#pragma once

/// \file dopri.hpp
/// Dormand-Prince 5(4) embedded pair with FSAL and a PI step controller
/// (coefficients and controller constants as in Hairer, Norsett & Wanner).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace snewton::dopri {

template <std::size_t N>
using Vec = std::array<double, N>;

namespace tableau {
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                        a76 = 11.0 / 84;
// difference between 5th and embedded 4th order weights
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;
} // namespace tableau

/// One trial step of size h from (r, y) with k1 = f(r, y). On return y_new is
/// the 5th-order solution, k7 = f(r + h, y_new) and err the local error estimate.
template <std::size_t N, class F>
void step(F&& f, double r, const Vec<N>& y, const Vec<N>& k1, double h, Vec<N>& y_new, Vec<N>& k7, Vec<N>& err)
{
    using namespace tableau;
    Vec<N> k2, k3, k4, k5, k6, tmp;
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    k2 = f(r + c2 * h, tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    k3 = f(r + c3 * h, tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    k4 = f(r + c4 * h, tmp);
    for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    k5 = f(r + c5 * h, tmp);
    for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    k6 = f(r + h, tmp);
    for (std::size_t i = 0; i < N; ++i)
        y_new[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    k7 = f(r + h, y_new);
    for (std::size_t i = 0; i < N; ++i)
        err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
}

/// RMS error norm with per-component scale atol_i + rtol * max(|y_i|, |y_new_i|).
template <std::size_t N>
double error_norm(const Vec<N>& err, const Vec<N>& y, const Vec<N>& y_new, const Vec<N>& atol, double rtol)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double sc = atol[i] + rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
        const double e = err[i] / sc;
        sum += e * e;
    }
    return std::sqrt(sum / static_cast<double>(N));
}

/// Proportional-integral step size controller.
class PIController
{
  public:
    /// Proposed next step after an attempt with error norm `err` (accepted iff err <= 1).
    double propose(double h, double err, bool accepted)
    {
        const double fac11 = std::pow(std::max(err, 1e-300), expo1_);
        if (accepted) {
            double fac = fac11 / std::pow(err_old_, beta_);
            fac = std::clamp(fac / safe_, 1.0 / fac_max_, 1.0 / fac_min_);
            err_old_ = std::max(err, 1e-4);
            return h / fac;
        }
        return h / std::min(1.0 / fac_min_, fac11 / safe_);
    }

  private:
    static constexpr double beta_ = 0.04;
    static constexpr double expo1_ = 0.2 - beta_ * 0.75;
    static constexpr double safe_ = 0.9;
    static constexpr double fac_min_ = 0.2; // largest shrink 1/5
    static constexpr double fac_max_ = 10.0; // largest growth 10x
    double err_old_ = 1e-4;
};

/// Initial step guess (Hairer's heuristic, simplified).
template <std::size_t N>
double initial_step(const Vec<N>& y, const Vec<N>& f0, const Vec<N>& atol, double rtol, double r, double h_max)
{
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double sc = atol[i] + rtol * std::abs(y[i]);
        dnf += (f0[i] / sc) * (f0[i] / sc);
        dny += (y[i] / sc) * (y[i] / sc);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
    // stay well inside the region where the 1/r frictions vary slowly
    h = std::min({h, 0.1 * r, h_max});
    return h;
}

} // namespace snewton::dopri
