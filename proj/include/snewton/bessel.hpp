#pragma once

/// \file bessel.hpp
/// Bessel function of the first kind J_nu(r) for the Sturm comparison
/// arguments: ascending series for r <= 12, Hankel asymptotic expansion on
/// (12, 60]. Absolute error below 1e-10 on (0, 60] for -1 < nu <= 6.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "error.hpp"

namespace snewton {

inline constexpr double bessel_series_limit = 12.0;
inline constexpr double bessel_max_argument = 60.0;

namespace detail {

inline double bessel_j_series(double nu, double x)
{
    const double half = 0.5 * x;
    const double q = -half * half;
    // first term (x/2)^nu / Gamma(nu+1)
    double term = std::exp(nu * std::log(half) - std::lgamma(nu + 1.0));
    double sum = term;
    for (int k = 1; k < 300; ++k) {
        term *= q / (k * (k + nu));
        sum += term;
        if (std::abs(term) < 1e-18 * std::max(1.0, std::abs(sum)) && k > half) {
            break;
        }
    }
    return sum;
}

inline double bessel_j_asymptotic(double nu, double x)
{
    const double mu = 4.0 * nu * nu;
    double p = 1.0, q = 0.0;
    double term = 1.0;
    double last = std::numeric_limits<double>::infinity();
    for (int k = 1; k < 60; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= (mu - odd * odd) / (k * 8.0 * x);
        if (std::abs(term) > last) {
            break; // asymptotic series started to diverge
        }
        last = std::abs(term);
        // a_k enters P (even k) or Q (odd k) with alternating sign
        switch (k % 4) {
            case 1: q += term; break;
            case 2: p -= term; break;
            case 3: q -= term; break;
            case 0: p += term; break;
        }
        if (last < 1e-17) break;
    }
    const double chi = x - (0.5 * nu + 0.25) * std::numbers::pi;
    return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

} // namespace detail

/// J_nu(r) for nu > -1 and 0 < r <= 60. Throws OutOfRange beyond 60.
inline double bessel_j(double nu, double r)
{
    require(nu > -1.0, ErrorKind::InvalidArgument, "bessel_j needs nu > -1");
    require(r > 0.0, ErrorKind::InvalidArgument, "bessel_j needs r > 0");
    require(r <= bessel_max_argument, ErrorKind::OutOfRange,
            "bessel_j argument " + std::to_string(r) + " beyond " + std::to_string(bessel_max_argument));
    return r <= bessel_series_limit ? detail::bessel_j_series(nu, r) : detail::bessel_j_asymptotic(nu, r);
}

/// Positive zeros of J_nu on (0, x_max], x_max <= 60, located by scanning
/// with step 0.05 and bisecting each sign change.
inline std::vector<double> bessel_j_zeros(double nu, double x_max)
{
    require(x_max <= bessel_max_argument, ErrorKind::OutOfRange, "zero scan beyond the oracle range");
    std::vector<double> zeros;
    constexpr double dx = 0.05;
    double a = dx;
    double fa = bessel_j(nu, a);
    while (a < x_max) {
        const double b = std::min(a + dx, x_max);
        const double fb = bessel_j(nu, b);
        if ((fa < 0) != (fb < 0)) {
            double lo = a, hi = b, flo = fa;
            for (int i = 0; i < 100 && hi - lo > 1e-14 * hi; ++i) {
                const double mid = 0.5 * (lo + hi);
                const double fm = bessel_j(nu, mid);
                if ((fm < 0) == (flo < 0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            zeros.push_back(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    return zeros;
}

} // namespace snewton
