#pragma once

/// \file quadrature.hpp
/// Integration and differentiation on nonuniform grids.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "error.hpp"

namespace snewton {

/// Integral of the cubic through four points (x[i], y[i]) over [a, b].
inline double cubic_piece_integral(const double* x, const double* y, double a, double b)
{
    const double d01 = (y[1] - y[0]) / (x[1] - x[0]);
    const double d12 = (y[2] - y[1]) / (x[2] - x[1]);
    const double d23 = (y[3] - y[2]) / (x[3] - x[2]);
    const double d012 = (d12 - d01) / (x[2] - x[0]);
    const double d123 = (d23 - d12) / (x[3] - x[1]);
    const double d0123 = (d123 - d012) / (x[3] - x[0]);
    // p(t) = y0 + d01 (t-x0) + d012 (t-x0)(t-x1) + d0123 (t-x0)(t-x1)(t-x2), shift to s = t - x0
    const double s1 = x[1] - x[0], s2 = x[2] - x[0];
    auto antider = [&](double t) {
        const double s = t - x[0];
        const double s2p = s * s, s3 = s2p * s, s4 = s3 * s;
        const double quad = s3 / 3.0 - s1 * s2p / 2.0;
        const double cub = s4 / 4.0 - (s1 + s2) * s3 / 3.0 + s1 * s2 * s2p / 2.0;
        return y[0] * s + d01 * s2p / 2.0 + d012 * quad + d0123 * cub;
    };
    return antider(b) - antider(a);
}

/// Running integral F[i] = int_{x[0]}^{x[i]} y, each interval integrated with
/// the cubic through the four nearest points (trapezoid rule when the grid
/// has fewer than four points).
inline std::vector<double> cumulative_integral(std::span<const double> x, std::span<const double> y)
{
    require(x.size() == y.size(), ErrorKind::InvalidArgument, "grid and values differ in length");
    const std::size_t n = x.size();
    std::vector<double> F(n, 0.0);
    if (n < 2) return F;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double piece;
        if (n < 4) {
            piece = 0.5 * (y[i] + y[i + 1]) * (x[i + 1] - x[i]);
        } else {
            std::size_t lo = (i == 0) ? 0 : i - 1;
            if (lo + 3 >= n) lo = n - 4;
            piece = cubic_piece_integral(&x[lo], &y[lo], x[i], x[i + 1]);
        }
        F[i + 1] = F[i] + piece;
    }
    return F;
}

/// Integral of y over the whole grid.
inline double integrate_samples(std::span<const double> x, std::span<const double> y)
{
    const auto F = cumulative_integral(x, y);
    return F.empty() ? 0.0 : F.back();
}

/// Finite-difference weights (Fornberg) for derivatives 0..order at x0 from
/// nodes x. Returns w[k][j]: weight of node j for the k-th derivative.
inline std::vector<std::vector<double>> fornberg_weights(double x0, std::span<const double> x, int order)
{
    const std::size_t n = x.size();
    require(n > static_cast<std::size_t>(order), ErrorKind::InvalidArgument, "not enough nodes for the derivative order");
    std::vector<std::vector<double>> c(static_cast<std::size_t>(order) + 1, std::vector<double>(n, 0.0));
    double c1 = 1.0;
    double c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
        const int mn = std::min(static_cast<int>(i), order);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) {
                    c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for (int k = mn; k >= 1; --k) {
                c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    return c;
}

/// Derivative of the given order at every grid point from a `width`-point
/// stencil (centered where possible, one-sided at the ends).
inline std::vector<double> stencil_derivative(std::span<const double> x, std::span<const double> y, int order,
                                              std::size_t width = 7)
{
    require(x.size() == y.size() && x.size() >= width, ErrorKind::InvalidArgument,
            "grid too short for the stencil");
    const std::size_t n = x.size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t lo = (i >= width / 2) ? i - width / 2 : 0;
        if (lo + width > n) lo = n - width;
        const auto w = fornberg_weights(x[i], x.subspan(lo, width), order);
        double s = 0.0;
        for (std::size_t j = 0; j < width; ++j) s += w[order][j] * y[lo + j];
        out[i] = s;
    }
    return out;
}

} // namespace snewton
