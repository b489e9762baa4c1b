#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include <boost/math/special_functions/bessel.hpp>

#include <snewton/snewton.hpp>

using namespace snewton;

TEST(Bessel, ConstantTermAtOrigin)
{
    EXPECT_NEAR(bessel_j(0.0, 1e-12), 1.0, 1e-15);
    EXPECT_NEAR(bessel_j(1.0, 1e-10), 5e-11, 1e-24);
}

TEST(Bessel, ReferenceValues)
{
    // J0, J1 against Boost; J_{1/2} against its closed form
    for (double r : {0.5, 2.0, 9.0}) {
        EXPECT_NEAR(bessel_j(0.0, r), boost::math::cyl_bessel_j(0.0, r), 1e-13);
        EXPECT_NEAR(bessel_j(1.0, r), boost::math::cyl_bessel_j(1.0, r), 1e-13);
        EXPECT_NEAR(bessel_j(0.5, r), std::sqrt(2.0 / (std::numbers::pi * r)) * std::sin(r), 1e-13);
    }
}

TEST(Bessel, MatchesBoostAcrossOrdersAndRange)
{
    double worst = 0.0;
    for (double nu : {-0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 3.5, 6.0}) {
        for (double r = 0.05; r <= 60.0; r += 0.173) {
            worst = std::max(worst, std::abs(bessel_j(nu, r) - boost::math::cyl_bessel_j(nu, r)));
        }
    }
    EXPECT_LT(worst, 1e-11);
}

TEST(Bessel, HalfOrderNegative)
{
    for (double r : {0.3, 4.0, 30.0}) {
        EXPECT_NEAR(bessel_j(-0.5, r), std::sqrt(2.0 / (std::numbers::pi * r)) * std::cos(r), 1e-12);
    }
}

TEST(Bessel, OutOfRange)
{
    try {
        bessel_j(0.0, 61.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::OutOfRange);
    }
    EXPECT_THROW(bessel_j(-1.5, 1.0), Error);
}

TEST(Bessel, ZerosOfJ0)
{
    const auto z = bessel_j_zeros(0.0, 60.0);
    ASSERT_GE(z.size(), 18u);
    EXPECT_NEAR(z[0], 2.404826, 1e-6);
    EXPECT_NEAR(z[1], 5.520078, 1e-6);
    for (std::size_t k = 0; k < z.size(); ++k) {
        EXPECT_NEAR(z[k], boost::math::cyl_bessel_j_zero(0.0, int(k) + 1), 1e-10);
    }
}

TEST(Bessel, ZerosOfHigherOrders)
{
    for (double nu : {1.0, 2.5, 5.0}) {
        const auto z = bessel_j_zeros(nu, 40.0);
        for (std::size_t k = 0; k < z.size(); ++k) {
            EXPECT_NEAR(z[k], boost::math::cyl_bessel_j_zero(nu, int(k) + 1), 1e-10) << "nu=" << nu;
        }
    }
}

TEST(Bessel, ComparisonSolutionSolvesLinearProblem)
{
    // ubar = u0 Gamma(m+d/2) (2/r)^nu J_nu(r) with nu = (2m+d-2)/2 solves
    // ubar'' + (2m+d-1)/r ubar' + ubar = 0. Residual by finite differences of
    // extended-precision Boost values; the library's J_nu is then compared to
    // the same function pointwise.
    for (auto [d, m] : {std::pair{2, 0.0}, std::pair{2, 1.0}, std::pair{1, 0.0}, std::pair{1, 1.0}, std::pair{2, 2.5}}) {
        using ld = long double;
        const ld nu = (2 * m + d - 2) / 2.0L;
        const ld c = 2 * m + d - 1;
        const ld gamma = std::tgamma(static_cast<ld>(m + d / 2.0));
        auto ubar = [&](ld r) { return gamma * std::pow(2.0L / r, nu) * boost::math::cyl_bessel_j(nu, r); };
        const ld h = 1e-3L;
        double worst = 0.0, worst_lib = 0.0;
        for (ld r = 0.1L; r <= 10.0L; r += 0.05L) {
            const ld f0 = ubar(r), fp = ubar(r + h), fm = ubar(r - h);
            const ld fpp = ubar(r + 2 * h), fmm = ubar(r - 2 * h);
            const ld d1 = (-fpp + 8 * fp - 8 * fm + fmm) / (12 * h);
            const ld d2 = (-fpp + 16 * fp - 30 * f0 + 16 * fm - fmm) / (12 * h * h);
            worst = std::max(worst, static_cast<double>(std::abs(d2 + c / r * d1 + f0)));
            const double lib = static_cast<double>(gamma) * std::pow(2.0 / double(r), double(nu)) *
                               bessel_j(double(nu), double(r));
            worst_lib = std::max(worst_lib, std::abs(lib - static_cast<double>(f0)));
        }
        EXPECT_LT(worst, 1e-8) << "d=" << d << " m=" << m;
        EXPECT_LT(worst_lib, 1e-11) << "d=" << d << " m=" << m;
    }
}

TEST(Quadrature, PolynomialsOnNonuniformGrid)
{
    std::vector<double> x, y;
    for (int i = 0; i <= 40; ++i) {
        const double t = i / 40.0;
        x.push_back(3.0 * t * t + 0.1 * t);
        y.push_back(x.back() * x.back() * x.back() - 2 * x.back());
    }
    const double X = x.back();
    EXPECT_NEAR(integrate_samples(x, y), X * X * X * X / 4 - X * X, 1e-10);
    const auto cum = cumulative_integral(x, y);
    ASSERT_EQ(cum.size(), x.size());
    EXPECT_EQ(cum.front(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_NEAR(cum[i], std::pow(x[i], 4) / 4 - x[i] * x[i], 1e-10);
    }
}

TEST(Quadrature, SmoothFunction)
{
    std::vector<double> x, y;
    for (int i = 0; i <= 2000; ++i) {
        x.push_back(std::numbers::pi * i / 2000.0);
        y.push_back(std::sin(x.back()));
    }
    EXPECT_NEAR(integrate_samples(x, y), 2.0, 1e-10);
}

TEST(Quadrature, FornbergStencil)
{
    std::vector<double> x, y;
    for (int i = 0; i < 200; ++i) {
        x.push_back(0.05 * i + 0.001 * std::sin(double(i)));
        y.push_back(std::exp(-x.back()) * std::cos(x.back()));
    }
    const auto d1 = stencil_derivative(x, y, 1);
    const auto d2 = stencil_derivative(x, y, 2);
    double e1 = 0, e2 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = x[i];
        e1 = std::max(e1, std::abs(d1[i] + std::exp(-r) * (std::cos(r) + std::sin(r))));
        e2 = std::max(e2, std::abs(d2[i] - 2 * std::exp(-r) * std::sin(r)));
    }
    EXPECT_LT(e1, 5e-8);
    EXPECT_LT(e2, 5e-6);
    const auto w = fornberg_weights(0.0, std::vector<double>{-1, 0, 1}, 2);
    EXPECT_NEAR(w[2][0], 1.0, 1e-15);
    EXPECT_NEAR(w[2][1], -2.0, 1e-15);
    EXPECT_NEAR(w[1][2], 0.5, 1e-15);
}
