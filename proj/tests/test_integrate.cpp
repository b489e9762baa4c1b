#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include <boost/math/special_functions/bessel.hpp>

#include <snewton/snewton.hpp>

#include "oracles.hpp"

using namespace snewton;

namespace {

IntegrationControls until(double r_max)
{
    IntegrationControls c;
    c.r_max = r_max;
    return c;
}

int count(const Trajectory& t, EventKind k)
{
    return static_cast<int>(std::count_if(t.events.begin(), t.events.end(), [&](auto& e) { return e.kind == k; }));
}

} // namespace

struct RefCase
{
    int d;
    double m;
    double u0;
};

class FixedStepReference : public ::testing::TestWithParam<RefCase>
{
};

TEST_P(FixedStepReference, AgreesWithRk4)
{
    const auto [d, m, u0] = GetParam();
    const auto sys = oracle::general(d, m);
    IntegrationControls c = until(6.0);
    c.stop_on_escape = false;
    const auto tr = integrate(u0, make_params(d, m), c);
    auto y = oracle::taylor(u0, sys, 0.01);
    double r = 0.01;
    // escaping trajectories blow up at finite radius
    const double r_end = std::min(6.0, tr.profile.r_end);
    for (double target : {0.2 * r_end, 0.5 * r_end, 0.9 * r_end}) {
        y = oracle::rk4(sys, r, y, target, 1e-3);
        r = target;
        const auto s = tr.profile.state_at(target);
        EXPECT_NEAR(s.u, y[0], 1e-8 * std::max(u0, std::abs(y[0]))) << "r=" << target;
        EXPECT_NEAR(s.du, y[1], 1e-8 * std::max(u0, std::abs(y[1]))) << "r=" << target;
        EXPECT_NEAR(s.V, y[2], 1e-8 * std::max(1.0, y[2])) << "r=" << target;
        EXPECT_NEAR(s.dV, y[3], 1e-8 * std::max(1.0, y[3])) << "r=" << target;
    }
}

INSTANTIATE_TEST_SUITE_P(Families, FixedStepReference,
                         ::testing::Values(RefCase{2, 0, 1.0}, RefCase{2, 1, 0.7}, RefCase{1, 0, 1.5},
                                           RefCase{1, 1, 0.5}, RefCase{2, 0.5, 2.0}));

TEST(FrozenPotential, BesselZeros)
{
    const auto p = make_params(2, 0, System::FrozenPotential);
    const auto tr = integrate(1.0, p, until(20.0));
    const auto& z = tr.profile.zeros;
    ASSERT_GE(z.size(), 6u);
    EXPECT_NEAR(z[0], 2.404826, 1e-6);
    EXPECT_NEAR(z[1], 5.520078, 1e-6);
    for (std::size_t k = 0; k < z.size(); ++k) {
        EXPECT_NEAR(z[k], boost::math::cyl_bessel_j_zero(0.0, int(k) + 1), 1e-9);
    }
}

TEST(FrozenPotential, MatchesComparisonSolution)
{
    for (auto [d, m] : {std::pair{2, 1.0}, std::pair{1, 0.0}, std::pair{1, 1.0}, std::pair{2, 2.5}}) {
        const double u0 = 0.8;
        const double nu = (2 * m + d - 2) / 2.0;
        const auto tr = integrate(u0, make_params(d, m, System::FrozenPotential), until(30.0));
        for (double r = 0.5; r < 30.0; r += 0.75) {
            const double ubar = u0 * std::tgamma(m + d / 2.0) * std::pow(2.0 / r, nu) * boost::math::cyl_bessel_j(nu, r);
            EXPECT_NEAR(tr.profile.state_at(r).u, ubar, 1e-8) << "d=" << d << " m=" << m << " r=" << r;
        }
    }
}

TEST(Escape, LargeInitialValue)
{
    const auto tr = integrate(10.0, make_params(2, 0));
    const auto esc = tr.first(EventKind::Escape);
    ASSERT_TRUE(esc.has_value());
    EXPECT_GT(esc->state.u, 0.0);
    EXPECT_EQ(count(tr, EventKind::UZero), 0);
    EXPECT_EQ(tr.profile.termination, Termination::Escaped);
}

TEST(Escape, Predicate)
{
    IntegrationControls c;
    const double u0 = 0.5;
    EXPECT_TRUE(escape_predicate({3 * u0, 1.0, 2.0, 1.0}, u0, c));
    EXPECT_TRUE(escape_predicate({-3 * u0, -1.0, 2.0, 1.0}, u0, c));
    for (double u : {-10.0, 0.1, 3.0, 100.0}) {
        EXPECT_FALSE(escape_predicate({u, u, 0.5, 1.0}, u0, c));
    }
    EXPECT_FALSE(escape_predicate({3 * u0, -1.0, 2.0, 1.0}, u0, c));
    EXPECT_FALSE(escape_predicate({1.5 * u0, 1.0, 2.0, 1.0}, u0, c));
}

TEST(Escape, VerdictIsFinal)
{
    // continuing well past the escape radius adds no sign change
    for (auto [d, m, u0] : {std::tuple{2, 0.0, 10.0}, std::tuple{2, 0.0, 0.9}, std::tuple{1, 0.0, 0.5},
                            std::tuple{2, 1.0, 0.3}, std::tuple{1, 1.0, 3.0}}) {
        const auto p = make_params(d, m);
        const auto first = integrate(u0, p);
        const auto esc = first.first(EventKind::Escape);
        ASSERT_TRUE(esc.has_value()) << "u0=" << u0;
        IntegrationControls c = until(1.5 * esc->r);
        c.stop_on_escape = false;
        const auto longer = integrate(u0, p, c);
        const int zeros_before = static_cast<int>(first.profile.zeros.size());
        EXPECT_EQ(static_cast<int>(longer.profile.zeros.size()), zeros_before) << "u0=" << u0;
        EXPECT_EQ(longer.profile.samples.back().s.u > 0, esc->state.u > 0);
    }
}

TEST(SmallInitialValue, TwoZerosBeforeHalfRadiusBound)
{
    const double u0 = 1e-3;
    const auto p = make_params(2, 0);
    const double B = p.half_radius_lower_bound(u0);
    EXPECT_NEAR(B, 1000.0, 1e-9);
    const auto tr = integrate(u0, p, until(B));
    const int zeros = count(tr, EventKind::UZero);
    EXPECT_GE(zeros, 2);
    EXPECT_EQ(zeros, oracle::reference_zero_count(u0, oracle::general(2, 0), B, 0.01));
}

TEST(Events, Invariants)
{
    for (auto [d, m, u0] : {std::tuple{2, 0.0, 1.0}, std::tuple{2, 0.0, 0.5}, std::tuple{1, 0.0, 0.3},
                            std::tuple{2, 1.0, 0.4}, std::tuple{1, 1.0, 2.0}}) {
        const auto p = make_params(d, m);
        const IntegrationControls c;
        const auto tr = integrate(u0, p, c);
        EXPECT_TRUE(std::is_sorted(tr.events.begin(), tr.events.end(),
                                   [](auto& a, auto& b) { return a.r < b.r; }));
        EXPECT_EQ(count(tr, EventKind::VReachesOne), 1);
        EXPECT_EQ(count(tr, EventKind::VReachesHalf), 1);
        const double a = tr.first(EventKind::VReachesOne)->r;
        const double b = tr.first(EventKind::VReachesHalf)->r;
        EXPECT_LT(b, a);
        EXPECT_GE(b, p.half_radius_lower_bound(u0));
        EXPECT_NEAR(tr.first(EventKind::VReachesOne)->state.V, 1.0, 1e-10);
        for (const auto& e : tr.events) {
            if (e.kind != EventKind::UZero) continue;
            EXPECT_LT(std::abs(e.state.u), 10 * c.abs_tol * u0);
            EXPECT_GT(std::abs(e.state.du), 0.0);
        }
        // zero location is reproducible from the stored dense output
        const auto again = tr.profile.locate_zeros();
        ASSERT_EQ(again.size(), tr.profile.zeros.size());
        for (std::size_t k = 0; k < again.size(); ++k) {
            EXPECT_NEAR(again[k], tr.profile.zeros[k], 1e-12 * std::max(1.0, again[k]));
        }
    }
}

TEST(Tolerance, HalvingChangesLittle)
{
    for (auto [d, m, u0] : {std::tuple{2, 0.0, 2.0}, std::tuple{2, 0.0, 0.8}, std::tuple{1, 1.0, 1.0}}) {
        const auto p = make_params(d, m);
        const IntegrationControls c;
        const auto coarse = integrate(u0, p, c);
        const auto fine = integrate(u0, p, c.scaled_tolerances(0.5));
        const double r = 0.5 * std::min(coarse.profile.r_end, fine.profile.r_end);
        const double diff = std::abs(coarse.profile.state_at(r).u - fine.profile.state_at(r).u);
        EXPECT_LT(diff, 10 * c.rel_tol * std::max(u0, std::abs(fine.profile.state_at(r).u))) << "u0=" << u0;
    }
}

TEST(Controls, Validation)
{
    const auto p = make_params(2, 0);
    IntegrationControls c;
    c.escape_factor = 1.5;
    EXPECT_THROW(integrate(1.0, p, c), Error);
    c = {};
    c.rel_tol = 0;
    EXPECT_THROW(integrate(1.0, p, c), Error);
    c = {};
    c.r_max = 1e-9;
    EXPECT_THROW(integrate(1.0, p, c), Error);
    EXPECT_THROW(integrate(1.0, make_params(2, 0, System::FrozenPotential)), Error);
    EXPECT_THROW(integrate(-1.0, p), Error);
}

TEST(Controls, StepAndZeroLimits)
{
    const auto p = make_params(2, 0);
    IntegrationControls c;
    c.max_steps = 10;
    EXPECT_EQ(integrate(1.0, p, c).profile.termination, Termination::StepLimit);
    c = until(1e4);
    c.max_zeros = 2;
    const auto tr = integrate(0.01, p, c);
    EXPECT_EQ(tr.profile.termination, Termination::ZeroLimit);
    EXPECT_EQ(tr.profile.zeros.size(), 3u);
}
