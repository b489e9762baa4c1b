#pragma once

// Generated by make_fixtures (rel_tol 5e-11, abs_tol 5e-13, bisection width 5e-13).

#include <array>

namespace fixtures {

struct AlphaFixture
{
    int d;
    double m;
    int n;
    double alpha;
};

inline constexpr std::array<AlphaFixture, 18> alphas{{
    {2, 0.0, 0, 1.2134344293519916},
    {2, 0.0, 1, 0.64825240551448671},
    {2, 0.0, 2, 0.4937184140751974},
    {2, 0.0, 3, 0.41447908026663094},
    {2, 0.0, 4, 0.36427392162403449},
    {2, 0.0, 5, 0.32881817683541892},
    {2, 0.5, 0, 0.91298275783879035},
    {2, 0.5, 1, 0.51287206424623411},
    {2, 0.5, 2, 0.3931740156153215},
    {2, 1.0, 0, 0.54541317717917082},
    {2, 1.0, 1, 0.31774466534737045},
    {2, 1.0, 2, 0.24528317979496339},
    {1, 0.0, 0, 1.5583977884768956},
    {1, 0.0, 1, 0.37990420172337336},
    {1, 0.0, 2, 0.21283746518971919},
    {1, 1.0, 0, 0.70756705046437673},
    {1, 1.0, 1, 0.28056011636464517},
    {1, 1.0, 2, 0.17630965707732726},
}};

} // namespace fixtures
