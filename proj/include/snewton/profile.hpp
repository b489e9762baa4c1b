#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string_view>
#include <vector>

#include "core.hpp"

namespace snewton {

enum class Termination {
    /// escape predicate held: monotone divergence, classification final
    Escaped,
    /// integration horizon reached without escape
    ReachedRmax,
    /// step budget exhausted
    StepLimit,
    /// stopped once more zeros than IntegrationControls::max_zeros were seen
    ZeroLimit,
    /// bound-state profile cut where the decaying tail ends
    Truncated,
};

inline std::string_view to_string(Termination t)
{
    switch (t) {
        case Termination::Escaped: return "escaped";
        case Termination::ReachedRmax: return "reached_rmax";
        case Termination::StepLimit: return "step_limit";
        case Termination::ZeroLimit: return "zero_limit";
        case Termination::Truncated: return "truncated";
    }
    return "unknown";
}

struct Sample
{
    double r;
    ShootState s;
};

/// Value and first derivative of the quintic Hermite interpolant on [0, h]
/// matching f, f', f'' at both ends.
struct HermiteValue
{
    double f;
    double df;
};

inline HermiteValue hermite5(double f0, double d0, double s0, double f1, double d1, double s1, double h, double t)
{
    const double x = t / h;
    const double x2 = x * x, x3 = x2 * x, x4 = x3 * x, x5 = x4 * x;
    const double h00 = 1 - 10 * x3 + 15 * x4 - 6 * x5;
    const double h10 = x - 6 * x3 + 8 * x4 - 3 * x5;
    const double h20 = 0.5 * x2 - 1.5 * x3 + 1.5 * x4 - 0.5 * x5;
    const double h21 = 0.5 * x3 - x4 + 0.5 * x5;
    const double h11 = -4 * x3 + 7 * x4 - 3 * x5;
    const double h01 = 10 * x3 - 15 * x4 + 6 * x5;
    // derivatives with respect to x
    const double g00 = -30 * x2 + 60 * x3 - 30 * x4;
    const double g10 = 1 - 18 * x2 + 32 * x3 - 15 * x4;
    const double g20 = x - 4.5 * x2 + 6 * x3 - 2.5 * x4;
    const double g21 = 1.5 * x2 - 4 * x3 + 2.5 * x4;
    const double g11 = -12 * x2 + 28 * x3 - 15 * x4;
    const double g01 = -g00;
    const double hh = h * h;
    HermiteValue v;
    v.f = h00 * f0 + h * h10 * d0 + hh * h20 * s0 + hh * h21 * s1 + h * h11 * d1 + h01 * f1;
    v.df = (g00 * f0 + h * g10 * d0 + hh * g20 * s0 + hh * g21 * s1 + h * g11 * d1 + g01 * f1) / h;
    return v;
}

/// One interval of the dense output: end states plus their derivatives.
struct Segment
{
    double r0, r1;
    ShootState s0, s1;
    ShootState f0, f1;

    Segment(double ra, const ShootState& a, double rb, const ShootState& b, const ProblemParams& p)
        : r0(ra)
        , r1(rb)
        , s0(a)
        , s1(b)
        , f0(rhs(ra, a, p))
        , f1(rhs(rb, b, p))
    {
    }

    Segment(double ra, const ShootState& a, const ShootState& fa, double rb, const ShootState& b,
            const ShootState& fb)
        : r0(ra)
        , r1(rb)
        , s0(a)
        , s1(b)
        , f0(fa)
        , f1(fb)
    {
    }

    double width() const { return r1 - r0; }

    HermiteValue u(double r) const
    {
        return hermite5(s0.u, s0.du, f0.du, s1.u, s1.du, f1.du, width(), r - r0);
    }
    HermiteValue V(double r) const
    {
        return hermite5(s0.V, s0.dV, f0.dV, s1.V, s1.dV, f1.dV, width(), r - r0);
    }
    ShootState state(double r) const
    {
        const auto a = u(r);
        const auto b = V(r);
        return {a.f, a.df, b.f, b.df};
    }
};

/// Bisection for a sign change of g on [a, b] (g(a) g(b) <= 0) down to
/// |b - a| <= rtol * max(1, |a|).
template <class G>
double bisect_root(G&& g, double a, double b, double rtol = 1e-12)
{
    double ga = g(a);
    if (ga == 0.0) return a;
    for (int it = 0; it < 200 && (b - a) > rtol * std::max(1.0, std::abs(a)); ++it) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        const double gm = g(mid);
        if (gm == 0.0) return mid;
        if ((gm < 0) == (ga < 0)) {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    return 0.5 * (a + b);
}

/// Zeros of u inside one dense-output segment, ascending. Pairs of zeros
/// inside a single step are caught by subdividing whenever u' changes sign.
inline std::vector<double> segment_u_zeros(const Segment& seg, double root_rtol = 1e-12)
{
    std::vector<double> out;
    auto g = [&](double r) { return seg.u(r).f; };
    const bool ends_change = (seg.s0.u < 0) != (seg.s1.u < 0) && seg.s0.u != 0.0;
    const bool turning = (seg.s0.du < 0) != (seg.s1.du < 0);
    if (!ends_change && !turning) {
        return out;
    }
    constexpr int parts = 8;
    double a = seg.r0, ga = seg.s0.u;
    for (int k = 1; k <= parts; ++k) {
        const double b = (k == parts) ? seg.r1 : seg.r0 + seg.width() * k / parts;
        const double gb = (k == parts) ? seg.s1.u : g(b);
        if (ga != 0.0 && (ga < 0) != (gb < 0)) {
            out.push_back(bisect_root(g, a, b, root_rtol));
        }
        a = b;
        ga = gb;
    }
    return out;
}

/// Sampled trajectory of the rescaled system.
struct Profile
{
    ProblemParams params = make_params(1, 0);
    double u0 = 0.0;
    std::vector<Sample> samples;
    std::vector<double> zeros;
    double r_end = 0.0;
    Termination termination = Termination::ReachedRmax;
    /// index of the first sample of an appended decaying tail (== size when none)
    std::size_t tail_start = std::numeric_limits<std::size_t>::max();

    std::size_t size() const { return samples.size(); }
    double r_begin() const { return samples.front().r; }
    bool has_tail() const { return tail_start < samples.size(); }

    /// Dense output between samples i and i+1.
    Segment segment(std::size_t i) const
    {
        return Segment(samples[i].r, samples[i].s, samples[i + 1].r, samples[i + 1].s, params);
    }

    /// Index i with samples[i].r <= r <= samples[i+1].r.
    std::size_t locate(double r) const
    {
        require(samples.size() >= 2 && r >= samples.front().r && r <= samples.back().r, ErrorKind::OutOfRange,
                "radius outside the sampled range");
        auto it = std::upper_bound(samples.begin(), samples.end(), r,
                                   [](double x, const Sample& s) { return x < s.r; });
        std::size_t i = static_cast<std::size_t>(it - samples.begin());
        return std::min(i == 0 ? 0 : i - 1, samples.size() - 2);
    }

    ShootState state_at(double r) const { return segment(locate(r)).state(r); }

    /// Radius where V first reaches `level` (V is increasing), or NaN.
    double radius_where_v_reaches(double level) const
    {
        for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
            if (samples[i].s.V < level && samples[i + 1].s.V >= level) {
                const Segment seg = segment(i);
                return bisect_root([&](double r) { return seg.V(r).f - level; }, seg.r0, seg.r1);
            }
        }
        return std::numeric_limits<double>::quiet_NaN();
    }

    /// Re-runs zero location on the stored dense output.
    std::vector<double> locate_zeros() const
    {
        std::vector<double> z;
        for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
            auto part = segment_u_zeros(segment(i));
            z.insert(z.end(), part.begin(), part.end());
        }
        return z;
    }
};

} // namespace snewton
