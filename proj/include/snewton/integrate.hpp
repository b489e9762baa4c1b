#pragma once

/// \file integrate.hpp
/// Adaptive integration of one trajectory from the regular start, with
/// event location on the dense output and escape (blow-up) detection.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "dopri.hpp"
#include "profile.hpp"

namespace snewton {

struct IntegrationControls
{
    double rel_tol = 1e-10;
    /// Absolute tolerance; for the u-components it is taken relative to u0,
    /// for V and V' relative to their values at the origin offset.
    double abs_tol = 1e-12;
    /// Absolute integration horizon. When unset the horizon is the radius a
    /// where V = 1 plus `tail_horizon`.
    std::optional<double> r_max;
    /// Length integrated past V = 1 when r_max is unset.
    double tail_horizon = std::min(200.0, 50.0 / std::sqrt(0.1));
    double escape_factor = 2.0;
    std::optional<double> eps_origin;
    std::size_t max_steps = 20'000'000;
    double max_step = 1.0;
    /// When false the integration runs on past escape until r_max or until
    /// |u| overflows 1e100 (used to confirm that escape verdicts are final).
    bool stop_on_escape = true;
    /// Stop as soon as the zero count exceeds this (node-count lower bounds).
    std::optional<std::size_t> max_zeros;

    double origin_offset(const ProblemParams& p) const { return eps_origin.value_or(default_origin_offset(p)); }

    void validate(const ProblemParams& p) const
    {
        require(rel_tol > 0 && abs_tol > 0, ErrorKind::InvalidArgument, "tolerances must be positive");
        require(escape_factor >= 2.0, ErrorKind::InvalidArgument, "escape_factor must be >= 2");
        require(max_step > 0, ErrorKind::InvalidArgument, "max_step must be positive");
        require(tail_horizon > 0, ErrorKind::InvalidArgument, "tail_horizon must be positive");
        const double eps = origin_offset(p);
        require(eps > 0, ErrorKind::InvalidArgument, "origin offset must be positive");
        if (r_max) {
            require(*r_max > eps, ErrorKind::InvalidArgument, "r_max must exceed the origin offset");
        }
        require(r_max.has_value() || p.system() != System::FrozenPotential, ErrorKind::InvalidArgument,
                "the frozen-potential problem needs an explicit r_max");
    }

    /// Same controls with both tolerances multiplied by `factor`.
    IntegrationControls scaled_tolerances(double factor) const
    {
        IntegrationControls c = *this;
        c.rel_tol *= factor;
        c.abs_tol *= factor;
        return c;
    }
};

enum class EventKind { UZero, VReachesOne, VReachesHalf, Escape };

inline std::string_view to_string(EventKind k)
{
    switch (k) {
        case EventKind::UZero: return "u_zero";
        case EventKind::VReachesOne: return "v_reaches_one";
        case EventKind::VReachesHalf: return "v_reaches_half";
        case EventKind::Escape: return "escape";
    }
    return "unknown";
}

struct EventRecord
{
    EventKind kind;
    double r;
    ShootState state;
};

struct Trajectory
{
    Profile profile;
    std::vector<EventRecord> events;

    std::optional<EventRecord> first(EventKind k) const
    {
        for (const auto& e : events) {
            if (e.kind == k) return e;
        }
        return std::nullopt;
    }
};

/// True once the trajectory is past V = 1 with u and u' of equal sign and
/// |u| beyond escape_factor * u0; from there on it diverges monotonically.
inline bool escape_predicate(const ShootState& s, double u0, const IntegrationControls& c)
{
    return s.V > 1.0 && s.away_from_zero() && std::abs(s.u) > c.escape_factor * u0;
}

namespace detail {

inline std::vector<EventRecord> segment_events(const Segment& seg)
{
    std::vector<EventRecord> ev;
    for (double z : segment_u_zeros(seg)) {
        ev.push_back({EventKind::UZero, z, seg.state(z)});
    }
    for (auto [level, kind] : {std::pair{0.5, EventKind::VReachesHalf}, std::pair{1.0, EventKind::VReachesOne}}) {
        if (seg.s0.V < level && seg.s1.V >= level) {
            const double r = bisect_root([&](double x) { return seg.V(x).f - level; }, seg.r0, seg.r1);
            ev.push_back({kind, r, seg.state(r)});
        }
    }
    std::sort(ev.begin(), ev.end(), [](const EventRecord& a, const EventRecord& b) { return a.r < b.r; });
    return ev;
}

/// Core loop. With keep_samples = false only events are collected (the
/// profile then holds the first and last samples only).
inline Trajectory run(double u0, const ProblemParams& p, const IntegrationControls& c, bool keep_samples)
{
    c.validate(p);
    const double eps = c.origin_offset(p);
    ShootState start = origin_series(u0, p, eps);

    Trajectory out;
    Profile& prof = out.profile;
    prof.params = p;
    prof.u0 = u0;

    using V4 = dopri::Vec<4>;
    auto f = [&p](double r, const V4& y) { return rhs(r, ShootState::from_array(y), p).as_array(); };
    // V and V' are positive and increasing, so their tolerance is scaled by
    // the starting values; this keeps them relatively accurate near the origin
    // where they are as small as u0^2 eps^(2m+2).
    const double v_scale = start.V > 0 ? std::min(1.0, start.V) : 1.0;
    const double dv_scale = start.dV > 0 ? std::min(1.0, start.dV) : 1.0;
    const V4 atol{c.abs_tol * u0, c.abs_tol * u0, c.abs_tol * v_scale, c.abs_tol * dv_scale};

    double r = eps;
    V4 y = start.as_array();
    V4 k1 = f(r, y);
    prof.samples.push_back({r, start});

    constexpr double hard_cap = 1e7;
    double r_limit = c.r_max.value_or(hard_cap);
    double h = dopri::initial_step(y, k1, atol, c.rel_tol, r, c.max_step);
    dopri::PIController ctl;
    bool v_one_seen = false;
    bool escaped = false;
    Sample last{r, start};

    std::size_t steps = 0;
    for (;;) {
        if (r >= r_limit) {
            prof.termination = Termination::ReachedRmax;
            break;
        }
        if (steps >= c.max_steps) {
            prof.termination = Termination::StepLimit;
            break;
        }
        h = std::min(h, c.max_step);
        bool clipped = false;
        if (r + h >= r_limit) {
            h = r_limit - r;
            clipped = true;
        }
        if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, r)) {
            if (escape_predicate(ShootState::from_array(y), u0, c)) {
                if (!escaped) {
                    out.events.push_back({EventKind::Escape, r, ShootState::from_array(y)});
                }
                prof.termination = Termination::Escaped;
                break;
            }
            throw Error(ErrorKind::StepSizeUnderflow,
                        "step size underflow at r=" + std::to_string(r) + " for u0=" + std::to_string(u0));
        }

        V4 y_new, k7, err;
        dopri::step<4>(f, r, y, k1, h, y_new, k7, err);
        bool finite = true;
        for (double v : y_new) finite = finite && std::isfinite(v);
        const double en = finite ? dopri::error_norm<4>(err, y, y_new, atol, c.rel_tol) : 1e10;
        if (!(en <= 1.0)) {
            h = ctl.propose(h, en, false);
            continue;
        }
        const double h_next = ctl.propose(h, en, true);
        const double r_new = clipped ? r_limit : r + h;
        ++steps;

        const ShootState s_new = ShootState::from_array(y_new);
        const Segment seg(r, ShootState::from_array(y), ShootState::from_array(k1), r_new, s_new,
                          ShootState::from_array(k7));
        for (auto& e : segment_events(seg)) {
            if (e.kind == EventKind::UZero) {
                prof.zeros.push_back(e.r);
            }
            if (e.kind == EventKind::VReachesOne && !v_one_seen) {
                v_one_seen = true;
                if (!c.r_max) {
                    r_limit = e.r + c.tail_horizon;
                }
            }
            out.events.push_back(e);
        }

        r = r_new;
        y = y_new;
        k1 = k7;
        h = h_next;
        last = {r, s_new};
        if (keep_samples) {
            prof.samples.push_back(last);
        }

        if (c.max_zeros && prof.zeros.size() > *c.max_zeros) {
            prof.termination = Termination::ZeroLimit;
            break;
        }
        if (escape_predicate(s_new, u0, c)) {
            if (!escaped) {
                out.events.push_back({EventKind::Escape, r, s_new});
                escaped = true;
            }
            if (c.stop_on_escape || std::abs(s_new.u) > 1e100) {
                prof.termination = Termination::Escaped;
                break;
            }
        }
    }
    if (!keep_samples && last.r > prof.samples.back().r) {
        prof.samples.push_back(last);
    }
    prof.r_end = prof.samples.back().r;
    return out;
}

} // namespace detail

/// Integrates the trajectory with u(0) = u0 from the regular start at the
/// origin offset, storing every accepted step.
inline Trajectory integrate(double u0, const ProblemParams& p, const IntegrationControls& c = {})
{
    return detail::run(u0, p, c, true);
}

} // namespace snewton
