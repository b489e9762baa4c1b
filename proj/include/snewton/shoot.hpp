#pragma once

/// \file shoot.hpp
/// Classification of initial values by node count and escape sign, and
/// location of the bound-state values alpha_{m,n} by bracketing plus
/// bisection.

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "analysis.hpp"
#include "integrate.hpp"
#include "tail.hpp"

namespace snewton {

enum class Verdict { EscapedPositive, EscapedNegative, Undecided };

inline std::string_view to_string(Verdict v)
{
    switch (v) {
        case Verdict::EscapedPositive: return "escaped_positive";
        case Verdict::EscapedNegative: return "escaped_negative";
        case Verdict::Undecided: return "undecided";
    }
    return "unknown";
}

struct Classification
{
    double u0 = 0.0;
    /// zeros of u before the escape radius (a lower bound when undecided)
    int nodes = 0;
    /// sign of u at escape
    Verdict verdict = Verdict::Undecided;
    std::optional<double> r_escape;
    Termination termination = Termination::ReachedRmax;
    double r_end = 0.0;

    bool escaped() const { return verdict != Verdict::Undecided; }
};

/// Integrates from u0 until escape (or the horizon) and counts zeros.
inline Classification classify(double u0, const ProblemParams& p, const IntegrationControls& c = {})
{
    require(u0 > 0.0 && std::isfinite(u0), ErrorKind::InvalidArgument, "u0 must be positive");
    const Trajectory tr = detail::run(u0, p, c, false);
    Classification cl;
    cl.u0 = u0;
    cl.termination = tr.profile.termination;
    cl.r_end = tr.profile.r_end;
    const auto esc = tr.first(EventKind::Escape);
    std::size_t nodes = tr.profile.zeros.size();
    if (esc) {
        cl.r_escape = esc->r;
        cl.verdict = esc->state.u > 0 ? Verdict::EscapedPositive : Verdict::EscapedNegative;
        nodes = 0;
        for (double z : tr.profile.zeros) {
            if (z < esc->r) ++nodes;
        }
    }
    cl.nodes = static_cast<int>(nodes);
    return cl;
}

struct Bracket
{
    double lo = 0.0;
    double hi = 0.0;
    /// classify(lo): at least n+1 zeros
    Classification at_lo;
    /// classify(hi): escaped with at most n zeros
    Classification at_hi;
};

struct BoundState
{
    ProblemParams params = make_params(1, 0);
    int n = 0;
    double alpha = 0.0;
    Bracket bracket;
    Profile profile;
    DiagnosticsReport diagnostics;
    /// absent when the profile has no qualifying tail
    std::optional<DecayTrace> decay;
};

namespace detail {

/// Classification used while bracketing the n-th state: stops once n+2 zeros
/// are seen, and retries undecided runs with longer horizons.
inline Classification classify_for_level(double u0, int n, const ProblemParams& p, const IntegrationControls& c)
{
    IntegrationControls cc = c;
    cc.max_zeros = static_cast<std::size_t>(n) + 1;
    Classification cl = classify(u0, p, cc);
    for (int retry = 0; retry < 3 && !cl.escaped() && cl.nodes <= n && !c.r_max; ++retry) {
        cc.tail_horizon *= 4.0;
        cl = classify(u0, p, cc);
    }
    return cl;
}

inline bool above_level(const Classification& cl, int n) { return cl.escaped() && cl.nodes <= n; }
inline bool below_level(const Classification& cl, int n) { return cl.nodes >= n + 1; }

} // namespace detail

/// Geometric scan from `seed`: doubling until the trajectory escapes with at
/// most n zeros, halving until it has at least n+1.
inline Bracket bracket_alpha(int n, const ProblemParams& p, const IntegrationControls& c = {}, double seed = 1.0)
{
    require(n >= 0, ErrorKind::InvalidArgument, "node index must be nonnegative");
    require(seed > 0.0 && std::isfinite(seed), ErrorKind::InvalidArgument, "scan seed must be positive");
    constexpr int max_moves = 200;
    int moves = 0;
    auto move = [&] {
        require(++moves <= max_moves, ErrorKind::ScanExhausted,
                "no bracket for n=" + std::to_string(n) + " after " + std::to_string(max_moves) +
                    " scan steps (r_max too small?)");
    };

    Bracket br;
    bool have_lo = false;
    double u = seed;
    Classification cl = detail::classify_for_level(u, n, p, c);
    while (!detail::above_level(cl, n)) {
        if (detail::below_level(cl, n)) {
            br.lo = u;
            br.at_lo = cl;
            have_lo = true;
        }
        move();
        u *= 2.0;
        cl = detail::classify_for_level(u, n, p, c);
    }
    br.hi = u;
    br.at_hi = cl;
    while (!have_lo) {
        move();
        u *= 0.5;
        cl = detail::classify_for_level(u, n, p, c);
        if (detail::below_level(cl, n)) {
            br.lo = u;
            br.at_lo = cl;
            have_lo = true;
        } else if (detail::above_level(cl, n)) {
            br.hi = u;
            br.at_hi = cl;
        }
    }
    return br;
}

/// Options for building the bound-state profile at alpha.
struct ProfileOptions
{
    /// largest step of the stored profile (sample density for later
    /// finite differences and quadratures)
    double max_step = 0.05;
    /// the shooting part is kept while the bracket ends agree to this
    /// fraction of |u|
    double agreement = 1e-6;
    TailOptions tail;
};

namespace detail {

/// Profile at alpha: the shooting part while it is still determined by the
/// bracket, then the decaying branch continued by the tail sweeps.
inline Profile bound_state_profile(double alpha, const Bracket& br, int n, const ProblemParams& p,
                                   const IntegrationControls& c, const ProfileOptions& po)
{
    IntegrationControls pc = c;
    pc.max_step = std::min(c.max_step, po.max_step);
    pc.max_zeros.reset();
    pc.stop_on_escape = true;
    Profile mid = integrate(alpha, p, pc).profile;
    const Profile hi = integrate(br.hi, p, pc).profile;
    const Profile lo = integrate(br.lo, p, pc).profile;

    const double a = mid.radius_where_v_reaches(1.0);
    if (!std::isfinite(a) || hi.zeros.size() < static_cast<std::size_t>(n)) {
        return mid;
    }
    const double r_start = std::max(a, n > 0 ? hi.zeros[static_cast<std::size_t>(n) - 1] : 0.0);
    const double r_common = std::min(hi.samples.back().r, lo.samples.back().r);

    const auto& S = mid.samples;
    std::size_t i0 = 0;
    while (i0 < S.size() && !(S[i0].r > r_start && S[i0].s.toward_zero())) ++i0;
    if (i0 >= S.size()) {
        return mid;
    }
    double weighted_peak = 0.0;
    for (const auto& smp : S) {
        weighted_peak = std::max(weighted_peak, std::pow(smp.r, p.m()) * std::abs(smp.s.u));
        if (smp.r > r_start) break;
    }
    const double u_floor = po.tail.u_floor * mid.u0;
    const double weighted_floor = po.tail.u_floor * weighted_peak;
    std::size_t ic = i0;
    std::optional<std::size_t> cut;
    for (std::size_t i = i0; i < S.size() && S[i].r <= r_common; ++i) {
        const ShootState& s = S[i].s;
        if (!(s.toward_zero() && s.V > 1.0)) break;
        const double spread = std::abs(hi.state_at(S[i].r).u - lo.state_at(S[i].r).u);
        if (spread > po.agreement * std::abs(s.u)) break;
        ic = i;
        const double z = -(s.du / s.u) / std::sqrt(s.V);
        const bool small = std::abs(s.u) < u_floor && std::pow(S[i].r, p.m()) * std::abs(s.u) < weighted_floor;
        if (small && std::abs(z - 1.0) < po.tail.z_window) {
            cut = i;
            break;
        }
    }

    Profile out;
    out.params = p;
    out.u0 = alpha;
    const std::size_t keep = cut.value_or(ic) + 1;
    out.samples.assign(S.begin(), S.begin() + static_cast<std::ptrdiff_t>(keep));
    out.tail_start = out.samples.size();
    if (!cut) {
        const TailResult tail = continue_decaying_tail(p, alpha, S[ic].r, S[ic].s, po.tail, weighted_peak);
        out.samples.insert(out.samples.end(), tail.samples.begin(), tail.samples.end());
    }
    out.r_end = out.samples.back().r;
    for (double z : mid.zeros) {
        if (z <= S[ic].r) out.zeros.push_back(z);
    }
    out.termination = Termination::Truncated;
    return out;
}

} // namespace detail

/// Bisection of a bracket from bracket_alpha down to hi - lo <= bis_tol
/// (default 1e-12 hi), then the bound-state profile at the midpoint.
inline BoundState refine_alpha(const Bracket& br, int n, const ProblemParams& p, const IntegrationControls& c = {},
                               std::optional<double> bis_tol = std::nullopt, const ProfileOptions& po = {})
{
    require(n >= 0, ErrorKind::InvalidArgument, "node index must be nonnegative");
    require(br.lo > 0.0 && br.lo < br.hi, ErrorKind::InvalidArgument, "bracket must satisfy 0 < lo < hi");
    require(detail::above_level(br.at_hi, n) && detail::below_level(br.at_lo, n), ErrorKind::InvalidArgument,
            "bracket ends are not on opposite sides of level n=" + std::to_string(n));
    if (bis_tol) {
        require(*bis_tol > 0.0, ErrorKind::InvalidArgument, "bisection tolerance must be positive");
    }
    Bracket b = br;
    auto width_ok = [&] { return b.hi - b.lo <= bis_tol.value_or(1e-12 * b.hi); };
    while (!width_ok()) {
        const double mid = 0.5 * (b.lo + b.hi);
        if (mid <= b.lo || mid >= b.hi) break;
        const Classification cl = detail::classify_for_level(mid, n, p, c);
        if (cl.nodes < b.at_hi.nodes || cl.nodes > b.at_lo.nodes) {
            throw Error(ErrorKind::InconsistentVerdict,
                        "u0=" + std::to_string(mid) + " has " + std::to_string(cl.nodes) +
                            " zeros, outside the bracket counts " + std::to_string(b.at_hi.nodes) + ".." +
                            std::to_string(b.at_lo.nodes));
        }
        if (detail::below_level(cl, n)) {
            b.lo = mid;
            b.at_lo = cl;
        } else if (detail::above_level(cl, n)) {
            b.hi = mid;
            b.at_hi = cl;
        } else {
            throw Error(ErrorKind::InconsistentVerdict,
                        "u0=" + std::to_string(mid) + " neither escaped nor exceeded " + std::to_string(n) +
                            " zeros; enlarge the horizon");
        }
    }
    if (b.at_hi.nodes != n || b.at_lo.nodes != n + 1) {
        throw Error(ErrorKind::InconsistentVerdict,
                    "final bracket has " + std::to_string(b.at_hi.nodes) + " and " + std::to_string(b.at_lo.nodes) +
                        " zeros instead of " + std::to_string(n) + " and " + std::to_string(n + 1));
    }

    BoundState bs;
    bs.params = p;
    bs.n = n;
    bs.bracket = b;
    bs.alpha = 0.5 * (b.lo + b.hi);
    bs.profile = detail::bound_state_profile(bs.alpha, b, n, p, c, po);
    bs.diagnostics = check_profile(bs.profile);
    if (has_decaying_tail(bs.profile)) {
        try {
            bs.decay = decay_ratio(bs.profile);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::TailTooShort) throw;
        }
    }
    return bs;
}

/// Bound state with exactly n zeros.
inline BoundState solve_bound_state(int n, const ProblemParams& p, const IntegrationControls& c = {},
                                    std::optional<double> bis_tol = std::nullopt, double seed = 1.0)
{
    try {
        return refine_alpha(bracket_alpha(n, p, c, seed), n, p, c, bis_tol);
    } catch (const Error& e) {
        throw e.with_context("n=" + std::to_string(n));
    }
}

/// Bound states n = 0..n_max; each scan starts from the lower bracket end of
/// the previous state, which already lies above alpha_{n+1}.
inline std::vector<BoundState> ladder(int n_max, const ProblemParams& p, const IntegrationControls& c = {},
                                      std::optional<double> bis_tol = std::nullopt)
{
    require(n_max >= 0, ErrorKind::InvalidArgument, "n_max must be nonnegative");
    std::vector<BoundState> out;
    double seed = 1.0;
    for (int n = 0; n <= n_max; ++n) {
        out.push_back(solve_bound_state(n, p, c, bis_tol, seed));
        seed = out.back().bracket.lo;
    }
    return out;
}

} // namespace snewton
