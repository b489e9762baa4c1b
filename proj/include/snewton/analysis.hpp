#pragma once

/// \file analysis.hpp
/// Executable versions of the qualitative properties of solutions, checked
/// on sampled profiles, plus the Sturm comparison bound on the node count.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "bessel.hpp"
#include "profile.hpp"
#include "quadrature.hpp"

namespace snewton {

struct CheckResult
{
    std::string name;
    bool passed = true;
    /// largest violation found (0 when none)
    double worst = 0.0;
    /// radius of the largest violation (NaN when none)
    double r_worst = std::numeric_limits<double>::quiet_NaN();
    /// tolerance the violation was compared against
    double tolerance = 0.0;
};

struct DiagnosticsReport
{
    std::vector<CheckResult> checks;

    bool all_passed() const
    {
        return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
    }

    std::vector<std::string> failed_names() const
    {
        std::vector<std::string> out;
        for (const auto& c : checks) {
            if (!c.passed) out.push_back(c.name);
        }
        return out;
    }

    const CheckResult* find(std::string_view name) const
    {
        for (const auto& c : checks) {
            if (c.name == name) return &c;
        }
        return nullptr;
    }
};

struct CheckOptions
{
    double rel_tol = 1e-8;
    /// absolute floor added to every tolerance; scaled by u0 for u-quantities
    double abs_tol = 1e-11;
};

namespace detail {

class ViolationTracker
{
  public:
    explicit ViolationTracker(std::string name)
    {
        result_.name = std::move(name);
    }

    /// Records `amount` of violation at r, judged against tolerance `tol`.
    void record(double amount, double r, double tol)
    {
        if (!std::isfinite(amount)) {
            amount = std::numeric_limits<double>::max();
        }
        if (amount > tol) {
            result_.passed = false;
        }
        if (!seen_ || amount > result_.worst) {
            result_.tolerance = tol;
        }
        if (amount > result_.worst) {
            result_.worst = amount;
            result_.r_worst = r;
        }
        seen_ = true;
    }

    CheckResult done() { return std::move(result_); }

  private:
    CheckResult result_;
    bool seen_ = false;
};

/// Number of leading samples on which u > 0 and u' < 0.
inline std::size_t positive_decreasing_prefix(const Profile& prof)
{
    std::size_t n = 0;
    while (n < prof.size() && prof.samples[n].s.u > 0 && prof.samples[n].s.du < 0) ++n;
    return n;
}

} // namespace detail

/// Runs the seven structural checks on a profile:
///   v_increasing, simple_zeros, zeros_beyond_a, lower_bound_u,
///   lower_bound_v, lyapunov, v_log_derivative.
/// The last three bounds assume u positive and decreasing and are evaluated
/// on the leading samples where that holds (the whole profile for ground
/// states); the Lyapunov check runs up to the radius where V = 1/2.
inline DiagnosticsReport check_profile(const Profile& prof, const CheckOptions& opt = {})
{
    require(prof.size() >= 2, ErrorKind::InvalidArgument, "profile has fewer than two samples");
    const auto& S = prof.samples;
    const auto& p = prof.params;
    const double u0 = prof.u0;
    const double rt = opt.rel_tol;
    const double floor_u = opt.abs_tol * u0;
    // V and V' are integrated relative to their values at the origin offset
    const double floor_v = opt.abs_tol * std::min(1.0, std::max(S.front().s.V, std::numeric_limits<double>::min()));
    DiagnosticsReport rep;

    {
        detail::ViolationTracker t("v_increasing");
        for (std::size_t i = 0; i + 1 < S.size(); ++i) {
            const double drop = S[i].s.V - S[i + 1].s.V;
            t.record(drop, S[i + 1].r, rt * std::abs(S[i].s.V) + floor_v);
        }
        rep.checks.push_back(t.done());
    }

    double du_max = 0.0;
    for (const auto& s : S) du_max = std::max(du_max, std::abs(s.s.du));

    {
        detail::ViolationTracker t("simple_zeros");
        const double threshold = rt * du_max + floor_u;
        for (double z : prof.zeros) {
            if (z < prof.r_begin() || z > prof.r_end) continue;
            const ShootState s = prof.state_at(z);
            // a zero counts as degenerate when |u'| there is negligible
            t.record(threshold - std::abs(s.du), z, 0.0);
            const double lo = std::max(prof.r_begin(), z - 1e-6 * std::max(1.0, z));
            const double hi = std::min(prof.r_end, z + 1e-6 * std::max(1.0, z));
            const bool sign_change = (prof.state_at(lo).u < 0) != (prof.state_at(hi).u < 0);
            t.record(sign_change ? 0.0 : 1.0, z, 0.5);
        }
        rep.checks.push_back(t.done());
    }

    const double a = prof.radius_where_v_reaches(1.0);

    {
        detail::ViolationTracker t("zeros_beyond_a");
        std::size_t beyond = 0;
        double r_second = std::numeric_limits<double>::quiet_NaN();
        if (std::isfinite(a)) {
            for (double z : prof.zeros) {
                if (z > a && ++beyond == 2) r_second = z;
            }
        }
        t.record(beyond > 1 ? static_cast<double>(beyond - 1) : 0.0, r_second, 0.0);
        rep.checks.push_back(t.done());
    }

    const std::size_t prefix = detail::positive_decreasing_prefix(prof);
    const double r0sq = p.r0() * p.r0();

    {
        detail::ViolationTracker t("lower_bound_u");
        for (std::size_t i = 0; i < prefix; ++i) {
            const double r = S[i].r;
            const double bound = u0 * (1.0 - r * r / r0sq);
            t.record(bound - S[i].s.u, r, rt * u0 + floor_u);
        }
        rep.checks.push_back(t.done());
    }

    {
        detail::ViolationTracker t("lower_bound_v");
        const double mp1 = p.m() + 1.0;
        for (std::size_t i = 0; i < prefix; ++i) {
            const double r = S[i].r;
            const double u = S[i].s.u;
            const double bound = u * u * std::pow(r, 2.0 * mp1) / (r0sq * mp1);
            t.record(bound - S[i].s.V, r, rt * std::max(S[i].s.V, bound) + floor_v);
        }
        rep.checks.push_back(t.done());
    }

    {
        detail::ViolationTracker t("lyapunov");
        const double b = prof.radius_where_v_reaches(0.5);
        auto F = [](const ShootState& s) { return s.u * s.u * (1.0 - s.V) + s.du * s.du; };
        double f_max = 0.0;
        for (const auto& s : S) {
            if (std::isfinite(b) && s.r > b) break;
            f_max = std::max(f_max, std::abs(F(s.s)));
        }
        for (std::size_t i = 0; i + 1 < S.size(); ++i) {
            if (std::isfinite(b) && S[i + 1].r > b) break;
            t.record(F(S[i + 1].s) - F(S[i].s), S[i + 1].r, rt * f_max + floor_u * floor_u);
            const double u = S[i + 1].s.u;
            t.record(u * u - 2.0 * u0 * u0, S[i + 1].r, rt * u0 * u0);
        }
        rep.checks.push_back(t.done());
    }

    {
        detail::ViolationTracker t("v_log_derivative");
        const double k = 2.0 * (p.m() + 1.0);
        for (std::size_t i = 0; i < prefix; ++i) {
            const double lhs = S[i].r * S[i].s.dV;
            const double rhs_v = k * S[i].s.V;
            t.record(lhs - rhs_v, S[i].r, rt * std::abs(rhs_v) + floor_v);
        }
        rep.checks.push_back(t.done());
    }

    return rep;
}

/// Riccati decay ratio z = -(u'/u) V^{-1/2} on the trailing part of a profile.
struct DecayTrace
{
    std::vector<double> r;
    std::vector<double> z;
    double final_z = 0.0;
    /// |final_z - 1|
    double delta = 0.0;
    /// ln of |u| exp(kappa int_0^r sqrt(V)) at the first and largest trace point
    double log_surrogate_start = 0.0;
    double log_surrogate_max = 0.0;
    double kappa = 0.9;
    /// surrogate stays within a factor 10 of its starting value
    bool surrogate_bounded = false;

    /// Tail decays like a bound state: final z within `window` of 1.
    bool decaying(double window = 0.1) const { return delta <= window; }
};

/// True when the tail of the profile is on a decaying branch past V = 1.
inline bool has_decaying_tail(const Profile& prof)
{
    const auto& s = prof.samples.back().s;
    return s.V > 1.0 && s.toward_zero();
}

/// z over the radii r >= 0.8 r_end where V > 1 and u != 0.
inline DecayTrace decay_ratio(const Profile& prof, double kappa = 0.9)
{
    const auto& S = prof.samples;
    std::vector<double> rr(S.size()), sv(S.size());
    for (std::size_t i = 0; i < S.size(); ++i) {
        rr[i] = S[i].r;
        sv[i] = std::sqrt(std::max(S[i].s.V, 0.0));
    }
    const auto I = cumulative_integral(rr, sv);

    DecayTrace t;
    t.kappa = kappa;
    const double r_from = 0.8 * prof.r_end;
    bool first = true;
    for (std::size_t i = 0; i < S.size(); ++i) {
        const auto& s = S[i].s;
        if (S[i].r < r_from || !(s.V > 1.0) || s.u == 0.0) continue;
        t.r.push_back(S[i].r);
        t.z.push_back(-(s.du / s.u) / std::sqrt(s.V));
        const double lg = std::log(std::abs(s.u)) + kappa * I[i];
        if (first) {
            t.log_surrogate_start = lg;
            t.log_surrogate_max = lg;
            first = false;
        }
        t.log_surrogate_max = std::max(t.log_surrogate_max, lg);
    }
    require(t.r.size() >= 10, ErrorKind::TailTooShort,
            "only " + std::to_string(t.r.size()) + " tail samples with V > 1");
    t.final_z = t.z.back();
    t.delta = std::abs(t.final_z - 1.0);
    t.surrogate_bounded = t.log_surrogate_max - t.log_surrogate_start <= std::log(10.0);
    return t;
}

/// check_profile plus the decay ratio where it applies.
struct ProfileAssessment
{
    DiagnosticsReport report;
    /// set when the profile ends on a decaying branch past V = 1
    std::optional<DecayTrace> decay;
    bool decay_applicable = false;
    /// message when the decay trace could not be formed
    std::string decay_error;

    bool passed() const
    {
        return report.all_passed() && (!decay_applicable || (decay && decay->decaying()));
    }
};

inline ProfileAssessment assess_profile(const Profile& prof, const CheckOptions& opt = {})
{
    ProfileAssessment a;
    a.report = check_profile(prof, opt);
    a.decay_applicable = has_decaying_tail(prof);
    if (a.decay_applicable) {
        try {
            a.decay = decay_ratio(prof);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::TailTooShort) throw;
            a.decay_error = e.what();
        }
    }
    return a;
}

struct WronskianTrace
{
    std::vector<double> r;
    /// w r^{c_u} with w = u_b' u_a - u_a' u_b
    std::vector<double> w;
    bool nonnegative = true;
    bool nondecreasing = true;
    /// u_b > u_a at every compared radius
    bool no_crossing = true;
    /// V_b > V_a at every compared radius
    bool potential_ordered = true;
    /// largest decrease between consecutive samples
    double worst_decrease = 0.0;
    double tolerance = 0.0;
};

/// Compares two profiles with u0_a <= u0_b on the range where both are
/// positive, at the samples of prof_a. `rel_tol` scales the monotonicity
/// tolerance by max |w r^{c_u}|.
inline WronskianTrace wronskian_scan(const Profile& a, const Profile& b, double rel_tol = 1e-9)
{
    require(a.u0 <= b.u0, ErrorKind::InvalidArgument, "wronskian_scan needs u0_a <= u0_b");
    require(a.params.dim() == b.params.dim() && a.params.m() == b.params.m(), ErrorKind::InvalidArgument,
            "profiles belong to different problems");
    const double cu = a.params.friction_u();
    const double lo = std::max(a.r_begin(), b.r_begin());
    const double hi = std::min(a.samples.back().r, b.samples.back().r);
    WronskianTrace tr;
    std::vector<ShootState> sa, sb;
    for (const auto& smp : a.samples) {
        if (smp.r < lo || smp.r > hi) continue;
        const ShootState sbv = b.state_at(smp.r);
        if (!(smp.s.u > 0.0 && sbv.u > 0.0)) break;
        tr.r.push_back(smp.r);
        tr.w.push_back(std::pow(smp.r, cu) * (sbv.du * smp.s.u - smp.s.du * sbv.u));
        sa.push_back(smp.s);
        sb.push_back(sbv);
    }
    require(tr.r.size() >= 10, ErrorKind::RangeMismatch,
            "profiles overlap on only " + std::to_string(tr.r.size()) + " positive samples");
    double w_max = 0.0;
    for (double w : tr.w) w_max = std::max(w_max, std::abs(w));
    tr.tolerance = rel_tol * std::max(w_max, std::numeric_limits<double>::min());
    for (std::size_t i = 0; i < tr.r.size(); ++i) {
        if (tr.w[i] < -tr.tolerance) tr.nonnegative = false;
        if (i > 0) {
            const double dec = tr.w[i - 1] - tr.w[i];
            tr.worst_decrease = std::max(tr.worst_decrease, dec);
            if (dec > tr.tolerance) tr.nondecreasing = false;
        }
        if (!(sb[i].u > sa[i].u)) tr.no_crossing = false;
        if (!(sb[i].V > sa[i].V)) tr.potential_ordered = false;
    }
    return tr;
}

/// Lower bound on the node count of the trajectory from u0: zeros of
/// J_nu(x), nu = (2m+d-2)/2, for x in (0, B / sqrt 2] with B the lower bound
/// on the radius where V = 1/2. Beyond the oracle range the count is
/// extended with the spacing max(pi, last spacing), which never
/// overestimates the true count.
inline int sturm_node_bound(double u0, const ProblemParams& p)
{
    require(u0 > 0.0, ErrorKind::InvalidArgument, "u0 must be positive");
    const double x_max = p.half_radius_lower_bound(u0) / std::numbers::sqrt2;
    const double nu = p.bessel_order();
    const auto zeros = bessel_j_zeros(nu, std::min(x_max, bessel_max_argument));
    int count = static_cast<int>(zeros.size());
    if (x_max > bessel_max_argument && zeros.size() >= 2) {
        const double last = zeros.back();
        const double spacing = std::max(std::numbers::pi, last - zeros[zeros.size() - 2]);
        count += static_cast<int>(std::floor((x_max - last) / spacing));
    }
    return count;
}

} // namespace snewton
