#pragma once

/// \file tail.hpp
/// Continuation of a bound-state profile along its decaying branch.
///
/// Forward shooting cannot follow a decaying solution for long: any error
/// excites the growing solution, which takes over once |u| has dropped by
/// roughly the inverse of the bracket resolution. Past that radius the
/// profile is continued with q = -u'/u, which obeys
///
///   q' = q^2 - c_u q / r - (V - 1)
///
/// and is stable when integrated backwards from a far radius where q is set
/// to its quasi-static value. V is then integrated forward with the new u and
/// the two sweeps are repeated until they agree.

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "core.hpp"
#include "profile.hpp"

namespace snewton {

struct TailOptions
{
    double step = 0.005;
    /// keep every n-th grid point as a profile sample
    std::size_t sample_every = 10;
    double initial_length = 40.0;
    double max_length = 640.0;
    int sweeps = 3;
    /// truncation: |u| below this times u0, and r^m |u| below this times its
    /// peak (the physical profile carries the factor r^m) ...
    double u_floor = 1e-8;
    /// ... and z = q / sqrt(V) within this distance of 1
    double z_window = 0.1;
    /// decay (in e-folds) required between a radius and the far end before
    /// the far-end start value has been forgotten there
    double settle_efolds = 15.0;
    /// stop extending once ln|u| drops below this (u stays a normal double)
    double log_floor = -700.0;
};

struct TailResult
{
    /// samples after the starting radius (the start itself excluded)
    std::vector<Sample> samples;
    /// true when the truncation rule (|u| small, z near 1) was met
    bool rule_met = false;
};

namespace detail {

struct TailGrid
{
    std::vector<double> r, V, dV, lnu, q;
};

/// Forward sweep for (V, V') with u taken from lnu/q on the grid.
inline void tail_forward_v(TailGrid& g, const ProblemParams& p, double h, bool have_u)
{
    const double cv = p.friction_v();
    const double se = p.source_exponent();
    auto source = [&](double r, double lnu) { return have_u ? std::exp(2.0 * lnu) * std::pow(r, se) : 0.0; };
    auto acc = [&](double r, double dv, double src) { return src - cv * dv / r; };
    for (std::size_t k = 0; k + 1 < g.r.size(); ++k) {
        const double r0 = g.r[k], rm = r0 + 0.5 * h, r1 = g.r[k + 1];
        const double s0 = have_u ? source(r0, g.lnu[k]) : 0.0;
        const double s1 = have_u ? source(r1, g.lnu[k + 1]) : 0.0;
        double sm = 0.0;
        if (have_u) {
            const double lm = 0.5 * (g.lnu[k] + g.lnu[k + 1]) + h * (g.q[k + 1] - g.q[k]) / 8.0;
            sm = source(rm, lm);
        }
        const double v = g.V[k], w = g.dV[k];
        const double k1v = w, k1w = acc(r0, w, s0);
        const double k2v = w + 0.5 * h * k1w, k2w = acc(rm, k2v, sm);
        const double k3v = w + 0.5 * h * k2w, k3w = acc(rm, k3v, sm);
        const double k4v = w + h * k3w, k4w = acc(r1, k4v, s1);
        g.V[k + 1] = v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
        g.dV[k + 1] = w + h / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w);
    }
}

/// Backward sweep for q and ln|u|, anchored at ln|u(r_0)| = lnu0.
inline void tail_backward_q(TailGrid& g, const ProblemParams& p, double h, double lnu0)
{
    const double cu = p.friction_u();
    const std::size_t K = g.r.size() - 1;
    auto vmid = [&](std::size_t k) { return 0.5 * (g.V[k] + g.V[k + 1]) + h * (g.dV[k] - g.dV[k + 1]) / 8.0; };
    auto dq = [&](double r, double q, double v) { return q * q - cu * q / r - (v - 1.0); };
    const double rK = g.r[K];
    const double half = cu / (2.0 * rK);
    g.q[K] = half + std::sqrt(half * half + std::max(g.V[K] - 1.0, 0.0));
    std::vector<double> L(K + 1, 0.0);
    for (std::size_t k = K; k > 0; --k) {
        const double r1 = g.r[k], r0 = g.r[k - 1], rm = 0.5 * (r0 + r1);
        const double v1 = g.V[k], v0 = g.V[k - 1], vm = vmid(k - 1);
        const double q = g.q[k];
        // step of size -h
        const double k1 = dq(r1, q, v1);
        const double k2 = dq(rm, q - 0.5 * h * k1, vm);
        const double k3 = dq(rm, q - 0.5 * h * k2, vm);
        const double k4 = dq(r0, q - h * k3, v0);
        g.q[k - 1] = q - h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        // d ln|u| / dr = -q, integrated with the same stages
        const double qa = q, qb = q - 0.5 * h * k1, qc = q - 0.5 * h * k2, qd = q - h * k3;
        L[k - 1] = L[k] + h / 6.0 * (qa + 2 * qb + 2 * qc + qd);
    }
    for (std::size_t k = 0; k <= K; ++k) {
        g.lnu[k] = lnu0 + L[k] - L[0];
    }
}

} // namespace detail

/// Continues the decaying branch from (r_c, s_c), which must lie past V = 1
/// with u u' < 0.
/// `weighted_peak` is max r^m |u| over the profile so far (u0 when m = 0).
inline TailResult continue_decaying_tail(const ProblemParams& p, double u0, double r_c, const ShootState& s_c,
                                         const TailOptions& opt = {}, std::optional<double> weighted_peak = {})
{
    require(s_c.V > 1.0 && s_c.toward_zero(), ErrorKind::InvalidArgument,
            "tail continuation needs a decaying state past V = 1");
    const double h = opt.step;
    const double sign = s_c.u > 0 ? 1.0 : -1.0;
    const double lnu0 = std::log(std::abs(s_c.u));
    const double ln_floor = std::log(opt.u_floor * u0);
    const double ln_weighted_floor = std::log(opt.u_floor * weighted_peak.value_or(u0));

    TailResult out;
    detail::TailGrid g;
    for (double length = opt.initial_length;; length *= 2.0) {
        const std::size_t K = static_cast<std::size_t>(std::ceil(length / h));
        g.r.assign(K + 1, 0.0);
        for (std::size_t k = 0; k <= K; ++k) g.r[k] = r_c + h * static_cast<double>(k);
        g.V.assign(K + 1, 0.0);
        g.dV.assign(K + 1, 0.0);
        g.lnu.assign(K + 1, 0.0);
        g.q.assign(K + 1, 0.0);
        g.V[0] = s_c.V;
        g.dV[0] = s_c.dV;

        detail::tail_forward_v(g, p, h, false);
        for (int sweep = 0; sweep < opt.sweeps; ++sweep) {
            detail::tail_backward_q(g, p, h, lnu0);
            detail::tail_forward_v(g, p, h, true);
        }
        detail::tail_backward_q(g, p, h, lnu0);

        // total decay from each point to the far end, in e-folds
        const double ln_end = g.lnu[K];
        std::size_t cut = K + 1;
        std::size_t floor_cut = K + 1;
        for (std::size_t k = 1; k <= K; ++k) {
            if (g.lnu[k] < opt.log_floor) {
                floor_cut = k;
                break;
            }
            const bool settled = g.lnu[k] - ln_end >= opt.settle_efolds;
            const double z = g.q[k] / std::sqrt(g.V[k]);
            const bool small = g.lnu[k] < ln_floor && g.lnu[k] + p.m() * std::log(g.r[k]) < ln_weighted_floor;
            if (settled && small && std::abs(z - 1.0) < opt.z_window) {
                cut = k;
                break;
            }
        }
        const bool last_try = length * 2.0 > opt.max_length || floor_cut <= K;
        if (cut <= K || last_try) {
            out.rule_met = cut <= K;
            std::size_t stop = cut <= K ? cut : std::min(floor_cut, K);
            // without the rule, keep only the part the far end no longer influences
            if (!out.rule_met) {
                while (stop > 1 && g.lnu[stop] - ln_end < opt.settle_efolds) --stop;
            }
            for (std::size_t k = 1; k <= stop; ++k) {
                if (k % opt.sample_every != 0 && k != stop) continue;
                const double u = sign * std::exp(g.lnu[k]);
                out.samples.push_back({g.r[k], ShootState{u, -g.q[k] * u, g.V[k], g.dV[k]}});
            }
            return out;
        }
    }
}

} // namespace snewton
