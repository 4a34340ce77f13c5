#pragma once

// Dirichlet and log-Dirichlet quotients along difference trajectories, the
// empirical log-Lipschitz constants they certify, and the Riccati envelope.
//
// For a difference w = u - v of two solutions and a scale M > sup ||w||:
//   Q  = ||A^(1/2) w||^2 / ||w||^2         (Dirichlet quotient)
//   L  = log(M^2 / ||w||^2)
//   Qt = Q / L                             (log-Dirichlet quotient)
//
// Empirical constants over a finite pair set, with M0 >= 4 sup ||u|| and
// M1 >= max(M0, 4 sup ||A^(1/2) u||):
//   C_half, C0 : max Q / log(M0^2/||w||^2)
//   C1         : max ||Aw||^2 / (||A^(1/2)w||^2 log(M1^2/||A^(1/2)w||^2))
//   C_full     : max ||Aw|| / (||w|| log(M1^2/||w||^2))
//   C_field    : max ||G(u)-G(v)|| / (||w|| log(M1^2/||w||^2))
// Chaining the first two gives, for every measured pair,
//   C_full <= sqrt(C0 C1) * max sqrt(L0 L1') / L1,
// an identity-level consequence checked here rather than assumed.

#include <cmath>
#include <cstddef>
#include <limits>
#include <type_traits>
#include <utility>
#include <vector>

#include "atrl/common.hpp"
#include "atrl/field.hpp"
#include "atrl/integrate.hpp"

namespace atrl {

struct QuotientSeries {
    double M = 0.0;
    std::vector<double> times;
    std::vector<double> w_norm;     // ||w||
    std::vector<double> half_norm;  // ||A^(1/2) w||
    std::vector<double> full_norm;  // ||A w||
    std::vector<double> Q;
    std::vector<double> L;
    std::vector<double> Qtilde;
    std::vector<std::size_t> excluded;  // input indices with ||w|| = 0
};

// Pointwise quotients of a recorded pair. Indices where ||w|| vanishes are
// excluded and reported; every kept row has Qtilde finite.
inline QuotientSeries quotient_series(const TrajectoryPair& pair, double M) {
    if (pair.degenerate) throw sample_error("quotient_series: degenerate pair");
    if (!(M > 0.0) || !std::isfinite(M)) throw domain_error("quotient_series: M must be positive");
    QuotientSeries s;
    s.M = M;
    const std::size_t n = pair.times.size();
    s.times.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const SpectralField w = pair.u[k] - pair.v[k];
        const double wn = norm(w);
        if (wn == 0.0) {
            s.excluded.push_back(k);
            continue;
        }
        if (wn >= M) throw domain_error("quotient_series: M does not dominate the pair separation");
        const double hn = fractional_power_norm(w, 0.5);
        const double fn = fractional_power_norm(w, 1.0);
        const double q = (hn / wn) * (hn / wn);
        const double l = 2.0 * std::log(M / wn);
        s.times.push_back(pair.times[k]);
        s.w_norm.push_back(wn);
        s.half_norm.push_back(hn);
        s.full_norm.push_back(fn);
        s.Q.push_back(q);
        s.L.push_back(l);
        s.Qtilde.push_back(q / l);
    }
    return s;
}

struct LogLipReport {
    double M0_used = 0.0;
    double M1_used = 0.0;  // raised to M0 when the measured M1 is smaller
    double C_half = 0.0;
    double C0 = 0.0;
    double C1 = 0.0;
    double C_full = 0.0;
    double C_field = 0.0;
    double K_hat = 0.0;        // max ||F(u)-F(v)|| / ||A^(1/2)w|| over the pairs
    double chain_slack = 1.0;  // max sqrt(L0 L1')/L1; C_full <= sqrt(C0 C1)*slack
    double field_gap = 0.0;    // max K_hat ||A^(1/2)w||/(||w|| L1); C_field <= C_full + gap
    std::size_t pair_count = 0;
    std::size_t skipped = 0;  // coincident pairs
    static constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
    std::size_t worst_half = none;
    std::size_t worst_full = none;
    std::size_t worst_field = none;
};

namespace detail {

// Coincident differences carry no quotient information; the cutoff is
// relative to the ambient scale M0.
inline bool coincident(double wn, double M0) { return !(wn > 1e-14 * M0); }

struct loglip_core {
    LogLipReport rep;
    std::vector<double> L1;         // log(M1^2/||w||^2) per kept pair
    std::vector<double> half_over;  // ||A^(1/2)w|| / (||w|| L1) per kept pair
    std::vector<std::size_t> kept;  // original indices
};

inline loglip_core loglip_sweep(const std::vector<SpectralField>& ws, double M0, double M1) {
    if (ws.empty()) throw sample_error("log-Lipschitz sweep: empty pair set");
    if (!(M0 > 0.0) || !std::isfinite(M0) || !(M1 > 0.0) || !std::isfinite(M1))
        throw domain_error("log-Lipschitz sweep: scales must be positive");
    loglip_core out;
    const double m1 = std::max(M0, M1);
    out.rep.M0_used = M0;
    out.rep.M1_used = m1;
    double worst_slack = 0.0;
    for (std::size_t i = 0; i < ws.size(); ++i) {
        const double wn = norm(ws[i]);
        if (coincident(wn, M0)) {
            ++out.rep.skipped;
            continue;
        }
        if (wn >= M0) throw domain_error("log-Lipschitz sweep: M0 does not dominate a pair separation");
        const double hn = fractional_power_norm(ws[i], 0.5);
        const double fn = fractional_power_norm(ws[i], 1.0);
        const double l0 = 2.0 * std::log(M0 / wn);
        const double l1 = 2.0 * std::log(m1 / wn);
        const double l1p = 2.0 * std::log(m1 / hn);
        if (!(l1p > 0.0)) throw domain_error("log-Lipschitz sweep: M1 does not dominate ||A^(1/2)w||");
        const double r_half = (hn * hn) / (wn * wn * l0);
        const double r_one = (fn * fn) / (hn * hn * l1p);
        const double r_full = fn / (wn * l1);
        if (r_half > out.rep.C0) {
            out.rep.C0 = r_half;
            out.rep.worst_half = i;
        }
        out.rep.C1 = std::max(out.rep.C1, r_one);
        if (r_full > out.rep.C_full) {
            out.rep.C_full = r_full;
            out.rep.worst_full = i;
        }
        worst_slack = std::max(worst_slack, std::sqrt(l0 * l1p) / l1);
        out.L1.push_back(l1);
        out.half_over.push_back(hn / (wn * l1));
        out.kept.push_back(i);
        ++out.rep.pair_count;
    }
    if (out.rep.pair_count == 0) throw sample_error("log-Lipschitz sweep: all pairs coincident");
    out.rep.C_half = out.rep.C0;
    out.rep.chain_slack = worst_slack;
    // Pairwise, ||Aw||^2 <= C0 C1 ||w||^2 L0 L1', so the measured maxima must
    // satisfy the chained bound; a violation is an arithmetic bug.
    if (out.rep.C_full > std::sqrt(out.rep.C0 * out.rep.C1) * worst_slack * (1.0 + 1e-9))
        throw estimation_error("log-Lipschitz sweep: chained bound violated");
    return out;
}

}  // namespace detail

// Empirical constant for ||A^(1/2)w||^2 <= C ||w||^2 log(M0^2/||w||^2).
inline LogLipReport verify_h1_bound(const std::vector<SpectralField>& ws, double M0) {
    if (ws.empty()) throw sample_error("verify_h1_bound: empty pair set");
    if (!(M0 > 0.0) || !std::isfinite(M0)) throw domain_error("verify_h1_bound: M0 must be positive");
    LogLipReport rep;
    rep.M0_used = M0;
    rep.M1_used = M0;
    for (std::size_t i = 0; i < ws.size(); ++i) {
        const double wn = norm(ws[i]);
        if (detail::coincident(wn, M0)) {
            ++rep.skipped;
            continue;
        }
        if (wn >= M0) throw domain_error("verify_h1_bound: M0 does not dominate a pair separation");
        const double hn = fractional_power_norm(ws[i], 0.5);
        const double l0 = 2.0 * std::log(M0 / wn);
        const double r = (hn * hn) / (wn * wn * l0);
        if (r > rep.C_half) {
            rep.C_half = r;
            rep.worst_half = i;
        }
        ++rep.pair_count;
    }
    if (rep.pair_count == 0) throw sample_error("verify_h1_bound: all pairs coincident");
    rep.C0 = rep.C_half;
    return rep;
}

// Empirical constants for the A-level bound and its chained form.
inline LogLipReport verify_loglip_A(const std::vector<SpectralField>& ws, double M0, double M1) {
    return detail::loglip_sweep(ws, M0, M1).rep;
}

// Full vector-field constant for G(u) = F(u) - Au over explicit state pairs.
// G is evaluated once per distinct state. The triangle inequality
//   ||G(u)-G(v)|| <= ||Aw|| + K_hat ||A^(1/2)w||
// is checked pairwise with K_hat measured on the same pair set.
template <class FieldFn>
    requires(!std::is_same_v<std::remove_cvref_t<FieldFn>, Model>)
LogLipReport verify_field_loglip(FieldFn&& field, const std::vector<SpectralField>& states,
                                 const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                 double M0, double M1, std::size_t threads = 1) {
    if (states.empty() || pairs.empty()) throw sample_error("verify_field_loglip: empty input");
    for (const auto& pr : pairs)
        if (pr.first >= states.size() || pr.second >= states.size())
            throw dimension_error("verify_field_loglip: pair index out of range");

    std::vector<SpectralField> g(states.size(), zero_field(states[0].op));
    parallel_for(states.size(), threads, [&](std::size_t i) { g[i] = field(states[i]); });

    std::vector<SpectralField> ws;
    ws.reserve(pairs.size());
    for (const auto& pr : pairs) ws.push_back(states[pr.first] - states[pr.second]);

    detail::loglip_core core = detail::loglip_sweep(ws, M0, M1);
    LogLipReport rep = core.rep;

    // K_hat from the nonlinear part F(u) = G(u) + Au recovered pairwise.
    std::vector<double> f_jump(core.kept.size());
    for (std::size_t k = 0; k < core.kept.size(); ++k) {
        const std::size_t i = core.kept[k];
        const SpectralField& w = ws[i];
        SpectralField df = g[pairs[i].first] - g[pairs[i].second] + apply_power(w, 1.0);
        const double hn = fractional_power_norm(w, 0.5);
        f_jump[k] = norm(df) / hn;
        rep.K_hat = std::max(rep.K_hat, f_jump[k]);
    }

    for (std::size_t k = 0; k < core.kept.size(); ++k) {
        const std::size_t i = core.kept[k];
        const SpectralField& w = ws[i];
        const double wn = norm(w);
        const double gn = norm(g[pairs[i].first] - g[pairs[i].second]);
        const double r = gn / (wn * core.L1[k]);
        if (r > rep.C_field) {
            rep.C_field = r;
            rep.worst_field = i;
        }
        const double fn = fractional_power_norm(w, 1.0);
        const double rhs = fn / (wn * core.L1[k]) + rep.K_hat * core.half_over[k];
        if (r > rhs * (1.0 + 1e-9))
            throw estimation_error("verify_field_loglip: triangle bound violated");
        rep.field_gap = std::max(rep.field_gap, rep.K_hat * core.half_over[k]);
    }
    return rep;
}

inline LogLipReport verify_field_loglip(const Model& m, const std::vector<SpectralField>& states,
                                        const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                        double M0, double M1, std::size_t threads = 1) {
    return verify_field_loglip([&m](const SpectralField& u) { return vector_field(m, u); }, states, pairs,
                               M0, M1, threads);
}

struct RiccatiParams {
    double K3 = 0.5;  // in (0,1)
    double K4 = 0.0;  // >= 0
    double p = 2.0;
    double gamma() const { return K3; }
    double delta() const { return K4; }
};

inline void validate(const RiccatiParams& rp) {
    if (!(rp.K3 > 0.0) || !(rp.K3 < 1.0)) throw config_error("riccati: K3 must lie in (0,1)");
    if (!(rp.K4 >= 0.0) || !std::isfinite(rp.K4)) throw config_error("riccati: K4 must be nonnegative");
    if (!(rp.p > 1.0)) throw config_error("riccati: p must exceed 1");
}

// Universal envelope for y' <= -gamma y^p + delta, independent of y(0):
//   y(t) <= (delta/gamma)^(1/p) + (gamma (p-1) t)^(-1/(p-1)),  t > 0.
// Only gamma > 0, delta >= 0, p > 1 are needed here; the (0,1) window on K3
// belongs to the fitted quotient path and is enforced by validate().
inline double riccati_bound(const RiccatiParams& rp, double t) {
    if (!(rp.gamma() > 0.0) || !std::isfinite(rp.gamma()))
        throw config_error("riccati_bound: gamma must be positive");
    if (!(rp.delta() >= 0.0) || !std::isfinite(rp.delta()))
        throw config_error("riccati_bound: delta must be nonnegative");
    if (!(rp.p > 1.0)) throw config_error("riccati_bound: p must exceed 1");
    if (!(t > 0.0)) throw domain_error("riccati_bound: requires t > 0");
    const double head = std::pow(rp.delta() / rp.gamma(), 1.0 / rp.p);
    const double tail = std::pow(rp.gamma() * (rp.p - 1.0) * t, -1.0 / (rp.p - 1.0));
    return head + tail;
}

// Fit K4 as the largest value of Qtilde' + K3 Qtilde^2 over the series,
// derivatives by centered differences (one-sided at the ends). A negative
// maximum clamps to 0; the envelope stays valid for any larger K4.
inline RiccatiParams fit_riccati(const std::vector<QuotientSeries>& series, double K3 = 0.5) {
    if (!(K3 > 0.0) || !(K3 < 1.0)) throw config_error("fit_riccati: K3 must lie in (0,1)");
    RiccatiParams rp;
    rp.K3 = K3;
    double k4 = 0.0;
    bool any = false;
    for (const auto& s : series) {
        const std::size_t n = s.times.size();
        if (n < 2) continue;
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t lo = (k == 0) ? 0 : k - 1;
            const std::size_t hi = (k + 1 == n) ? k : k + 1;
            const double dt = s.times[hi] - s.times[lo];
            if (!(dt > 0.0)) throw domain_error("fit_riccati: times must be strictly increasing");
            const double dq = (s.Qtilde[hi] - s.Qtilde[lo]) / dt;
            k4 = std::max(k4, dq + K3 * s.Qtilde[k] * s.Qtilde[k]);
            any = true;
        }
    }
    if (!any) throw sample_error("fit_riccati: no series with at least two points");
    rp.K4 = std::max(0.0, k4);
    return rp;
}

struct RiccatiEnvelopeCheck {
    bool ok = true;
    double worst_ratio = 0.0;  // max Qtilde / bound over checked rows
    std::size_t checked = 0;
};

// Checks Qtilde(t) <= (1+tol) bound(t - t0) for every row past the series
// start; the envelope diverges at t0 itself, which is excluded.
inline RiccatiEnvelopeCheck check_riccati_envelope(const std::vector<QuotientSeries>& series,
                                                   const RiccatiParams& rp, double tol = 0.1) {
    validate(rp);
    RiccatiEnvelopeCheck out;
    for (const auto& s : series) {
        if (s.times.empty()) continue;
        const double t0 = s.times.front();
        for (std::size_t k = 1; k < s.times.size(); ++k) {
            const double dt = s.times[k] - t0;
            if (!(dt > 0.0)) continue;
            const double b = riccati_bound(rp, dt);
            out.worst_ratio = std::max(out.worst_ratio, s.Qtilde[k] / b);
            ++out.checked;
        }
    }
    out.ok = out.worst_ratio <= 1.0 + tol;
    return out;
}

// The printed lower-bound constraint tying K4 to a measured K1 admits two
// readings of its repeated factor 4; both are reported, neither is trusted.
struct K4Readings {
    double cancelled = 0.0;  // K1^4 / (1 - K3)
    double nested = 0.0;     // K1^4 (1 - K3)
};

inline K4Readings k4_lower_bounds_from_k1(double K1, double K3) {
    if (!(K3 > 0.0) || !(K3 < 1.0)) throw config_error("k4 readings: K3 must lie in (0,1)");
    if (!(K1 >= 0.0)) throw config_error("k4 readings: K1 must be nonnegative");
    const double k14 = K1 * K1 * K1 * K1;
    return {k14 / (1.0 - K3), k14 * (1.0 - K3)};
}

}  // namespace atrl
