#pragma once

// Approximate-manifold machinery: the tail-transfer constant theta_n, the
// graph-ratio and A^beta Lipschitz checks, and the greedy construction of a
// Lipschitz graph over P_nH with its distance-decay measurement.
//
// theta_n is the tail integral
//   theta_n = K C \int_0^inf b_{n,alpha}(t) e^{-mu t} dt,
// split at t* = alpha/lambda where b switches branch:
//   (e/alpha)^{-alpha} mu^{alpha-1} gammalow(1-alpha, mu alpha/lambda)
//   + lambda^alpha e^{-alpha(lambda+mu)/lambda} / (lambda+mu),
// with gammalow the lower incomplete gamma function.

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "atrl/common.hpp"
#include "atrl/field.hpp"
#include "atrl/integrate.hpp"
#include "atrl/semigroup.hpp"

namespace atrl {

struct FlowLipschitzParams {
    double C = 1.0;      // flow constant, >= 1
    double mu = 1.0;     // exponential rate, > 0
    double K = 0.0;      // nonlinearity constant, >= 0
    double alpha = 0.5;  // fractional exponent, in (0,1)
};

inline void validate(const FlowLipschitzParams& fp) {
    if (!(fp.C >= 1.0) || !std::isfinite(fp.C)) throw domain_error("flow params: C must be at least 1");
    if (!(fp.mu > 0.0) || !std::isfinite(fp.mu)) throw domain_error("flow params: mu must be positive");
    if (!(fp.K >= 0.0) || !std::isfinite(fp.K)) throw domain_error("flow params: K must be nonnegative");
    if (!(fp.alpha > 0.0) || !(fp.alpha < 1.0)) throw domain_error("flow params: alpha must lie in (0,1)");
}

// Closed form of the tail-transfer constant; finite for every lambda_next > 0
// since b decays like e^{-lambda t}.
inline double theta_n(const FlowLipschitzParams& fp, double lambda_next) {
    validate(fp);
    if (!(lambda_next > 0.0) || !std::isfinite(lambda_next))
        throw domain_error("theta_n: lambda_next must be positive");
    const double a = fp.alpha, mu = fp.mu, lam = lambda_next;
    const double head = std::pow(std::exp(1.0) / a, -a) * std::pow(mu, a - 1.0) *
                        boost::math::tgamma_lower(1.0 - a, mu * a / lam);
    const double tail = std::pow(lam, a) * std::exp(-a * (lam + mu) / lam) / (lam + mu);
    return fp.K * fp.C * (head + tail);
}

struct GraphRatio {
    double ratio = 0.0;  // max ||Q_n w||_alpha / ||P_n w||_alpha over regular pairs
    double implied_c = std::numeric_limits<double>::infinity();  // 1/(1-ratio) when ratio < 1
    std::size_t sentinel_pairs = 0;  // pairs with P_n w = 0 but Q_n w != 0
    std::size_t pair_count = 0;
};

// Graph test over P_nH: a finite ratio below 1 certifies the sample lies in
// the graph of a Lipschitz function of its low modes.
inline GraphRatio graph_ratio_check(const std::vector<SpectralField>& pts, std::size_t n, double alpha) {
    if (pts.empty()) throw sample_error("graph_ratio_check: empty sample");
    if (n >= pts[0].op->dimension()) throw dimension_error("graph_ratio_check: n must be below D");
    GraphRatio out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const SpectralField w = pts[i] - pts[j];
            const double pw = low_mode_norm(w, n, alpha);
            const double qw = high_mode_norm(w, n, alpha);
            if (pw == 0.0) {
                if (qw > 0.0) ++out.sentinel_pairs;
                continue;  // coincident pairs carry no information
            }
            out.ratio = std::max(out.ratio, qw / pw);
            ++out.pair_count;
        }
    }
    if (out.sentinel_pairs == 0 && out.ratio < 1.0) out.implied_c = 1.0 / (1.0 - out.ratio);
    return out;
}

inline GraphRatio graph_ratio_check(const AttractorSample& sample, std::size_t n, double alpha) {
    return graph_ratio_check(sample.snapshots, n, alpha);
}

struct ABetaCheck {
    double constant = 0.0;  // max ||A^beta w||_alpha / ||w||_alpha
    bool exponent_warning = false;  // alpha + beta >= 1
    std::size_t pair_count = 0;
    std::size_t skipped = 0;
};

inline ABetaCheck abeta_lipschitz_check(const std::vector<SpectralField>& pts, double alpha, double beta) {
    if (pts.empty()) throw sample_error("abeta_lipschitz_check: empty sample");
    if (!(alpha >= 0.0) || !(beta >= 0.0)) throw domain_error("abeta_lipschitz_check: exponents must be nonnegative");
    ABetaCheck out;
    out.exponent_warning = (alpha + beta >= 1.0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const SpectralField w = pts[i] - pts[j];
            const double base = fractional_power_norm(w, alpha);
            if (base == 0.0) {
                ++out.skipped;
                continue;
            }
            out.constant = std::max(out.constant, fractional_power_norm(w, alpha + beta) / base);
            ++out.pair_count;
        }
    }
    return out;
}

inline ABetaCheck abeta_lipschitz_check(const AttractorSample& sample, double alpha, double beta) {
    return abeta_lipschitz_check(sample.snapshots, alpha, beta);
}

struct MaximalSubset {
    std::size_t n = 0;
    double m = 1.0;  // relation threshold ||Q_n(u-v)|| <= m ||P_n(u-v)||
    std::vector<std::size_t> accepted;  // indices in scan order
    std::vector<std::size_t> rejected;
};

// Greedy scan in input order: accept a point iff the relation holds against
// every previously accepted point. The result is maximal for the scan: no
// rejected point can be appended without breaking the relation.
inline MaximalSubset maximal_subset(const std::vector<SpectralField>& pts, std::size_t n, double m = 1.0) {
    if (pts.empty()) throw sample_error("maximal_subset: empty sample");
    if (n >= pts[0].op->dimension()) throw dimension_error("maximal_subset: n must be below D");
    if (!(m > 0.0) || !std::isfinite(m)) throw domain_error("maximal_subset: threshold must be positive");
    MaximalSubset out;
    out.n = n;
    out.m = m;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        bool ok = true;
        for (std::size_t a : out.accepted) {
            const SpectralField w = pts[i] - pts[a];
            if (high_mode_norm(w, n, 0.0) > m * low_mode_norm(w, n, 0.0)) {
                ok = false;
                break;
            }
        }
        (ok ? out.accepted : out.rejected).push_back(i);
    }
    return out;
}

inline MaximalSubset maximal_subset(const AttractorSample& sample, std::size_t n, double m = 1.0) {
    return maximal_subset(sample.snapshots, n, m);
}

enum class extension_rule : std::uint8_t {
    nearest_anchor = 1,          // q of the p-nearest anchor; 2-Lipschitz worst case
    mcshane_coordinatewise = 2,  // per-tail-coordinate McShane; vector constant <= sqrt(D-n)
};

struct GraphModel {
    std::size_t n = 0;
    double lipschitz_m = 0.0;  // certified max ||dq||/||dp|| over anchor pairs
    extension_rule rule = extension_rule::nearest_anchor;
    std::vector<SpectralField> anchors;  // full states; p = P_n, q = Q_n
};

// Builds the graph over P_nH from an accepted subset, certifying the anchor
// Lipschitz constant. A duplicate p with distinct q cannot survive the
// relation; hitting one means the subset was not built by maximal_subset.
inline GraphModel build_graph(const std::vector<SpectralField>& pts, const MaximalSubset& X,
                              extension_rule rule = extension_rule::nearest_anchor) {
    if (X.accepted.empty()) throw sample_error("build_graph: no anchors");
    GraphModel g;
    g.n = X.n;
    g.rule = rule;
    g.anchors.reserve(X.accepted.size());
    for (std::size_t i : X.accepted) {
        if (i >= pts.size()) throw dimension_error("build_graph: subset index out of range");
        g.anchors.push_back(pts[i]);
    }
    for (std::size_t i = 0; i < g.anchors.size(); ++i) {
        for (std::size_t j = i + 1; j < g.anchors.size(); ++j) {
            const SpectralField w = g.anchors[i] - g.anchors[j];
            const double dp = low_mode_norm(w, g.n, 0.0);
            const double dq = high_mode_norm(w, g.n, 0.0);
            if (dp == 0.0) {
                if (dq > 0.0) throw integrity_error("build_graph: duplicate p with distinct q");
                continue;
            }
            if (dq > X.m * dp * (1.0 + 1e-12))
                throw integrity_error("build_graph: anchor pair violates the certified relation");
            g.lipschitz_m = std::max(g.lipschitz_m, dq / dp);
        }
    }
    return g;
}

namespace detail {

inline double p_distance(const SpectralField& u, const SpectralField& v, std::size_t n) {
    return low_mode_norm(u - v, n, 0.0);
}

// Tail prediction at the low-mode position of u. Exact anchor hits return the
// anchor tail under either rule.
inline std::vector<double> graph_eval(const GraphModel& g, const SpectralField& u) {
    const std::size_t D = u.a.size();
    std::size_t nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.anchors.size(); ++i) {
        const double d = p_distance(u, g.anchors[i], g.n);
        if (d < best) {
            best = d;
            nearest = i;
        }
    }
    std::vector<double> tail(D - g.n);
    if (best == 0.0 || g.rule == extension_rule::nearest_anchor) {
        for (std::size_t l = g.n; l < D; ++l) tail[l - g.n] = g.anchors[nearest].a[l];
        return tail;
    }
    // McShane per coordinate with the certified constant: agrees with every
    // anchor and inherits its per-coordinate Lipschitz bound.
    for (std::size_t l = g.n; l < D; ++l) {
        double best_l = std::numeric_limits<double>::infinity();
        for (const auto& x : g.anchors)
            best_l = std::min(best_l, x.a[l] + g.lipschitz_m * p_distance(u, x, g.n));
        tail[l - g.n] = best_l;
    }
    return tail;
}

}  // namespace detail

struct DecayRow {
    std::size_t n = 0;
    double lambda_next = 0.0;
    double d_ext = 0.0;   // max over u of min(extension residual, nearest-anchor distance)
    double d_free = 0.0;  // max over u of min_{v in X} ||u - v||; no extension step involved
    std::size_t anchor_count = 0;
};

// Residuals of the sample against the built graph.
inline DecayRow graph_distance(const std::vector<SpectralField>& pts, const MaximalSubset& X,
                               const GraphModel& g, std::size_t threads = 1) {
    if (g.n != X.n) throw dimension_error("graph_distance: graph and subset cutoffs differ");
    DecayRow row;
    row.n = g.n;
    row.lambda_next = pts.at(0).op->lambda(g.n + 1);
    row.anchor_count = g.anchors.size();
    std::vector<char> member(pts.size(), 0);
    for (std::size_t i : X.accepted) member[i] = 1;

    std::vector<double> ext(pts.size(), 0.0), free_(pts.size(), 0.0);
    parallel_for(pts.size(), threads, [&](std::size_t i) {
        if (member[i]) return;
        const std::vector<double> tail = detail::graph_eval(g, pts[i]);
        compensated_sum acc;
        for (std::size_t l = g.n; l < pts[i].a.size(); ++l) {
            const double d = pts[i].a[l] - tail[l - g.n];
            acc.add(d * d);
        }
        const double ext_res = std::sqrt(acc.value());
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& x : g.anchors) nearest = std::min(nearest, norm(pts[i] - x));
        ext[i] = std::min(ext_res, nearest);
        free_[i] = nearest;
    });
    for (std::size_t i = 0; i < pts.size(); ++i) {
        row.d_ext = std::max(row.d_ext, ext[i]);
        row.d_free = std::max(row.d_free, free_[i]);
    }
    return row;
}

struct DecayReport {
    std::vector<DecayRow> rows;
    double slope = 0.0;  // of log d against lambda_{n+1}
    double intercept = 0.0;
    double r2 = 0.0;
    bool perfect_graph = false;  // every fitted d was zero
    bool extension_free = true;  // which residual column was fitted
};

// Least-squares decay fit of log d_n against lambda_{n+1}. Rows with d = 0
// are exact hits and excluded from the logarithmic fit.
inline DecayReport decay_fit(const std::vector<DecayRow>& rows, bool extension_free = true) {
    DecayReport rep;
    rep.rows = rows;
    rep.extension_free = extension_free;
    std::vector<double> xs, ys;
    for (const auto& r : rows) {
        const double d = extension_free ? r.d_free : r.d_ext;
        if (d < 0.0) throw domain_error("decay_fit: negative residual");
        if (d > 0.0) {
            xs.push_back(r.lambda_next);
            ys.push_back(std::log(d));
        }
    }
    if (xs.empty()) {
        rep.perfect_graph = true;
        return rep;
    }
    if (xs.size() < 3) throw estimation_error("decay_fit: need at least 3 rows with positive residual");
    const linear_fit_result fit = linear_fit(xs, ys);
    rep.slope = fit.slope;
    rep.intercept = fit.intercept;
    rep.r2 = fit.r2;
    return rep;
}

struct DistBound {
    double raw = 0.0;   // 2 M1^2 e^{-lambda/(sqrt(2) C)}
    double root = 0.0;  // sqrt of raw: the norm-level reading of the same display
};

// The source display bounds ||w||^2 and dist by the same expression; both
// normalizations are reported rather than arbitrating.
inline DistBound graph_distance_bound(double M1, double C, double lambda_next) {
    if (!(M1 > 0.0) || !(C >= 1.0) || !(lambda_next > 0.0))
        throw domain_error("graph_distance_bound: need M1 > 0, C >= 1, lambda > 0");
    DistBound b;
    b.raw = 2.0 * M1 * M1 * std::exp(-lambda_next / (std::sqrt(2.0) * C));
    b.root = std::sqrt(b.raw);
    return b;
}

// Heuristic majorant fit of ||w(t)||_alpha <= C e^{mu t} ||w(0)||_alpha over
// recorded pairs: OLS slope of the log-growth envelope, then the smallest C
// that dominates every observation at that rate.
inline FlowLipschitzParams fit_flow_lipschitz(const std::vector<TrajectoryPair>& pairs, double alpha) {
    if (pairs.empty()) throw sample_error("fit_flow_lipschitz: no pairs");
    std::vector<double> ts, env;
    for (const auto& pr : pairs) {
        if (pr.degenerate) continue;
        const double w0 = fractional_power_norm(pr.u[0] - pr.v[0], alpha);
        if (w0 == 0.0) continue;
        for (std::size_t k = 0; k < pr.times.size(); ++k) {
            const double wt = fractional_power_norm(pr.u[k] - pr.v[k], alpha);
            if (wt == 0.0) continue;
            ts.push_back(pr.times[k]);
            env.push_back(std::log(wt / w0));
        }
    }
    if (ts.size() < 2) throw sample_error("fit_flow_lipschitz: not enough usable rows");
    const linear_fit_result fit = linear_fit(ts, env);
    FlowLipschitzParams fp;
    fp.alpha = alpha;
    fp.K = 0.0;
    fp.mu = std::max(fit.slope, 1e-8);
    double log_c = 0.0;  // C >= 1 always admissible
    for (std::size_t k = 0; k < ts.size(); ++k) log_c = std::max(log_c, env[k] - fp.mu * ts[k]);
    fp.C = std::exp(log_c);
    return fp;
}

}  // namespace atrl
