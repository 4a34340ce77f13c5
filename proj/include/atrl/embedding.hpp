#pragma once

// Random linear maps into R^N, Holder-inverse exponent estimation, leading
// coordinate box counting, and the m-Lipschitz deviation over spectral spans.
//
// The inverse-Holder inequality ||u-v|| <= C ||L(u)-L(v)||^theta is a lower
// envelope statement in the (log image, log preimage) plane. The estimator
// bins the preimage axis, keeps the pair at the 5th percentile of the image
// coordinate per bin, fits x = m y + a through those pairs by least squares,
// and reports theta_hat = 1/m clamped into (0,1], C_hat = e^{-theta_hat a}.
// A map that is an exact isometry on the sample short-circuits to
// theta_hat = C_hat = 1 before any binning.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "atrl/common.hpp"
#include "atrl/field.hpp"
#include "atrl/manifold.hpp"

namespace atrl {

struct LinearMapSpec {
    std::size_t N = 0;  // target dimension
    std::size_t D = 0;  // source truncation
    std::uint64_t seed = 0;
    std::vector<double> matrix;  // row-major, N x D
};

// I.i.d. standard normal entries scaled by 1/sqrt(N); the draw order is
// row-major, making the matrix a pure function of (D, N, seed).
inline LinearMapSpec random_linear_map(std::size_t D, std::size_t N, std::uint64_t seed) {
    if (N < 1) throw config_error("random_linear_map: N must be at least 1");
    if (N > D) throw config_error("random_linear_map: N must not exceed the source truncation");
    LinearMapSpec L;
    L.N = N;
    L.D = D;
    L.seed = seed;
    L.matrix.resize(N * D);
    normal_source g(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(N));
    for (auto& e : L.matrix) e = scale * g();
    return L;
}

// Image of the first D coefficients of u.
inline std::vector<double> apply_map(const LinearMapSpec& L, const SpectralField& u) {
    if (L.D > u.a.size()) throw dimension_error("apply_map: map truncation exceeds field dimension");
    std::vector<double> out(L.N);
    for (std::size_t r = 0; r < L.N; ++r) {
        compensated_sum acc;
        for (std::size_t c = 0; c < L.D; ++c) acc.add(L.matrix[r * L.D + c] * u.a[c]);
        out[r] = acc.value();
    }
    return out;
}

struct EmbeddingReport {
    double theta_hat = 0.0;  // in (0,1]; 0 only on injectivity failure
    double C_hat = 0.0;
    double injectivity_margin = 0.0;  // min image distance / min preimage distance
    bool injectivity_failure = false;
    double d_hat = 0.0;        // filled by the experiment driver
    double theta_bound = 0.0;  // filled by the experiment driver
    std::size_t pair_count = 0;
    std::size_t envelope_points = 0;
};

inline EmbeddingReport holder_inverse_estimate(const std::vector<SpectralField>& pts, const LinearMapSpec& L) {
    if (pts.size() < 100) throw sample_error("holder_inverse_estimate: need at least 100 points");
    EmbeddingReport rep;

    std::vector<std::vector<double>> img(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) img[i] = apply_map(L, pts[i]);

    std::vector<double> xs, ys;  // log image distance, log preimage distance
    double min_img = std::numeric_limits<double>::infinity();
    double min_pre = std::numeric_limits<double>::infinity();
    bool isometric = true;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const double dy = norm(pts[i] - pts[j]);
            if (dy == 0.0) continue;  // coincident points carry no constraint
            compensated_sum acc;
            for (std::size_t r = 0; r < L.N; ++r) {
                const double d = img[i][r] - img[j][r];
                acc.add(d * d);
            }
            const double dx = std::sqrt(acc.value());
            if (dx == 0.0) {
                rep.injectivity_failure = true;
                rep.theta_hat = 0.0;
                rep.C_hat = 0.0;
                rep.injectivity_margin = 0.0;
                return rep;
            }
            min_img = std::min(min_img, dx);
            min_pre = std::min(min_pre, dy);
            if (dx != dy) isometric = false;
            xs.push_back(std::log(dx));
            ys.push_back(std::log(dy));
            ++rep.pair_count;
        }
    }
    if (rep.pair_count == 0) throw sample_error("holder_inverse_estimate: all points coincide");
    rep.injectivity_margin = min_img / min_pre;

    if (isometric) {
        rep.theta_hat = 1.0;
        rep.C_hat = 1.0;
        rep.envelope_points = 0;
        return rep;
    }

    // 5th-percentile envelope over bins of the preimage axis, using the
    // achieving pair's actual coordinates.
    const std::size_t nbins = 16;
    const double y_lo = *std::min_element(ys.begin(), ys.end());
    const double y_hi = *std::max_element(ys.begin(), ys.end());
    if (!(y_hi > y_lo)) throw estimation_error("holder_inverse_estimate: degenerate preimage spread");
    std::vector<std::vector<std::size_t>> bins(nbins);
    for (std::size_t k = 0; k < ys.size(); ++k) {
        auto b = static_cast<std::size_t>((ys[k] - y_lo) / (y_hi - y_lo) * static_cast<double>(nbins));
        if (b >= nbins) b = nbins - 1;
        bins[b].push_back(k);
    }
    std::vector<double> ex, ey;
    for (auto& bin : bins) {
        if (bin.size() < 3) continue;
        const std::size_t pick = static_cast<std::size_t>(0.05 * static_cast<double>(bin.size() - 1));
        std::nth_element(bin.begin(), bin.begin() + static_cast<std::ptrdiff_t>(pick), bin.end(),
                         [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
        const std::size_t k = bin[pick];
        ex.push_back(xs[k]);
        ey.push_back(ys[k]);
    }
    if (ex.size() < 3) throw estimation_error("holder_inverse_estimate: too few envelope points");
    rep.envelope_points = ex.size();

    const linear_fit_result fit = linear_fit(ey, ex);  // x = m y + a
    if (!(fit.slope > 0.0)) throw estimation_error("holder_inverse_estimate: envelope slope not positive");
    rep.theta_hat = std::min(1.0, 1.0 / fit.slope);
    rep.C_hat = std::exp(-rep.theta_hat * fit.intercept);
    return rep;
}

// Dyadic grid eps0, eps0/2, ..., eps0/2^{scales-1}.
inline std::vector<double> dyadic_grid(double eps0, std::size_t scales) {
    if (!(eps0 > 0.0) || !std::isfinite(eps0)) throw config_error("dyadic_grid: eps0 must be positive");
    if (scales < 1) throw config_error("dyadic_grid: need at least one scale");
    std::vector<double> g(scales);
    double e = eps0;
    for (auto& v : g) {
        v = e;
        e *= 0.5;
    }
    return g;
}

inline void validate_dyadic(const std::vector<double>& eps_grid, std::size_t min_scales) {
    if (eps_grid.size() < min_scales) throw config_error("eps grid: too few scales");
    for (std::size_t k = 0; k < eps_grid.size(); ++k) {
        if (!(eps_grid[k] > 0.0) || !std::isfinite(eps_grid[k])) throw config_error("eps grid: scales must be positive");
        if (k > 0 && std::abs(eps_grid[k] - 0.5 * eps_grid[k - 1]) > 1e-9 * eps_grid[k - 1])
            throw config_error("eps grid: scales must be dyadic");
    }
}

// Upper box-counting estimate on the leading-coordinate projection: occupied
// boxes per scale, then -slope of log N(eps) against log eps over the middle
// window, dropping saturated ends (one box, or one box per point).
inline double box_counting_dimension(const std::vector<SpectralField>& pts, const std::vector<double>& eps_grid,
                                     std::size_t proj_dims = 6) {
    if (pts.empty()) throw sample_error("box_counting_dimension: empty sample");
    validate_dyadic(eps_grid, 4);
    if (proj_dims < 1) throw config_error("box_counting_dimension: need at least one projected coordinate");
    const std::size_t dims = std::min<std::size_t>(proj_dims, pts[0].a.size());

    bool all_same = true;
    for (const auto& u : pts) {
        for (std::size_t c = 0; c < dims && all_same; ++c) all_same = (u.a[c] == pts[0].a[c]);
        if (!all_same) break;
    }
    if (all_same) return 0.0;  // a single occupied box at every scale
    if (pts.size() < 100) throw sample_error("box_counting_dimension: need at least 100 points");

    constexpr std::size_t max_dims = 8;
    if (dims > max_dims) throw config_error("box_counting_dimension: projection wider than 8 is unsupported");
    std::vector<double> log_eps, log_n;
    std::vector<std::array<long long, max_dims>> keys(pts.size());
    for (double eps : eps_grid) {
        for (std::size_t i = 0; i < pts.size(); ++i) {
            keys[i].fill(0);
            for (std::size_t c = 0; c < dims; ++c)
                keys[i][c] = static_cast<long long>(std::floor(pts[i].a[c] / eps));
        }
        std::sort(keys.begin(), keys.end());
        const auto boxes = static_cast<std::size_t>(std::distance(keys.begin(), std::unique(keys.begin(), keys.end())));
        if (boxes <= 1 || boxes >= pts.size()) continue;  // saturated end
        log_eps.push_back(std::log(eps));
        log_n.push_back(std::log(static_cast<double>(boxes)));
    }
    if (log_eps.size() < 2) throw estimation_error("box_counting_dimension: no scaling window");
    const linear_fit_result fit = linear_fit(log_eps, log_n);
    return -fit.slope;
}

// Printed embedding-dimension bound 1 - 2d/N, valid only for N > 2d.
inline double theta_bound(double d_hat, std::size_t N) {
    if (!(d_hat >= 0.0) || !std::isfinite(d_hat)) throw domain_error("theta_bound: d must be nonnegative");
    if (!(static_cast<double>(N) > 2.0 * d_hat)) throw domain_error("theta_bound: requires N > 2d");
    return 1.0 - 2.0 * d_hat / static_cast<double>(N);
}

struct DeviationReport {
    double m = 1.0;
    std::vector<double> eps;
    std::vector<std::size_t> delta;     // delta_m per eps; `unreachable` when no n works
    std::vector<double> residual_by_n;  // max graph residual for n = 1..D-1
    double dev_m_hat = 0.0;             // slope of log delta against -log eps
    static constexpr std::size_t unreachable = std::numeric_limits<std::size_t>::max();
};

// delta_m(X, eps) restricted to spectral spans P_nH: the smallest n whose
// graph construction (relation threshold m) leaves max residual below eps.
// This is an upper estimate of the subspace-optimal deviation. The residual
// reuses graph_distance verbatim, so the two paths cannot drift apart.
// Convention: n starts at 1, so eps above the sample diameter reports 1.
inline DeviationReport lipschitz_deviation(const std::vector<SpectralField>& pts, double m,
                                           const std::vector<double>& eps_grid,
                                           extension_rule rule = extension_rule::nearest_anchor,
                                           std::size_t threads = 1) {
    if (pts.empty()) throw sample_error("lipschitz_deviation: empty sample");
    validate_dyadic(eps_grid, 1);
    const std::size_t D = pts[0].op->dimension();
    if (D < 2) throw dimension_error("lipschitz_deviation: need at least two modes");

    DeviationReport rep;
    rep.m = m;
    rep.eps = eps_grid;
    rep.residual_by_n.assign(D - 1, 0.0);
    parallel_for(D - 1, threads, [&](std::size_t k) {
        const std::size_t n = k + 1;
        const MaximalSubset X = maximal_subset(pts, n, m);
        const GraphModel g = build_graph(pts, X, rule);
        rep.residual_by_n[k] = graph_distance(pts, X, g).d_ext;
    });

    rep.delta.assign(eps_grid.size(), DeviationReport::unreachable);
    for (std::size_t e = 0; e < eps_grid.size(); ++e) {
        for (std::size_t k = 0; k < rep.residual_by_n.size(); ++k) {
            if (rep.residual_by_n[k] < eps_grid[e]) {
                rep.delta[e] = k + 1;
                break;
            }
        }
    }

    std::vector<double> xs, ys;  // -log eps, log delta
    for (std::size_t e = 0; e < eps_grid.size(); ++e) {
        if (rep.delta[e] == DeviationReport::unreachable) continue;
        xs.push_back(-std::log(eps_grid[e]));
        ys.push_back(std::log(static_cast<double>(rep.delta[e])));
    }
    if (xs.size() >= 2) {
        const linear_fit_result fit = linear_fit(xs, ys);
        rep.dev_m_hat = fit.slope;
    }
    return rep;
}

}  // namespace atrl
