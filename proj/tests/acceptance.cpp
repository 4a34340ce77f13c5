// Acceptance harness: one line per criterion, PASS/FAIL, with the measured
// quantities and wall time printed alongside. Exit status is the number of
// failing criteria. Tolerances are pinned here on purpose; loosening them is
// a library regression, not a harness fix.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "atrl/experiment.hpp"
#include "oracle.hpp"

using namespace atrl;

namespace {

int failures = 0;

class stopwatch {
  public:
    stopwatch() : t0_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

  private:
    std::chrono::steady_clock::time_point t0_;
};

void report(int idx, const char* name, bool ok, double elapsed, double limit,
            const std::string& detail) {
    const bool in_time = limit <= 0.0 || elapsed <= limit;
    const bool pass = ok && in_time;
    if (!pass) ++failures;
    std::printf("criterion %02d [%s] %s (%.2fs%s) %s\n", idx, pass ? "PASS" : "FAIL", name, elapsed,
                in_time ? "" : " OVER LIMIT", detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

SpectralField random_field(OperatorPtr op, std::uint64_t seed) {
    normal_source g(seed);
    SpectralField u = zero_field(op);
    for (auto& c : u.a) c = g();
    return u;
}

// ---- 1. semigroup tail bound ------------------------------------------------

void criterion_tail_bound() {
    stopwatch sw;
    auto op = make_sine_dirichlet_operator(64, 0.05);
    const std::size_t ns[] = {4, 8, 16};
    const double alphas[] = {0.25, 0.5};
    double worst_slack = 1.0;
    bool ok = true;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = ns[trial % 3];
        const double alpha = alphas[(trial / 3) % 2];
        SpectralField tail = project(random_field(op, 9000 + trial), n).high;
        const double tn = norm(tail);
        for (int j = 0; j < 16; ++j) {
            const double t = 1e-3 * std::pow(1e4, double(j) / 15.0);
            const double lhs = fractional_power_norm(semigroup_apply(tail, t), alpha);
            const double rhs = tail_decay_bound(*op, n, alpha, t) * tn;
            const double slack = (rhs - lhs) / rhs;
            worst_slack = std::min(worst_slack, slack);
            if (!(slack >= -1e-12)) ok = false;
        }
    }
    // the decayed branch of the bound is attained by the pure mode n+1
    double worst_eq = 0.0;
    for (std::size_t n : ns) {
        for (double alpha : alphas) {
            SpectralField pure = zero_field(op);
            pure.a[n] = 1.7;
            const double lam = op->lambda(n + 1);
            for (double t : {alpha / lam, 2.0 * alpha / lam, 5.0 * alpha / lam}) {
                const double lhs = fractional_power_norm(semigroup_apply(pure, t), alpha);
                const double rhs = tail_decay_bound(*op, n, alpha, t) * norm(pure);
                worst_eq = std::max(worst_eq, std::abs(lhs - rhs) / rhs);
            }
        }
    }
    if (!(worst_eq <= 1e-10)) ok = false;
    report(1, "semigroup tail bound", ok, sw.seconds(), 1.0,
           fmt("3200 checks, worst slack=%.3g, pure-mode gap=%.3g", worst_slack, worst_eq));
}

// ---- 2. integrator order ----------------------------------------------------

void criterion_integrator_order() {
    stopwatch sw;
    ModelConfig mc;
    mc.modes = 24;
    mc.nu = 0.08;
    mc.forcing_amplitude = 0.8;
    Model m = make_model(mc);
    SpectralField u0 = zero_field(m.op);
    u0.a[0] = 0.9;
    u0.a[1] = -0.4;
    u0.a[2] = 0.2;
    const double T = 0.5;

    IntegratorConfig ref_cfg;
    ref_cfg.dt = T / 4096.0;
    SpectralField ref = evolve(m, u0, T, ref_cfg);
    auto error_at = [&](double dt) {
        IntegratorConfig icfg;
        icfg.scheme = scheme_id::imex_cnab2;
        icfg.dt = dt;
        return norm(evolve(m, u0, T, icfg) - ref);
    };
    const double order = std::log2(error_at(T / 64.0) / error_at(T / 128.0));

    ModelConfig lc;
    lc.modes = 16;
    lc.forcing_amplitude = 0.0;
    lc.linear_only = true;
    Model lin = make_model(lc);
    SpectralField w = random_field(lin.op, 42);
    IntegratorConfig icfg;
    icfg.dt = 0.05;
    const double gap = norm(step(lin, w, icfg) - semigroup_apply(w, icfg.dt)) / norm(w);

    const bool ok = order >= 1.8 && gap <= 1e-13;
    report(2, "integrator order", ok, sw.seconds(), 30.0,
           fmt("cnab2 order=%.3f, linear-vs-semigroup gap=%.3g", order, gap));
}

// ---- shared Burgers default sweep -------------------------------------------

LogLipReport default_sweep(std::uint64_t seed, std::size_t count, AttractorSample* keep = nullptr) {
    Model m = make_model(ModelConfig{});
    IntegratorConfig ic;
    ic.seed = seed;
    auto s = sample_attractor(m, ic, count);
    std::vector<SpectralField> ws;
    ws.reserve(count * (count - 1) / 2);
    for (std::size_t i = 0; i < s.snapshots.size(); ++i)
        for (std::size_t j = i + 1; j < s.snapshots.size(); ++j)
            ws.push_back(s.snapshots[i] - s.snapshots[j]);
    auto rep = verify_loglip_A(ws, s.M0, s.M1);
    rep.pair_count = ws.size();
    if (keep) *keep = std::move(s);
    return rep;
}

// ---- 3. log-Dirichlet constant stability ------------------------------------

void criterion_quotient_stability() {
    stopwatch sw;
    AttractorSample s1;
    auto r150 = default_sweep(1, 150, &s1);
    auto r300 = default_sweep(1, 300);
    const double drift = std::abs(r300.C_half / r150.C_half - 1.0);

    Model m = make_model(ModelConfig{});
    ExperimentConfig ec;
    auto trajs = perturbation_pairs(m, s1.snapshots.front(), ec);
    std::vector<QuotientSeries> series;
    for (auto& tp : trajs)
        if (!tp.degenerate) series.push_back(quotient_series(tp, s1.M0));
    auto rp = fit_riccati(series, ec.analysis.riccati_k3);
    auto env = check_riccati_envelope(series, rp, 0.1);

    const bool ok = r150.pair_count >= 10000 && std::isfinite(r150.C_half) && r150.C_half > 0.0 &&
                    drift <= 0.10 && s1.M0 == 4.0 * s1.sup_norm && !series.empty() && env.ok;
    report(3, "log-Dirichlet constant stability", ok, sw.seconds(), 300.0,
           fmt("pairs=%zu C_half=%.6g doubling drift=%.2f%% riccati worst=%.3g", r150.pair_count,
               r150.C_half, 100.0 * drift, env.worst_ratio));
}

// ---- 4. chained A-level constant --------------------------------------------

void criterion_chained_constant() {
    stopwatch sw;
    LogLipReport rs[3];
    for (std::uint64_t seed = 1; seed <= 3; ++seed) rs[seed - 1] = default_sweep(seed, 150);
    double mean = 0.0;
    for (auto& r : rs) mean += r.C_full / 3.0;
    double worst_dev = 0.0;
    bool chain_ok = true, finite_ok = true;
    for (auto& r : rs) {
        worst_dev = std::max(worst_dev, std::abs(r.C_full - mean) / mean);
        if (!(r.C_full <= std::sqrt(r.C0 * r.C1) * 1.10)) chain_ok = false;
        if (!std::isfinite(r.C_full) || !(r.C_full > 0.0)) finite_ok = false;
    }
    const bool ok = finite_ok && worst_dev <= 0.15 && chain_ok;
    report(4, "chained constant across seeds", ok, sw.seconds(), 300.0,
           fmt("C_full mean=%.6g worst seed dev=%.2f%% chain ok=%d", mean, 100.0 * worst_dev,
               int(chain_ok)));
}

// ---- 5. graph residual decay ------------------------------------------------

void criterion_residual_decay() {
    stopwatch sw;
    // Union of short-transient runs: six seeds approaching the attractor from
    // independent directions, sampled while high-mode content is still alive.
    ExperimentConfig cfg;
    cfg.model.nu = 0.02;
    cfg.integrator.t_transient = 0.4;
    cfg.integrator.sample_stride = 25;
    Model m = make_model(cfg.model);
    std::vector<SpectralField> pts;
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        cfg.integrator.seed = seed;
        auto s = sample_attractor(m, cfg.integrator, 25);
        for (auto& u : s.snapshots) pts.push_back(std::move(u));
    }

    std::vector<DecayRow> rows;
    for (std::size_t n : {4u, 6u, 8u, 12u, 16u, 24u}) {
        auto X = maximal_subset(pts, n, 1.0);
        auto g = build_graph(pts, X, extension_rule::nearest_anchor);
        rows.push_back(graph_distance(pts, X, g, 4));
    }
    bool nonincreasing = true;
    std::size_t positive = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (k > 0 && rows[k].d_free > rows[k - 1].d_free) nonincreasing = false;
        if (rows[k].d_free > 0.0) ++positive;
    }
    double slope = 0.0, r2 = 0.0;
    bool fit_ok = false;
    try {
        auto fit = decay_fit(rows, true);
        slope = fit.slope;
        r2 = fit.r2;
        fit_ok = !fit.perfect_graph && fit.slope < 0.0 && fit.r2 >= 0.9;
    } catch (const estimation_error&) {
        fit_ok = false;
    }
    const bool ok = nonincreasing && positive >= 3 && fit_ok;
    report(5, "graph residual decay", ok, sw.seconds(), 300.0,
           fmt("positive rows=%zu nonincreasing=%d slope=%.4g R2=%.4f", positive,
               int(nonincreasing), slope, r2));
}

// ---- 6. tail-transfer constant oracle ---------------------------------------

void criterion_theta_oracle() {
    stopwatch sw;
    FlowLipschitzParams fp;
    fp.C = 1.3;
    fp.K = 0.8;
    double worst = 0.0;
    for (double alpha : {0.3, 0.5, 0.7}) {
        for (double mu : {0.5, 1.0, 2.0}) {
            for (double lam : {4.0, 16.0, 64.0}) {
                fp.alpha = alpha;
                fp.mu = mu;
                const double closed = theta_n(fp, lam);
                const double quad = fp.K * fp.C * oracle::tail_weighted_integral(alpha, mu, lam);
                worst = std::max(worst, std::abs(closed - quad) / (1.0 + std::abs(closed)));
            }
        }
    }
    bool monotone = true;
    fp.alpha = 0.5;
    fp.mu = 1.0;
    double prev = std::numeric_limits<double>::infinity();
    for (double lam = 2.0; lam <= 256.0; lam *= 2.0) {
        const double v = theta_n(fp, lam);
        if (!(v < prev)) monotone = false;
        prev = v;
    }
    const bool ok = worst <= 1e-8 && monotone;
    report(6, "tail-transfer closed form vs quadrature", ok, sw.seconds(), 1.0,
           fmt("27-point grid, worst gap=%.3g, strictly decreasing=%d", worst, int(monotone)));
}

// ---- 7. greedy maximality ---------------------------------------------------

// Relation recomputed with plain loops, independent of the library norms.
bool naive_violates(const SpectralField& u, const SpectralField& v, std::size_t n, double m) {
    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < u.a.size(); ++i) {
        const double d = u.a[i] - v.a[i];
        (i < n ? lo : hi) += d * d;
    }
    return std::sqrt(hi) > m * std::sqrt(lo);
}

void criterion_greedy_maximality() {
    stopwatch sw;
    auto op = make_sine_dirichlet_operator(24, 0.6);
    const double ms[] = {0.7, 1.0, 1.5};
    std::size_t total_rejected = 0;
    bool ok = true;
    for (std::uint64_t s = 1; s <= 50; ++s) {
        const std::size_t count = 40 + (s * 17) % 161;
        std::vector<SpectralField> pts;
        normal_source g(4000 + s);
        for (std::size_t i = 0; i < count; ++i) {
            SpectralField u = zero_field(op);
            for (std::size_t c = 0; c < u.a.size(); ++c) u.a[c] = g() / double(c + 1);
            pts.push_back(std::move(u));
        }
        const std::size_t n = 1 + (s % 10);
        const double m = ms[s % 3];
        auto X = maximal_subset(pts, n, m);
        for (std::size_t r : X.rejected) {
            bool witnessed = false;
            for (std::size_t a : X.accepted)
                if (naive_violates(pts[r], pts[a], n, m)) {
                    witnessed = true;
                    break;
                }
            if (!witnessed) ok = false;
        }
        for (std::size_t i = 0; i < X.accepted.size(); ++i)
            for (std::size_t j = 0; j < i; ++j)
                if (naive_violates(pts[X.accepted[i]], pts[X.accepted[j]], n, m)) ok = false;
        total_rejected += X.rejected.size();
    }
    report(7, "greedy subset maximality", ok, sw.seconds(), 10.0,
           fmt("50 samples, %zu rejections all witnessed", total_rejected));
}

// ---- 8. embedding exponent monotonicity -------------------------------------

std::vector<SpectralField> analytic_curve(OperatorPtr op, std::size_t count) {
    std::vector<SpectralField> pts;
    pts.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double s = 6.28318530717958648 * double(i) / double(count);
        SpectralField u = zero_field(op);
        for (std::size_t j = 0; j < u.a.size(); ++j) {
            const double q = double(j + 1);
            u.a[j] = std::cos(q * s + 0.7 * q) / (q * q);
        }
        pts.push_back(std::move(u));
    }
    return pts;
}

LinearMapSpec projection_map(std::size_t N, std::size_t D) {
    LinearMapSpec L;
    L.N = N;
    L.D = D;
    L.matrix.assign(N * D, 0.0);
    for (std::size_t r = 0; r < N; ++r) L.matrix[r * D + r] = 1.0;
    return L;
}

void criterion_embedding_monotone() {
    stopwatch sw;
    auto op = make_sine_dirichlet_operator(64, 0.05);
    auto pts = analytic_curve(op, 1000);

    double spread = 0.0;
    for (const auto& u : pts)
        for (std::size_t j = 0; j < 6; ++j) spread = std::max(spread, std::abs(u.a[j]));
    const double d_hat = box_counting_dimension(pts, dyadic_grid(spread, 6), 6);

    double medians[3] = {0, 0, 0};
    bool margin_ok = true;
    const std::size_t Ns[] = {8, 16, 32};
    for (int k = 0; k < 3; ++k) {
        std::vector<double> thetas;
        for (std::uint64_t seed = 1; seed <= 10; ++seed)
            thetas.push_back(holder_inverse_estimate(pts, random_linear_map(64, Ns[k], seed)).theta_hat);
        std::sort(thetas.begin(), thetas.end());
        medians[k] = 0.5 * (thetas[4] + thetas[5]);
        if (!(medians[k] >= theta_bound(d_hat, Ns[k]) - 0.15)) margin_ok = false;
    }
    const bool monotone = medians[0] <= medians[1] && medians[1] <= medians[2];

    // isometry control: sample supported on the first 4 modes, mapped by the
    // coordinate projection, must short-circuit to exactly 1
    normal_source g(321);
    std::vector<SpectralField> flat;
    for (int i = 0; i < 120; ++i) {
        SpectralField u = zero_field(op);
        for (std::size_t c = 0; c < 4; ++c) u.a[c] = g();
        flat.push_back(std::move(u));
    }
    auto iso = holder_inverse_estimate(flat, projection_map(4, 64));
    const bool iso_ok = iso.theta_hat == 1.0 && iso.C_hat == 1.0;

    const bool ok = monotone && margin_ok && iso_ok;
    report(8, "embedding exponent monotonicity", ok, sw.seconds(), 120.0,
           fmt("d_hat=%.3f medians=%.4f/%.4f/%.4f iso=%d", d_hat, medians[0], medians[1],
               medians[2], int(iso_ok)));
}

// ---- 9. deviation zero cases ------------------------------------------------

void criterion_deviation_zero() {
    stopwatch sw;
    // an exact 1-Lipschitz graph over the first three modes
    auto op = make_sine_dirichlet_operator(16, 1.0);
    normal_source g(77);
    std::vector<SpectralField> graph_pts;
    for (int i = 0; i < 140; ++i) {
        SpectralField u = zero_field(op);
        for (std::size_t c = 0; c < 3; ++c) u.a[c] = g();
        const double t = (u.a[0] + u.a[1] + u.a[2]) / std::sqrt(3.0);
        u.a[3] = 0.54 * t;
        u.a[5] = 0.72 * t;
        graph_pts.push_back(std::move(u));
    }
    auto grid_a = dyadic_grid(sample_diameter(graph_pts), 6);
    auto rep_a = lipschitz_deviation(graph_pts, 1.0, grid_a, extension_rule::nearest_anchor, 2);
    std::size_t delta_max = 0;
    for (std::size_t d : rep_a.delta) delta_max = std::max(delta_max, d);

    // equilibrium regime: the attractor is a single analytic steady state and
    // the converged sample must need only one mode at every scale
    ModelConfig mc;
    mc.nu = 0.5;
    Model m = make_model(mc);
    IntegratorConfig ic;
    auto s = sample_attractor(m, ic, 150);
    auto grid_b = dyadic_grid(sample_diameter(s.snapshots), 6);
    auto rep_b = lipschitz_deviation(s.snapshots, 1.0, grid_b, extension_rule::nearest_anchor, 2);

    const bool ok = delta_max <= 3 && rep_b.dev_m_hat <= 0.1;
    report(9, "deviation zero cases", ok, sw.seconds(), 120.0,
           fmt("graph delta max=%zu, equilibrium dev_1_hat=%.6g", delta_max, rep_b.dev_m_hat));
}

// ---- 10. pipeline determinism -----------------------------------------------

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_determinism() {
    stopwatch sw;
    namespace fs = std::filesystem;
    const fs::path work = fs::path("acceptance_work");
    fs::remove_all(work);
    fs::create_directories(work);
    const fs::path cfg = work / "pipeline.ini";
    {
        std::ofstream out(cfg);
        out << "[model]\nid = burgers\nnu = 0.12\nmodes = 16\nforcing_amplitude = 0.7\n"
            << "[integrator]\ndt = 2e-3\nt_transient = 2.0\nsample_stride = 15\nseed = 4\n"
            << "[analysis]\ncount = 110\nn_list = 2,4,6\nperturb_amps = 1e-2,1e-4\n"
            << "pair_horizon = 0.5\nembed_n_list = 4,8\nembed_seed_list = 1,2\neps_scales = 5\n";
    }
    bool ran_ok = true;
    for (int run = 1; run <= 2; ++run) {
        std::string cmd = std::string(ATRL_BIN) + " report --config " + cfg.string() + " --out " +
                          (work / ("run" + std::to_string(run))).string() + " > /dev/null 2>&1";
        if (std::system(cmd.c_str()) != 0) ran_ok = false;
    }
    bool identical = true;
    std::string detail = "archives and csvs byte-identical";
    for (const char* name : {"snapshots.atrl", "quotients.csv", "manifold.csv", "embed.csv"}) {
        const std::string a = slurp(work / "run1" / name), b = slurp(work / "run2" / name);
        if (a.empty() || a != b) {
            identical = false;
            detail = std::string(name) + (a.empty() ? " missing" : " differs");
        }
    }
    fs::remove_all(work);
    report(10, "pipeline determinism", ran_ok && identical, sw.seconds(), 0.0, detail);
}

}  // namespace

int main() {
    criterion_tail_bound();
    criterion_integrator_order();
    criterion_quotient_stability();
    criterion_chained_constant();
    criterion_residual_decay();
    criterion_theta_oracle();
    criterion_greedy_maximality();
    criterion_embedding_monotone();
    criterion_deviation_zero();
    criterion_determinism();
    if (failures == 0) std::printf("all criteria passed\n");
    return failures;
}
