#pragma once

// Batch experiment drivers shared by the command-line tool and the
// acceptance checks: attractor sampling, pair-set construction, the three
// analysis sweeps, and byte-deterministic CSV emission.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "atrl/common.hpp"
#include "atrl/config.hpp"
#include "atrl/csv.hpp"
#include "atrl/embedding.hpp"
#include "atrl/field.hpp"
#include "atrl/integrate.hpp"
#include "atrl/manifold.hpp"
#include "atrl/models.hpp"
#include "atrl/quotients.hpp"

namespace atrl {

struct SimulationResult {
    Model model;
    AttractorSample sample;
};

inline SimulationResult run_simulation(const ExperimentConfig& cfg) {
    SimulationResult r;
    r.model = make_model(cfg.model);
    r.sample = sample_attractor(r.model, cfg.integrator, cfg.analysis.count);
    return r;
}

// Rebuild the sample bookkeeping for snapshots loaded from an archive; the
// recorded coefficients are exact, so the recomputed scales match simulate's.
inline AttractorSample sample_from_fields(std::vector<SpectralField> fields, const IntegratorConfig& icfg) {
    if (fields.size() < 2) throw sample_error("sample: need at least two snapshots");
    AttractorSample s;
    for (const auto& u : fields) {
        s.sup_norm = std::max(s.sup_norm, norm(u));
        s.sup_half_norm = std::max(s.sup_half_norm, fractional_power_norm(u, 0.5));
    }
    s.M0 = 4.0 * s.sup_norm;
    s.M1 = 4.0 * s.sup_half_norm;
    s.stride_time = icfg.dt * static_cast<double>(icfg.sample_stride);
    s.t_first = 0.0;  // unknown from the archive; unused by the analyses
    s.snapshots = std::move(fields);
    return s;
}

inline std::vector<std::pair<std::size_t, std::size_t>> all_pairs(std::size_t count) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(count * (count - 1) / 2);
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = i + 1; j < count; ++j) out.emplace_back(i, j);
    return out;
}

// One perturbed re-integration per amplitude: the base state is nudged along
// a seeded low-mode direction scaled to exactly `amp`, then both copies are
// evolved side by side over the pair horizon.
inline std::vector<TrajectoryPair> perturbation_pairs(const Model& m, const SpectralField& base,
                                                      const ExperimentConfig& cfg) {
    std::vector<TrajectoryPair> out;
    const auto& amps = cfg.analysis.perturb_amps;
    for (std::size_t k = 0; k < amps.size(); ++k) {
        const double amp = amps[k];
        if (!(amp > 0.0) || !std::isfinite(amp)) throw config_error("perturb_amps: amplitudes must be positive");
        normal_source g(cfg.integrator.seed + 101 + k);
        SpectralField dir = zero_field(base.op);
        const std::size_t low = std::min<std::size_t>(dir.a.size(), 8);
        for (std::size_t i = 0; i < low; ++i) dir.a[i] = g();
        const double dn = norm(dir);
        SpectralField v0 = base + (amp / dn) * dir;
        out.push_back(pair_trajectories(m, base, v0, cfg.analysis.pair_horizon, cfg.integrator,
                                        cfg.analysis.record_stride));
    }
    return out;
}

struct QuotientsRow {
    std::string pair_set;  // "snapshots" or "perturb_<amp>"
    std::string m_source;  // "measured" or "override"
    LogLipReport rep;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // worst-index decoder
    double K4_hat = 0.0;                                     // joint fit, series rows only
    int riccati_ok = 1;
    std::size_t series_len = 0;
};

struct QuotientsArtifacts {
    std::vector<QuotientsRow> rows;
    RiccatiParams riccati;  // fitted jointly over the perturbation series
    RiccatiEnvelopeCheck envelope;
    std::vector<QuotientSeries> series;
};

inline QuotientsArtifacts quotients_analysis(const Model& m, const AttractorSample& sample,
                                             const ExperimentConfig& cfg,
                                             const std::vector<TrajectoryPair>& traj,
                                             std::size_t threads = 1) {
    QuotientsArtifacts art;
    const auto& a = cfg.analysis;
    const bool has_override = (a.m0_override > 0.0) || (a.m1_override > 0.0);
    const double M0o = (a.m0_override > 0.0) ? a.m0_override : sample.M0;
    const double M1o = (a.m1_override > 0.0) ? a.m1_override : sample.M1;
    // The quotient series use the override scale when one is given, since the
    // log normalization changes with M.
    const double M0_eff = (a.m0_override > 0.0) ? a.m0_override : sample.M0;

    const auto snap_pairs = all_pairs(sample.snapshots.size());

    struct SetSpec {
        std::string name;
        const std::vector<SpectralField>* states;
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        std::size_t series_len;
    };
    std::vector<SetSpec> sets;
    sets.push_back({"snapshots", &sample.snapshots, snap_pairs, 0});

    std::vector<std::vector<SpectralField>> traj_states(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const auto& tp = traj[k];
        if (tp.degenerate) throw sample_error("quotients: degenerate perturbation pair");
        auto& states = traj_states[k];
        states.reserve(2 * tp.u.size());
        states.insert(states.end(), tp.u.begin(), tp.u.end());
        states.insert(states.end(), tp.v.begin(), tp.v.end());
        std::vector<std::pair<std::size_t, std::size_t>> pr;
        pr.reserve(tp.u.size());
        for (std::size_t t = 0; t < tp.u.size(); ++t) pr.emplace_back(t, tp.u.size() + t);
        sets.push_back({"perturb_" + csv_double(cfg.analysis.perturb_amps[k]), &traj_states[k], std::move(pr),
                        tp.u.size()});

        art.series.push_back(quotient_series(tp, M0_eff));
    }

    if (!art.series.empty()) {
        art.riccati = fit_riccati(art.series, a.riccati_k3);
        art.envelope = check_riccati_envelope(art.series, art.riccati, a.riccati_tol);
    }

    for (std::size_t si = 0; si < sets.size(); ++si) {
        const auto& set = sets[si];
        QuotientsRow row;
        row.pair_set = set.name;
        row.m_source = "measured";
        row.pairs = set.pairs;
        row.series_len = set.series_len;
        row.rep = verify_field_loglip(m, *set.states, set.pairs, sample.M0, sample.M1, threads);
        if (si >= 1) {
            row.K4_hat = art.riccati.K4;
            const RiccatiEnvelopeCheck one =
                check_riccati_envelope({art.series[si - 1]}, art.riccati, a.riccati_tol);
            row.riccati_ok = one.ok ? 1 : 0;
        }
        art.rows.push_back(row);
        if (has_override) {
            QuotientsRow orow = row;
            orow.m_source = "override";
            orow.rep = verify_field_loglip(m, *set.states, set.pairs, M0o, M1o, threads);
            art.rows.push_back(std::move(orow));
        }
    }
    return art;
}

struct ManifoldRow {
    DecayRow decay;
    GraphRatio ratio;
    double bound_raw = std::numeric_limits<double>::quiet_NaN();
    double bound_root = std::numeric_limits<double>::quiet_NaN();
    double theta = std::numeric_limits<double>::quiet_NaN();
};

struct ManifoldArtifacts {
    std::vector<ManifoldRow> rows;
    DecayReport fit_free;  // extension-free residual; the decay rate applies to this one
    DecayReport fit_ext;
    bool fit_free_ok = false;
    bool fit_ext_ok = false;
    FlowLipschitzParams flow;
    double K_alpha = 0.0;  // max ||F(u)-F(v)|| / ||A^alpha w|| over snapshot pairs
};

// Field constant at the configured exponent, measured over all snapshot pairs.
inline double field_alpha_constant(const Model& m, const std::vector<SpectralField>& states, double alpha,
                                   std::size_t threads) {
    if (states.size() < 2) throw sample_error("field constant: need at least two states");
    std::vector<SpectralField> F(states.size(), zero_field(states[0].op));
    parallel_for(states.size(), threads, [&](std::size_t i) { F[i] = nonlinear_term(m, states[i]); });
    double K = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        for (std::size_t j = i + 1; j < states.size(); ++j) {
            const double wn = fractional_power_norm(states[i] - states[j], alpha);
            if (wn == 0.0) continue;
            K = std::max(K, norm(F[i] - F[j]) / wn);
        }
    }
    return K;
}

inline ManifoldArtifacts manifold_analysis(const Model& m, const AttractorSample& sample,
                                           const ExperimentConfig& cfg,
                                           const std::vector<TrajectoryPair>& traj,
                                           std::size_t threads = 1) {
    ManifoldArtifacts art;
    const auto& a = cfg.analysis;
    const auto& pts = sample.snapshots;
    const std::size_t D = pts.at(0).op->dimension();

    art.flow = fit_flow_lipschitz(traj, a.alpha);
    art.K_alpha = field_alpha_constant(m, pts, a.alpha, threads);

    FlowLipschitzParams fp = art.flow;
    fp.K = art.K_alpha;

    std::vector<DecayRow> decays;
    for (std::size_t n : a.n_list) {
        if (n < 1 || n >= D) throw config_error("manifold: n_list entries must lie in [1, D-1]");
        ManifoldRow row;
        const MaximalSubset X = maximal_subset(pts, n, a.m_relation);
        const GraphModel g = build_graph(pts, X, a.extension);
        row.decay = graph_distance(pts, X, g, threads);
        row.ratio = graph_ratio_check(pts, n, a.alpha);
        if (sample.M1 > 0.0) {
            const DistBound b = graph_distance_bound(sample.M1, art.flow.C, row.decay.lambda_next);
            row.bound_raw = b.raw;
            row.bound_root = b.root;
        }
        if (fp.K > 0.0) row.theta = theta_n(fp, row.decay.lambda_next);
        decays.push_back(row.decay);
        art.rows.push_back(std::move(row));
    }

    try {
        art.fit_free = decay_fit(decays, true);
        art.fit_free_ok = true;
    } catch (const estimation_error&) {
    }
    try {
        art.fit_ext = decay_fit(decays, false);
        art.fit_ext_ok = true;
    } catch (const estimation_error&) {
    }
    return art;
}

struct EmbedRow {
    std::size_t N = 0;
    std::uint64_t seed = 0;
    EmbeddingReport rep;
};

struct EmbedArtifacts {
    double d_hat = 0.0;
    DeviationReport deviation;  // relation threshold 1, the dev_1 pathway
    std::vector<EmbedRow> rows;
};

inline double sample_diameter(const std::vector<SpectralField>& pts) {
    double diam = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) diam = std::max(diam, norm(pts[i] - pts[j]));
    return diam;
}

inline EmbedArtifacts embedding_analysis(const AttractorSample& sample, const ExperimentConfig& cfg,
                                         std::size_t threads = 1) {
    EmbedArtifacts art;
    const auto& a = cfg.analysis;
    const auto& pts = sample.snapshots;
    const std::size_t D = pts.at(0).op->dimension();

    double spread = 0.0;
    const std::size_t dims = std::min<std::size_t>(a.proj_dims, D);
    for (std::size_t c = 0; c < dims; ++c) {
        double lo = pts[0].a[c], hi = pts[0].a[c];
        for (const auto& u : pts) {
            lo = std::min(lo, u.a[c]);
            hi = std::max(hi, u.a[c]);
        }
        spread = std::max(spread, hi - lo);
    }
    if (spread == 0.0) {
        art.d_hat = 0.0;  // projected cloud is a single point
    } else if (pts.size() < 100) {
        // Below the box-counting precondition: no dimension estimate, and the
        // embedding bound stays flagged inapplicable.
        art.d_hat = std::numeric_limits<double>::quiet_NaN();
    } else {
        const double eps0 = (a.eps0 > 0.0) ? a.eps0 : 0.5 * spread;
        try {
            art.d_hat = box_counting_dimension(pts, dyadic_grid(eps0, a.eps_scales), a.proj_dims);
        } catch (const estimation_error&) {
            art.d_hat = std::numeric_limits<double>::quiet_NaN();  // no scaling window
        }
    }

    const double diam = sample_diameter(pts);
    const double dev_eps0 = (a.eps0 > 0.0) ? a.eps0 : (diam > 0.0 ? diam : 1.0);
    art.deviation = lipschitz_deviation(pts, 1.0, dyadic_grid(dev_eps0, a.eps_scales), a.extension, threads);

    for (std::size_t N : a.embed_n_list) {
        for (std::uint64_t seed : a.embed_seed_list) {
            EmbedRow row;
            row.N = N;
            row.seed = seed;
            row.rep = holder_inverse_estimate(pts, random_linear_map(D, N, seed));
            row.rep.d_hat = art.d_hat;
            if (static_cast<double>(N) > 2.0 * art.d_hat)
                row.rep.theta_bound = theta_bound(art.d_hat, N);
            else
                row.rep.theta_bound = std::numeric_limits<double>::quiet_NaN();  // bound inapplicable
            art.rows.push_back(std::move(row));
        }
    }
    return art;
}

namespace detail {

inline std::string pair_cell(const std::vector<std::pair<std::size_t, std::size_t>>& pairs, std::size_t idx,
                             bool second) {
    if (idx == LogLipReport::none || idx >= pairs.size()) return "-";
    return std::to_string(second ? pairs[idx].second : pairs[idx].first);
}

}  // namespace detail

inline std::string quotients_csv(const QuotientsArtifacts& art) {
    csv_writer w({"pair_set", "m_source", "M0", "M1", "pairs", "skipped", "C_half", "C0", "C1", "C_full",
                  "C_field", "K_hat", "chain_slack", "field_gap", "worst_half_i", "worst_half_j",
                  "worst_full_i", "worst_full_j", "worst_field_i", "worst_field_j", "series_len", "K4_hat",
                  "riccati_ok"});
    for (const auto& r : art.rows) {
        w.add(r.pair_set)
            .add(r.m_source)
            .add(r.rep.M0_used)
            .add(r.rep.M1_used)
            .add(r.rep.pair_count)
            .add(r.rep.skipped)
            .add(r.rep.C_half)
            .add(r.rep.C0)
            .add(r.rep.C1)
            .add(r.rep.C_full)
            .add(r.rep.C_field)
            .add(r.rep.K_hat)
            .add(r.rep.chain_slack)
            .add(r.rep.field_gap)
            .add(detail::pair_cell(r.pairs, r.rep.worst_half, false))
            .add(detail::pair_cell(r.pairs, r.rep.worst_half, true))
            .add(detail::pair_cell(r.pairs, r.rep.worst_full, false))
            .add(detail::pair_cell(r.pairs, r.rep.worst_full, true))
            .add(detail::pair_cell(r.pairs, r.rep.worst_field, false))
            .add(detail::pair_cell(r.pairs, r.rep.worst_field, true))
            .add(r.series_len)
            .add(r.K4_hat)
            .add(r.riccati_ok);
        w.end_row();
    }
    return w.bytes();
}

inline std::string manifold_csv(const ManifoldArtifacts& art) {
    csv_writer w({"n", "lambda_next", "anchors", "graph_ratio", "implied_c", "d_ext", "d_free", "bound_raw",
                  "bound_root", "theta", "fit_free_slope", "fit_free_intercept", "fit_free_r2",
                  "fit_ext_slope", "fit_ext_r2", "flow_C", "flow_mu", "K_alpha"});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& r : art.rows) {
        w.add(r.decay.n)
            .add(r.decay.lambda_next)
            .add(r.decay.anchor_count)
            .add(r.ratio.ratio)
            .add(r.ratio.implied_c)
            .add(r.decay.d_ext)
            .add(r.decay.d_free)
            .add(r.bound_raw)
            .add(r.bound_root)
            .add(r.theta)
            .add(art.fit_free_ok ? art.fit_free.slope : nan)
            .add(art.fit_free_ok ? art.fit_free.intercept : nan)
            .add(art.fit_free_ok ? art.fit_free.r2 : nan)
            .add(art.fit_ext_ok ? art.fit_ext.slope : nan)
            .add(art.fit_ext_ok ? art.fit_ext.r2 : nan)
            .add(art.flow.C)
            .add(art.flow.mu)
            .add(art.K_alpha);
        w.end_row();
    }
    return w.bytes();
}

inline std::string embed_csv(const EmbedArtifacts& art) {
    csv_writer w({"N", "seed", "theta_hat", "C_hat", "injectivity_margin", "injective", "d_hat", "theta_bound",
                  "bound_applicable", "dev_1_hat"});
    for (const auto& r : art.rows) {
        w.add(r.N)
            .add(r.seed)
            .add(r.rep.theta_hat)
            .add(r.rep.C_hat)
            .add(r.rep.injectivity_margin)
            .add(r.rep.injectivity_failure ? 0 : 1)
            .add(r.rep.d_hat)
            .add(r.rep.theta_bound)
            .add(std::isnan(r.rep.theta_bound) ? 0 : 1)
            .add(art.deviation.dev_m_hat);
        w.end_row();
    }
    return w.bytes();
}

}  // namespace atrl
