#pragma once

// Time integration of du/dt + Au = F(u) with A handled exactly.
//
//   exponential_rk4: integrating-factor RK4. With E = e^{-Ah}, H = e^{-Ah/2}:
//     k1 = F(u)
//     k2 = F(H(u + h/2 k1))
//     k3 = F(H u + h/2 k2)
//     k4 = F(E u + h H k3)
//     u' = E u + h/6 (E k1 + 2 H k2 + 2 H k3 + k4)
//   With F == 0 this reduces to u' = E u, the exact semigroup.
//
//   imex_cnab2: Crank-Nicolson on A, Adams-Bashforth 2 on F; the first step
//   (and any partial step) uses the self-starting CN-Euler form.

#include <cmath>
#include <cstdint>
#include <vector>

#include "atrl/common.hpp"
#include "atrl/models.hpp"

namespace atrl {

enum class scheme_id : std::uint8_t {
    exponential_rk4 = 1,
    imex_cnab2 = 2,
};

struct IntegratorConfig {
    scheme_id scheme = scheme_id::exponential_rk4;
    double dt = 1e-3;
    double t_transient = 10.0;  // burn-in before any snapshot
    double t_sample = 20.0;     // sampling horizon after burn-in
    std::size_t sample_stride = 50;  // steps between snapshots
    std::uint64_t seed = 1;
};

inline void validate(const IntegratorConfig& c) {
    if (!(c.dt > 0.0) || !std::isfinite(c.dt)) throw config_error("integrator: dt must be positive");
    if (!(c.t_transient >= 0.0)) throw config_error("integrator: t_transient must be nonnegative");
    if (!(c.t_sample >= 0.0)) throw config_error("integrator: t_sample must be nonnegative");
    if (c.sample_stride < 1) throw config_error("integrator: sample_stride must be at least 1");
}

namespace detail {

class stepper {
  public:
    stepper(const Model& m, const IntegratorConfig& icfg) : m_(&m), cfg_(icfg) {
        validate(icfg);
        precompute(icfg.dt);
    }

    // One step of size h (defaults to dt). A partial step resets multistep
    // history, matching a restart.
    void advance(SpectralField& u, double& t, double h_override = -1.0) {
        const double h = (h_override > 0.0) ? h_override : cfg_.dt;
        if (h != planned_h_) {
            precompute(h);
            has_history_ = false;
        }
        if (cfg_.scheme == scheme_id::exponential_rk4)
            step_ifrk4(u, h);
        else
            step_cnab2(u, h);
        t += h;
        if (!all_finite(u.a)) throw divergence_error(t);
    }

    void reset_history() { has_history_ = false; }

  private:
    void precompute(double h) {
        planned_h_ = h;
        const auto& lam = m_->op->eigenvalues;
        const std::size_t D = lam.size();
        e_full_.resize(D);
        e_half_.resize(D);
        cn_num_.resize(D);
        cn_den_.resize(D);
        for (std::size_t i = 0; i < D; ++i) {
            e_full_[i] = std::exp(-lam[i] * h);
            e_half_[i] = std::exp(-0.5 * lam[i] * h);
            cn_num_[i] = 1.0 - 0.5 * h * lam[i];
            cn_den_[i] = 1.0 / (1.0 + 0.5 * h * lam[i]);
        }
    }

    void step_ifrk4(SpectralField& u, double h) {
        const std::size_t D = u.a.size();
        SpectralField k1 = nonlinear_term(*m_, u);
        SpectralField s(u.op, std::vector<double>(D));
        for (std::size_t i = 0; i < D; ++i) s.a[i] = e_half_[i] * (u.a[i] + 0.5 * h * k1.a[i]);
        SpectralField k2 = nonlinear_term(*m_, s);
        for (std::size_t i = 0; i < D; ++i) s.a[i] = e_half_[i] * u.a[i] + 0.5 * h * k2.a[i];
        SpectralField k3 = nonlinear_term(*m_, s);
        for (std::size_t i = 0; i < D; ++i) s.a[i] = e_full_[i] * u.a[i] + h * e_half_[i] * k3.a[i];
        SpectralField k4 = nonlinear_term(*m_, s);
        for (std::size_t i = 0; i < D; ++i)
            u.a[i] = e_full_[i] * u.a[i] +
                     (h / 6.0) * (e_full_[i] * k1.a[i] + 2.0 * e_half_[i] * (k2.a[i] + k3.a[i]) + k4.a[i]);
    }

    void step_cnab2(SpectralField& u, double h) {
        const std::size_t D = u.a.size();
        SpectralField fn = nonlinear_term(*m_, u);
        if (!has_history_) {
            prev_f_ = fn;  // CN-Euler bootstrap
            has_history_ = true;
        }
        for (std::size_t i = 0; i < D; ++i) {
            const double fab = 1.5 * fn.a[i] - 0.5 * prev_f_.a[i];
            u.a[i] = (cn_num_[i] * u.a[i] + h * fab) * cn_den_[i];
        }
        prev_f_ = fn;
    }

    const Model* m_;
    IntegratorConfig cfg_;
    double planned_h_ = -1.0;
    std::vector<double> e_full_, e_half_, cn_num_, cn_den_;
    SpectralField prev_f_;
    bool has_history_ = false;
};

}  // namespace detail

// One step of the configured scheme from state u; returns the new state.
inline SpectralField step(const Model& m, const SpectralField& u, const IntegratorConfig& icfg) {
    detail::stepper s(m, icfg);
    SpectralField v = u;
    double t = 0.0;
    s.advance(v, t);
    return v;
}

// Integrate over [0, T]: floor(T/dt) full steps plus one final partial step
// when T is not a step multiple.
inline SpectralField evolve(const Model& m, const SpectralField& u0, double T, const IntegratorConfig& icfg) {
    if (!(T >= 0.0)) throw config_error("integrator: horizon must be nonnegative");
    detail::stepper s(m, icfg);
    SpectralField u = u0;
    double t = 0.0;
    const std::size_t full = static_cast<std::size_t>(std::floor(T / icfg.dt + 1e-12));
    for (std::size_t k = 0; k < full; ++k) s.advance(u, t);
    const double rest = T - static_cast<double>(full) * icfg.dt;
    if (rest > 1e-12 * std::max(1.0, T)) s.advance(u, t, rest);
    return u;
}

// Deterministic initial state: normalized forcing direction plus seeded
// low-mode noise.
inline SpectralField initial_condition(const Model& m, std::uint64_t seed) {
    SpectralField u = zero_field(m.op);
    const double fn = norm(m.forcing);
    if (fn > 0.0) {
        for (std::size_t i = 0; i < u.a.size(); ++i) u.a[i] = m.forcing.a[i] / fn;
    }
    normal_source g(seed);
    const std::size_t low = std::min<std::size_t>(u.a.size(), 16);
    for (std::size_t i = 0; i < low; ++i) u.a[i] += 0.1 * g();
    return u;
}

struct AttractorSample {
    std::vector<SpectralField> snapshots;
    double sup_norm = 0.0;       // sup ||u|| over the recorded snapshots
    double sup_half_norm = 0.0;  // sup ||A^(1/2) u||
    double M0 = 0.0;             // 4 sup ||u||
    double M1 = 0.0;             // 4 sup ||A^(1/2) u||
    double t_first = 0.0;
    double stride_time = 0.0;
};

// Burn in for t_transient, then record `count` snapshots sample_stride steps
// apart. The reported M0/M1 are the log-argument scales used downstream.
inline AttractorSample sample_attractor(const Model& m, const IntegratorConfig& icfg, std::size_t count) {
    if (count < 2) throw sample_error("sample_attractor: need count >= 2");
    validate(icfg);
    detail::stepper s(m, icfg);
    SpectralField u = initial_condition(m, icfg.seed);
    double t = 0.0;
    const std::size_t burn = static_cast<std::size_t>(std::ceil(icfg.t_transient / icfg.dt - 1e-12));
    for (std::size_t k = 0; k < burn; ++k) s.advance(u, t);
    AttractorSample out;
    out.t_first = t;
    out.stride_time = icfg.dt * static_cast<double>(icfg.sample_stride);
    out.snapshots.reserve(count);
    out.snapshots.push_back(u);
    for (std::size_t i = 1; i < count; ++i) {
        for (std::size_t k = 0; k < icfg.sample_stride; ++k) s.advance(u, t);
        out.snapshots.push_back(u);
    }
    for (const auto& snap : out.snapshots) {
        out.sup_norm = std::max(out.sup_norm, norm(snap));
        out.sup_half_norm = std::max(out.sup_half_norm, fractional_power_norm(snap, 0.5));
    }
    out.M0 = 4.0 * out.sup_norm;
    out.M1 = 4.0 * out.sup_half_norm;
    return out;
}

struct TrajectoryPair {
    std::vector<double> times;
    std::vector<SpectralField> u;
    std::vector<SpectralField> v;
    bool degenerate = false;  // initial separation at or below roundoff
};

// Evolve two initial states side by side with the same scheme and step,
// recording every record_stride steps (always t = 0 and the final time).
inline TrajectoryPair pair_trajectories(const Model& m, const SpectralField& u0, const SpectralField& v0,
                                        double T, const IntegratorConfig& icfg, std::size_t record_stride = 1) {
    validate(icfg);
    if (record_stride < 1) throw config_error("pair_trajectories: record_stride must be at least 1");
    check_compatible(u0, v0);
    TrajectoryPair out;
    out.degenerate = norm(u0 - v0) <= 1e-14 * std::max(1.0, norm(u0));
    detail::stepper su(m, icfg), sv(m, icfg);
    SpectralField u = u0, v = v0;
    double tu = 0.0, tv = 0.0;
    const std::size_t full = static_cast<std::size_t>(std::floor(T / icfg.dt + 1e-12));
    out.times.push_back(0.0);
    out.u.push_back(u);
    out.v.push_back(v);
    for (std::size_t k = 1; k <= full; ++k) {
        su.advance(u, tu);
        sv.advance(v, tv);
        if (k % record_stride == 0 || k == full) {
            out.times.push_back(tu);
            out.u.push_back(u);
            out.v.push_back(v);
        }
    }
    const double rest = T - static_cast<double>(full) * icfg.dt;
    if (rest > 1e-12 * std::max(1.0, T)) {
        su.advance(u, tu, rest);
        sv.advance(v, tv, rest);
        out.times.push_back(tu);
        out.u.push_back(u);
        out.v.push_back(v);
    }
    return out;
}

}  // namespace atrl
