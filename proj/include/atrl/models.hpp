#pragma once

// The two dissipative models, both evolved as du/dt + Au = F(u) with F =
// forcing - quadratic advection, discretized pseudospectrally with 2/3-rule
// dealiasing.
//
//   burgers_1d: Dirichlet data on (0, pi), orthonormal basis
//     phi_j = sqrt(2/pi) sin(j x), lambda_j = nu j^2, advection -u u_x.
//   nse_2d: zero-mean divergence-free velocity fields on the 2-torus,
//     evolved in scalar vorticity form with velocity recovered through the
//     Biot-Savart kernel; coefficients stay in the orthonormal basis of the
//     Stokes operator (cos/sin pair per retained wavevector, lambda = nu|k|^2),
//     so every norm and semigroup action upstream applies unchanged.

#include <cmath>
#include <complex>
#include <vector>

#include "atrl/common.hpp"
#include "atrl/fft.hpp"
#include "atrl/field.hpp"

namespace atrl {

enum class model_id : std::uint8_t {
    burgers_1d = 1,
    nse_2d = 2,
};

enum class dealias_rule : std::uint8_t {
    two_thirds = 1,
};

struct ModelConfig {
    model_id id = model_id::burgers_1d;
    double nu = 0.05;
    std::size_t modes = 64;      // burgers truncation D
    int kmax = 10;               // nse spectral radius, D = #{0<|k|^2<=kmax^2} (two slots per pair)
    std::size_t resolution = 0;  // physical grid size; 0 = model default
    dealias_rule dealias = dealias_rule::two_thirds;
    unsigned forcing_mode = 1;   // burgers: sine index; nse: wavevector (0, mode)
    double forcing_amplitude = 1.0;
    bool linear_only = false;    // drop the quadratic term (linear contract tests)
};

struct Model {
    ModelConfig cfg;
    OperatorPtr op;
    SpectralField forcing;
    std::size_t resolution = 0;
};

namespace detail {
// Orthonormal sine basis phi_j = sqrt(2/pi) sin(j x); physical amplitude
// c_j of sin(j x) relates by a_j = c_j sqrt(pi/2).
inline constexpr double k_amp_to_coeff = 1.2533141373155002512078826424055;  // sqrt(pi/2)
inline constexpr double k_coeff_to_amp = 0.7978845608028653558798921198687;  // sqrt(2/pi)
// Divergence-free pair basis carries 1/(pi sqrt 2); vorticity spectrum of a
// unit coefficient on wavevector k has modulus |k|/(2 sqrt2 pi).
inline constexpr double k_vort_map = 8.8857658763167324703318610397710;  // 2 sqrt(2) pi
}  // namespace detail

inline Model make_model(const ModelConfig& cfg) {
    if (!(cfg.nu > 0.0)) throw config_error("model: nu must be positive");
    if (!std::isfinite(cfg.forcing_amplitude)) throw config_error("model: forcing amplitude must be finite");
    if (cfg.dealias != dealias_rule::two_thirds) throw config_error("model: unknown dealias rule");
    Model m;
    m.cfg = cfg;
    if (cfg.id == model_id::burgers_1d) {
        if (cfg.modes < 1) throw config_error("model: burgers needs at least one mode");
        m.resolution = cfg.resolution ? cfg.resolution : 2 * cfg.modes;
        if (2 * m.resolution < 3 * cfg.modes)
            throw config_error("model: resolution too small for dealiasing (need 2*resolution >= 3*modes)");
        m.op = make_sine_dirichlet_operator(cfg.modes, cfg.nu);
        m.forcing = zero_field(m.op);
        if (cfg.forcing_amplitude != 0.0) {
            if (cfg.forcing_mode < 1 || cfg.forcing_mode > cfg.modes)
                throw config_error("model: forcing mode outside truncation");
            m.forcing.a[cfg.forcing_mode - 1] = cfg.forcing_amplitude;
        }
    } else if (cfg.id == model_id::nse_2d) {
        if (cfg.kmax < 1) throw config_error("model: nse needs kmax >= 1");
        if (cfg.resolution) {
            m.resolution = cfg.resolution;
        } else {
            std::size_t r = static_cast<std::size_t>(3 * cfg.kmax + 2);
            m.resolution = r + (r % 2);
        }
        if (m.resolution < static_cast<std::size_t>(3 * cfg.kmax + 1))
            throw config_error("model: resolution too small for dealiasing (need resolution > 3*kmax)");
        m.op = make_divfree_fourier_operator(cfg.kmax, cfg.nu);
        m.forcing = zero_field(m.op);
        if (cfg.forcing_amplitude != 0.0) {
            const int kf = static_cast<int>(cfg.forcing_mode);
            if (kf < 1 || kf > cfg.kmax) throw config_error("model: forcing mode outside truncation");
            bool placed = false;
            for (std::size_t i = 0; i < m.op->wavevectors.size(); ++i) {
                if (m.op->wavevectors[i].kx == 0 && m.op->wavevectors[i].ky == kf) {
                    m.forcing.a[2 * i + 1] = cfg.forcing_amplitude;  // sin component on k=(0,kf)
                    placed = true;
                    break;
                }
            }
            if (!placed) throw config_error("model: forcing wavevector not retained");
        }
    } else {
        throw config_error("model: unknown model id");
    }
    return m;
}

// Physical sine amplitudes <-> orthonormal coefficients (burgers only).
inline SpectralField burgers_from_sine_amplitudes(OperatorPtr op, const std::vector<double>& c) {
    if (op->basis != basis_id::sine_dirichlet_1d) throw dimension_error("amplitudes: wrong basis");
    std::vector<double> a(op->dimension(), 0.0);
    if (c.size() > a.size()) throw dimension_error("amplitudes: more modes than retained");
    for (std::size_t i = 0; i < c.size(); ++i) a[i] = c[i] * detail::k_amp_to_coeff;
    return SpectralField(op, std::move(a));
}

inline std::vector<double> burgers_to_sine_amplitudes(const SpectralField& u) {
    if (u.op->basis != basis_id::sine_dirichlet_1d) throw dimension_error("amplitudes: wrong basis");
    std::vector<double> c(u.a.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = u.a[i] * detail::k_coeff_to_amp;
    return c;
}

namespace detail {

inline SpectralField burgers_advection(const Model& m, const SpectralField& u) {
    const std::size_t D = m.op->dimension();
    const std::size_t n = m.resolution;
    auto& ws = fft::trig_workspace(n);
    std::vector<double> c(D), d(D);
    for (std::size_t j = 0; j < D; ++j) {
        c[j] = u.a[j] * k_coeff_to_amp;
        d[j] = c[j] * static_cast<double>(j + 1);  // d/dx of sin((j+1)x) is (j+1) cos((j+1)x)
    }
    std::vector<double> uv, uxv;
    ws.sine_synthesis(c, uv);
    ws.cosine_synthesis(d, uxv);
    std::vector<double> prod(n);
    for (std::size_t j = 0; j < n; ++j) prod[j] = -uv[j] * uxv[j];
    std::vector<double> chat;
    ws.sine_analysis(prod, D, chat);
    SpectralField out = zero_field(m.op);
    for (std::size_t j = 0; j < D; ++j) out.a[j] = chat[j] * k_amp_to_coeff;
    return out;
}

inline SpectralField nse_advection(const Model& m, const SpectralField& u) {
    const std::size_t M = m.resolution;
    auto& ws = fft::fourier_workspace(M);
    const auto& reps = m.op->wavevectors;
    const std::size_t P = reps.size();
    using cd = std::complex<double>;

    // vorticity spectrum per representative
    std::vector<cd> omega(P);
    for (std::size_t i = 0; i < P; ++i) {
        const double kn = std::sqrt(static_cast<double>(reps[i].norm2()));
        omega[i] = cd(u.a[2 * i + 1], u.a[2 * i]) * (kn / k_vort_map);
    }

    // velocity packed as u_x + i u_y on the grid
    ws.clear_input();
    auto* in = ws.input();
    for (std::size_t i = 0; i < P; ++i) {
        const double kx = reps[i].kx, ky = reps[i].ky;
        const double k2 = kx * kx + ky * ky;
        const cd w = omega[i];
        const cd ux = cd(0.0, ky / k2) * w;          // i k_y w / |k|^2
        const cd uy = cd(0.0, -kx / k2) * w;         // -i k_x w / |k|^2
        const cd uxm = std::conj(ux), uym = std::conj(uy);
        in[ws.slot(reps[i].kx, reps[i].ky)] = ux + cd(0.0, 1.0) * uy;
        in[ws.slot(-reps[i].kx, -reps[i].ky)] = uxm + cd(0.0, 1.0) * uym;
    }
    ws.run_backward();
    std::vector<cd> vel(ws.output(), ws.output() + M * M);

    // vorticity gradient packed as w_x + i w_y
    ws.clear_input();
    for (std::size_t i = 0; i < P; ++i) {
        const double kx = reps[i].kx, ky = reps[i].ky;
        const cd w = omega[i];
        in[ws.slot(reps[i].kx, reps[i].ky)] = cd(-ky, kx) * w;
        in[ws.slot(-reps[i].kx, -reps[i].ky)] = cd(ky, -kx) * std::conj(w);
    }
    ws.run_backward();
    const cd* grad = ws.output();

    // pointwise advection u . grad(omega), then back to spectrum
    for (std::size_t j = 0; j < M * M; ++j) {
        const double s = vel[j].real() * grad[j].real() + vel[j].imag() * grad[j].imag();
        in[j] = cd(s, 0.0);
    }
    ws.run_forward();
    const double scale = 1.0 / static_cast<double>(M * M);

    SpectralField out = zero_field(m.op);
    for (std::size_t i = 0; i < P; ++i) {
        const double kn = std::sqrt(static_cast<double>(reps[i].norm2()));
        const cd s = ws.output()[ws.slot(reps[i].kx, reps[i].ky)] * scale;
        // nonlinear contribution to the vorticity spectrum is -s
        out.a[2 * i] = -k_vort_map * s.imag() / kn;
        out.a[2 * i + 1] = -k_vort_map * s.real() / kn;
    }
    return out;
}

}  // namespace detail

// Quadratic (advection) part alone, no forcing.
inline SpectralField advection_term(const Model& m, const SpectralField& u) {
    if (u.op != m.op && !same_operator(*u.op, *m.op)) throw dimension_error("model: field/operator mismatch");
    if (m.cfg.id == model_id::burgers_1d) return detail::burgers_advection(m, u);
    return detail::nse_advection(m, u);
}

// F(u) = forcing + advection; with linear_only the advection is dropped.
inline SpectralField nonlinear_term(const Model& m, const SpectralField& u) {
    if (m.cfg.linear_only) {
        if (u.op != m.op && !same_operator(*u.op, *m.op)) throw dimension_error("model: field/operator mismatch");
        return m.forcing;
    }
    return advection_term(m, u) + m.forcing;
}

// G(u) = -A u + F(u).
inline SpectralField vector_field(const Model& m, const SpectralField& u) {
    SpectralField f = nonlinear_term(m, u);
    for (std::size_t i = 0; i < f.a.size(); ++i) f.a[i] -= m.op->eigenvalues[i] * u.a[i];
    return f;
}

struct LipschitzEstimate {
    double R = 0.0;       // max ||A^alpha u|| over the sample
    double K_hat = 0.0;   // max ||F(u)-F(v)|| / ||A^alpha (u-v)||
    double K2 = 0.0;      // max of -(F(u)-F(v), A(u-v)) / (||u-v|| ||A^(1/2)(u-v)||), clipped at 0
    std::size_t pair_count = 0;
};

// Empirical Lipschitz data for a vector field over a sample, measured in the
// A^alpha norm. FEval: SpectralField -> SpectralField.
template <typename FEval>
LipschitzEstimate estimate_lipschitz(const std::vector<SpectralField>& sample, double alpha, FEval&& F) {
    if (sample.size() < 2) throw sample_error("lipschitz estimate: need at least two points");
    LipschitzEstimate est;
    std::vector<SpectralField> fs;
    fs.reserve(sample.size());
    for (const auto& u : sample) {
        est.R = std::max(est.R, fractional_power_norm(u, alpha));
        fs.push_back(F(u));
    }
    for (std::size_t i = 0; i < sample.size(); ++i) {
        for (std::size_t j = i + 1; j < sample.size(); ++j) {
            SpectralField w = sample[i] - sample[j];
            const double den = fractional_power_norm(w, alpha);
            const double n0 = norm(w);
            if (den == 0.0 || n0 == 0.0) continue;  // coincident points carry no slope information
            SpectralField f = fs[i] - fs[j];
            est.K_hat = std::max(est.K_hat, norm(f) / den);
            const double nh = fractional_power_norm(w, 0.5);
            if (nh > 0.0) {
                const double corr = -inner(f, apply_power(w, 1.0)) / (n0 * nh);
                est.K2 = std::max(est.K2, corr);
            }
            ++est.pair_count;
        }
    }
    if (est.pair_count == 0) throw sample_error("lipschitz estimate: all points coincide");
    return est;
}

inline LipschitzEstimate lipschitz_constant_estimate(const std::vector<SpectralField>& sample,
                                                     const Model& m, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 0.5))
        throw domain_error("lipschitz estimate: alpha outside [0, 1/2]");
    return estimate_lipschitz(sample, alpha, [&](const SpectralField& u) { return nonlinear_term(m, u); });
}

}  // namespace atrl
