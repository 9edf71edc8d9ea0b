#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "memhomog/common.hpp"
#include "memhomog/ensemble.hpp"
#include "memhomog/helfrich.hpp"
#include "memhomog/rng.hpp"
#include "memhomog/surface.hpp"

namespace memhomog {

// Scaling regimes of the coupled lateral-diffusion system. case0 runs on a
// prescribed static surface; quenched freezes a stationary Helfrich draw per
// path; the remaining regimes advance the mode process at rate eps^-beta.
enum class SimRegime { case0, quenched, case2, case3, case4 };

inline const char* regime_name(SimRegime r) {
    switch (r) {
        case SimRegime::case0: return "case0";
        case SimRegime::quenched: return "quenched";
        case SimRegime::case2: return "caseII";
        case SimRegime::case3: return "caseIII";
        case SimRegime::case4: return "caseIV";
    }
    return "?";
}

inline SimRegime parse_regime(const std::string& s) {
    if (s == "case0") return SimRegime::case0;
    if (s == "quenched") return SimRegime::quenched;
    if (s == "caseII") return SimRegime::case2;
    if (s == "caseIII") return SimRegime::case3;
    if (s == "caseIV") return SimRegime::case4;
    throw ConfigError("unknown regime '" + s +
                      "' (expected case0|quenched|caseII|caseIII|caseIV)");
}

struct SimConfig {
    SimRegime regime = SimRegime::case0;
    double epsilon = 0.1;
    double dt = 1e-5;
    double t_final = 1.0;
    int n_paths = 10000;
    std::uint64_t seed = 12345;
    SurfaceSpec surface = EggCartonSurface{1.0};  // case0
    HelfrichParams helfrich;                      // quenched and coupled regimes
    bool single_mode = false;                     // lock the field to one OU mode
    SingleModeConfig mode;

    double alpha() const { return regime == SimRegime::case2 ? 0.0 : 1.0; }
    double beta() const {
        switch (regime) {
            case SimRegime::case2:
            case SimRegime::case3: return 1.0;
            case SimRegime::case4: return 2.0;
            default: return -1.0;  // frozen field
        }
    }

    void validate() const {
        if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must be in (0,1]");
        if (!(dt > 0.0)) throw ConfigError("dt must be positive");
        if (!(t_final > 0.0)) throw ConfigError("t_final must be positive");
        if (n_paths < 1) throw ConfigError("need at least one path");
        // resolve the fastest generator scale
        const double exponent = std::max(2.0 * alpha(), beta());
        const double guard = std::pow(epsilon, exponent) / 10.0;
        if (dt > guard * (1.0 + 1e-12))
            throw ConfigError("dt " + std::to_string(dt) + " exceeds the stiffness guard " +
                              std::to_string(guard) + " for this regime");
    }
};

// Displacement-rate estimate: D = cov(X(T)) / (2T) with jackknife errors.
struct DiffusionEstimate {
    Mat2 D;
    Mat2 stderr_D;
    Vec2 drift;
    Vec2 stderr_drift;
    double t_final = 0.0;
    int n_paths = 0;
};

inline std::vector<Vec2> simulate_paths(const SimConfig& config) {
    config.validate();
    const long n_steps = std::lround(config.t_final / config.dt);
    if (n_steps < 1) throw ConfigError("t_final shorter than one time step");

    const double inv_eps_alpha =
        config.alpha() == 0.0 ? 1.0 : 1.0 / config.epsilon;  // also the drift scale
    const bool coupled = config.beta() > 0.0;
    const double dt_eta = coupled ? config.dt * std::pow(config.epsilon, -config.beta()) : 0.0;
    const double root_2dt = std::sqrt(2.0 * config.dt);

    // mode machinery shared across paths
    std::optional<HelfrichSpectrum> spectrum;
    std::optional<OuModeSystem> modes;
    if (config.regime == SimRegime::quenched ||
        (coupled && !config.single_mode)) {
        spectrum = build_spectrum(config.helfrich);
        modes.emplace(*spectrum);
    }
    std::optional<SurfaceSpec> unit_profile;
    double mode_gamma = 0.0, mode_var = 0.0;
    if (coupled && config.single_mode) {
        unit_profile = SurfaceSpec{single_mode_surface(config.mode, 1.0)};
        mode_gamma = config.mode.gamma();
        mode_var = config.mode.pi();
    }
    // exact OU transition factors are fixed because dt is fixed
    std::vector<double> decay, noise_sd;
    if (coupled && modes) {
        decay.resize(modes->gamma.size());
        noise_sd.resize(modes->gamma.size());
        for (std::size_t i = 0; i < decay.size(); ++i) {
            decay[i] = std::exp(-modes->gamma[i] * dt_eta);
            noise_sd[i] = std::sqrt(modes->stat_var[i] * (1.0 - decay[i] * decay[i]));
        }
    }
    const double sm_decay = coupled ? std::exp(-mode_gamma * dt_eta) : 1.0;
    const double sm_sd = coupled ? std::sqrt(mode_var * (1.0 - sm_decay * sm_decay)) : 0.0;

    std::vector<Vec2> terminal(config.n_paths);
    parallel_for(static_cast<std::size_t>(config.n_paths), [&](std::size_t path) {
        Rng rng(config.seed, path);
        Vec2 x{};

        // per-path field state
        FourierSurface field;
        std::vector<double> eta;
        double eta_scalar = 0.0;
        const SurfaceSpec* frozen = &config.surface;
        if (config.regime == SimRegime::quenched) {
            field = sample_stationary_surface(*spectrum, rng);
        } else if (coupled && modes) {
            eta = modes->sample_stationary(rng);
            field = surface_from_state(*spectrum, eta);
        } else if (coupled && config.single_mode) {
            eta_scalar = std::sqrt(mode_var) * rng.gaussian();
        }
        SurfaceSpec field_spec{field};
        const bool uses_field =
            config.regime == SimRegime::quenched || (coupled && modes.has_value());

        for (long step = 0; step < n_steps; ++step) {
            const Vec2 arg = inv_eps_alpha == 1.0 ? x : Vec2{x.x * inv_eps_alpha,
                                                             x.y * inv_eps_alpha};
            SurfaceJet jet;
            if (coupled && config.single_mode) {
                const SurfaceJet ej = surface_jet(*unit_profile, arg);
                jet.grad = eta_scalar * ej.grad;
                jet.h11 = eta_scalar * ej.h11;
                jet.h12 = eta_scalar * ej.h12;
                jet.h22 = eta_scalar * ej.h22;
            } else if (uses_field) {
                jet = surface_jet(field_spec, arg);
            } else {
                jet = surface_jet(*frozen, arg);
            }
            const Vec2 f = drift_vector(jet);
            const Mat2 s = sqrt_inverse_metric(jet.grad);
            const Vec2 noise{rng.gaussian(), rng.gaussian()};
            x += (inv_eps_alpha * config.dt) * f + root_2dt * s.apply(noise);

            if (coupled) {
                if (config.single_mode) {
                    eta_scalar = sm_decay * eta_scalar + sm_sd * rng.gaussian();
                } else {
                    auto& fm = std::get<FourierSurface>(field_spec).modes;
                    for (std::size_t i = 0; i < eta.size(); ++i)
                        eta[i] = decay[i] * eta[i] + noise_sd[i] * rng.gaussian();
                    for (std::size_t r = 0; r < fm.size(); ++r) {
                        fm[r].cos_coeff = eta[2 * r];
                        fm[r].sin_coeff = eta[2 * r + 1];
                    }
                }
            }
            if ((step & 0xfff) == 0 && !(std::isfinite(x.x) && std::isfinite(x.y)))
                throw NumericError("path " + std::to_string(path) +
                                   " diverged at step " + std::to_string(step));
        }
        if (!(std::isfinite(x.x) && std::isfinite(x.y)))
            throw NumericError("path " + std::to_string(path) + " ended non-finite");
        terminal[path] = x;
    });
    return terminal;
}

inline DiffusionEstimate estimate_diffusion(const std::vector<Vec2>& displacements,
                                            double t_final) {
    const int n = static_cast<int>(displacements.size());
    if (n < 100) throw ConfigError("diffusion estimator needs at least 100 displacements");
    if (!(t_final > 0.0)) throw ConfigError("t_final must be positive");

    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (const Vec2& d : displacements) {
        sx += d.x;
        sy += d.y;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    const double mx = sx / n, my = sy / n;
    const auto cov_full = [&](double sab, double ma, double mb) {
        return (sab - n * ma * mb) / (n - 1);
    };
    DiffusionEstimate out;
    out.n_paths = n;
    out.t_final = t_final;
    out.D = (0.5 / t_final) * Mat2{cov_full(sxx, mx, mx), cov_full(sxy, mx, my),
                                   cov_full(syy, my, my)};
    out.drift = {mx / t_final, my / t_final};

    // leave-one-out jackknife over paths
    double j11 = 0, j12 = 0, j22 = 0, s11 = 0, s12 = 0, s22 = 0;
    std::vector<Mat2> loo(n);
    const int m = n - 1;
    for (int k = 0; k < n; ++k) {
        const Vec2 d = displacements[k];
        const double mxk = (sx - d.x) / m, myk = (sy - d.y) / m;
        const double c11 = (sxx - d.x * d.x - m * mxk * mxk) / (m - 1);
        const double c12 = (sxy - d.x * d.y - m * mxk * myk) / (m - 1);
        const double c22 = (syy - d.y * d.y - m * myk * myk) / (m - 1);
        loo[k] = (0.5 / t_final) * Mat2{c11, c12, c22};
        j11 += loo[k].a11;
        j12 += loo[k].a12;
        j22 += loo[k].a22;
    }
    j11 /= n;
    j12 /= n;
    j22 /= n;
    for (int k = 0; k < n; ++k) {
        s11 += (loo[k].a11 - j11) * (loo[k].a11 - j11);
        s12 += (loo[k].a12 - j12) * (loo[k].a12 - j12);
        s22 += (loo[k].a22 - j22) * (loo[k].a22 - j22);
    }
    const double jf = static_cast<double>(n - 1) / n;
    out.stderr_D = Mat2{std::sqrt(jf * s11), std::sqrt(jf * s12), std::sqrt(jf * s22)};

    double vx = 0, vy = 0;
    for (const Vec2& d : displacements) {
        vx += (d.x - mx) * (d.x - mx);
        vy += (d.y - my) * (d.y - my);
    }
    out.stderr_drift = {std::sqrt(vx / (n - 1) / n) / t_final,
                        std::sqrt(vy / (n - 1) / n) / t_final};
    return out;
}

}  // namespace memhomog
