#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "memhomog/common.hpp"
#include "memhomog/rng.hpp"
#include "memhomog/surface.hpp"

namespace memhomog {

// Nondimensional Helfrich moduli and the ultraviolet cutoff on the mode set.
struct HelfrichParams {
    double kappa_star = 1.0;  // bending rigidity kappa / k_B T
    double sigma_star = 0.0;  // tension sigma L^2 / k_B T
    double cutoff = 4.0;      // keep wavevectors with ||k||_2 <= cutoff
};

struct SpectrumMode {
    int k1 = 0, k2 = 0;
    double gamma = 0.0;  // OU relaxation rate
    double pi = 0.0;     // stationary variance of the complex mode amplitude
};

// Full cutoff lattice with per-mode OU coefficients, plus a half-lattice of
// representatives (one per {k,-k} pair) used for the real cosine/sine basis.
struct HelfrichSpectrum {
    HelfrichParams params;
    std::vector<SpectrumMode> modes;
    std::vector<std::size_t> rep_index;
};

inline HelfrichSpectrum build_spectrum(const HelfrichParams& p) {
    if (p.kappa_star < 0.0 || p.sigma_star < 0.0)
        throw ConfigError("helfrich moduli must be nonnegative");
    if (p.kappa_star == 0.0 && p.sigma_star == 0.0)
        throw ConfigError("helfrich spectrum needs kappa_star > 0 or sigma_star > 0");
    if (!(p.cutoff >= 1.0))
        throw ConfigError("helfrich cutoff below 1 leaves an empty mode set");

    HelfrichSpectrum spec;
    spec.params = p;
    const int kmax = static_cast<int>(std::floor(p.cutoff + 1e-12));
    const double c2 = p.cutoff * p.cutoff * (1.0 + 1e-14);
    for (int k1 = -kmax; k1 <= kmax; ++k1) {
        for (int k2 = -kmax; k2 <= kmax; ++k2) {
            if (k1 == 0 && k2 == 0) continue;
            if (k1 * k1 + k2 * k2 > c2) continue;
            const double w2 = two_pi * two_pi * (k1 * k1 + k2 * k2);  // ||2 pi k||^2
            const double stiffness = p.kappa_star * w2 * w2 + p.sigma_star * w2;
            SpectrumMode m;
            m.k1 = k1;
            m.k2 = k2;
            m.gamma = stiffness / std::sqrt(w2);
            m.pi = 1.0 / stiffness;
            if (k1 > 0 || (k1 == 0 && k2 > 0)) spec.rep_index.push_back(spec.modes.size());
            spec.modes.push_back(m);
        }
    }
    return spec;
}

// Surface disorder delta = E||grad h||^2 = sum_k ||2 pi k||^2 Pi_k over the
// full lattice; algebraically equal to sum_k 1/(kappa* ||2 pi k||^2 + sigma*).
inline double disorder_parameter(const HelfrichSpectrum& spec) {
    double d = 0.0;
    for (const auto& m : spec.modes) {
        const double w2 = two_pi * two_pi * (m.k1 * m.k1 + m.k2 * m.k2);
        d += 1.0 / (spec.params.kappa_star * w2 + spec.params.sigma_star);
    }
    return d;
}

inline double total_mode_variance(const HelfrichSpectrum& spec) {
    double v = 0.0;
    for (const auto& m : spec.modes) v += m.pi;
    return v;
}

// Stationary Gaussian realisation in the real basis. Each representative k
// carries cosine/sine coefficients a_k, b_k ~ N(0, 2 Pi_k), which reproduces
// the complex-mode convention in law: Var[h(x)] = sum over the full lattice
// of Pi_k at every point x.
inline FourierSurface sample_stationary_surface(const HelfrichSpectrum& spec, Rng& rng) {
    FourierSurface field;
    field.modes.reserve(spec.rep_index.size());
    for (const std::size_t idx : spec.rep_index) {
        const auto& m = spec.modes[idx];
        const double sd = std::sqrt(2.0 * m.pi);
        FourierMode out;
        out.k1 = m.k1;
        out.k2 = m.k2;
        out.cos_coeff = sd * rng.gaussian();
        out.sin_coeff = sd * rng.gaussian();
        field.modes.push_back(out);
    }
    return field;
}

inline FourierSurface sample_stationary_surface(const HelfrichSpectrum& spec,
                                                std::uint64_t seed, std::uint64_t stream = 0) {
    Rng rng(seed, stream);
    return sample_stationary_surface(spec, rng);
}

// Exact transition kernel of independent scalar OU components:
// eta' = exp(-gamma dt) eta + N(0, var (1 - exp(-2 gamma dt))).
// stat_var[i] is the stationary variance of component i.
inline void ou_exact_step(const std::vector<double>& gamma, const std::vector<double>& stat_var,
                          std::vector<double>& eta, double dt, Rng& rng) {
    if (!(dt > 1e-15)) throw ConfigError("ou_exact_step requires dt > 1e-15");
    if (gamma.size() != eta.size() || stat_var.size() != eta.size())
        throw ConfigError("ou_exact_step: mismatched state dimensions");
    for (std::size_t i = 0; i < eta.size(); ++i) {
        const double decay = std::exp(-gamma[i] * dt);
        const double sd = std::sqrt(stat_var[i] * (1.0 - decay * decay));
        eta[i] = decay * eta[i] + sd * rng.gaussian();
    }
}

// Real-basis OU system over the half-lattice: state holds (a_k, b_k) pairs,
// both relaxing at gamma_k with stationary variance 2 Pi_k.
struct OuModeSystem {
    std::vector<double> gamma;
    std::vector<double> stat_var;

    explicit OuModeSystem(const HelfrichSpectrum& spec) {
        gamma.reserve(2 * spec.rep_index.size());
        stat_var.reserve(2 * spec.rep_index.size());
        for (const std::size_t idx : spec.rep_index) {
            const auto& m = spec.modes[idx];
            for (int c = 0; c < 2; ++c) {
                gamma.push_back(m.gamma);
                stat_var.push_back(2.0 * m.pi);
            }
        }
    }

    std::vector<double> sample_stationary(Rng& rng) const {
        std::vector<double> eta(stat_var.size());
        for (std::size_t i = 0; i < eta.size(); ++i)
            eta[i] = std::sqrt(stat_var[i]) * rng.gaussian();
        return eta;
    }

    void step(std::vector<double>& eta, double dt, Rng& rng) const {
        ou_exact_step(gamma, stat_var, eta, dt, rng);
    }
};

// Assemble the Fourier surface matching a coefficient state of OuModeSystem.
inline FourierSurface surface_from_state(const HelfrichSpectrum& spec,
                                         const std::vector<double>& eta) {
    FourierSurface field;
    field.modes.reserve(spec.rep_index.size());
    for (std::size_t r = 0; r < spec.rep_index.size(); ++r) {
        const auto& m = spec.modes[spec.rep_index[r]];
        FourierMode out;
        out.k1 = m.k1;
        out.k2 = m.k2;
        out.cos_coeff = eta[2 * r];
        out.sin_coeff = eta[2 * r + 1];
        field.modes.push_back(out);
    }
    return field;
}

}  // namespace memhomog
