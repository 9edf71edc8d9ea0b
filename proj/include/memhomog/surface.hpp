#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "memhomog/common.hpp"

namespace memhomog {

// Periodic Monge-gauge height fields on the unit torus. Every variant is
// mean-zero and 1-periodic in both coordinates; derivatives are analytic
// (hand-differentiated) so downstream quadrature sees no extra error terms.

struct EggCartonSurface {
    double amplitude = 1.0;  // h = A sin(2*pi*x1) sin(2*pi*x2)
};

struct MixedModeSurface {
    double amplitude = 1.0;  // h = sin(2*pi*x1) sin(6*pi*x2) + A sin(6*pi*x1) sin(2*pi*x2)
};

struct BumpSurface {
    double amplitude = 1.0;
    double radius = 0.45;
    Vec2 center{0.5, 0.5};
};

struct OneDimSurface {
    double amplitude = 1.0;  // h = A sin(2*pi*x1)
};

struct FourierMode {
    int k1 = 0, k2 = 0;
    double cos_coeff = 0.0;
    double sin_coeff = 0.0;
};

struct FourierSurface {
    std::vector<FourierMode> modes;  // h = sum a_k cos(2*pi*k.x) + b_k sin(2*pi*k.x)
};

using SurfaceSpec =
    std::variant<EggCartonSurface, MixedModeSurface, BumpSurface, OneDimSurface, FourierSurface>;

inline void validate_surface(const SurfaceSpec& spec) {
    if (const auto* bump = std::get_if<BumpSurface>(&spec)) {
        if (!(bump->radius > 0.0)) throw ConfigError("bump radius must be positive");
        const Vec2 c = bump->center;
        if (!(c.x > 0.0 && c.x < 1.0 && c.y > 0.0 && c.y < 1.0))
            throw ConfigError("bump center must lie strictly inside (0,1)^2");
        const double margin = std::min(std::min(c.x, 1.0 - c.x), std::min(c.y, 1.0 - c.y));
        if (!(bump->radius < margin))
            throw ConfigError("bump radius reaches the periodic cell boundary");
    } else if (const auto* fourier = std::get_if<FourierSurface>(&spec)) {
        for (std::size_t i = 0; i < fourier->modes.size(); ++i) {
            const auto& m = fourier->modes[i];
            if (m.k1 == 0 && m.k2 == 0)
                throw ConfigError("fourier mode (0,0) is forbidden (field must be mean-zero)");
            for (std::size_t j = i + 1; j < fourier->modes.size(); ++j)
                if (fourier->modes[j].k1 == m.k1 && fourier->modes[j].k2 == m.k2)
                    throw ConfigError("duplicate fourier wavevector (" + std::to_string(m.k1) +
                                      "," + std::to_string(m.k2) + ")");
        }
    }
}

// Height plus first and second partials at a point.
struct SurfaceJet {
    double h = 0.0;
    Vec2 grad{};
    double h11 = 0.0, h12 = 0.0, h22 = 0.0;
};

namespace detail {

inline SurfaceJet product_mode_jet(double amp, double f1, double f2, Vec2 x) {
    // amp * sin(f1*x1) * sin(f2*x2) with f = 2*pi*k
    const double s1 = std::sin(f1 * x.x), c1 = std::cos(f1 * x.x);
    const double s2 = std::sin(f2 * x.y), c2 = std::cos(f2 * x.y);
    SurfaceJet j;
    j.h = amp * s1 * s2;
    j.grad = {amp * f1 * c1 * s2, amp * f2 * s1 * c2};
    j.h11 = -amp * f1 * f1 * s1 * s2;
    j.h12 = amp * f1 * f2 * c1 * c2;
    j.h22 = -amp * f2 * f2 * s1 * s2;
    return j;
}

inline SurfaceJet bump_jet(const BumpSurface& b, Vec2 x) {
    // nearest periodic image keeps evaluation consistent across the seam
    double dx = x.x - b.center.x;
    double dy = x.y - b.center.y;
    dx -= std::round(dx);
    dy -= std::round(dy);
    const double r2 = b.radius * b.radius;
    const double s2 = (dx * dx + dy * dy) / r2;
    const double u = 1.0 - s2;
    SurfaceJet j;
    if (u <= 1e-12) return j;  // smooth extension by zero; guard avoids exp overflow
    const double e = b.amplitude * std::exp(-1.0 / u);
    const double iu2 = 1.0 / (u * u);
    // dh/dd_i = -(2 d_i / r^2) e / u^2
    j.h = e;
    j.grad = {-2.0 * dx / r2 * e * iu2, -2.0 * dy / r2 * e * iu2};
    const double c2h = e * (iu2 * iu2 - 2.0 * iu2 / u);  // d/du (e/u^2) = e (u^-4 - 2 u^-3)
    j.h11 = -2.0 / r2 * e * iu2 + 4.0 * dx * dx / (r2 * r2) * c2h;
    j.h22 = -2.0 / r2 * e * iu2 + 4.0 * dy * dy / (r2 * r2) * c2h;
    j.h12 = 4.0 * dx * dy / (r2 * r2) * c2h;
    return j;
}

}  // namespace detail

inline SurfaceJet surface_jet(const SurfaceSpec& spec, Vec2 x) {
    struct Visitor {
        Vec2 x;
        SurfaceJet operator()(const EggCartonSurface& s) const {
            return detail::product_mode_jet(s.amplitude, two_pi, two_pi, x);
        }
        SurfaceJet operator()(const MixedModeSurface& s) const {
            SurfaceJet j = detail::product_mode_jet(1.0, two_pi, 3.0 * two_pi, x);
            const SurfaceJet k = detail::product_mode_jet(s.amplitude, 3.0 * two_pi, two_pi, x);
            j.h += k.h;
            j.grad += k.grad;
            j.h11 += k.h11;
            j.h12 += k.h12;
            j.h22 += k.h22;
            return j;
        }
        SurfaceJet operator()(const BumpSurface& s) const { return detail::bump_jet(s, x); }
        SurfaceJet operator()(const OneDimSurface& s) const {
            const double a = two_pi * x.x;
            SurfaceJet j;
            j.h = s.amplitude * std::sin(a);
            j.grad = {s.amplitude * two_pi * std::cos(a), 0.0};
            j.h11 = -s.amplitude * two_pi * two_pi * std::sin(a);
            return j;
        }
        SurfaceJet operator()(const FourierSurface& s) const {
            SurfaceJet j;
            for (const auto& m : s.modes) {
                const double phase = two_pi * (m.k1 * x.x + m.k2 * x.y);
                const double cp = std::cos(phase), sp = std::sin(phase);
                const double v = m.cos_coeff * cp + m.sin_coeff * sp;
                const double dv = -m.cos_coeff * sp + m.sin_coeff * cp;  // d/d(phase)
                j.h += v;
                j.grad += Vec2{two_pi * m.k1 * dv, two_pi * m.k2 * dv};
                const double d2v = -v;
                j.h11 += two_pi * two_pi * m.k1 * m.k1 * d2v;
                j.h12 += two_pi * two_pi * m.k1 * m.k2 * d2v;
                j.h22 += two_pi * two_pi * m.k2 * m.k2 * d2v;
            }
            return j;
        }
    };
    return std::visit(Visitor{x}, spec);
}

inline double eval_height(const SurfaceSpec& spec, Vec2 x) { return surface_jet(spec, x).h; }

// Pointwise geometry bundle of the Monge-gauge metric g = I + grad h (x) grad h.
struct MetricData {
    Mat2 g_inv;          // inverse metric, SPD with eigenvalues in [1/|g|, 1]
    double sqrt_det_g;   // area element sqrt(1 + |grad h|^2)
    Vec2 grad_h;
    double h11, h12, h22;
    Vec2 drift;          // F = (1/sqrt|g|) div(sqrt|g| g^{-1})
};

// Expanded divergence-form drift. The scalar factor multiplies grad h, so it
// vanishes wherever the surface is locally flat.
inline Vec2 drift_vector(const SurfaceJet& j) {
    const Vec2 g = j.grad;
    const double s = 1.0 + g.norm2();
    const double t = (1.0 + g.x * g.x) * j.h22 - 2.0 * g.x * g.y * j.h12 +
                     (1.0 + g.y * g.y) * j.h11;
    const double f = -t / (s * s);
    return {f * g.x, f * g.y};
}

inline Vec2 drift_vector(const SurfaceSpec& spec, Vec2 x) {
    return drift_vector(surface_jet(spec, x));
}

inline MetricData metric_from_jet(const SurfaceJet& j) {
    MetricData m;
    const Vec2 g = j.grad;
    const double n2 = g.norm2();
    const double s = 1.0 + n2;
    // rank-one closed form of (I + g (x) g)^{-1}; avoids cancellation for steep slopes
    m.g_inv = Mat2{1.0 - g.x * g.x / s, -g.x * g.y / s, 1.0 - g.y * g.y / s};
    m.sqrt_det_g = std::sqrt(s);
    m.grad_h = g;
    m.h11 = j.h11;
    m.h12 = j.h12;
    m.h22 = j.h22;
    m.drift = drift_vector(j);
    return m;
}

inline MetricData metric(const SurfaceSpec& spec, Vec2 x) {
    return metric_from_jet(surface_jet(spec, x));
}

// Symmetric square root of g^{-1} in closed rank-one form:
// sqrt(g^{-1}) = I - (1 - 1/sqrt|g|) grad h (x) grad h / |grad h|^2.
inline Mat2 sqrt_inverse_metric(Vec2 grad_h) {
    const double n2 = grad_h.norm2();
    if (n2 < 1e-24) return Mat2::identity();
    const double c = (1.0 - 1.0 / std::sqrt(1.0 + n2)) / n2;
    return Mat2{1.0 - c * grad_h.x * grad_h.x, -c * grad_h.x * grad_h.y,
                1.0 - c * grad_h.y * grad_h.y};
}

// Exact (int h_x1^2 dy, int h_x2^2 dy) of a Fourier field, from mode data.
inline std::pair<double, double> gradient_second_moments(const FourierSurface& s) {
    double m1 = 0.0, m2 = 0.0;
    for (const auto& m : s.modes) {
        const double amp2 = 0.5 * (m.cos_coeff * m.cos_coeff + m.sin_coeff * m.sin_coeff);
        m1 += two_pi * two_pi * m.k1 * m.k1 * amp2;
        m2 += two_pi * two_pi * m.k2 * m.k2 * amp2;
    }
    return {m1, m2};
}

}  // namespace memhomog
