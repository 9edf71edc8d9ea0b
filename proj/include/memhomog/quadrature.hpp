#pragma once

#include <cmath>

#include "memhomog/common.hpp"
#include "memhomog/surface.hpp"

namespace memhomog {

// Excess length of the one-dimensional profile A sin(2 pi s):
// Z1 = int_0^1 sqrt(1 + (2 pi A cos(2 pi s))^2) ds.
// Midpoint rule; spectrally accurate for this periodic analytic integrand.
inline double onedim_excess_length(double amplitude, int n_points = 1000000) {
    double sum = 0.0;
    const double w = two_pi * amplitude;
    for (int i = 0; i < n_points; ++i) {
        const double s = (i + 0.5) / n_points;
        const double c = w * std::cos(two_pi * s);
        sum += std::sqrt(1.0 + c * c);
    }
    return sum / n_points;
}

// Cell surface area by an n x n midpoint tensor rule.
inline double torus_area_quadrature(const SurfaceSpec& spec, int n = 2048) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = (i + 0.5) / n;
        for (int j = 0; j < n; ++j) {
            const SurfaceJet jet = surface_jet(spec, {x, (j + 0.5) / n});
            sum += std::sqrt(1.0 + jet.grad.norm2());
        }
    }
    return sum / (static_cast<double>(n) * n);
}

}  // namespace memhomog
