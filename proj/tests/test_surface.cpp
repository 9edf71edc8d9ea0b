#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "memhomog/rng.hpp"
#include "memhomog/surface.hpp"

using namespace memhomog;

namespace {

std::vector<SurfaceSpec> test_surfaces() {
    FourierSurface fourier;
    fourier.modes = {{1, 0, 0.3, -0.2}, {2, 1, -0.15, 0.1}, {0, 3, 0.05, 0.07}, {-1, 2, 0.1, 0.2}};
    return {
        SurfaceSpec{EggCartonSurface{1.0}},  SurfaceSpec{EggCartonSurface{2.5}},
        SurfaceSpec{MixedModeSurface{1.3}},  SurfaceSpec{OneDimSurface{1.7}},
        SurfaceSpec{BumpSurface{2.0, 0.45, {0.5, 0.5}}}, SurfaceSpec{fourier},
    };
}

Vec2 fd_gradient(const SurfaceSpec& s, Vec2 x, double step) {
    return {(eval_height(s, {x.x + step, x.y}) - eval_height(s, {x.x - step, x.y})) / (2 * step),
            (eval_height(s, {x.x, x.y + step}) - eval_height(s, {x.x, x.y - step})) / (2 * step)};
}

// divergence form (1/sqrt|g|) d_j (sqrt|g| g^{-1})_ij by central differences
// with step h; fourth-order stencil keeps the truncation error below the
// tolerance even where the bump's higher derivatives spike
Vec2 fd_divergence_drift(const SurfaceSpec& s, Vec2 x, double step) {
    const auto flux = [&](Vec2 p) {
        const MetricData m = metric(s, p);
        return Mat2{m.sqrt_det_g * m.g_inv.a11, m.sqrt_det_g * m.g_inv.a12,
                    m.sqrt_det_g * m.g_inv.a22};
    };
    const auto d4 = [&](bool along_x) {
        const auto at = [&](double t) {
            return along_x ? flux({x.x + t, x.y}) : flux({x.x, x.y + t});
        };
        const Mat2 p1 = at(step), m1 = at(-step), p2 = at(2 * step), m2 = at(-2 * step);
        const auto diff = [&](double a_p1, double a_m1, double a_p2, double a_m2) {
            return (8.0 * (a_p1 - a_m1) - (a_p2 - a_m2)) / (12.0 * step);
        };
        return Mat2{diff(p1.a11, m1.a11, p2.a11, m2.a11), diff(p1.a12, m1.a12, p2.a12, m2.a12),
                    diff(p1.a22, m1.a22, p2.a22, m2.a22)};
    };
    const Mat2 dx = d4(true), dy = d4(false);
    const double inv_rs = 1.0 / metric(s, x).sqrt_det_g;
    return {inv_rs * (dx.a11 + dy.a12), inv_rs * (dx.a12 + dy.a22)};
}

}  // namespace

TEST_CASE("height closed forms") {
    CHECK(eval_height(SurfaceSpec{EggCartonSurface{1.0}}, {0.25, 0.25}) == Catch::Approx(1.0));
    CHECK(eval_height(SurfaceSpec{EggCartonSurface{0.0}}, {0.37, 0.81}) == 0.0);
    CHECK(eval_height(SurfaceSpec{OneDimSurface{0.0}}, {0.1, 0.9}) == 0.0);
    const SurfaceSpec bump{BumpSurface{2.0, 0.45, {0.5, 0.5}}};
    CHECK(eval_height(bump, {0.5, 0.5}) == Catch::Approx(2.0 * std::exp(-1.0)).epsilon(1e-14));
    CHECK(eval_height(bump, {0.04, 0.04}) == 0.0);
}

TEST_CASE("analytic derivatives match finite differences") {
    Rng rng(2024);
    for (const auto& s : test_surfaces()) {
        for (int trial = 0; trial < 100; ++trial) {
            const Vec2 x{rng.uniform(), rng.uniform()};
            const SurfaceJet jet = surface_jet(s, x);
            const Vec2 fd = fd_gradient(s, x, 1e-6);
            CHECK(std::abs(jet.grad.x - fd.x) < 1e-6);
            CHECK(std::abs(jet.grad.y - fd.y) < 1e-6);

            const double step = 1e-4;
            const auto grad_at = [&](Vec2 p) { return surface_jet(s, p).grad; };
            const Vec2 gx_p = grad_at({x.x + step, x.y}), gx_m = grad_at({x.x - step, x.y});
            const Vec2 gy_p = grad_at({x.x, x.y + step}), gy_m = grad_at({x.x, x.y - step});
            CHECK(std::abs(jet.h11 - (gx_p.x - gx_m.x) / (2 * step)) < 1e-3);
            CHECK(std::abs(jet.h12 - (gx_p.y - gx_m.y) / (2 * step)) < 1e-3);
            CHECK(std::abs(jet.h12 - (gy_p.x - gy_m.x) / (2 * step)) < 1e-3);
            CHECK(std::abs(jet.h22 - (gy_p.y - gy_m.y) / (2 * step)) < 1e-3);
        }
    }
}

TEST_CASE("stationary points of the product modes") {
    const SurfaceJet jet = surface_jet(SurfaceSpec{EggCartonSurface{3.0}}, {0.25, 0.25});
    CHECK(std::abs(jet.grad.x) < 1e-14);
    CHECK(std::abs(jet.grad.y) < 1e-14);

    const SurfaceJet od = surface_jet(SurfaceSpec{OneDimSurface{1.0}}, {0.0, 0.0});
    CHECK(od.grad.x == Catch::Approx(two_pi));
    CHECK(od.grad.y == 0.0);
    CHECK(std::abs(od.h11) < 1e-12);
    CHECK(od.h12 == 0.0);
    CHECK(od.h22 == 0.0);
}

TEST_CASE("periodicity to machine precision") {
    Rng rng(7);
    for (const auto& s : test_surfaces()) {
        for (int trial = 0; trial < 100; ++trial) {
            const Vec2 x{rng.uniform(), rng.uniform()};
            for (const Vec2 shift : {Vec2{1, 0}, Vec2{0, 1}}) {
                const SurfaceJet a = surface_jet(s, x);
                const SurfaceJet b = surface_jet(s, x + shift);
                CHECK(std::abs(a.h - b.h) < 1e-12);
                CHECK(std::abs(a.grad.x - b.grad.x) < 1e-12 * (1.0 + std::abs(a.grad.x)));
                CHECK(std::abs(a.grad.y - b.grad.y) < 1e-12 * (1.0 + std::abs(a.grad.y)));
                CHECK(std::abs(a.h11 - b.h11) < 1e-10 * (1.0 + std::abs(a.h11)));
                CHECK(std::abs(a.h22 - b.h22) < 1e-10 * (1.0 + std::abs(a.h22)));
            }
        }
    }
}

TEST_CASE("metric consistency") {
    SECTION("flat surface") {
        const MetricData m = metric(SurfaceSpec{EggCartonSurface{0.0}}, {0.3, 0.7});
        CHECK(m.g_inv.a11 == 1.0);
        CHECK(m.g_inv.a12 == 0.0);
        CHECK(m.g_inv.a22 == 1.0);
        CHECK(m.sqrt_det_g == 1.0);
        CHECK(m.drift.x == 0.0);
        CHECK(m.drift.y == 0.0);
    }
    SECTION("unit slope along x1") {
        // OneDim with A = 1/(2 pi) has grad h = (1, 0) at x = 0
        const MetricData m = metric(SurfaceSpec{OneDimSurface{1.0 / two_pi}}, {0.0, 0.4});
        CHECK(m.grad_h.x == Catch::Approx(1.0));
        CHECK(m.g_inv.a11 == Catch::Approx(0.5));
        CHECK(m.g_inv.a22 == Catch::Approx(1.0));
        CHECK(m.sqrt_det_g == Catch::Approx(std::sqrt(2.0)));
    }
    SECTION("g_inv inverts g and eigenvalues stay in range") {
        Rng rng(99);
        for (const auto& s : test_surfaces()) {
            for (int trial = 0; trial < 50; ++trial) {
                const Vec2 x{rng.uniform(), rng.uniform()};
                const MetricData m = metric(s, x);
                const Vec2 g = m.grad_h;
                const Mat2 gmat{1.0 + g.x * g.x, g.x * g.y, 1.0 + g.y * g.y};
                // product g_inv * g
                const double p11 = m.g_inv.a11 * gmat.a11 + m.g_inv.a12 * gmat.a12;
                const double p12 = m.g_inv.a11 * gmat.a12 + m.g_inv.a12 * gmat.a22;
                const double p22 = m.g_inv.a12 * gmat.a12 + m.g_inv.a22 * gmat.a22;
                CHECK(std::abs(p11 - 1.0) < 1e-12);
                CHECK(std::abs(p12) < 1e-12);
                CHECK(std::abs(p22 - 1.0) < 1e-12);
                CHECK(m.sqrt_det_g >= 1.0);
                const double s2 = 1.0 + g.norm2();
                CHECK(m.g_inv.det() == Catch::Approx(1.0 / s2).epsilon(1e-12));
                const auto ev = m.g_inv.eigenvalues();
                CHECK(ev[0] >= 1.0 / s2 - 1e-9);
                CHECK(ev[1] <= 1.0 + 1e-9);
            }
        }
    }
}

TEST_CASE("drift matches the finite-difference divergence form") {
    CHECK(drift_vector(SurfaceSpec{EggCartonSurface{0.0}}, {0.2, 0.9}).norm() == 0.0);
    const Vec2 at_crest = drift_vector(SurfaceSpec{EggCartonSurface{1.0}}, {0.25, 0.25});
    CHECK(at_crest.norm() < 1e-12);

    Rng rng(31415);
    for (const auto& s : test_surfaces()) {
        for (int trial = 0; trial < 200; ++trial) {
            const Vec2 x{rng.uniform(), rng.uniform()};
            const Vec2 analytic = drift_vector(s, x);
            const Vec2 fd = fd_divergence_drift(s, x, 1e-5);
            CHECK(std::abs(analytic.x - fd.x) < 1e-4);
            CHECK(std::abs(analytic.y - fd.y) < 1e-4);
        }
    }
}

TEST_CASE("square root of the inverse metric") {
    Rng rng(555);
    for (int trial = 0; trial < 100; ++trial) {
        const Vec2 g{4.0 * (rng.uniform() - 0.5), 4.0 * (rng.uniform() - 0.5)};
        const Mat2 s = sqrt_inverse_metric(g);
        const double s2 = 1.0 + g.norm2();
        const Mat2 target{1.0 - g.x * g.x / s2, -g.x * g.y / s2, 1.0 - g.y * g.y / s2};
        const double p11 = s.a11 * s.a11 + s.a12 * s.a12;
        const double p12 = s.a11 * s.a12 + s.a12 * s.a22;
        const double p22 = s.a12 * s.a12 + s.a22 * s.a22;
        CHECK(std::abs(p11 - target.a11) < 1e-14);
        CHECK(std::abs(p12 - target.a12) < 1e-14);
        CHECK(std::abs(p22 - target.a22) < 1e-14);
    }
    CHECK(sqrt_inverse_metric({0.0, 0.0}).a11 == 1.0);
}

TEST_CASE("bump stays smooth at the support boundary") {
    const BumpSurface b{1.5, 0.3, {0.5, 0.5}};
    const SurfaceSpec s{b};
    // approach the boundary radially; height and derivatives decay to zero
    for (const double frac : {0.9, 0.99, 0.999, 1.0 - 1e-13, 1.0, 1.0 + 1e-13, 1.2}) {
        const Vec2 x{0.5 + frac * b.radius, 0.5};
        const SurfaceJet jet = surface_jet(s, x);
        CHECK(std::isfinite(jet.h));
        CHECK(std::isfinite(jet.grad.x));
        CHECK(std::isfinite(jet.h11));
        if (frac >= 1.0) {
            CHECK(jet.h == 0.0);
            CHECK(jet.grad.norm() == 0.0);
        }
    }
    const SurfaceJet near = surface_jet(s, {0.5 + 0.999 * b.radius, 0.5});
    CHECK(std::abs(near.h) < 1e-200);
}

TEST_CASE("surface validation") {
    CHECK_THROWS_AS(validate_surface(SurfaceSpec{BumpSurface{1.0, 0.6, {0.5, 0.5}}}),
                    ConfigError);
    CHECK_THROWS_AS(validate_surface(SurfaceSpec{BumpSurface{1.0, 0.3, {0.2, 0.5}}}),
                    ConfigError);
    FourierSurface dup;
    dup.modes = {{1, 2, 0.1, 0.0}, {1, 2, 0.0, 0.2}};
    CHECK_THROWS_AS(validate_surface(SurfaceSpec{dup}), ConfigError);
    FourierSurface zero;
    zero.modes = {{0, 0, 0.1, 0.0}};
    CHECK_THROWS_AS(validate_surface(SurfaceSpec{zero}), ConfigError);
    CHECK_NOTHROW(validate_surface(SurfaceSpec{BumpSurface{1.0, 0.45, {0.5, 0.5}}}));
}

TEST_CASE("fourier gradient moments match quadrature") {
    FourierSurface f;
    f.modes = {{1, 0, 0.4, -0.1}, {1, 2, 0.2, 0.3}, {0, 2, -0.25, 0.15}};
    const auto [m1, m2] = gradient_second_moments(f);
    const int n = 512;
    double q1 = 0.0, q2 = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Vec2 g = surface_jet(SurfaceSpec{f}, {(i + 0.5) / n, (j + 0.5) / n}).grad;
            q1 += g.x * g.x;
            q2 += g.y * g.y;
        }
    q1 /= static_cast<double>(n) * n;
    q2 /= static_cast<double>(n) * n;
    CHECK(m1 == Catch::Approx(q1).epsilon(1e-10));
    CHECK(m2 == Catch::Approx(q2).epsilon(1e-10));
}
