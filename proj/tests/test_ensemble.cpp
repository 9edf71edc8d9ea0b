#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "memhomog/ensemble.hpp"

using namespace memhomog;

TEST_CASE("quenched determinism") {
    const HelfrichParams p{5.0, 0.0, 2.0};
    const EnsembleSummary a = quenched_average(p, 6, 32, 1e-10, 777, true);
    const EnsembleSummary b = quenched_average(p, 6, 32, 1e-10, 777, true);
    CHECK(a.mean_D.a11 == b.mean_D.a11);
    CHECK(a.mean_D.a12 == b.mean_D.a12);
    CHECK(a.std_D.a22 == b.std_D.a22);
    CHECK(a.mean_area_scaling == b.mean_area_scaling);
    REQUIRE(a.per_sample.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(a.per_sample[i].D.a11 == b.per_sample[i].D.a11);
        CHECK(a.per_sample[i].Z == b.per_sample[i].Z);
    }
    const EnsembleSummary c = quenched_average(p, 6, 32, 1e-10, 778, false);
    CHECK(c.mean_D.a11 != a.mean_D.a11);
    CHECK(c.per_sample.empty());
    CHECK_THROWS_AS(quenched_average(p, 0, 32, 1e-10, 1), ConfigError);
}

TEST_CASE("quenched flat limit") {
    // huge rigidity: every realisation is nearly flat, tensors approach identity
    const EnsembleSummary s = quenched_average({1e3, 0.0, 4.0}, 10, 48, 1e-10, 4);
    CHECK(std::abs(s.mean_D.a11 - 1.0) < 0.01);
    CHECK(std::abs(s.mean_D.a22 - 1.0) < 0.01);
    CHECK(std::abs(s.mean_D.a12) < 0.01);
    CHECK(s.mean_area_scaling > 0.99);
    CHECK(s.mean_area_scaling <= 1.0);
}

TEST_CASE("quenched isotropy in the mean") {
    const EnsembleSummary s = quenched_average({5.0, 0.0, 3.0}, 48, 32, 1e-10, 11, true);
    const double se = 1.0 / std::sqrt(48.0);
    CHECK(std::abs(s.mean_D.a12) < 3.0 * s.std_D.a12 * se + 1e-12);
    // exchangeability of the diagonal under the transpose symmetry
    double diff_sq = 0.0;
    for (const auto& r : s.per_sample) {
        const double d = r.D.a11 - r.D.a22;
        diff_sq += d * d;
    }
    const double se_diff = std::sqrt(diff_sq / 47.0 / 48.0);
    CHECK(std::abs(s.mean_D.a11 - s.mean_D.a22) < 3.0 * se_diff + 1e-12);
}

TEST_CASE("weak disorder estimate") {
    CHECK(weak_disorder_estimate({1.0, 0.0, 1.0}) ==
          Catch::Approx(1.0 - 0.5 / (M_PI * M_PI)).epsilon(1e-12));
    // delta -> 0 gives 1
    CHECK(weak_disorder_estimate({1e9, 0.0, 1.0}) == Catch::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("quenched approaches the weak-disorder line") {
    const HelfrichParams p{20.0, 0.0, 4.0};
    const EnsembleSummary s = quenched_average(p, 60, 64, 1e-10, 21, true);
    const double delta = s.delta;
    const double target = 1.0 - 0.5 * delta;
    const double se = s.std_D.a11 / std::sqrt(60.0);
    CHECK(std::abs(s.mean_D.a11 - target) < 3.0 * se + 10.0 * delta * delta);
    // E[1/Z] sits between the quenched mean and 1
    CHECK(s.mean_area_scaling < 1.0);
    CHECK(std::abs(s.mean_area_scaling - target) < 10.0 * delta * delta);
}

TEST_CASE("annealed estimator") {
    SECTION("flat limit") {
        const AnnealedResult r = annealed_tensor({1e3, 0.0, 4.0}, 20000, 2, 5);
        CHECK(std::abs(r.D - 1.0) < 1e-3);
        CHECK(r.stderr_D < 1e-4);
    }
    SECTION("bounds and asymptotics") {
        const AnnealedResult r = annealed_tensor({0.05, 0.0, 6.0}, 20000, 2, 6);
        CHECK(r.D > 0.5);
        CHECK(r.D < 1.0);

        const AnnealedResult weak = annealed_tensor({30.0, 0.0, 6.0}, 20000, 2, 7);
        CHECK(std::abs(weak.D - weak.weak_disorder) <
              2.0 * std::pow(weak.delta, 1.5) + 3.0 * weak.stderr_D);
    }
    SECTION("x-independence across the grid") {
        const AnnealedResult r = annealed_tensor({0.5, 0.0, 4.0}, 20000, 4, 8);
        double mean = 0.0;
        for (const double p : r.point_mean) mean += p;
        mean /= r.point_mean.size();
        for (std::size_t g = 0; g < r.point_mean.size(); ++g)
            CHECK(std::abs(r.point_mean[g] - mean) < 3.5 * r.point_se[g]);
    }
    SECTION("input validation") {
        CHECK_THROWS_AS(annealed_tensor({1.0, 0.0, 4.0}, 0, 2, 1), ConfigError);
        CHECK_THROWS_AS(annealed_tensor({1.0, 0.0, 4.0}, 10, 0, 1), ConfigError);
    }
}

TEST_CASE("annealed drift vanishes") {
    const std::vector<Vec2> points{{0.17, 0.62}, {0.81, 0.33}, {0.5, 0.04}};
    const auto checks = annealed_drift_check({1.0, 0.0, 4.0}, 20000, points, 31);
    for (const auto& c : checks) {
        REQUIRE(c.se_valid);
        CHECK(std::abs(c.mean.x) < 3.5 * c.se.x);
        CHECK(std::abs(c.mean.y) < 3.5 * c.se.y);
    }

    // the cosine-flip pairing cancels the drift exactly at lattice points
    const auto anti = annealed_drift_check({1.0, 0.0, 3.0}, 200, {{0.0, 0.0}}, 32, true);
    CHECK(std::abs(anti[0].mean.x) < 1e-13);
    CHECK(std::abs(anti[0].mean.y) < 1e-13);

    const auto single = annealed_drift_check({1.0, 0.0, 2.0}, 1, {{0.3, 0.3}}, 33);
    CHECK_FALSE(single[0].se_valid);
}

TEST_CASE("commensurate-regime drift estimator") {
    SingleModeConfig mode;
    mode.kappa_star = 0.02;  // large mode variance, strongly bent surface
    mode.sigma_star = 0.0;

    const double sd = std::sqrt(mode.pi());
    const auto grid = [&](int n, double span) {
        std::vector<double> g(n);
        for (int j = 0; j < n; ++j) g[j] = -span * sd + 2.0 * span * sd * j / (n - 1);
        return g;
    };

    SECTION("validation") {
        CHECK_THROWS_AS(case3_drift_estimate(mode, 16, grid(3, 5.0)), ConfigError);
        std::vector<double> skew = grid(7, 5.0);
        skew[2] += 0.3 * sd;
        CHECK_THROWS_AS(case3_drift_estimate(mode, 16, skew), ConfigError);
    }

    SECTION("symmetric mode gives zero drift") {
        const Case3DriftResult r = case3_drift_estimate(mode, 32, grid(9, 5.0));
        CHECK(std::abs(r.L.x) < 1e-6);
        CHECK(std::abs(r.L.y) < 1e-6);

        // sign-flipped profile leaves the (zero) drift unchanged
        SingleModeConfig flipped = mode;
        flipped.profile_scale = -1.0;
        const Case3DriftResult rf = case3_drift_estimate(flipped, 32, grid(9, 5.0));
        CHECK(std::abs(rf.L.x) < 1e-6);
        CHECK(std::abs(rf.L.y) < 1e-6);
    }

    SECTION("flat profile gives exactly zero") {
        SingleModeConfig flat = mode;
        flat.profile_scale = 0.0;
        const Case3DriftResult r = case3_drift_estimate(flat, 16, grid(7, 5.0));
        CHECK(r.L.x == 0.0);
        CHECK(r.L.y == 0.0);
    }

    SECTION("asymmetric mode is reported without assertion") {
        SingleModeConfig asym = mode;
        asym.asymmetric = true;
        const Case3DriftResult r = case3_drift_estimate(asym, 24, grid(9, 5.0));
        CHECK(std::isfinite(r.L.x));
        CHECK(std::isfinite(r.L.y));
    }

    SECTION("eta-quadrature kills additive constants") {
        // the OU generator applied to c(eta) = eta^2 integrates to zero against
        // the stationary law; the same discrete quadrature the estimator uses
        // must reproduce that cancellation
        const auto g = grid(17, 5.0);
        const double d_eta = g[1] - g[0];
        const double gamma = mode.gamma(), pv = mode.pi();
        double total = 0.0, scale = 0.0;
        for (std::size_t j = 1; j + 1 < g.size(); ++j) {
            const double rho = std::exp(-0.5 * g[j] * g[j] / pv) / std::sqrt(two_pi * pv);
            const double c_prime = (g[j + 1] * g[j + 1] - g[j - 1] * g[j - 1]) / (2 * d_eta);
            const double c_second =
                (g[j + 1] * g[j + 1] - 2 * g[j] * g[j] + g[j - 1] * g[j - 1]) / (d_eta * d_eta);
            total += d_eta * rho * (-gamma * g[j] * c_prime + gamma * pv * c_second);
            scale += d_eta * rho * std::abs(gamma * pv * c_second);
        }
        CHECK(std::abs(total) < 0.01 * scale);
    }
}
