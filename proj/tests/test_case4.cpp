#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "memhomog/case4.hpp"

using namespace memhomog;

namespace {

Case4Config small_config(double kappa, int my = 12, int ke = 16) {
    Case4Config c;
    c.mode.kappa_star = kappa;
    c.mode.sigma_star = 0.0;
    c.mesh_y = my;
    c.mesh_eta = ke;
    return c;
}

}  // namespace

TEST_CASE("joint config validation") {
    Case4Config c = small_config(0.1);
    c.mesh_y = 4;
    CHECK_THROWS_AS(c.validate(), ConfigError);

    Case4Config stiff = small_config(1e6);  // Pi ~ 1.6e-10 collapses the eta domain
    CHECK_THROWS_AS(stiff.validate(), ConfigError);

    Case4Config narrow = small_config(0.1);
    narrow.eta_halfwidth = 2.0 * std::sqrt(narrow.mode.pi());
    CHECK_THROWS_AS(narrow.validate(), ConfigError);

    CHECK_NOTHROW(small_config(0.1).validate());
}

TEST_CASE("generator kills constants and reproduces the mode drift") {
    const Case4System sys = assemble_generator(small_config(0.1));
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(sys.n_nodes);
    CHECK((sys.generator * ones).lpNorm<Eigen::Infinity>() <
          1e-10 * sys.generator.coeffs().cwiseAbs().maxCoeff());

    // applied to f = eta the y-part drops and the advection term survives:
    // (G eta)_i = -Gamma int eta phi_i, which is -Gamma eta_i m_i away from
    // the eta boundary because the node star is point symmetric
    Eigen::VectorXd eta_vec(sys.n_nodes);
    for (int i = 0; i < sys.my(); ++i)
        for (int j = 0; j < sys.my(); ++j)
            for (int k = 0; k <= sys.ke(); ++k)
                eta_vec[sys.node_id(i, j, k)] = sys.eta_of(k);
    const Eigen::VectorXd g_eta = sys.generator * eta_vec;
    for (int i = 0; i < sys.my(); i += 3)
        for (int j = 0; j < sys.my(); j += 3)
            for (int k = 2; k + 2 <= sys.ke(); k += 3) {
                const long id = sys.node_id(i, j, k);
                const double expected = -sys.gamma * sys.eta_of(k) * sys.lumped_mass[id];
                CHECK(g_eta[id] == Catch::Approx(expected).margin(
                                       1e-10 * sys.gamma * sys.halfwidth));
            }
}

TEST_CASE("decoupled limit factorizes the density") {
    Case4Config c = small_config(0.1, 12, 32);
    c.mode.profile_scale = 0.0;  // flat surface, generator = laplacian (+) OU
    const Case4System sys = assemble_generator(c);
    const InvariantDensity density = solve_invariant_density(sys);
    CHECK(density.eig_residual < 1e-10);
    CHECK(density.negative_mass < 1e-9);

    // uniform in y at every eta level
    for (int k = 0; k <= sys.ke(); k += 4) {
        const double ref = density.rho[sys.node_id(0, 0, k)];
        for (int i = 0; i < sys.my(); i += 2)
            for (int j = 0; j < sys.my(); j += 2)
                CHECK(density.rho[sys.node_id(i, j, k)] ==
                      Catch::Approx(ref).epsilon(1e-8).margin(1e-13));
    }
    // eta-marginal close to the truncated gaussian
    CHECK(density.marginal_l1 < 0.01);

    // loads vanish for a flat profile, so the corrector is zero and D = I
    const CorrectorPair correctors = solve_corrector(sys, density);
    CHECK(correctors.chi1.lpNorm<Eigen::Infinity>() < 1e-12);
    const Case4Tensor t = effective_tensor_case4(sys, density, correctors);
    CHECK(t.D.a11 == Catch::Approx(1.0).epsilon(1e-10));
    CHECK(t.D.a22 == Catch::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(t.D.a12) < 1e-12);
}

TEST_CASE("full pipeline on the symmetric mode") {
    Case4Config c = small_config(0.1, 16, 32);
    const Case4System sys = assemble_generator(c);
    const InvariantDensity density = solve_invariant_density(sys);
    CHECK(density.eig_residual < 1e-10);
    CHECK(density.negative_mass < 1e-6);
    CHECK(density.marginal_l1 < 0.01);

    const Vec2 centering = check_centering(sys, density);
    CHECK(std::abs(centering.x) < 1e-10);
    CHECK(std::abs(centering.y) < 1e-10);

    const CorrectorPair correctors = solve_corrector(sys, density, 1e-10);
    CHECK(correctors.residual < 1e-9);
    // rho-weighted mean is removed
    const double mean1 = sys.lumped_mass.dot(
        (correctors.chi1.array() * density.rho.array()).matrix());
    CHECK(std::abs(mean1) < 1e-12);

    Case4Tensor t = effective_tensor_case4(sys, density, correctors);
    t.centering = centering;
    CHECK(t.D.a11 == Catch::Approx(t.D.a22).epsilon(1e-6));
    CHECK(std::abs(t.D.a12) < 0.01 * t.D.a11);
    CHECK(t.D.a11 < 1.0 + 1e-3);
    CHECK(t.D.a11 > 0.5);
    CHECK(t.energy_identity_residual < 0.1);  // coarse mesh; rate checked below
}

TEST_CASE("energy identity converges at second order") {
    double res_coarse = 0.0, res_fine = 0.0;
    {
        const Case4Tensor t = run_case4(small_config(0.02, 10, 20));
        res_coarse = t.energy_identity_residual;
    }
    {
        const Case4Tensor t = run_case4(small_config(0.02, 20, 40));
        res_fine = t.energy_identity_residual;
    }
    CHECK(res_fine < res_coarse / 2.5);
}

TEST_CASE("tensor is stable under refinement") {
    const Case4Tensor coarse = run_case4(small_config(0.1, 12, 24));
    const Case4Tensor fine = run_case4(small_config(0.1, 18, 36));
    CHECK(std::abs(coarse.D.a11 - fine.D.a11) / fine.D.a11 < 0.01);
}

TEST_CASE("corrector growth stays quadratic in the domain height") {
    // max |chi| <= C (1 + M^2) with C stable under refinement
    const Case4Config a = small_config(0.05, 10, 20);
    const Case4Config b = small_config(0.05, 14, 28);
    const double m2 = 1.0 + std::pow(a.halfwidth(), 2);
    const Case4Tensor ta = run_case4(a);
    const Case4Tensor tb = run_case4(b);
    const double ca = ta.max_abs_corrector / m2;
    const double cb = tb.max_abs_corrector / m2;
    CHECK(ca / cb < 1.5);
    CHECK(cb / ca < 1.5);
}

TEST_CASE("asymmetric mode reports nonzero centering and gates the corrector") {
    Case4Config c = small_config(0.02, 12, 24);
    c.mode.asymmetric = true;
    const Case4System sys = assemble_generator(c);
    const InvariantDensity density = solve_invariant_density(sys);
    const Vec2 centering = check_centering(sys, density);
    CHECK(std::isfinite(centering.x));
    CHECK(std::isfinite(centering.y));
    if (std::abs(centering.x) > c.centering_gate || std::abs(centering.y) > c.centering_gate)
        CHECK_THROWS_AS(solve_corrector(sys, density), NumericError);
}
