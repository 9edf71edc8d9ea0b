#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <array>
#include <cmath>
#include <string>
#include <unsupported/Eigen/IterativeSolvers>
#include <vector>

#include "memhomog/common.hpp"
#include "memhomog/ensemble.hpp"
#include "memhomog/rng.hpp"
#include "memhomog/surface.hpp"

namespace memhomog {

// Joint fast-process pipeline for the regime where temporal fluctuations beat
// spatial ones: discretize the generator of (Y, eta) on T^2 x [-M, M] with
// first-order elements on a Kuhn (six-tetrahedra) subdivision, solve the
// adjoint kernel for the invariant density, then the Poisson problem for the
// corrector, and quadrature the effective tensor.
struct Case4Config {
    SingleModeConfig mode;       // single OU mode, default k=(1,1), sin x sin profile
    double eta_halfwidth = 0.0;  // 0 => 6 sqrt(Pi)
    int mesh_y = 32;
    int mesh_eta = 64;
    double tol = 1e-10;
    double centering_gate = 1e-6;

    double halfwidth() const {
        return eta_halfwidth > 0.0 ? eta_halfwidth : 6.0 * std::sqrt(mode.pi());
    }

    void validate() const {
        if (mesh_y < 8 || mesh_eta < 8) throw ConfigError("joint mesh needs >= 8 nodes per axis");
        if (mode.pi() < 1e-8)
            throw ConfigError("mode variance below 1e-8; eta domain degenerates");
        if (halfwidth() < 5.0 * std::sqrt(mode.pi()))
            throw ConfigError("eta half-width must keep at least 5 standard deviations");
    }
};

namespace case4_detail {

struct TetShape {
    std::array<std::array<int, 3>, 4> offset;   // vertex offsets in the unit cell
    std::array<std::array<double, 3>, 4> grad;  // P1 gradients in physical coords
    double volume;
};

// Kuhn subdivision: one tetrahedron per permutation of the axis order. The
// set is invariant under the point reflection of a cell, which is what makes
// the discrete centering of symmetric modes exact.
inline std::vector<TetShape> kuhn_shapes(double hy, double he) {
    static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                    {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    const double scale[3] = {hy, hy, he};
    std::vector<TetShape> shapes;
    shapes.reserve(6);
    for (const auto& p : perms) {
        TetShape t{};
        int acc[3] = {0, 0, 0};
        t.offset[0] = {0, 0, 0};
        for (int s = 0; s < 3; ++s) {
            acc[p[s]] += 1;
            t.offset[s + 1] = {acc[0], acc[1], acc[2]};
        }
        double e[3][3];  // edge matrix columns v_i - v_0
        for (int c = 0; c < 3; ++c)
            for (int r = 0; r < 3; ++r)
                e[r][c] = (t.offset[c + 1][r] - t.offset[0][r]) * scale[r];
        const double det = e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1]) -
                           e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0]) +
                           e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0]);
        t.volume = std::abs(det) / 6.0;
        double inv[3][3];
        inv[0][0] = (e[1][1] * e[2][2] - e[1][2] * e[2][1]) / det;
        inv[0][1] = (e[0][2] * e[2][1] - e[0][1] * e[2][2]) / det;
        inv[0][2] = (e[0][1] * e[1][2] - e[0][2] * e[1][1]) / det;
        inv[1][0] = (e[1][2] * e[2][0] - e[1][0] * e[2][2]) / det;
        inv[1][1] = (e[0][0] * e[2][2] - e[0][2] * e[2][0]) / det;
        inv[1][2] = (e[0][2] * e[1][0] - e[0][0] * e[1][2]) / det;
        inv[2][0] = (e[1][0] * e[2][1] - e[1][1] * e[2][0]) / det;
        inv[2][1] = (e[0][1] * e[2][0] - e[0][0] * e[2][1]) / det;
        inv[2][2] = (e[0][0] * e[1][1] - e[0][1] * e[1][0]) / det;
        // gradient of barycentric lambda_i (i>=1) is row i-1 of inv
        for (int i = 1; i < 4; ++i)
            t.grad[i] = {inv[i - 1][0], inv[i - 1][1], inv[i - 1][2]};
        for (int r = 0; r < 3; ++r)
            t.grad[0][r] = -(t.grad[1][r] + t.grad[2][r] + t.grad[3][r]);
        shapes.push_back(t);
    }
    return shapes;
}

// degree-2 tetrahedron rule (4 points)
struct TetQuadPoint {
    double l[4];
    double w;
};
inline const std::array<TetQuadPoint, 4>& tet_rule_deg2() {
    constexpr double a = 0.5854101966249685;
    constexpr double b = 0.1381966011250105;
    static const std::array<TetQuadPoint, 4> rule = {{{{a, b, b, b}, 0.25},
                                                      {{b, a, b, b}, 0.25},
                                                      {{b, b, a, b}, 0.25},
                                                      {{b, b, b, a}, 0.25}}};
    return rule;
}

// degree-3 tetrahedron rule (5 points, one negative weight)
inline const std::array<TetQuadPoint, 5>& tet_rule_deg3() {
    static const std::array<TetQuadPoint, 5> rule = {{
        {{0.25, 0.25, 0.25, 0.25}, -0.8},
        {{0.5, 1.0 / 6, 1.0 / 6, 1.0 / 6}, 0.45},
        {{1.0 / 6, 0.5, 1.0 / 6, 1.0 / 6}, 0.45},
        {{1.0 / 6, 1.0 / 6, 0.5, 1.0 / 6}, 0.45},
        {{1.0 / 6, 1.0 / 6, 1.0 / 6, 0.5}, 0.45},
    }};
    return rule;
}

}  // namespace case4_detail

// Pointwise data of the joint coefficient field at (y, eta).
struct JointPoint {
    Mat2 g_inv;
    double sqrt_det_g;
    Vec2 drift;
};

struct Case4System {
    Case4Config config;
    double gamma = 0.0;
    double pi_var = 0.0;
    double halfwidth = 0.0;
    double d_eta = 0.0;
    long n_nodes = 0;
    Eigen::SparseMatrix<double> generator;  // discrete G, kernel = constants
    Eigen::VectorXd load_f1, load_f2;       // int F_i phi_a dy deta
    Eigen::VectorXd lumped_mass;            // int phi_a dy deta
    SurfaceSpec unit_profile;               // e(y); h(y,eta) = eta * e(y)

    int my() const { return config.mesh_y; }
    int ke() const { return config.mesh_eta; }
    long node_id(int i, int j, int k) const {
        const int m = config.mesh_y;
        return (static_cast<long>((i % m + m) % m) * m + ((j % m + m) % m)) *
                   (config.mesh_eta + 1) +
               k;
    }
    double eta_of(int k) const { return -halfwidth + k * d_eta; }

    JointPoint point(Vec2 y, double eta) const {
        const SurfaceJet ej = surface_jet(unit_profile, y);
        SurfaceJet j;
        j.grad = eta * ej.grad;
        j.h11 = eta * ej.h11;
        j.h12 = eta * ej.h12;
        j.h22 = eta * ej.h22;
        const double s = 1.0 + j.grad.norm2();
        JointPoint p;
        p.g_inv = Mat2{1.0 - j.grad.x * j.grad.x / s, -j.grad.x * j.grad.y / s,
                       1.0 - j.grad.y * j.grad.y / s};
        p.sqrt_det_g = std::sqrt(s);
        p.drift = drift_vector(j);
        return p;
    }
};

inline Case4System assemble_generator(const Case4Config& config) {
    config.validate();
    Case4System sys;
    sys.config = config;
    sys.gamma = config.mode.gamma();
    sys.pi_var = config.mode.pi();
    sys.halfwidth = config.halfwidth();
    sys.d_eta = 2.0 * sys.halfwidth / config.mesh_eta;
    sys.unit_profile = SurfaceSpec{single_mode_surface(config.mode, 1.0)};

    const int my = config.mesh_y, ke = config.mesh_eta;
    const double hy = 1.0 / my;
    sys.n_nodes = static_cast<long>(my) * my * (ke + 1);
    const auto shapes = case4_detail::kuhn_shapes(hy, sys.d_eta);
    const auto& rule = case4_detail::tet_rule_deg2();

    sys.load_f1 = Eigen::VectorXd::Zero(sys.n_nodes);
    sys.load_f2 = Eigen::VectorXd::Zero(sys.n_nodes);
    sys.lumped_mass = Eigen::VectorXd::Zero(sys.n_nodes);

    // nodal 1/sqrt|g| weights for the generator's test-function scaling
    Eigen::VectorXd inv_root_g(sys.n_nodes);
    for (int i = 0; i < my; ++i)
        for (int j = 0; j < my; ++j) {
            const SurfaceJet ej = surface_jet(sys.unit_profile, {i * hy, j * hy});
            const double e2 = ej.grad.norm2();
            for (int k = 0; k <= ke; ++k) {
                const double eta = sys.eta_of(k);
                inv_root_g[sys.node_id(i, j, k)] = 1.0 / std::sqrt(1.0 + eta * eta * e2);
            }
        }

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(my) * my * ke * 6 * 16);
    const double gp = sys.gamma * sys.pi_var;

    for (int i = 0; i < my; ++i) {
        for (int j = 0; j < my; ++j) {
            for (int k = 0; k < ke; ++k) {
                for (const auto& t : shapes) {
                    long nodes[4];
                    double etas[4];
                    for (int a = 0; a < 4; ++a) {
                        nodes[a] = sys.node_id(i + t.offset[a][0], j + t.offset[a][1],
                                               k + t.offset[a][2]);
                        etas[a] = sys.eta_of(k + t.offset[a][2]);
                    }
                    const double eta_sum = etas[0] + etas[1] + etas[2] + etas[3];
                    Mat2 coef{};
                    Vec2 f_int[4] = {};  // per-vertex load contributions
                    for (const auto& q : rule) {
                        Vec2 y{};
                        double eta = 0.0;
                        for (int a = 0; a < 4; ++a) {
                            y.x += q.l[a] * (i + t.offset[a][0]) * hy;
                            y.y += q.l[a] * (j + t.offset[a][1]) * hy;
                            eta += q.l[a] * etas[a];
                        }
                        const JointPoint p = sys.point(y, eta);
                        coef += q.w * (p.sqrt_det_g * p.g_inv);
                        for (int a = 0; a < 4; ++a) f_int[a] += (q.w * q.l[a]) * p.drift;
                    }
                    if (!std::isfinite(coef.a11 + coef.a22))
                        throw NumericError("non-finite joint coefficient in cell (" +
                                           std::to_string(i) + "," + std::to_string(j) + "," +
                                           std::to_string(k) + ")");
                    const double V = t.volume;
                    for (int a = 0; a < 4; ++a) {
                        sys.lumped_mass[nodes[a]] += V / 4.0;
                        sys.load_f1[nodes[a]] += V * f_int[a].x;
                        sys.load_f2[nodes[a]] += V * f_int[a].y;
                        const double wa = inv_root_g[nodes[a]];
                        const Vec2 ga{t.grad[a][0], t.grad[a][1]};
                        const Vec2 ca = coef.apply(ga);
                        for (int b = 0; b < 4; ++b) {
                            const Vec2 gb{t.grad[b][0], t.grad[b][1]};
                            const double ky = ca.dot(gb);
                            const double keta = t.grad[a][2] * t.grad[b][2];
                            // int eta phi_a d_eta phi_b over the tet, exact
                            const double badv = t.grad[b][2] * (V / 20.0) * (eta_sum + etas[a]);
                            triplets.emplace_back(
                                nodes[a], nodes[b],
                                -wa * V * ky - gp * V * keta - sys.gamma * badv);
                        }
                    }
                }
            }
        }
    }
    sys.generator.resize(sys.n_nodes, sys.n_nodes);
    sys.generator.setFromTriplets(triplets.begin(), triplets.end());
    return sys;
}

// Stationary density of the joint process on the truncated domain.
struct InvariantDensity {
    Eigen::VectorXd rho;         // nodal values, normalized to unit mass
    double eig_residual = 0.0;   // ||G^T rho|| / ||rho||
    double negative_mass = 0.0;  // total mass carried by negative nodal values
    double marginal_l1 = 0.0;    // L1 gap between eta-marginal and truncated N(0, Pi)
};

inline InvariantDensity solve_invariant_density(const Case4System& sys, double tol = 1e-10) {
    Eigen::SparseMatrix<double> adjoint = sys.generator.transpose();
    const double shift = 1e-12 * sys.generator.diagonal().cwiseAbs().maxCoeff();
    Eigen::SparseMatrix<double> shifted = adjoint;
    for (long c = 0; c < shifted.outerSize(); ++c)
        shifted.coeffRef(c, c) += shift;

    // direct factorization up to the memory-friendly size, ILUT-preconditioned
    // GMRES inner solves beyond it
    const bool direct = sys.n_nodes <= 100000;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    Eigen::GMRES<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> gmres;
    if (direct) {
        lu.compute(shifted);
        if (lu.info() != Eigen::Success)
            throw NumericError("factorization of the adjoint generator failed");
    } else {
        gmres.preconditioner().setDroptol(1e-5);
        gmres.preconditioner().setFillfactor(30);
        gmres.setMaxIterations(4000);
        gmres.setTolerance(1e-12);
        gmres.set_restart(120);
        gmres.compute(shifted);
        if (gmres.info() != Eigen::Success)
            throw NumericError("incomplete factorization of the adjoint generator failed");
    }
    const auto inverse_apply = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        if (direct) return lu.solve(v);
        const Eigen::VectorXd x = gmres.solve(v);
        if (gmres.info() != Eigen::Success && gmres.error() > 1e-8)
            throw NumericError("adjoint kernel solve stagnated, residual " +
                               std::to_string(gmres.error()));
        return x;
    };

    Eigen::VectorXd rho = Eigen::VectorXd::Ones(sys.n_nodes);
    for (int it = 0; it < 8; ++it) {
        rho = inverse_apply(rho);
        rho /= rho.norm();
    }
    InvariantDensity out;
    out.eig_residual = (adjoint * rho).norm() / rho.norm();

    // spectral-gap guard: growth of the deflated inverse iteration estimates
    // the next eigenvalue magnitude; an ambiguous kernel is a configuration
    // problem, not something to silently normalize away
    {
        Rng rng(0x9a3c71d2b5e4f601ULL);
        Eigen::VectorXd v(sys.n_nodes);
        for (long i = 0; i < sys.n_nodes; ++i) v[i] = rng.gaussian();
        const double rho_one = rho.sum();
        double growth = 0.0;
        for (int it = 0; it < 6; ++it) {
            v -= rho * (v.sum() / rho_one);  // deflate the kernel projector rho 1^T
            const double before = v.norm();
            v = inverse_apply(v);
            growth = v.norm() / before;
            v /= v.norm();
        }
        const double lambda2 = 1.0 / std::max(growth, 1e-300);
        if (lambda2 < 10.0 * tol)
            throw NumericError("adjoint kernel is numerically degenerate (gap " +
                               std::to_string(lambda2) + ")");
    }

    if (rho.sum() < 0) rho = -rho;
    const double mass = sys.lumped_mass.dot(rho);
    if (!(mass > 0)) throw NumericError("invariant density has non-positive total mass");
    rho /= mass;
    double neg = 0.0;
    for (long i = 0; i < sys.n_nodes; ++i)
        if (rho[i] < 0) neg -= rho[i] * sys.lumped_mass[i];
    out.negative_mass = neg;
    if (neg > 1e-4)
        throw NumericError("invariant density carries negative mass " + std::to_string(neg));

    // eta-marginal against the truncated stationary Gaussian
    const int my = sys.my(), ke = sys.ke();
    const double sd = std::sqrt(sys.pi_var);
    const double trunc = std::erf(sys.halfwidth / (sd * std::sqrt(2.0)));
    double l1 = 0.0;
    for (int k = 0; k <= ke; ++k) {
        double marg = 0.0;
        for (int i = 0; i < my; ++i)
            for (int j = 0; j < my; ++j) marg += rho[sys.node_id(i, j, k)];
        marg /= static_cast<double>(my) * my;
        const double eta = sys.eta_of(k);
        const double gauss =
            std::exp(-0.5 * eta * eta / sys.pi_var) / (sd * std::sqrt(two_pi)) / trunc;
        const double w = (k == 0 || k == ke) ? 0.5 : 1.0;
        l1 += w * sys.d_eta * std::abs(marg - gauss);
    }
    out.marginal_l1 = l1;
    out.rho = std::move(rho);
    return out;
}

// Quadrature of int F rho; exactly zero (up to solver tolerance) for
// reflection-symmetric modes because the Kuhn mesh shares the symmetry.
inline Vec2 check_centering(const Case4System& sys, const InvariantDensity& density) {
    return {density.rho.dot(sys.load_f1), density.rho.dot(sys.load_f2)};
}

struct CorrectorPair {
    Eigen::VectorXd chi1, chi2;
    int iterations = 0;
    double residual = 0.0;
};

inline CorrectorPair solve_corrector(const Case4System& sys, const InvariantDensity& density,
                                     double tol = 1e-10, long max_iterations = 4000) {
    const Vec2 centering = check_centering(sys, density);
    if (std::abs(centering.x) > sys.config.centering_gate ||
        std::abs(centering.y) > sys.config.centering_gate)
        throw NumericError("centering residual (" + std::to_string(centering.x) + "," +
                           std::to_string(centering.y) + ") exceeds the corrector gate");

    const double shift = 1e-12 * sys.generator.diagonal().cwiseAbs().maxCoeff();
    Eigen::SparseMatrix<double> shifted = sys.generator;
    for (long c = 0; c < shifted.outerSize(); ++c)
        shifted.coeffRef(c, c) += shift;

    Eigen::GMRES<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> gmres;
    gmres.preconditioner().setDroptol(1e-5);
    gmres.preconditioner().setFillfactor(40);
    gmres.setMaxIterations(max_iterations);
    gmres.setTolerance(tol);
    gmres.set_restart(120);
    gmres.compute(shifted);
    if (gmres.info() != Eigen::Success)
        throw NumericError("incomplete factorization of the generator failed");

    CorrectorPair out;
    const double rho2 = density.rho.squaredNorm();
    const double rho_mass = sys.lumped_mass.dot(density.rho);
    auto solve_dir = [&](const Eigen::VectorXd& load) {
        Eigen::VectorXd b = -load;
        b -= density.rho * (density.rho.dot(b) / rho2);  // cokernel projection
        Eigen::VectorXd chi = gmres.solve(b);
        if (gmres.info() != Eigen::Success)
            throw NumericError("corrector solve stagnated, residual " +
                               std::to_string(gmres.error()));
        out.iterations = std::max<int>(out.iterations, static_cast<int>(gmres.iterations()));
        out.residual = std::max(out.residual, gmres.error());
        // normalize to int chi rho = 0
        const double m = sys.lumped_mass.dot(
            (chi.array() * density.rho.array()).matrix());
        chi.array() -= m / rho_mass;
        return chi;
    };
    out.chi1 = solve_dir(sys.load_f1);
    out.chi2 = solve_dir(sys.load_f2);
    return out;
}

struct Case4Tensor {
    Mat2 D;
    Vec2 centering;
    double eig_residual = 0.0;
    double energy_identity_residual = 0.0;
    double negative_mass = 0.0;
    double marginal_l1 = 0.0;
    double max_abs_corrector = 0.0;
};

// Effective tensor and the energy-identity diagnostic. Gradients are
// element-constant; the density and correctors enter as P1 interpolants and
// the coefficient fields are evaluated analytically at the quadrature points.
inline Case4Tensor effective_tensor_case4(const Case4System& sys,
                                          const InvariantDensity& density,
                                          const CorrectorPair& correctors) {
    const int my = sys.my(), ke = sys.ke();
    const double hy = 1.0 / my;
    const auto shapes = case4_detail::kuhn_shapes(hy, sys.d_eta);
    const auto& rule2 = case4_detail::tet_rule_deg2();
    const auto& rule3 = case4_detail::tet_rule_deg3();
    const double gp = sys.gamma * sys.pi_var;

    Mat2 D{}, energy{};
    double rhs11 = 0.0, rhs22 = 0.0, rhs12a = 0.0, rhs12b = 0.0;
    double max_chi = 0.0;

    for (int i = 0; i < my; ++i) {
        for (int j = 0; j < my; ++j) {
            for (int k = 0; k < ke; ++k) {
                for (const auto& t : shapes) {
                    long nodes[4];
                    for (int a = 0; a < 4; ++a)
                        nodes[a] = sys.node_id(i + t.offset[a][0], j + t.offset[a][1],
                                               k + t.offset[a][2]);
                    double c1[4], c2[4], rh[4];
                    for (int a = 0; a < 4; ++a) {
                        c1[a] = correctors.chi1[nodes[a]];
                        c2[a] = correctors.chi2[nodes[a]];
                        rh[a] = density.rho[nodes[a]];
                        max_chi = std::max({max_chi, std::abs(c1[a]), std::abs(c2[a])});
                    }
                    double g1[3] = {0, 0, 0}, g2[3] = {0, 0, 0};
                    for (int a = 0; a < 4; ++a)
                        for (int r = 0; r < 3; ++r) {
                            g1[r] += c1[a] * t.grad[a][r];
                            g2[r] += c2[a] * t.grad[a][r];
                        }
                    const double V = t.volume;
                    for (const auto& q : rule2) {
                        Vec2 y{};
                        double eta = 0.0, rq = 0.0;
                        for (int a = 0; a < 4; ++a) {
                            y.x += q.l[a] * (i + t.offset[a][0]) * hy;
                            y.y += q.l[a] * (j + t.offset[a][1]) * hy;
                            eta += q.l[a] * sys.eta_of(k + t.offset[a][2]);
                            rq += q.l[a] * rh[a];
                        }
                        const JointPoint p = sys.point(y, eta);
                        const Vec2 a1{1.0 + g1[0], g1[1]};
                        const Vec2 a2{g2[0], 1.0 + g2[1]};
                        const double wv = q.w * V * rq;
                        D += wv * Mat2{a1.dot(p.g_inv.apply(a1)) + gp * g1[2] * g1[2],
                                       a1.dot(p.g_inv.apply(a2)) + gp * g1[2] * g2[2],
                                       a2.dot(p.g_inv.apply(a2)) + gp * g2[2] * g2[2]};
                        const Vec2 b1{g1[0], g1[1]};
                        const Vec2 b2{g2[0], g2[1]};
                        energy += wv * Mat2{b1.dot(p.g_inv.apply(b1)) + gp * g1[2] * g1[2],
                                            b1.dot(p.g_inv.apply(b2)) + gp * g1[2] * g2[2],
                                            b2.dot(p.g_inv.apply(b2)) + gp * g2[2] * g2[2]};
                    }
                    for (const auto& q : rule3) {
                        Vec2 y{};
                        double eta = 0.0, rq = 0.0, c1q = 0.0, c2q = 0.0;
                        for (int a = 0; a < 4; ++a) {
                            y.x += q.l[a] * (i + t.offset[a][0]) * hy;
                            y.y += q.l[a] * (j + t.offset[a][1]) * hy;
                            eta += q.l[a] * sys.eta_of(k + t.offset[a][2]);
                            rq += q.l[a] * rh[a];
                            c1q += q.l[a] * c1[a];
                            c2q += q.l[a] * c2[a];
                        }
                        const JointPoint p = sys.point(y, eta);
                        const double wv = q.w * V * rq;
                        rhs11 += wv * c1q * p.drift.x;
                        rhs22 += wv * c2q * p.drift.y;
                        rhs12a += wv * c1q * p.drift.y;
                        rhs12b += wv * c2q * p.drift.x;
                    }
                }
            }
        }
    }

    Case4Tensor out;
    out.D = D;
    out.max_abs_corrector = max_chi;
    // carre-du-champ identity: energy = int chi (x) F rho (symmetrized)
    const Mat2 rhs{rhs11, 0.5 * (rhs12a + rhs12b), rhs22};
    const double denom = energy.a11 + energy.a22;
    out.energy_identity_residual =
        std::abs((energy.a11 - rhs.a11) + (energy.a22 - rhs.a22)) / std::max(denom, 1e-300);
    out.eig_residual = density.eig_residual;
    out.negative_mass = density.negative_mass;
    out.marginal_l1 = density.marginal_l1;
    return out;
}

// Full pipeline: assemble, invariant density, centering, corrector, tensor.
inline Case4Tensor run_case4(const Case4Config& config) {
    const Case4System sys = assemble_generator(config);
    const InvariantDensity density = solve_invariant_density(sys, config.tol);
    const Vec2 centering = check_centering(sys, density);
    const CorrectorPair correctors = solve_corrector(sys, density, config.tol);
    Case4Tensor out = effective_tensor_case4(sys, density, correctors);
    out.centering = centering;
    return out;
}

}  // namespace memhomog
