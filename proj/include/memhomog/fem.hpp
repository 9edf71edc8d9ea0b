#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "memhomog/common.hpp"
#include "memhomog/quadrature.hpp"
#include "memhomog/surface.hpp"

namespace memhomog {

// Uniform triangulation of the unit torus: M x M nodes at (i/M, j/M), each
// grid square split along its lower-left -> upper-right diagonal, boundary
// nodes identified periodically.
struct PeriodicMesh {
    int resolution;

    explicit PeriodicMesh(int m) : resolution(m) {
        if (m < 2) throw ConfigError("mesh resolution must be at least 2");
    }

    int node_count() const { return resolution * resolution; }
    int node_id(int i, int j) const {
        const int m = resolution;
        return ((i % m + m) % m) * m + ((j % m + m) % m);
    }
    Vec2 node_coord(int id) const {
        return {static_cast<double>(id / resolution) / resolution,
                static_cast<double>(id % resolution) / resolution};
    }
};

namespace fem_detail {

// Degree-5 triangle rule (7 points), barycentric (l1, l2) with weight.
struct TriQuadPoint {
    double l1, l2, w;
};
inline const std::array<TriQuadPoint, 7>& tri_rule() {
    static const std::array<TriQuadPoint, 7> rule = {{
        {1.0 / 3.0, 1.0 / 3.0, 0.225},
        {0.797426985353087, 0.101286507323456, 0.125939180544827},
        {0.101286507323456, 0.797426985353087, 0.125939180544827},
        {0.101286507323456, 0.101286507323456, 0.125939180544827},
        {0.059715871789770, 0.470142064105115, 0.132394152788506},
        {0.470142064105115, 0.059715871789770, 0.132394152788506},
        {0.470142064105115, 0.470142064105115, 0.132394152788506},
    }};
    return rule;
}

struct ElementGeometry {
    std::array<Vec2, 3> vertex_offset;  // relative to the square's origin
    std::array<Vec2, 3> grad;           // P1 shape-function gradients (times 1/h)
};

inline std::array<ElementGeometry, 2> element_geometries(double h) {
    // lower triangle (a, b, d) and upper triangle (a, d, c) of each square
    ElementGeometry lower{{Vec2{0, 0}, Vec2{h, 0}, Vec2{h, h}},
                          {Vec2{-1 / h, 0}, Vec2{1 / h, -1 / h}, Vec2{0, 1 / h}}};
    ElementGeometry upper{{Vec2{0, 0}, Vec2{h, h}, Vec2{0, h}},
                          {Vec2{0, -1 / h}, Vec2{1 / h, 0}, Vec2{-1 / h, 1 / h}}};
    return {lower, upper};
}

}  // namespace fem_detail

// Everything the cell solves need: Galerkin stiffness of div(sqrt|g| g^{-1} grad .),
// the two divergence-form load vectors, nodal surface-measure weights, and the
// cell integrals reused by the tensor and its bounds.
struct AssembledCellProblem {
    Eigen::SparseMatrix<double, Eigen::RowMajor> stiffness;
    std::array<Eigen::VectorXd, 2> load;
    Eigen::VectorXd mass_weights;  // int phi_i sqrt|g|; sums to Z
    double Z = 0.0;
    Mat2 coef_integral;            // int sqrt|g| g^{-1} dy   (Voigt side)
    Mat2 reuss_integral;           // int g / sqrt|g| dy      (Reuss side)
    int mesh_M = 0;
};

inline AssembledCellProblem assemble_system(const PeriodicMesh& mesh, const SurfaceSpec& spec) {
    const int m = mesh.resolution;
    const int n = mesh.node_count();
    const double h = 1.0 / m;
    const double area = 0.5 * h * h;
    const auto geoms = fem_detail::element_geometries(h);
    const auto& rule = fem_detail::tri_rule();

    AssembledCellProblem out;
    out.mesh_M = m;
    out.load[0] = Eigen::VectorXd::Zero(n);
    out.load[1] = Eigen::VectorXd::Zero(n);
    out.mass_weights = Eigen::VectorXd::Zero(n);

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(18) * m * m);

    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const Vec2 origin{i * h, j * h};
            const std::array<std::array<int, 3>, 2> conn = {{
                {mesh.node_id(i, j), mesh.node_id(i + 1, j), mesh.node_id(i + 1, j + 1)},
                {mesh.node_id(i, j), mesh.node_id(i + 1, j + 1), mesh.node_id(i, j + 1)},
            }};
            for (int t = 0; t < 2; ++t) {
                const auto& g = geoms[t];
                Mat2 coef{};        // element mean of sqrt|g| g^{-1}
                Mat2 reuss{};       // element mean of g / sqrt|g|
                double root_g = 0;  // element mean of sqrt|g|
                std::array<double, 3> mass{0, 0, 0};
                for (const auto& q : rule) {
                    const Vec2 p = origin + g.vertex_offset[0] * (1.0 - q.l1 - q.l2) +
                                   g.vertex_offset[1] * q.l1 + g.vertex_offset[2] * q.l2;
                    const SurfaceJet jet = surface_jet(spec, p);
                    const Vec2 gr = jet.grad;
                    const double s = 1.0 + gr.norm2();
                    const double rs = std::sqrt(s);
                    coef += q.w * Mat2{rs * (1.0 - gr.x * gr.x / s), rs * (-gr.x * gr.y / s),
                                       rs * (1.0 - gr.y * gr.y / s)};
                    reuss += q.w * Mat2{(1.0 + gr.x * gr.x) / rs, gr.x * gr.y / rs,
                                        (1.0 + gr.y * gr.y) / rs};
                    root_g += q.w * rs;
                    mass[0] += q.w * (1.0 - q.l1 - q.l2) * rs;
                    mass[1] += q.w * q.l1 * rs;
                    mass[2] += q.w * q.l2 * rs;
                }
                if (!std::isfinite(coef.a11 + coef.a12 + coef.a22))
                    throw NumericError("non-finite surface data in element (" +
                                       std::to_string(i) + "," + std::to_string(j) + ")");
                out.Z += area * root_g;
                out.coef_integral += area * coef;
                out.reuss_integral += area * reuss;
                for (int a = 0; a < 3; ++a) {
                    out.mass_weights[conn[t][a]] += area * mass[a];
                    const Vec2 ca = coef.apply(g.grad[a]);
                    out.load[0][conn[t][a]] -= area * ca.x;
                    out.load[1][conn[t][a]] -= area * ca.y;
                    // emit symmetric pairs from one computation so the
                    // assembled matrix is exactly symmetric
                    triplets.emplace_back(conn[t][a], conn[t][a], area * ca.dot(g.grad[a]));
                    for (int b = a + 1; b < 3; ++b) {
                        const double v = area * ca.dot(g.grad[b]);
                        triplets.emplace_back(conn[t][a], conn[t][b], v);
                        triplets.emplace_back(conn[t][b], conn[t][a], v);
                    }
                }
            }
        }
    }

    out.stiffness.resize(n, n);
    out.stiffness.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

struct CellSolve {
    Eigen::VectorXd corrector;
    int iterations = 0;
    double rel_residual = 0.0;
};

// Jacobi-preconditioned CG on the singular periodic system. The load is
// projected onto the complement of constants, CG preserves that complement,
// and the solution is recentred to zero weighted mean afterwards.
inline CellSolve solve_cell(const Eigen::SparseMatrix<double, Eigen::RowMajor>& stiffness,
                            Eigen::VectorXd load, const Eigen::VectorXd& mass_weights,
                            double tol = 1e-10, long max_iterations = 0) {
    const long n = stiffness.rows();
    if (max_iterations <= 0) max_iterations = 10 * n;

    const double mean = load.sum() / n;
    if (std::abs(load.sum()) > 1e-12) load.array() -= mean;

    CellSolve out;
    out.corrector = Eigen::VectorXd::Zero(n);
    const double load_norm = load.norm();
    if (load_norm < 1e-300) return out;

    Eigen::VectorXd inv_diag = stiffness.diagonal().cwiseInverse();
    Eigen::VectorXd r = load;
    Eigen::VectorXd z = inv_diag.cwiseProduct(r);
    Eigen::VectorXd p = z;
    Eigen::VectorXd q(n);
    double rz = r.dot(z);

    long it = 0;
    double res = 1.0;
    while (it < max_iterations) {
        q.noalias() = stiffness * p;
        const double alpha = rz / p.dot(q);
        out.corrector += alpha * p;
        r -= alpha * q;
        ++it;
        res = r.norm() / load_norm;
        if (res < tol) break;
        z = inv_diag.cwiseProduct(r);
        const double rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
    }
    out.iterations = static_cast<int>(it);
    out.rel_residual = res;
    if (res >= tol)
        throw NumericError("cell solver exceeded " + std::to_string(max_iterations) +
                           " iterations, relative residual " + std::to_string(res));

    const double wsum = mass_weights.sum();
    out.corrector.array() -= mass_weights.dot(out.corrector) / wsum;
    return out;
}

inline double surface_area_Z(const PeriodicMesh& mesh, const SurfaceSpec& spec) {
    const int m = mesh.resolution;
    const double h = 1.0 / m;
    const double area = 0.5 * h * h;
    const auto geoms = fem_detail::element_geometries(h);
    const auto& rule = fem_detail::tri_rule();
    double z = 0.0;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const Vec2 origin{i * h, j * h};
            for (const auto& g : geoms) {
                for (const auto& q : rule) {
                    const Vec2 p = origin + g.vertex_offset[0] * (1.0 - q.l1 - q.l2) +
                                   g.vertex_offset[1] * q.l1 + g.vertex_offset[2] * q.l2;
                    z += area * q.w * std::sqrt(1.0 + surface_jet(spec, p).grad.norm2());
                }
            }
        }
    }
    return z;
}

// Homogenized tensor with excess area, Voigt-Reuss bounds and area scaling.
struct EffectiveTensor {
    Mat2 D;
    double Z = 1.0;
    Mat2 lower;            // Reuss-type lower bound
    Mat2 upper;            // Voigt-type upper bound
    double area_scaling = 1.0;  // 1/Z
    int mesh_M = 0;
    int cg_iterations = 0;      // max over the two corrector solves
    double cg_residual = 0.0;
};

inline std::pair<Mat2, Mat2> bounds_from_integrals(const AssembledCellProblem& sys) {
    const Mat2 upper = (1.0 / sys.Z) * sys.coef_integral;
    const double det = sys.reuss_integral.det();
    if (!(det > 0.0)) throw NumericError("singular Reuss integral matrix");
    const Mat2 inv{sys.reuss_integral.a22 / det, -sys.reuss_integral.a12 / det,
                   sys.reuss_integral.a11 / det};
    return {(1.0 / sys.Z) * inv, upper};
}

inline std::pair<Mat2, Mat2> voigt_reuss(const PeriodicMesh& mesh, const SurfaceSpec& spec) {
    return bounds_from_integrals(assemble_system(mesh, spec));
}

inline EffectiveTensor effective_tensor_from_assembly(const AssembledCellProblem& sys,
                                                      double tol = 1e-10,
                                                      long max_iterations = 0) {
    std::array<CellSolve, 2> solves;
    parallel_for(2, [&](std::size_t dir) {
        solves[dir] = solve_cell(sys.stiffness, sys.load[dir], sys.mass_weights, tol,
                                 max_iterations);
    });

    EffectiveTensor out;
    out.Z = sys.Z;
    out.mesh_M = sys.mesh_M;
    out.area_scaling = 1.0 / sys.Z;
    const Eigen::VectorXd k1 = sys.stiffness * solves[0].corrector;
    const Eigen::VectorXd k2 = sys.stiffness * solves[1].corrector;
    const double e11 = solves[0].corrector.dot(k1);
    const double e12 = solves[0].corrector.dot(k2);
    const double e22 = solves[1].corrector.dot(k2);
    out.D = (1.0 / sys.Z) * (sys.coef_integral - Mat2{e11, e12, e22});
    auto [lower, upper] = bounds_from_integrals(sys);
    out.lower = lower;
    out.upper = upper;
    out.cg_iterations = std::max(solves[0].iterations, solves[1].iterations);
    out.cg_residual = std::max(solves[0].rel_residual, solves[1].rel_residual);
    return out;
}

inline EffectiveTensor effective_tensor(const PeriodicMesh& mesh, const SurfaceSpec& spec,
                                        double tol = 1e-10, long max_iterations = 0) {
    return effective_tensor_from_assembly(assemble_system(mesh, spec), tol, max_iterations);
}

struct EigenSummary {
    double lambda1 = 0.0;  // smaller eigenvalue
    double lambda2 = 0.0;
    double det_residual = 0.0;  // |det(D) Z^2 - 1|
};

inline EigenSummary eigen_summary(const Mat2& D, double Z) {
    const auto ev = D.eigenvalues();
    return {ev[0], ev[1], std::abs(D.det() * Z * Z - 1.0)};
}

// Closed form for the one-dimensional profile: diffusion is 1/Z1^2 along the
// modulated axis and unhindered across it.
inline EffectiveTensor onedim_effective_tensor(double amplitude, int quad_points = 1000000) {
    const double z1 = onedim_excess_length(amplitude, quad_points);
    double inv_len = 0.0;  // int 1/sqrt(1 + h'^2) ds
    const double w = two_pi * amplitude;
    for (int i = 0; i < quad_points; ++i) {
        const double c = w * std::cos(two_pi * (i + 0.5) / quad_points);
        inv_len += 1.0 / std::sqrt(1.0 + c * c);
    }
    inv_len /= quad_points;

    EffectiveTensor out;
    out.Z = z1;
    out.area_scaling = 1.0 / z1;
    out.D = Mat2{1.0 / (z1 * z1), 0.0, 1.0};
    // int sqrt|g| g^{-1} = diag(inv_len, z1); int g/sqrt|g| = diag(z1, inv_len)
    out.lower = Mat2{1.0 / (z1 * z1), 0.0, 1.0 / (z1 * inv_len)};
    out.upper = Mat2{inv_len / z1, 0.0, 1.0};
    return out;
}

}  // namespace memhomog
