#pragma once

// Primal constraints (corner values, interface normal fluxes, patch pressure
// averages) and the signed jump operator coupling the remaining interface dofs.

#include <algorithm>
#include <map>
#include <tuple>
#include <vector>

#include "ietidp/assembly.hpp"

namespace ietidp {

enum class PrimalKind { CornerValue, EdgeFlux, PressureAverage };

struct PatchConstraints {
    SpMat C_C;                 // continuity rows over Gamma positions (corners first, then fluxes)
    Eigen::RowVectorXd C_A;    // patch-average pressure row
    std::vector<int> R_C;      // continuity row -> global primal index
    int R_A = -1;              // global primal index of the pressure average
    int num_corner_rows = 0;

    int num_continuity() const { return static_cast<int>(R_C.size()); }
    /// Local primal columns: continuity rows followed by the average.
    int num_local_primal() const { return num_continuity() + 1; }
    int global_of_local(int j) const { return j < num_continuity() ? R_C[j] : R_A; }
};

struct PrimalConstraints {
    std::vector<PatchConstraints> patches;
    std::vector<PrimalKind> kind;       // per global primal dof
    std::vector<int> average_patch;     // per global primal dof: patch index for averages, else -1
    int num_primal() const { return static_cast<int>(kind.size()); }
};

namespace detail {

/// Integral of each edge trace basis function times n ds, n the outward
/// normal of patch k on side s; rows follow the edge parameter.
inline Eigen::MatrixX2d edge_flux_weights(const TaylorHoodPatchSpace& sp, const GeometryMap& map, Side s,
                                          int extra_points = 0)
{
    const SplineSpace& e = sp.velocity().dir(tangent_dir(s));
    const int n = e.degree() + 2 + extra_points;
    const GaussRule1D ref = gauss_legendre(n);
    Eigen::MatrixX2d w = Eigen::MatrixX2d::Zero(e.dim(), 2);
    const auto& z = e.breakpoints();
    for (int el = 0; el < z.num_elements(); ++el)
        for (int q = 0; q < n; ++q) {
            const double t = z[el] + z.width(el) * ref.nodes[q];
            const Eigen::Vector2d xi = side_point(s, t);
            const Eigen::Vector2d nds = side_normal_ds(map.eval(xi[0], xi[1]), s);
            const BasisEval be = e.eval(t, 0);
            for (int a = 0; a < be.ders.cols(); ++a)
                w.row(be.first + a) += ref.weights[q] * z.width(el) * be.ders(0, a) * nds.transpose();
        }
    return w;
}

}  // namespace detail

inline PrimalConstraints build_primal_constraints(const Discretization& d)
{
    const MultiPatch& mp = d.domain;
    const int K = d.num_patches();
    PrimalConstraints pc;
    pc.patches.resize(K);

    // global corner primals: one per (vertex, component) for free shared vertices
    std::map<std::pair<int, int>, int> corner_id;
    for (std::size_t v = 0; v < mp.vertices().size(); ++v) {
        if (mp.vertices()[v].num_patches() < 2 || mp.vertex_on_dirichlet(static_cast<int>(v))) continue;
        for (int c = 0; c < 2; ++c) {
            corner_id[{static_cast<int>(v), c}] = pc.num_primal();
            pc.kind.push_back(PrimalKind::CornerValue);
            pc.average_patch.push_back(-1);
        }
    }
    std::vector<int> flux_id(mp.interfaces().size());
    for (std::size_t i = 0; i < mp.interfaces().size(); ++i) {
        flux_id[i] = pc.num_primal();
        pc.kind.push_back(PrimalKind::EdgeFlux);
        pc.average_patch.push_back(-1);
    }
    for (int k = 0; k < K; ++k) {
        pc.patches[k].R_A = pc.num_primal();
        pc.kind.push_back(PrimalKind::PressureAverage);
        pc.average_patch.push_back(k);
    }

    for (int k = 0; k < K; ++k) {
        const auto& sp = d.spaces[k];
        auto& P = pc.patches[k];
        const int nv = sp.scalar_velocity_dim();
        Triplets t;
        int row = 0;
        for (int c = 0; c < 4; ++c) {
            const int v = mp.corner_vertex(k, c);
            for (int comp = 0; comp < 2; ++comp) {
                const auto it = corner_id.find({v, comp});
                if (it == corner_id.end()) continue;
                const int pos = sp.free_position(comp * nv + sp.corner_dof(c));
                IETIDP_REQUIRE(sp.is_gamma_position(pos), TopologyError,
                               "primal constraints: shared free corner is not an interface dof");
                t.emplace_back(row++, pos, 1.0);
                P.R_C.push_back(it->second);
            }
        }
        P.num_corner_rows = row;
        for (Side s : all_sides) {
            if (!mp.is_interface(k, s)) continue;
            const int n = mp.interface_index(k, s);
            const double sign = (mp.interfaces()[n].patch_a == k) ? 1.0 : -1.0;
            const Eigen::MatrixX2d w = detail::edge_flux_weights(sp, mp.patch(k), s);
            const auto dofs = sp.side_dofs(s);
            for (std::size_t e = 0; e < dofs.size(); ++e)
                for (int comp = 0; comp < 2; ++comp) {
                    const int pos = sp.free_position(comp * nv + dofs[e]);
                    if (pos < 0) continue;
                    t.emplace_back(row, pos, sign * w(e, comp));
                }
            P.R_C.push_back(flux_id[n]);
            ++row;
        }
        P.C_C.resize(row, sp.num_gamma());
        P.C_C.setFromTriplets(t.begin(), t.end());
        const auto& sys = d.systems[k];
        P.C_A = (sys.M_p * Eigen::VectorXd::Ones(sp.num_pressure())).transpose() / sys.area;
    }
    return pc;
}

/// Signed Boolean jump matrices, one per patch, over Gamma positions.
struct JumpOperator {
    std::vector<SpMat> B;  // num_multipliers x num_gamma(k)
    struct Row {
        int patch_a, pos_a, patch_b, pos_b;
    };
    std::vector<Row> rows;
    int num_multipliers() const { return static_cast<int>(rows.size()); }
};

inline JumpOperator build_jump_operator(const Discretization& d)
{
    const MultiPatch& mp = d.domain;
    std::vector<int> order(mp.interfaces().size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) {
        const auto& a = mp.interfaces()[x];
        const auto& b = mp.interfaces()[y];
        return std::tuple{std::min(a.patch_a, a.patch_b), std::max(a.patch_a, a.patch_b), static_cast<int>(a.side_a)} <
               std::tuple{std::min(b.patch_a, b.patch_b), std::max(b.patch_a, b.patch_b), static_cast<int>(b.side_a)};
    });
    JumpOperator J;
    for (int n : order) {
        Interface i = mp.interfaces()[n];
        if (i.patch_a > i.patch_b) std::swap(i.patch_a, i.patch_b), std::swap(i.side_a, i.side_b);
        const auto& A = d.spaces[i.patch_a];
        const auto& B = d.spaces[i.patch_b];
        const auto da = A.side_dofs(i.side_a), db = B.side_dofs(i.side_b);
        const int len = static_cast<int>(da.size());
        for (int t = 1; t + 1 < len; ++t)
            for (int c = 0; c < 2; ++c) {
                const int pa = A.free_position(c * A.scalar_velocity_dim() + da[t]);
                const int pb = B.free_position(c * B.scalar_velocity_dim() + db[i.reversed ? len - 1 - t : t]);
                IETIDP_REQUIRE(A.is_gamma_position(pa) && B.is_gamma_position(pb), TopologyError,
                               "jump operator: interface dof is not a free Gamma dof");
                J.rows.push_back({i.patch_a, pa, i.patch_b, pb});
            }
    }
    const int K = d.num_patches();
    std::vector<Triplets> t(K);
    for (std::size_t r = 0; r < J.rows.size(); ++r) {
        t[J.rows[r].patch_a].emplace_back(static_cast<int>(r), J.rows[r].pos_a, 1.0);
        t[J.rows[r].patch_b].emplace_back(static_cast<int>(r), J.rows[r].pos_b, -1.0);
    }
    J.B.resize(K);
    for (int k = 0; k < K; ++k) {
        J.B[k].resize(J.num_multipliers(), d.spaces[k].num_gamma());
        J.B[k].setFromTriplets(t[k].begin(), t[k].end());
    }
    return J;
}

}  // namespace ietidp
