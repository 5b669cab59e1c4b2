#pragma once

// Taylor-Hood patch spaces, patch-local Stokes matrices and the monolithic
// conforming system.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <array>
#include <functional>
#include <numeric>
#include <optional>
#include <vector>

#include "ietidp/bspline.hpp"
#include "ietidp/geometry.hpp"
#include "ietidp/parallel.hpp"

namespace ietidp {

using SpMat = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;
using VectorField = std::function<Eigen::Vector2d(const Eigen::Vector2d&)>;
using ScalarField = std::function<double(const Eigen::Vector2d&)>;

enum class SideRole { Interface, Dirichlet, Neumann };

/// Boundary situation of one patch: role of each side plus corner flags
/// (a corner is Dirichlet if its vertex touches any Dirichlet edge of the
/// domain, shared if the vertex belongs to another patch).
struct PatchBoundary {
    std::array<SideRole, 4> sides{SideRole::Dirichlet, SideRole::Dirichlet, SideRole::Dirichlet,
                                  SideRole::Dirichlet};
    std::array<bool, 4> corner_dirichlet{};
    std::array<bool, 4> corner_shared{};

    SideRole role(Side s) const { return sides[static_cast<int>(s)]; }

    /// Corner flags derived from the patch's own sides only.
    static PatchBoundary from_sides(std::array<SideRole, 4> sides)
    {
        PatchBoundary b;
        b.sides = sides;
        for (Side s : all_sides)
            for (int c : side_corners(s)) {
                if (b.role(s) == SideRole::Dirichlet) b.corner_dirichlet[c] = true;
                if (b.role(s) == SideRole::Interface) b.corner_shared[c] = true;
            }
        return b;
    }

    static PatchBoundary uniform(SideRole r) { return from_sides({r, r, r, r}); }

    static PatchBoundary of(const MultiPatch& mp, int k)
    {
        PatchBoundary b;
        for (Side s : all_sides) {
            SideRole r = SideRole::Interface;
            if (!mp.is_interface(k, s))
                r = mp.is_dirichlet(k, s) ? SideRole::Dirichlet : SideRole::Neumann;
            b.sides[static_cast<int>(s)] = r;
        }
        for (int c = 0; c < 4; ++c) {
            const int v = mp.corner_vertex(k, c);
            b.corner_dirichlet[c] = mp.vertex_on_dirichlet(v);
            b.corner_shared[c] = mp.vertices()[v].num_patches() > 1;
        }
        return b;
    }
};

/// Velocity degree p+1, pressure degree p, same breakpoints and smoothness.
/// Velocity dofs are stacked by component: c * nv + scalar index.
class TaylorHoodPatchSpace {
public:
    TaylorHoodPatchSpace() = default;

    TaylorHoodPatchSpace(TensorSpace velocity, TensorSpace pressure, PatchBoundary boundary)
        : velocity_(std::move(velocity)), pressure_(std::move(pressure)), boundary_(boundary)
    {
        const int nv = velocity_.dim();
        std::vector<char> dir(nv, 0), gam(nv, 0);
        for (Side s : all_sides) {
            const SideRole r = boundary_.role(s);
            for (int d : side_dofs(s)) {
                if (r == SideRole::Dirichlet) dir[d] = 1;
                if (r == SideRole::Interface) gam[d] = 1;
            }
        }
        for (int c = 0; c < 4; ++c) {
            if (boundary_.corner_dirichlet[c]) dir[corner_dof(c)] = 1;
            if (boundary_.corner_shared[c]) gam[corner_dof(c)] = 1;
        }
        free_pos_.assign(2 * nv, -1);
        for (int comp = 0; comp < 2; ++comp)
            for (int d = 0; d < nv; ++d) {
                const int full = comp * nv + d;
                if (dir[d]) dirichlet_.push_back(full);
                else if (gam[d]) gamma_.push_back(full);
                else interior_.push_back(full);
            }
        int pos = 0;
        for (int d : gamma_) free_pos_[d] = pos++;
        for (int d : interior_) free_pos_[d] = pos++;
    }

    const TensorSpace& velocity() const { return velocity_; }
    const TensorSpace& pressure() const { return pressure_; }
    const PatchBoundary& boundary() const { return boundary_; }

    int scalar_velocity_dim() const { return velocity_.dim(); }
    int num_velocity() const { return 2 * velocity_.dim(); }
    int num_pressure() const { return pressure_.dim(); }
    int num_gamma() const { return static_cast<int>(gamma_.size()); }
    int num_interior() const { return static_cast<int>(interior_.size()); }
    int num_free() const { return num_gamma() + num_interior(); }

    /// Full velocity indices of Gamma, interior and Dirichlet dofs.
    const std::vector<int>& gamma_dofs() const { return gamma_; }
    const std::vector<int>& interior_dofs() const { return interior_; }
    const std::vector<int>& dirichlet_dofs() const { return dirichlet_; }
    /// Position of a full velocity dof in the free [Gamma, I] ordering, -1 if eliminated.
    int free_position(int full) const { return free_pos_[full]; }
    bool is_gamma_position(int pos) const { return pos >= 0 && pos < num_gamma(); }

    /// Scalar velocity dofs with nonzero trace on a side, ordered by the edge parameter.
    std::vector<int> side_dofs(Side s) const { return side_dofs_of(velocity_, s); }

    int corner_dof(int c) const
    {
        return velocity_.index((c % 2) ? velocity_.nx() - 1 : 0, (c / 2) ? velocity_.ny() - 1 : 0);
    }

    static std::vector<int> side_dofs_of(const TensorSpace& t, Side s)
    {
        std::vector<int> out;
        switch (s) {
            case Side::West:
                for (int j = 0; j < t.ny(); ++j) out.push_back(t.index(0, j));
                break;
            case Side::East:
                for (int j = 0; j < t.ny(); ++j) out.push_back(t.index(t.nx() - 1, j));
                break;
            case Side::South:
                for (int i = 0; i < t.nx(); ++i) out.push_back(t.index(i, 0));
                break;
            case Side::North:
                for (int i = 0; i < t.nx(); ++i) out.push_back(t.index(i, t.ny() - 1));
                break;
        }
        return out;
    }

private:
    TensorSpace velocity_;
    TensorSpace pressure_;
    PatchBoundary boundary_;
    std::vector<int> gamma_, interior_, dirichlet_;
    std::vector<int> free_pos_;
};

/// Taylor-Hood pair on the geometry's breakpoints after `refinement` bisections.
inline TaylorHoodPatchSpace build_taylor_hood(const GeometryMap& map, int base_degree, int smoothness,
                                              int refinement, const PatchBoundary& boundary)
{
    IETIDP_REQUIRE(base_degree >= 1, InvalidArgument, "taylor-hood: degree must be >= 1");
    IETIDP_REQUIRE(smoothness >= 0 && smoothness <= base_degree - 1, InvalidArgument,
                   "taylor-hood: smoothness must satisfy 0 <= s <= p-1");
    IETIDP_REQUIRE(refinement >= 0, InvalidArgument, "taylor-hood: refinement must be >= 0");
    const Breakpoints bx = bisect(map.space().x().breakpoints(), refinement);
    const Breakpoints by = bisect(map.space().y().breakpoints(), refinement);
    TensorSpace vel(SplineSpace(bx, base_degree + 1, smoothness), SplineSpace(by, base_degree + 1, smoothness));
    TensorSpace pre(SplineSpace(bx, base_degree, smoothness), SplineSpace(by, base_degree, smoothness));
    return TaylorHoodPatchSpace(std::move(vel), std::move(pre), boundary);
}

struct AssemblyOptions {
    int extra_quadrature_points = 0;  // added to the default max-degree + 2 rule
};

/// Patch-local Stokes blocks. Full matrices act on all velocity dofs; the
/// split blocks act on free dofs ordered [Gamma, I] after lifting Dirichlet data.
struct PatchStokesSystem {
    SpMat K_full;  // vector Laplacian, 2nv x 2nv
    SpMat D_full;  // (div v, q), np x 2nv
    SpMat M_p;     // pressure mass
    SpMat M_v;     // scalar velocity mass, nv x nv
    Eigen::VectorXd f_full;
    Eigen::VectorXd lift;  // Dirichlet coefficients (zero on free dofs)

    SpMat K_GG, K_GI, K_IG, K_II;
    SpMat D_G, D_I;
    Eigen::VectorXd f_G, f_I, g_p;
    double area = 0.0;

    SpMat K_free() const { return stack(K_GG, K_GI, K_IG, K_II); }
    SpMat D_free() const
    {
        SpMat out(D_G.rows(), D_G.cols() + D_I.cols());
        Triplets t;
        append(t, D_G, 0, 0);
        append(t, D_I, 0, static_cast<int>(D_G.cols()));
        out.setFromTriplets(t.begin(), t.end());
        return out;
    }
    Eigen::VectorXd f_free() const
    {
        Eigen::VectorXd out(f_G.size() + f_I.size());
        out << f_G, f_I;
        return out;
    }

    static void append(Triplets& t, const SpMat& m, int r0, int c0)
    {
        for (int k = 0; k < m.outerSize(); ++k)
            for (SpMat::InnerIterator it(m, k); it; ++it)
                t.emplace_back(r0 + static_cast<int>(it.row()), c0 + static_cast<int>(it.col()), it.value());
    }

    static SpMat stack(const SpMat& a, const SpMat& b, const SpMat& c, const SpMat& d)
    {
        SpMat out(a.rows() + c.rows(), a.cols() + b.cols());
        Triplets t;
        append(t, a, 0, 0);
        append(t, b, 0, static_cast<int>(a.cols()));
        append(t, c, static_cast<int>(a.rows()), 0);
        append(t, d, static_cast<int>(a.rows()), static_cast<int>(a.cols()));
        out.setFromTriplets(t.begin(), t.end());
        return out;
    }
};

namespace detail {

struct ElementBasis {
    BasisEval x, y;
};

// rows: free positions; cols: full indices
inline SpMat selection(const TaylorHoodPatchSpace& sp, const std::vector<int>& full)
{
    SpMat P(static_cast<int>(full.size()), sp.num_velocity());
    Triplets t;
    for (std::size_t r = 0; r < full.size(); ++r) t.emplace_back(static_cast<int>(r), full[r], 1.0);
    P.setFromTriplets(t.begin(), t.end());
    return P;
}

/// L2 projection (length element weighted) of g onto the edge trace space with
/// fixed end coefficients; returns coefficients along the edge.
inline Eigen::MatrixX2d project_edge(const GeometryMap& map, Side s, const SplineSpace& edge, int points,
                                     const VectorField& g, const Eigen::Vector2d& start, const Eigen::Vector2d& end)
{
    const int n = edge.dim();
    Eigen::MatrixX2d c = Eigen::MatrixX2d::Zero(n, 2);
    c.row(0) = start;
    c.row(n - 1) = end;
    if (n <= 2) return c;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixX2d b = Eigen::MatrixX2d::Zero(n, 2);
    const GaussRule1D ref = gauss_legendre(points);
    const auto& z = edge.breakpoints();
    for (int e = 0; e < z.num_elements(); ++e)
        for (int q = 0; q < points; ++q) {
            const double t = z[e] + z.width(e) * ref.nodes[q];
            const Eigen::Vector2d xi = side_point(s, t);
            const MapPoint mp = map.eval(xi[0], xi[1]);
            const double w = ref.weights[q] * z.width(e) * side_tangent(mp, s).norm();
            const BasisEval be = edge.eval(t, 0);
            const Eigen::Vector2d gv = g(mp.x);
            for (int a = 0; a < be.ders.cols(); ++a) {
                b.row(be.first + a) += w * be.ders(0, a) * gv.transpose();
                for (int bb = 0; bb < be.ders.cols(); ++bb)
                    M(be.first + a, be.first + bb) += w * be.ders(0, a) * be.ders(0, bb);
            }
        }
    const Eigen::MatrixXd Mi = M.block(1, 1, n - 2, n - 2);
    const Eigen::MatrixX2d rhs =
        b.middleRows(1, n - 2) - M.block(1, 0, n - 2, 1) * c.row(0) - M.block(1, n - 1, n - 2, 1) * c.row(n - 1);
    c.middleRows(1, n - 2) = Mi.llt().solve(rhs);
    return c;
}

}  // namespace detail

/// Assembles K, D, M_p and loads by pull-back and Gauss quadrature, lifts
/// Dirichlet data and splits the free dofs into Gamma and interior blocks.
inline PatchStokesSystem assemble_patch(const TaylorHoodPatchSpace& space, const GeometryMap& map,
                                        const VectorField& rhs, const VectorField& dirichlet,
                                        const AssemblyOptions& opt = {})
{
    const TensorSpace& V = space.velocity();
    const TensorSpace& Q = space.pressure();
    const int nv = V.dim(), np = Q.dim();
    const int pv = V.x().degree(), pq = Q.x().degree();
    const int npts = std::max({pv, V.y().degree()}) + 2 + opt.extra_quadrature_points;
    const QuadratureRule rule = QuadratureRule::on(V.x().breakpoints(), V.y().breakpoints(), npts);

    Triplets tk, tdx, tdy, tm, tmv;
    Eigen::VectorXd f = Eigen::VectorXd::Zero(2 * nv);
    const int av = (pv + 1) * (V.y().degree() + 1), aq = (pq + 1) * (Q.y().degree() + 1);
    Eigen::VectorXd phi(av), psi(aq);
    Eigen::MatrixX2d grad(av, 2);
    std::vector<int> vidx(av), qidx(aq);

    const auto& ex_rules = rule.elements[0];
    const auto& ey_rules = rule.elements[1];
    for (std::size_t ey = 0; ey < ey_rules.size(); ++ey)
        for (std::size_t ex = 0; ex < ex_rules.size(); ++ex) {
            Eigen::MatrixXd Ke = Eigen::MatrixXd::Zero(av, av), Mve = Eigen::MatrixXd::Zero(av, av);
            Eigen::MatrixXd Dxe = Eigen::MatrixXd::Zero(aq, av), Dye = Eigen::MatrixXd::Zero(aq, av);
            Eigen::MatrixXd Me = Eigen::MatrixXd::Zero(aq, aq);
            Eigen::MatrixX2d fe = Eigen::MatrixX2d::Zero(av, 2);
            bool first = true;
            for (int qy = 0; qy < npts; ++qy)
                for (int qx = 0; qx < npts; ++qx) {
                    const double xi = ex_rules[ex].nodes[qx], eta = ey_rules[ey].nodes[qy];
                    const double wq = ex_rules[ex].weights[qx] * ey_rules[ey].weights[qy];
                    const MapPoint mp = map.eval(xi, eta);
                    if (!(mp.det > 0.0)) eval_map(map, {xi, eta});  // throws with location
                    const Eigen::Matrix2d JinvT = mp.jacobian.inverse().transpose();
                    const BasisEval bvx = V.x().eval(xi, 1), bvy = V.y().eval(eta, 1);
                    const BasisEval bqx = Q.x().eval(xi, 0), bqy = Q.y().eval(eta, 0);
                    int a = 0;
                    for (int j = 0; j < bvy.ders.cols(); ++j)
                        for (int i = 0; i < bvx.ders.cols(); ++i, ++a) {
                            phi[a] = bvx.ders(0, i) * bvy.ders(0, j);
                            const Eigen::Vector2d gref(bvx.ders(1, i) * bvy.ders(0, j),
                                                       bvx.ders(0, i) * bvy.ders(1, j));
                            grad.row(a) = (JinvT * gref).transpose();
                            if (first) vidx[a] = V.index(bvx.first + i, bvy.first + j);
                        }
                    a = 0;
                    for (int j = 0; j < bqy.ders.cols(); ++j)
                        for (int i = 0; i < bqx.ders.cols(); ++i, ++a) {
                            psi[a] = bqx.ders(0, i) * bqy.ders(0, j);
                            if (first) qidx[a] = Q.index(bqx.first + i, bqy.first + j);
                        }
                    first = false;
                    const double w = wq * mp.det;
                    Ke.noalias() += w * grad * grad.transpose();
                    Mve.noalias() += w * phi * phi.transpose();
                    Dxe.noalias() += w * psi * grad.col(0).transpose();
                    Dye.noalias() += w * psi * grad.col(1).transpose();
                    Me.noalias() += w * psi * psi.transpose();
                    if (rhs) fe.noalias() += w * phi * rhs(mp.x).transpose();
                }
            for (int a = 0; a < av; ++a) {
                for (int b = 0; b < av; ++b) {
                    tk.emplace_back(vidx[a], vidx[b], Ke(a, b));
                    tmv.emplace_back(vidx[a], vidx[b], Mve(a, b));
                }
                f[vidx[a]] += fe(a, 0);
                f[nv + vidx[a]] += fe(a, 1);
            }
            for (int q = 0; q < aq; ++q) {
                for (int b = 0; b < av; ++b) {
                    tdx.emplace_back(qidx[q], vidx[b], Dxe(q, b));
                    tdy.emplace_back(qidx[q], vidx[b], Dye(q, b));
                }
                for (int r = 0; r < aq; ++r) tm.emplace_back(qidx[q], qidx[r], Me(q, r));
            }
        }

    PatchStokesSystem sys;
    SpMat Ks(nv, nv);
    Ks.setFromTriplets(tk.begin(), tk.end());
    sys.M_v.resize(nv, nv);
    sys.M_v.setFromTriplets(tmv.begin(), tmv.end());
    {
        Triplets t;
        PatchStokesSystem::append(t, Ks, 0, 0);
        PatchStokesSystem::append(t, Ks, nv, nv);
        sys.K_full.resize(2 * nv, 2 * nv);
        sys.K_full.setFromTriplets(t.begin(), t.end());
        Triplets d(tdx);
        for (const auto& e : tdy) d.emplace_back(e.row(), e.col() + nv, e.value());
        sys.D_full.resize(np, 2 * nv);
        sys.D_full.setFromTriplets(d.begin(), d.end());
    }
    sys.M_p.resize(np, np);
    sys.M_p.setFromTriplets(tm.begin(), tm.end());
    sys.f_full = f;
    sys.area = Eigen::VectorXd::Ones(np).dot(sys.M_p * Eigen::VectorXd::Ones(np));

    // Dirichlet lift: corners interpolated, edge interiors projected
    sys.lift = Eigen::VectorXd::Zero(2 * nv);
    if (dirichlet) {
        const PatchBoundary& b = space.boundary();
        std::array<Eigen::Vector2d, 4> corner_val;
        for (int c = 0; c < 4; ++c) {
            corner_val[c] = b.corner_dirichlet[c] ? dirichlet(map.corner(c)) : Eigen::Vector2d::Zero();
            if (b.corner_dirichlet[c]) {
                sys.lift[space.corner_dof(c)] = corner_val[c][0];
                sys.lift[nv + space.corner_dof(c)] = corner_val[c][1];
            }
        }
        for (Side s : all_sides) {
            if (b.role(s) != SideRole::Dirichlet) continue;
            const auto cs = side_corners(s);
            const Eigen::MatrixX2d c = detail::project_edge(map, s, V.dir(tangent_dir(s)), npts, dirichlet,
                                                            corner_val[cs[0]], corner_val[cs[1]]);
            const auto dofs = space.side_dofs(s);
            for (std::size_t t = 0; t < dofs.size(); ++t) {
                sys.lift[dofs[t]] = c(t, 0);
                sys.lift[nv + dofs[t]] = c(t, 1);
            }
        }
    }

    const Eigen::VectorXd f_eff = sys.f_full - sys.K_full * sys.lift;
    sys.g_p = -(sys.D_full * sys.lift);
    const SpMat PG = detail::selection(space, space.gamma_dofs());
    const SpMat PI = detail::selection(space, space.interior_dofs());
    const SpMat PGt = PG.transpose(), PIt = PI.transpose();
    sys.K_GG = PG * sys.K_full * PGt;
    sys.K_GI = PG * sys.K_full * PIt;
    sys.K_IG = PI * sys.K_full * PGt;
    sys.K_II = PI * sys.K_full * PIt;
    sys.D_G = sys.D_full * PGt;
    sys.D_I = sys.D_full * PIt;
    sys.f_G = PG * f_eff;
    sys.f_I = PI * f_eff;
    return sys;
}

/// Data of a Stokes problem; null callables mean zero.
struct StokesProblem {
    VectorField rhs;
    VectorField dirichlet;
};

/// Per-patch spaces and assembled systems of a multi-patch domain.
struct Discretization {
    MultiPatch domain;
    int degree = 1, smoothness = 0, refinement = 0;
    std::vector<TaylorHoodPatchSpace> spaces;
    std::vector<PatchStokesSystem> systems;

    int num_patches() const { return domain.num_patches(); }
};

inline Discretization discretize(const MultiPatch& mp, int degree, int smoothness, int refinement,
                                 const StokesProblem& problem, const AssemblyOptions& opt = {}, int threads = 1)
{
    Discretization d;
    d.domain = mp;
    d.degree = degree;
    d.smoothness = smoothness;
    d.refinement = refinement;
    for (int k = 0; k < mp.num_patches(); ++k)
        d.spaces.push_back(build_taylor_hood(mp.patch(k), degree, smoothness, refinement, PatchBoundary::of(mp, k)));
    {
        std::vector<TensorSpace> vs, ps;
        for (const auto& s : d.spaces) vs.push_back(s.velocity()), ps.push_back(s.pressure());
        const double tol = mp.tolerance() * 10.0 + 1e-12;
        const MatchingReport rv = check_interface_matching(mp, vs, tol);
        IETIDP_REQUIRE(rv.ok, TopologyError, rv.message);
        const MatchingReport rp = check_interface_matching(mp, ps, tol);
        IETIDP_REQUIRE(rp.ok, TopologyError, rp.message);
    }
    d.systems.resize(mp.num_patches());
    parallel_for(mp.num_patches(), threads, [&](int k) {
        d.systems[k] = assemble_patch(d.spaces[k], mp.patch(k), problem.rhs, problem.dirichlet, opt);
    });
    return d;
}

/// Conforming velocity numbering: matching interface dofs (and corner dofs at
/// shared vertices) receive one global index.
struct GlobalNumbering {
    std::vector<std::vector<int>> free_to_global;  // per patch, per free position
    int num_velocity = 0;
};

inline GlobalNumbering number_velocity_dofs(const Discretization& d)
{
    const int K = d.num_patches();
    std::vector<int> offset(K + 1, 0);
    for (int k = 0; k < K; ++k) offset[k + 1] = offset[k] + d.spaces[k].num_velocity();
    std::vector<int> parent(offset[K]);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    auto unite = [&](int a, int b) {
        a = find(a), b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    };
    for (const Interface& i : d.domain.interfaces()) {
        const auto& A = d.spaces[i.patch_a];
        const auto& B = d.spaces[i.patch_b];
        const auto da = A.side_dofs(i.side_a), db = B.side_dofs(i.side_b);
        const int n = static_cast<int>(da.size());
        for (int t = 0; t < n; ++t)
            for (int c = 0; c < 2; ++c)
                unite(offset[i.patch_a] + c * A.scalar_velocity_dim() + da[t],
                      offset[i.patch_b] + c * B.scalar_velocity_dim() + db[i.reversed ? n - 1 - t : t]);
    }
    for (const Vertex& v : d.domain.vertices())
        for (std::size_t m = 1; m < v.incident.size(); ++m)
            for (int c = 0; c < 2; ++c) {
                const auto [k0, c0] = v.incident[0];
                const auto [k1, c1] = v.incident[m];
                unite(offset[k0] + c * d.spaces[k0].scalar_velocity_dim() + d.spaces[k0].corner_dof(c0),
                      offset[k1] + c * d.spaces[k1].scalar_velocity_dim() + d.spaces[k1].corner_dof(c1));
            }
    GlobalNumbering g;
    std::vector<int> root_id(offset[K], -1);
    g.free_to_global.resize(K);
    for (int k = 0; k < K; ++k) {
        const auto& sp = d.spaces[k];
        g.free_to_global[k].assign(sp.num_free(), -1);
        for (int full = 0; full < sp.num_velocity(); ++full) {
            const int pos = sp.free_position(full);
            if (pos < 0) continue;
            const int r = find(offset[k] + full);
            if (root_id[r] < 0) root_id[r] = g.num_velocity++;
            g.free_to_global[k][pos] = root_id[r];
        }
    }
    // a unified dof must be free on every patch that carries it
    for (int k = 0; k < K; ++k) {
        const auto& sp = d.spaces[k];
        for (int full : sp.dirichlet_dofs())
            IETIDP_REQUIRE(root_id[find(offset[k] + full)] < 0, TopologyError,
                           "global numbering: dof is Dirichlet on one patch and free on another");
    }
    return g;
}

/// Global saddle-point system [K D^T (0); D 0 m; (0) m^T 0] with optional mean row.
struct GlobalCoupledSystem {
    GlobalNumbering numbering;
    std::vector<int> pressure_offset;  // K + 1 entries
    int num_velocity = 0, num_pressure = 0;
    bool mean_constraint = false;
    SpMat K, D, M_p;
    Eigen::VectorXd f, g;
    Eigen::VectorXd mean_row;  // integral of each pressure dof
    SpMat matrix;
    Eigen::VectorXd rhs;

    int size() const { return static_cast<int>(matrix.rows()); }
};

inline GlobalCoupledSystem assemble_global(const Discretization& d, bool fix_pressure_mean)
{
    GlobalCoupledSystem gs;
    gs.numbering = number_velocity_dofs(d);
    const int K = d.num_patches();
    gs.num_velocity = gs.numbering.num_velocity;
    gs.pressure_offset.assign(K + 1, 0);
    for (int k = 0; k < K; ++k) gs.pressure_offset[k + 1] = gs.pressure_offset[k] + d.spaces[k].num_pressure();
    gs.num_pressure = gs.pressure_offset[K];
    gs.mean_constraint = fix_pressure_mean;

    Triplets tk, td, tm;
    gs.f = Eigen::VectorXd::Zero(gs.num_velocity);
    gs.g = Eigen::VectorXd::Zero(gs.num_pressure);
    gs.mean_row = Eigen::VectorXd::Zero(gs.num_pressure);
    for (int k = 0; k < K; ++k) {
        const auto& sys = d.systems[k];
        const auto& map = gs.numbering.free_to_global[k];
        const SpMat Kf = sys.K_free(), Df = sys.D_free();
        const Eigen::VectorXd ff = sys.f_free();
        const int po = gs.pressure_offset[k];
        for (int c = 0; c < Kf.outerSize(); ++c)
            for (SpMat::InnerIterator it(Kf, c); it; ++it) tk.emplace_back(map[it.row()], map[it.col()], it.value());
        for (int c = 0; c < Df.outerSize(); ++c)
            for (SpMat::InnerIterator it(Df, c); it; ++it) td.emplace_back(po + it.row(), map[it.col()], it.value());
        for (int c = 0; c < sys.M_p.outerSize(); ++c)
            for (SpMat::InnerIterator it(sys.M_p, c); it; ++it)
                tm.emplace_back(po + it.row(), po + it.col(), it.value());
        for (int i = 0; i < ff.size(); ++i) gs.f[map[i]] += ff[i];
        gs.g.segment(po, sys.g_p.size()) = sys.g_p;
        gs.mean_row.segment(po, sys.g_p.size()) = sys.M_p * Eigen::VectorXd::Ones(sys.g_p.size());
    }
    gs.K.resize(gs.num_velocity, gs.num_velocity);
    gs.K.setFromTriplets(tk.begin(), tk.end());
    gs.D.resize(gs.num_pressure, gs.num_velocity);
    gs.D.setFromTriplets(td.begin(), td.end());
    gs.M_p.resize(gs.num_pressure, gs.num_pressure);
    gs.M_p.setFromTriplets(tm.begin(), tm.end());

    const int nu = gs.num_velocity, np = gs.num_pressure, n = nu + np + (fix_pressure_mean ? 1 : 0);
    Triplets t;
    PatchStokesSystem::append(t, gs.K, 0, 0);
    PatchStokesSystem::append(t, gs.D, nu, 0);
    {
        const SpMat Dt = gs.D.transpose();
        PatchStokesSystem::append(t, Dt, 0, nu);
    }
    if (fix_pressure_mean)
        for (int i = 0; i < np; ++i) {
            t.emplace_back(nu + np, nu + i, gs.mean_row[i]);
            t.emplace_back(nu + i, nu + np, gs.mean_row[i]);
        }
    gs.matrix.resize(n, n);
    gs.matrix.setFromTriplets(t.begin(), t.end());
    gs.rhs = Eigen::VectorXd::Zero(n);
    gs.rhs.head(nu) = gs.f;
    gs.rhs.segment(nu, np) = gs.g;
    return gs;
}

/// Patch-local coefficients of a discrete solution (velocity includes the lift).
struct PatchField {
    Eigen::VectorXd u;  // full velocity coefficients, components stacked
    Eigen::VectorXd p;
};

/// Maps a global (free velocity, pressure) vector to per-patch fields.
inline std::vector<PatchField> scatter_global(const Discretization& d, const GlobalCoupledSystem& gs,
                                              const Eigen::VectorXd& x)
{
    std::vector<PatchField> out(d.num_patches());
    for (int k = 0; k < d.num_patches(); ++k) {
        const auto& sp = d.spaces[k];
        out[k].u = d.systems[k].lift;
        for (int full = 0; full < sp.num_velocity(); ++full) {
            const int pos = sp.free_position(full);
            if (pos >= 0) out[k].u[full] = x[gs.numbering.free_to_global[k][pos]];
        }
        out[k].p = x.segment(gs.num_velocity + gs.pressure_offset[k], sp.num_pressure());
    }
    return out;
}

/// Direct sparse LU solve of the global system.
inline std::vector<PatchField> solve_global(const Discretization& d, const GlobalCoupledSystem& gs)
{
    Eigen::SparseLU<SpMat> lu;
    SpMat A = gs.matrix;
    A.makeCompressed();
    lu.compute(A);
    IETIDP_REQUIRE(lu.info() == Eigen::Success, SingularMatrix, "global system: factorization failed");
    const Eigen::VectorXd x = lu.solve(gs.rhs);
    IETIDP_REQUIRE(x.allFinite(), SingularMatrix, "global system: solve produced non-finite values");
    return scatter_global(d, gs, x);
}

/// Writes a sparse matrix as "row col value" lines (1-based) preceded by "rows cols nnz".
template <class Stream>
void write_triplets(Stream& out, const SpMat& m)
{
    out << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it)
            out << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
}

}  // namespace ietidp
