#include <gtest/gtest.h>

#include <map>
#include <random>

#include "ietidp/assembly.hpp"
#include "ietidp/domains.hpp"
#include "ietidp/norms.hpp"
#include "ietidp/problems.hpp"

using namespace ietidp;

namespace {

double max_abs(const SpMat& m)
{
    double v = 0.0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it) v = std::max(v, std::abs(it.value()));
    return v;
}

PatchStokesSystem floating_system(const GeometryMap& g, int p, int ell)
{
    const auto sp = build_taylor_hood(g, p, p - 1, ell, PatchBoundary::uniform(SideRole::Interface));
    return assemble_patch(sp, g, nullptr, nullptr);
}

}  // namespace

TEST(TaylorHood, Dimensions)
{
    const GeometryMap sq = GeometryMap::rectangle(0, 0, 1, 1);
    const auto neu = build_taylor_hood(sq, 1, 0, 1, PatchBoundary::uniform(SideRole::Neumann));
    EXPECT_EQ(neu.num_pressure(), 9);
    EXPECT_EQ(neu.scalar_velocity_dim(), 25);
    EXPECT_EQ(neu.velocity().x().degree(), 2);
    EXPECT_EQ(neu.pressure().x().degree(), 1);

    const auto dir = build_taylor_hood(sq, 1, 0, 1, PatchBoundary::uniform(SideRole::Dirichlet));
    EXPECT_EQ(dir.num_free(), 2 * 9);
    EXPECT_EQ(dir.num_gamma(), 0);

    const auto flo = build_taylor_hood(sq, 1, 0, 1, PatchBoundary::uniform(SideRole::Interface));
    EXPECT_EQ(flo.num_gamma(), 2 * (25 - 9));
    EXPECT_EQ(flo.num_interior(), 2 * 9);

    EXPECT_THROW(build_taylor_hood(sq, 2, 2, 0, PatchBoundary{}), InvalidArgument);
}

TEST(TaylorHood, SplitIsPartitionOfFreeDofs)
{
    const MultiPatch mp = grid(3, 3);
    for (int k = 0; k < 9; ++k) {
        const auto sp = build_taylor_hood(mp.patch(k), 2, 1, 1, PatchBoundary::of(mp, k));
        std::vector<int> seen(sp.num_velocity(), 0);
        for (int d : sp.gamma_dofs()) ++seen[d];
        for (int d : sp.interior_dofs()) ++seen[d];
        for (int d : sp.dirichlet_dofs()) ++seen[d];
        for (int s : seen) EXPECT_EQ(s, 1);
        for (int pos = 0; pos < sp.num_free(); ++pos) EXPECT_EQ(sp.is_gamma_position(pos), pos < sp.num_gamma());
    }
}

TEST(AssemblePatch, AlgebraicProperties)
{
    for (const GeometryMap& g : {GeometryMap::rectangle(0, 0, 1, 1), quarter_annulus(1, 2, 8, 8).patch(9),
                                 GeometryMap::bilinear({0, 0}, {1.5, 0.2}, {0.1, 1}, {1.2, 1.4})}) {
        for (int p = 1; p <= 3; ++p) {
            const PatchStokesSystem s = floating_system(g, p, 1);
            const double kmax = max_abs(s.K_full);
            // constant velocities in the kernel of K
            const int nv = static_cast<int>(s.K_full.rows()) / 2;
            for (int c = 0; c < 2; ++c) {
                Eigen::VectorXd one = Eigen::VectorXd::Zero(2 * nv);
                one.segment(c * nv, nv).setOnes();
                EXPECT_LT((s.K_full * one).cwiseAbs().maxCoeff(), 1e-12 * kmax);
            }
            // interior velocities have zero mean divergence
            const Eigen::VectorXd dti = s.D_I.transpose() * Eigen::VectorXd::Ones(s.D_I.rows());
            EXPECT_LT(dti.cwiseAbs().maxCoeff(), 1e-12) << "p=" << p;
            // symmetry
            EXPECT_LE(max_abs(SpMat(s.K_full - SpMat(s.K_full.transpose()))), 1e-12 * kmax);
            EXPECT_LE(max_abs(SpMat(s.M_p - SpMat(s.M_p.transpose()))), 1e-12 * max_abs(s.M_p));
            // mass row sums integrate one
            EXPECT_NEAR(s.area, patch_area(g), 1e-10);
        }
    }
}

TEST(AssemblePatch, MassIsPositiveDefinite)
{
    const PatchStokesSystem s = floating_system(GeometryMap::rectangle(0, 0, 2, 1), 2, 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(s.M_p));
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
}

TEST(AssemblePatch, Boundedness)
{
    const GeometryMap g = GeometryMap::bilinear({0, 0}, {1.5, 0.2}, {0.1, 1}, {1.2, 1.4});
    const PatchStokesSystem s = floating_system(g, 2, 1);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int t = 0; t < 100; ++t) {
        Eigen::VectorXd u = Eigen::VectorXd::NullaryExpr(s.K_full.rows(), [&] { return U(rng); });
        Eigen::VectorXd p = Eigen::VectorXd::NullaryExpr(s.M_p.rows(), [&] { return U(rng); });
        const double lhs = std::abs(p.dot(s.D_full * u));
        const double rhs = std::sqrt(2.0) * std::sqrt(u.dot(s.K_full * u)) * std::sqrt(p.dot(s.M_p * p));
        EXPECT_LE(lhs, rhs + 1e-10);
    }
}

TEST(AssemblePatch, DirichletLiftReproducesSplineData)
{
    // data from the discrete space is reproduced exactly by the lift
    const GeometryMap g = GeometryMap::rectangle(0, 0, 1, 1);
    const auto sp = build_taylor_hood(g, 2, 1, 1, PatchBoundary::uniform(SideRole::Dirichlet));
    const VectorField data = [](const Eigen::Vector2d& x) {
        return Eigen::Vector2d(x[0] * x[0] - x[1], 2.0 * x[0] * x[1] * x[1]);
    };
    const PatchStokesSystem s = assemble_patch(sp, g, nullptr, data);
    PatchField f{s.lift, Eigen::VectorXd::Zero(sp.num_pressure())};
    for (double t : {0.0, 0.13, 0.5, 0.77, 1.0})
        for (Side side : all_sides) {
            const Eigen::Vector2d xi = side_point(side, t);
            const FieldValue v = eval_field(sp, g, f, xi[0], xi[1]);
            EXPECT_LT((v.u - data(v.x)).norm(), 1e-12);
        }
}

TEST(AssembleGlobal, SharedDofs)
{
    const MultiPatch two = grid(2, 1, BoundaryTag::Neumann);
    const Discretization d = discretize(two, 1, 0, 0, {});
    const GlobalCoupledSystem gs = assemble_global(d, false);
    EXPECT_EQ(gs.num_velocity, 2 * (2 * 9 - 3));
    EXPECT_EQ(gs.num_pressure, 2 * 4);
}

TEST(AssembleGlobal, ZeroDataGivesZeroSolution)
{
    const Discretization d = discretize(grid(2, 2), 1, 0, 1, {});
    const auto sol = solve_global(d, assemble_global(d, true));
    for (const auto& f : sol) {
        EXPECT_LT(f.u.cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_LT(f.p.cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(AssembleGlobal, MatchesSinglePatchWithC0Breakpoints)
{
    // grid(2,2) at smoothness 0 spans the same velocity space as one [0,2]^2
    // patch with a C0 line at the middle
    const int p = 2;
    const Discretization d = discretize(grid(2, 2, BoundaryTag::Neumann), p, 0, 1, {});
    const GlobalCoupledSystem gs = assemble_global(d, false);

    const Breakpoints z({0.0, 0.25, 0.5, 0.75, 1.0});
    const GeometryMap big = GeometryMap::rectangle(0, 0, 2, 2);
    const TensorSpace V(SplineSpace(z, p + 1, 0), SplineSpace(z, p + 1, 0));
    const TensorSpace Q(SplineSpace(z, p, 0), SplineSpace(z, p, 0));
    const TaylorHoodPatchSpace sp(V, Q, PatchBoundary::uniform(SideRole::Neumann));
    const PatchStokesSystem s = assemble_patch(sp, big, nullptr, nullptr);

    // match global dofs to big-patch dofs through the Greville point images
    auto key = [](const Eigen::Vector2d& x) { return std::pair{std::lround(x[0] * 1e6), std::lround(x[1] * 1e6)}; };
    std::map<std::pair<long, long>, int> big_index;
    const auto gx = V.x().greville(), gy = V.y().greville();
    for (int j = 0; j < V.ny(); ++j)
        for (int i = 0; i < V.nx(); ++i) big_index[key(big.point(gx[i], gy[j]))] = V.index(i, j);
    const int nv = V.dim();
    std::vector<int> g2b(gs.num_velocity, -1);
    for (int k = 0; k < 4; ++k) {
        const auto& ps = d.spaces[k];
        const auto px = ps.velocity().x().greville(), py = ps.velocity().y().greville();
        for (int full = 0; full < ps.num_velocity(); ++full) {
            const int c = full / ps.scalar_velocity_dim(), sidx = full % ps.scalar_velocity_dim();
            const int i = sidx % ps.velocity().nx(), j = sidx / ps.velocity().nx();
            const auto it = big_index.find(key(d.domain.patch(k).point(px[i], py[j])));
            ASSERT_NE(it, big_index.end());
            g2b[gs.numbering.free_to_global[k][ps.free_position(full)]] = c * nv + it->second;
        }
    }
    ASSERT_EQ(gs.num_velocity, 2 * nv);
    const Eigen::MatrixXd Kg(gs.K), Kb(s.K_full);
    double err = 0.0;
    for (int a = 0; a < gs.num_velocity; ++a)
        for (int b = 0; b < gs.num_velocity; ++b) err = std::max(err, std::abs(Kg(a, b) - Kb(g2b[a], g2b[b])));
    EXPECT_LT(err, 1e-12 * Kb.cwiseAbs().maxCoeff());
}

TEST(AssembleGlobal, ManufacturedConvergence)
{
    for (int p : {1, 2}) {
        std::vector<double> h1, l2;
        for (int ell = 1; ell <= 3; ++ell) {
            const Discretization d = discretize(grid(1, 1), p, p - 1, ell, Manufactured::problem());
            const auto sol = solve_global(d, assemble_global(d, true));
            const ErrorNorms e = compute_errors(d, sol, Manufactured::exact());
            h1.push_back(e.velocity_h1_semi);
            l2.push_back(e.pressure_l2);
        }
        const double rate = std::log2(h1[1] / h1[2]);
        EXPECT_GT(rate, p + 1 - 0.4) << "p=" << p;
        EXPECT_GT(std::log2(l2[1] / l2[2]), p + 1 - 0.5) << "p=" << p;
    }
}

TEST(AssembleGlobal, MultiPatchMatchesConformingRate)
{
    std::vector<double> h1;
    for (int ell = 1; ell <= 3; ++ell) {
        const Discretization d = discretize(grid(2, 2), 1, 0, ell, Manufactured::problem());
        const auto sol = solve_global(d, assemble_global(d, true));
        h1.push_back(compute_errors(d, sol, Manufactured::exact()).velocity_h1_semi);
    }
    EXPECT_GT(std::log2(h1[1] / h1[2]), 1.6);
}
