#include <gtest/gtest.h>

#include <random>

#include "ietidp/domains.hpp"
#include "ietidp/norms.hpp"
#include "ietidp/pcg.hpp"
#include "ietidp/problems.hpp"

using namespace ietidp;

namespace {

struct Comparison {
    double velocity = 0.0, pressure = 0.0;
    int iterations = 0;
    double condition = 0.0;
};

Comparison compare_with_monolithic(const MultiPatch& mp, int p, int ell, const StokesProblem& prob, bool mean)
{
    const Discretization d = discretize(mp, p, p - 1, ell, prob);
    const auto mono = solve_global(d, assemble_global(d, mean));
    const IetiOperator op(d, {mean, 1});
    const PcgResult r = solve_pcg(op, op.rhs(), 1e-6, 500, 42);
    EXPECT_TRUE(r.report.converged);
    const auto ieti = op.recover(r.x);
    const auto diff = DiscreteNorms::difference(ieti, mono);
    return {DiscreteNorms::velocity_h1(d, diff) / DiscreteNorms::velocity_h1(d, mono),
            DiscreteNorms::pressure_l2(d, diff) / DiscreteNorms::pressure_l2(d, mono), r.report.iterations,
            r.report.condition};
}

}  // namespace

TEST(PrimalConstraints, FloatingPatchCounts)
{
    const Discretization d = discretize(grid(3, 3), 1, 0, 1, {});
    const PrimalConstraints pc = build_primal_constraints(d);
    const auto& mid = pc.patches[4];
    EXPECT_EQ(mid.num_continuity(), 12);
    EXPECT_EQ(mid.num_corner_rows, 8);
    EXPECT_EQ(mid.num_local_primal(), 13);
    EXPECT_NEAR(mid.C_A.sum(), 1.0, 1e-14);
}

TEST(PrimalConstraints, CornerAndFluxRows)
{
    const Discretization d = discretize(grid(2, 1, BoundaryTag::Neumann), 1, 0, 1, {});
    const PrimalConstraints pc = build_primal_constraints(d);
    const auto& P = pc.patches[0];
    const auto& sp = d.spaces[0];
    // corner rows are unit rows
    for (int r = 0; r < P.num_corner_rows; ++r) {
        const Eigen::RowVectorXd row = Eigen::MatrixXd(P.C_C).row(r);
        EXPECT_DOUBLE_EQ(row.sum(), 1.0);
        EXPECT_DOUBLE_EQ(row.cwiseAbs().maxCoeff(), 1.0);
    }
    // flux of u = (1, 0) through the east edge of [0,1]^2
    Eigen::VectorXd u = Eigen::VectorXd::Zero(sp.num_gamma());
    for (int pos = 0; pos < sp.num_gamma(); ++pos)
        if (sp.gamma_dofs()[pos] < sp.scalar_velocity_dim()) u[pos] = 1.0;
    const Eigen::VectorXd flux = P.C_C * u;
    EXPECT_NEAR(flux[P.num_continuity() - 1], 1.0, 1e-14);
}

TEST(LocalSystem, FloatingPatchNonsingular)
{
    const Discretization d = discretize(grid(3, 3), 1, 0, 1, {});
    const PrimalConstraints pc = build_primal_constraints(d);
    const AugmentedLocalSystem L = factorize_local(d.systems[4], pc.patches[4]);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1, 1);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(L.size());
    for (int i = 0; i < L.num_gamma() + L.num_interior(); ++i) rhs[i] = U(rng);
    const Eigen::VectorXd x = L.solve(rhs);
    EXPECT_LE((L.matrix() * x - rhs).norm(), 1e-10 * rhs.norm());
    // symmetric
    EXPECT_LT(Eigen::MatrixXd(L.matrix() - SpMat(L.matrix().transpose())).cwiseAbs().maxCoeff(), 1e-14);

    EXPECT_THROW(factorize_local(d.systems[4], pc.patches[4], {false, false}), SingularMatrix);
    EXPECT_THROW(factorize_local(d.systems[4], pc.patches[4], {false, true}), SingularMatrix);
}

TEST(PrimalBasis, StructureAndReproduction)
{
    const Discretization d = discretize(quarter_annulus(1, 2, 3, 3), 2, 1, 1, {});
    const IetiOperator op(d);
    for (int k = 0; k < d.num_patches(); ++k) {
        const auto& pb = op.primal_basis(k);
        const auto& pc = op.constraints().patches[k];
        const int a = pc.num_local_primal() - 1;
        EXPECT_LT(pb.gamma_block().col(a).cwiseAbs().maxCoeff(), 1e-10);
        if (pb.num_interior) {
            EXPECT_LT(pb.interior_block().col(a).cwiseAbs().maxCoeff(), 1e-10);
        }
        EXPECT_LT((pb.pressure_block().col(a).array() - 1.0).abs().maxCoeff(), 1e-10);
        // C_C Psi_GC = identity, C_A Psi_pC = 0
        const int nc = pc.num_continuity();
        const Eigen::MatrixXd CP = pc.C_C * pb.gamma_block().leftCols(nc);
        EXPECT_LT((CP - Eigen::MatrixXd::Identity(nc, nc)).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LT((pc.C_A * pb.pressure_block().leftCols(nc)).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(JumpOperator, RowsAndIdentity)
{
    const Discretization d = discretize(grid(3, 3), 2, 1, 1, {});
    const JumpOperator J = build_jump_operator(d);
    for (const auto& r : J.rows) EXPECT_LT(r.patch_a, r.patch_b);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int t = 0; t < 100; ++t) {
        std::vector<Eigen::VectorXd> v(d.num_patches());
        Eigen::VectorXd Bv = Eigen::VectorXd::Zero(J.num_multipliers());
        for (int k = 0; k < d.num_patches(); ++k) {
            v[k] = Eigen::VectorXd::NullaryExpr(d.spaces[k].num_gamma(), [&] { return U(rng); });
            Bv += J.B[k] * v[k];
        }
        // B D^-1 B^T B v = B v
        Eigen::VectorXd lhs = Eigen::VectorXd::Zero(J.num_multipliers());
        for (int k = 0; k < d.num_patches(); ++k) lhs += J.B[k] * (0.5 * (J.B[k].transpose() * Bv));
        EXPECT_LT((lhs - Bv).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(IetiOperator, FSymmetricPositiveSemidefinite)
{
    const Discretization d = discretize(grid(2, 2), 1, 0, 2, Manufactured::problem());
    const IetiOperator op(d);
    std::mt19937_64 rng(1);
    const int n = op.num_multipliers();
    double est = 0.0;
    for (int t = 0; t < 5; ++t) {
        const Eigen::VectorXd l = random_vector(n, 100 + t);
        est = std::max(est, op.apply_F(l).norm() / l.norm());
    }
    for (int t = 0; t < 100; ++t) {
        const Eigen::VectorXd a = random_vector(n, 2 * t), b = random_vector(n, 2 * t + 1);
        const Eigen::VectorXd Fa = op.apply_F(a), Fb = op.apply_F(b);
        EXPECT_GE(a.dot(Fa), -1e-10 * a.squaredNorm() * est);
        EXPECT_LT(std::abs(Fa.dot(b) - a.dot(Fb)), 1e-10 * std::abs(Fa.dot(b)) + 1e-14 * est * a.norm() * b.norm());
        const Eigen::VectorXd Ma = op.apply_preconditioner(a), Mb = op.apply_preconditioner(b);
        EXPECT_GT(a.dot(Ma), 0.0);
        EXPECT_LT(std::abs(Ma.dot(b) - a.dot(Mb)), 1e-10 * (std::abs(Ma.dot(b)) + 1e-12));
    }
}

TEST(IetiSolve, MatchesMonolithicOnTwoPatches)
{
    const Comparison c = compare_with_monolithic(grid(2, 1), 1, 2, Manufactured::problem(), true);
    EXPECT_LT(c.velocity, 1e-5);
    EXPECT_LT(c.pressure, 1e-5);
}

TEST(IetiSolve, MatchesMonolithicOnGrids)
{
    for (int m : {2, 3})
        for (int p : {1, 2}) {
            const Comparison c = compare_with_monolithic(grid(m, m), p, 2, Manufactured::problem(), true);
            EXPECT_LT(c.velocity, 1e-5) << m << " " << p;
            EXPECT_LT(c.pressure, 1e-5) << m << " " << p;
            std::cout << "grid " << m << " p " << p << " it " << c.iterations << " kappa " << c.condition << "\n";
        }
}

TEST(IetiSolve, ReproducibleWithSeed)
{
    const Discretization d = discretize(grid(2, 2), 1, 0, 1, Manufactured::problem());
    const IetiOperator op(d);
    const auto a = solve_pcg(op, op.rhs(), 1e-6, 100, 7);
    const auto b = solve_pcg(op, op.rhs(), 1e-6, 100, 7);
    EXPECT_EQ(a.report.residual_history, b.report.residual_history);
    EXPECT_EQ(a.x, b.x);
}
