#pragma once

// Augmented patch-local saddle-point systems and their sparse factorizations.

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <memory>
#include <random>

#include "ietidp/constraints.hpp"

namespace ietidp {

struct LocalConstraintSelection {
    bool continuity = true;  // corner values and edge fluxes
    bool average = true;     // patch pressure average
};

/// Block order [u_Gamma, u_I, p, mu_A, mu_C]:
///   [K_GG K_GI D_G^T  0    C_C^T]
///   [K_IG K_II D_I^T  0    0    ]
///   [D_G  D_I  0      C_A^T 0   ]
///   [0    0    C_A    0    0    ]
///   [C_C  0    0      0    0    ]
class AugmentedLocalSystem {
public:
    AugmentedLocalSystem(const PatchStokesSystem& sys, const PatchConstraints& pc,
                         LocalConstraintSelection sel = {})
        : nG_(static_cast<int>(sys.K_GG.rows())),
          nI_(static_cast<int>(sys.K_II.rows())),
          np_(static_cast<int>(sys.M_p.rows())),
          nA_(sel.average ? 1 : 0),
          nC_(sel.continuity ? pc.num_continuity() : 0)
    {
        Triplets t;
        auto put = [&](const SpMat& m, int r0, int c0, bool mirror) {
            for (int k = 0; k < m.outerSize(); ++k)
                for (SpMat::InnerIterator it(m, k); it; ++it) {
                    t.emplace_back(r0 + it.row(), c0 + it.col(), it.value());
                    if (mirror) t.emplace_back(c0 + it.col(), r0 + it.row(), it.value());
                }
        };
        const int oI = nG_, op = nG_ + nI_, oA = op + np_, oC = oA + nA_;
        put(sys.K_GG, 0, 0, false);
        put(sys.K_GI, 0, oI, false);
        put(sys.K_IG, oI, 0, false);
        put(sys.K_II, oI, oI, false);
        put(sys.D_G, op, 0, true);
        put(sys.D_I, op, oI, true);
        if (nA_)
            for (int j = 0; j < np_; ++j) {
                t.emplace_back(oA, op + j, pc.C_A[j]);
                t.emplace_back(op + j, oA, pc.C_A[j]);
            }
        if (nC_) put(pc.C_C, oC, 0, true);
        matrix_.resize(size(), size());
        matrix_.setFromTriplets(t.begin(), t.end());
        matrix_.makeCompressed();

        lu_ = std::make_shared<Eigen::SparseLU<SpMat>>();
        lu_->compute(matrix_);
        if (lu_->info() != Eigen::Success) throw SingularMatrix(singular_message(sel));
        // a near-zero pivot shows up as a huge solution for a unit random rhs
        std::mt19937_64 rng(1234);
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        const Eigen::VectorXd b = Eigen::VectorXd::NullaryExpr(size(), [&] { return U(rng); });
        const Eigen::VectorXd x = lu_->solve(b);
        const double scale = matrix_norm_inf() * x.lpNorm<Eigen::Infinity>() / b.lpNorm<Eigen::Infinity>();
        if (!x.allFinite() || scale > 1e13 || (matrix_ * x - b).norm() > 1e-8 * b.norm())
            throw SingularMatrix(singular_message(sel));
    }

    int size() const { return nG_ + nI_ + np_ + nA_ + nC_; }
    int num_gamma() const { return nG_; }
    int num_interior() const { return nI_; }
    int num_pressure() const { return np_; }
    int num_average() const { return nA_; }
    int num_continuity() const { return nC_; }
    int offset_pressure() const { return nG_ + nI_; }
    int offset_average() const { return nG_ + nI_ + np_; }
    int offset_continuity() const { return nG_ + nI_ + np_ + nA_; }
    /// Size of the unaugmented (velocity, pressure) part.
    int num_primary() const { return nG_ + nI_ + np_; }

    const SpMat& matrix() const { return matrix_; }

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return lu_->solve(rhs); }
    Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const { return lu_->solve(rhs); }

private:
    double matrix_norm_inf() const
    {
        Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(size());
        for (int k = 0; k < matrix_.outerSize(); ++k)
            for (SpMat::InnerIterator it(matrix_, k); it; ++it) rowsum[it.row()] += std::abs(it.value());
        return rowsum.maxCoeff();
    }

    std::string singular_message(LocalConstraintSelection sel) const
    {
        std::string m = "local augmented system is singular";
        if (!sel.continuity && !sel.average) m += " (no primal constraints: velocity constants and pressure mean unfixed)";
        else if (!sel.continuity) m += " (continuity constraints missing: velocity kernel unfixed)";
        else if (!sel.average) m += " (average constraint missing: pressure/divergence mean unfixed)";
        else m += " (continuity or average constraints rank-deficient)";
        return m;
    }

    int nG_, nI_, np_, nA_, nC_;
    SpMat matrix_;
    std::shared_ptr<Eigen::SparseLU<SpMat>> lu_;
};

inline AugmentedLocalSystem factorize_local(const PatchStokesSystem& sys, const PatchConstraints& pc,
                                            LocalConstraintSelection sel = {})
{
    return AugmentedLocalSystem(sys, pc, sel);
}

/// Unaugmented patch matrix [K D^T; D 0] on the free dofs.
inline SpMat patch_saddle_matrix(const PatchStokesSystem& sys)
{
    const SpMat Kf = sys.K_free(), Df = sys.D_free();
    const int nu = static_cast<int>(Kf.rows()), np = static_cast<int>(Df.rows());
    Triplets t;
    PatchStokesSystem::append(t, Kf, 0, 0);
    PatchStokesSystem::append(t, Df, nu, 0);
    const SpMat Dt = Df.transpose();
    PatchStokesSystem::append(t, Dt, 0, nu);
    SpMat A(nu + np, nu + np);
    A.setFromTriplets(t.begin(), t.end());
    return A;
}

/// Energy-orthogonal primal basis: columns of (Psi; Phi) solve
/// A_bar (Psi; Phi) = (0; 0; 0; R_A; R_C) for each local primal dof.
struct PrimalBasis {
    Eigen::MatrixXd Psi;  // (nG + nI + np) x num_local_primal; continuity columns then the average
    Eigen::MatrixXd Phi;  // (1 + nC) x num_local_primal
    int num_gamma = 0, num_interior = 0, num_pressure = 0;

    auto gamma_block() const { return Psi.topRows(num_gamma); }
    auto interior_block() const { return Psi.middleRows(num_gamma, num_interior); }
    auto pressure_block() const { return Psi.bottomRows(num_pressure); }
};

inline PrimalBasis build_primal_basis(const AugmentedLocalSystem& local, const PatchConstraints& pc)
{
    IETIDP_REQUIRE(local.num_average() == 1 && local.num_continuity() == pc.num_continuity(), InvalidArgument,
                   "primal basis: local system must carry all primal constraints");
    const int m = pc.num_local_primal();
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(local.size(), m);
    for (int j = 0; j < pc.num_continuity(); ++j) rhs(local.offset_continuity() + j, j) = 1.0;
    rhs(local.offset_average(), m - 1) = 1.0;
    const Eigen::MatrixXd X = local.solve(rhs);
    PrimalBasis pb;
    pb.num_gamma = local.num_gamma();
    pb.num_interior = local.num_interior();
    pb.num_pressure = local.num_pressure();
    pb.Psi = X.topRows(local.num_primary());
    pb.Phi = X.bottomRows(local.size() - local.num_primary());
    return pb;
}

}  // namespace ietidp
