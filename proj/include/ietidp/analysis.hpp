#pragma once

// Pressure Schur complement spectra, local inf-sup constants and the spectral
// equivalence of the Stokes and Poisson skeleton Schur complements.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <chrono>
#include <string>
#include <vector>

#include "ietidp/constraints.hpp"
#include "ietidp/pcg.hpp"

namespace ietidp {

enum class EigenMethod { Auto, Dense, Iterative };

inline const char* method_name(EigenMethod m)
{
    switch (m) {
    case EigenMethod::Dense: return "dense";
    case EigenMethod::Iterative: return "iterative";
    default: return "auto";
    }
}

/// Extreme eigenvalues of (D K^-1 D^T, M_p) on pressures M-orthogonal to the constants.
struct SchurSpectrum {
    double lambda_min = 0.0, lambda_max = 0.0;
    double kappa = 1.0;  // lambda_max / lambda_min
    double beta = 0.0;   // sqrt(lambda_min)
    double delta = 0.0;  // sqrt(lambda_max)
    int dofs = 0;
    EigenMethod method = EigenMethod::Dense;
};

constexpr int dense_dof_limit = 20000;

namespace detail {

inline SchurSpectrum finish_spectrum(double lmin, double lmax, int dofs, EigenMethod m)
{
    IETIDP_REQUIRE(lmin > 0.0, SingularMatrix, "pressure Schur complement has a kernel beyond the constants");
    SchurSpectrum s;
    s.lambda_min = lmin;
    s.lambda_max = lmax;
    s.kappa = lmax / lmin;
    s.beta = std::sqrt(lmin);
    s.delta = std::sqrt(lmax);
    s.dofs = dofs;
    s.method = m;
    return s;
}

/// Orthonormal basis of the Euclidean complement of v.
inline Eigen::MatrixXd complement_basis(const Eigen::VectorXd& v)
{
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr{Eigen::MatrixXd(v)};
    const Eigen::MatrixXd Q = qr.householderQ();
    return Q.rightCols(v.size() - 1);
}

}  // namespace detail

inline SchurSpectrum schur_spectrum_dense(const SpMat& K, const SpMat& D, const SpMat& M)
{
    const int np = static_cast<int>(D.rows());
    IETIDP_REQUIRE(np >= 2, InvalidArgument, "pressure Schur spectrum: need at least two pressure dofs");
    Eigen::SimplicialLLT<SpMat> llt(K);
    IETIDP_REQUIRE(llt.info() == Eigen::Success, SingularMatrix, "velocity stiffness is not positive definite");
    const Eigen::MatrixXd X = llt.solve(Eigen::MatrixXd(D.transpose()));
    const Eigen::MatrixXd S = D * X;
    const Eigen::MatrixXd Md(M);
    const Eigen::MatrixXd Z = detail::complement_basis(Md * Eigen::VectorXd::Ones(np));
    Eigen::MatrixXd Sz = Z.transpose() * S * Z, Mz = Z.transpose() * Md * Z;
    Sz = 0.5 * (Sz + Sz.transpose()).eval();
    Mz = 0.5 * (Mz + Mz.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Sz, Mz, Eigen::EigenvaluesOnly);
    IETIDP_REQUIRE(es.info() == Eigen::Success, SingularMatrix, "dense generalized eigensolve failed");
    return detail::finish_spectrum(es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff(),
                                   static_cast<int>(K.rows()) + np, EigenMethod::Dense);
}

/// Lanczos estimate from CG on the projected operator, preconditioned by M^-1.
/// Returns false in `converged` when CG did not reach the tolerance.
inline SchurSpectrum schur_spectrum_iterative(const SpMat& K, const SpMat& D, const SpMat& M, bool* converged,
                                              double tol = 1e-10, int max_iter = 2000, std::uint64_t seed = 7)
{
    const int np = static_cast<int>(D.rows());
    Eigen::SimplicialLLT<SpMat> kllt(K), mllt(M);
    IETIDP_REQUIRE(kllt.info() == Eigen::Success && mllt.info() == Eigen::Success, SingularMatrix,
                   "velocity stiffness or pressure mass is not positive definite");
    const Eigen::VectorXd m1 = M * Eigen::VectorXd::Ones(np);
    const double mass = m1.sum();
    // P v removes the M-weighted mean; P^T r removes the component along M 1
    auto P = [&](Eigen::VectorXd v) { return Eigen::VectorXd(v.array() - m1.dot(v) / mass); };
    auto Pt = [&](Eigen::VectorXd r) { return Eigen::VectorXd(r - m1 * (r.sum() / mass)); };
    const LinearMap A = [&](const Eigen::VectorXd& v) {
        const Eigen::VectorXd y = P(v);
        return Pt(D * kllt.solve(Eigen::VectorXd(D.transpose() * y)));
    };
    const LinearMap Minv = [&](const Eigen::VectorXd& r) { return P(mllt.solve(Pt(r))); };
    const Eigen::VectorXd b = Pt(random_vector(np, seed));
    const PcgResult r = pcg(A, Minv, b, Eigen::VectorXd::Zero(np), tol, std::min(max_iter, np));
    if (converged) *converged = r.report.converged;
    return detail::finish_spectrum(r.report.lambda_min, r.report.lambda_max, static_cast<int>(K.rows()) + np,
                                   EigenMethod::Iterative);
}

/// Dense up to dense_dof_limit total dofs, Lanczos otherwise; the iterative path
/// falls back to dense when it does not converge and the size permits.
inline SchurSpectrum schur_spectrum(const SpMat& K, const SpMat& D, const SpMat& M,
                                    EigenMethod method = EigenMethod::Auto)
{
    const int total = static_cast<int>(K.rows() + D.rows());
    if (method == EigenMethod::Dense || (method == EigenMethod::Auto && total <= dense_dof_limit))
        return schur_spectrum_dense(K, D, M);
    bool ok = false;
    SchurSpectrum s = schur_spectrum_iterative(K, D, M, &ok);
    if (!ok && total <= dense_dof_limit) return schur_spectrum_dense(K, D, M);
    return s;
}

/// Condition number of the mass-preconditioned pressure Schur complement of
/// the conforming global system.
inline SchurSpectrum pressure_schur_condition(const GlobalCoupledSystem& gs, EigenMethod method = EigenMethod::Auto)
{
    return schur_spectrum(gs.K, gs.D, gs.M_p, method);
}

/// Inf-sup constant of one patch with homogeneous Dirichlet velocity.
inline double local_infsup(const GeometryMap& map, int degree, int smoothness, int refinement,
                           EigenMethod method = EigenMethod::Dense)
{
    const TaylorHoodPatchSpace sp =
        build_taylor_hood(map, degree, smoothness, refinement, PatchBoundary::uniform(SideRole::Dirichlet));
    const PatchStokesSystem sys = assemble_patch(sp, map, {}, {});
    return schur_spectrum(sys.K_II, sys.D_I, sys.M_p, method).beta;
}

/// Dense skeleton Schur complements of a floating patch.
struct SkeletonSpectra {
    Eigen::MatrixXd S_A, S_K;
    Eigen::VectorXd eigenvalues;           // of (S_A, S_K) off the constant-velocity kernel
    Eigen::MatrixXd constants;             // Gamma x 2, the constant velocity fields
};

inline SkeletonSpectra skeleton_spectra(const TaylorHoodPatchSpace& sp, const PatchStokesSystem& sys)
{
    for (Side s : all_sides)
        IETIDP_REQUIRE(sp.boundary().role(s) == SideRole::Interface, InvalidArgument,
                       "skeleton spectra: patch must be floating");
    const int nG = sp.num_gamma(), nI = sp.num_interior(), np = sp.num_pressure();
    IETIDP_REQUIRE(nG <= 2000, InvalidArgument, "skeleton spectra: too many skeleton dofs for dense work");
    const Eigen::RowVectorXd C_A = (sys.M_p * Eigen::VectorXd::Ones(np)).transpose() / sys.area;

    // [K_II D_I^T 0; D_I 0 C_A^T; 0 C_A 0]
    const int n = nI + np + 1;
    Eigen::MatrixXd inner = Eigen::MatrixXd::Zero(n, n);
    inner.topLeftCorner(nI, nI) = Eigen::MatrixXd(sys.K_II);
    inner.block(nI, 0, np, nI) = Eigen::MatrixXd(sys.D_I);
    inner.block(0, nI, nI, np) = Eigen::MatrixXd(sys.D_I).transpose();
    inner.block(nI, nI + np, np, 1) = C_A.transpose();
    inner.block(nI + np, nI, 1, np) = C_A;
    Eigen::MatrixXd coupling = Eigen::MatrixXd::Zero(n, nG);
    coupling.topRows(nI) = Eigen::MatrixXd(sys.K_IG);
    coupling.middleRows(nI, np) = Eigen::MatrixXd(sys.D_G);

    SkeletonSpectra out;
    const Eigen::MatrixXd KGG(sys.K_GG);
    out.S_A = KGG - coupling.transpose() * inner.fullPivLu().solve(coupling);
    out.S_K = KGG - Eigen::MatrixXd(sys.K_GI) * Eigen::LLT<Eigen::MatrixXd>(Eigen::MatrixXd(sys.K_II))
                                                     .solve(Eigen::MatrixXd(sys.K_IG));
    out.S_A = 0.5 * (out.S_A + out.S_A.transpose()).eval();
    out.S_K = 0.5 * (out.S_K + out.S_K.transpose()).eval();

    out.constants = Eigen::MatrixXd::Zero(nG, 2);
    const int nv = sp.scalar_velocity_dim();
    for (int pos = 0; pos < nG; ++pos) out.constants(pos, sp.gamma_dofs()[pos] < nv ? 0 : 1) = 1.0;
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(out.constants);
    const Eigen::MatrixXd Q = qr.householderQ();
    const Eigen::MatrixXd Z = Q.rightCols(nG - 2);
    Eigen::MatrixXd A = Z.transpose() * out.S_A * Z, B = Z.transpose() * out.S_K * Z;
    A = 0.5 * (A + A.transpose()).eval();
    B = 0.5 * (B + B.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B, Eigen::EigenvaluesOnly);
    IETIDP_REQUIRE(es.info() == Eigen::Success, SingularMatrix, "skeleton spectra: S_K is singular off the constants");
    out.eigenvalues = es.eigenvalues();
    return out;
}

/// Floating copy of a single patch.
inline SkeletonSpectra skeleton_spectra(const GeometryMap& map, int degree, int smoothness, int refinement)
{
    const TaylorHoodPatchSpace sp =
        build_taylor_hood(map, degree, smoothness, refinement, PatchBoundary::uniform(SideRole::Interface));
    return skeleton_spectra(sp, assemble_patch(sp, map, {}, {}));
}

struct InfSupRow {
    std::string domain;
    int degree = 0, refinement = 0;
    SchurSpectrum spectrum;
    double seconds = 0.0;
};

/// kappa over a (degree, refinement) grid; cells run concurrently.
inline std::vector<InfSupRow> study_infsup(const std::string& name, const MultiPatch& mp,
                                           const std::vector<int>& degrees, const std::vector<int>& refinements,
                                           std::optional<int> smoothness = std::nullopt,
                                           EigenMethod method = EigenMethod::Auto, int threads = 1)
{
    std::vector<InfSupRow> rows;
    for (int l : refinements)
        for (int p : degrees) rows.push_back({name, p, l, {}, 0.0});
    parallel_for(static_cast<int>(rows.size()), threads, [&](int i) {
        auto& r = rows[i];
        const auto t0 = std::chrono::steady_clock::now();
        const Discretization d = discretize(mp, r.degree, smoothness.value_or(r.degree - 1), r.refinement, {});
        r.spectrum = pressure_schur_condition(assemble_global(d, false), method);
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    });
    return rows;
}

}  // namespace ietidp
