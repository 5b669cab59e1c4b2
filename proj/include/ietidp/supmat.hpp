#pragma once

// Supremum representation of the norm induced by a constrained saddle-point
// inverse, with a brute-force evaluation over the admissible subspace.

#include <Eigen/Dense>

#include <random>

#include "ietidp/error.hpp"

namespace ietidp {

/// A (n x n, SPD), B (m1 x n), C (m2 x n), D (m3 x m2).
struct SupmatInstance {
    Eigen::MatrixXd A, B, C, D;
};

/// Orthonormal basis of the null space of M (columns), possibly empty.
inline Eigen::MatrixXd null_space(const Eigen::MatrixXd& M, double rel_tol = 1e-12)
{
    if (M.rows() == 0) return Eigen::MatrixXd::Identity(M.cols(), M.cols());
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cut = rel_tol * std::max(1.0, sv.size() ? sv[0] : 0.0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) rank += sv[i] > cut;
    return svd.matrixV().rightCols(M.cols() - rank);
}

/// M2 = [B 0 0] [A C^T 0; C 0 D^T; 0 D 0]^-1 [B^T; 0; 0].
inline Eigen::MatrixXd supmat_matrix(const SupmatInstance& s)
{
    const int n = static_cast<int>(s.A.rows()), m2 = static_cast<int>(s.C.rows()), m3 = static_cast<int>(s.D.rows());
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n + m2 + m3, n + m2 + m3);
    S.topLeftCorner(n, n) = s.A;
    S.block(n, 0, m2, n) = s.C;
    S.block(0, n, n, m2) = s.C.transpose();
    S.block(n + m2, n, m3, m2) = s.D;
    S.block(n, n + m2, m2, m3) = s.D.transpose();
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
    IETIDP_REQUIRE(lu.isInvertible(), SingularMatrix, "supmat: saddle-point matrix is singular");
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(S.rows(), s.B.rows());
    rhs.topRows(n) = s.B.transpose();
    return s.B * lu.solve(rhs).topRows(n);
}

/// Basis of W2 = {w : mu^T C w = 0 for all mu in ker D}.
inline Eigen::MatrixXd supmat_subspace(const SupmatInstance& s)
{
    const Eigen::MatrixXd kerD = null_space(s.D);
    if (kerD.cols() == 0) return Eigen::MatrixXd::Identity(s.A.rows(), s.A.rows());
    return null_space(kerD.transpose() * s.C);
}

/// sup over w in W2 of (B w, lambda) / ||w||_A, evaluated on an explicit basis of W2.
inline double supmat_brute_force(const SupmatInstance& s, const Eigen::VectorXd& lambda,
                                 Eigen::VectorXd* maximizer = nullptr)
{
    const Eigen::MatrixXd Z = supmat_subspace(s);
    if (Z.cols() == 0) {
        if (maximizer) *maximizer = Eigen::VectorXd::Zero(s.A.rows());
        return 0.0;
    }
    const Eigen::VectorXd g = Z.transpose() * (s.B.transpose() * lambda);
    const Eigen::VectorXd y = (Z.transpose() * s.A * Z).llt().solve(g);
    if (maximizer) *maximizer = Z * y;
    return std::sqrt(std::max(g.dot(y), 0.0));
}

/// Random instance with A SPD and C, D of full row rank (m3 <= m2 <= n).
inline SupmatInstance random_supmat_instance(std::mt19937_64& rng, int max_size = 8)
{
    std::uniform_int_distribution<int> size(1, max_size);
    std::normal_distribution<double> N(0.0, 1.0);
    auto gauss = [&](int r, int c) { return Eigen::MatrixXd(Eigen::MatrixXd::NullaryExpr(r, c, [&] { return N(rng); })); };
    const int n = std::max(2, size(rng));
    const int m1 = size(rng);
    const int m2 = std::uniform_int_distribution<int>(1, n)(rng);
    const int m3 = std::uniform_int_distribution<int>(0, m2)(rng);
    SupmatInstance s;
    const Eigen::MatrixXd G = gauss(n, n);
    s.A = G * G.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
    s.B = gauss(m1, n);
    s.C = gauss(m2, n);
    s.D = gauss(m3, m2);
    return s;
}

}  // namespace ietidp
