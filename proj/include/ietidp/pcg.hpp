#pragma once

// Preconditioned conjugate gradients with a Lanczos estimate of the extreme
// eigenvalues of the preconditioned operator.

#include <Eigen/Dense>

#include <chrono>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ietidp/ieti.hpp"

namespace ietidp {

struct SolveReport {
    int iterations = 0;
    bool converged = false;
    std::vector<double> residual_history;  // ||r_j|| / ||r_0||
    double lambda_min = 0.0, lambda_max = 0.0, condition = 1.0;
    std::map<std::string, double> timings;
};

struct PcgResult {
    Eigen::VectorXd x;
    SolveReport report;
};

using LinearMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Ritz values of the Lanczos tridiagonal built from the CG coefficients.
inline Eigen::VectorXd lanczos_ritz_values(const std::vector<double>& alpha, const std::vector<double>& beta)
{
    const int m = static_cast<int>(alpha.size());
    if (m == 0) return {};
    Eigen::VectorXd diag(m), off(std::max(m - 1, 0));
    for (int j = 0; j < m; ++j) {
        diag[j] = 1.0 / alpha[j];
        if (j > 0) diag[j] += beta[j - 1] / alpha[j - 1];
        if (j + 1 < m) off[j] = std::sqrt(beta[j]) / alpha[j];
    }
    if (m == 1) return diag;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

/// Stops when ||r|| <= tol ||r_0||; returns the iterate of smallest residual
/// if max_iter is reached.
inline PcgResult pcg(const LinearMap& A, const LinearMap& M, const Eigen::VectorXd& b, Eigen::VectorXd x, double tol,
                     int max_iter)
{
    PcgResult res;
    Eigen::VectorXd r = b - A(x);
    const double r0 = r.norm();
    res.report.residual_history.push_back(1.0);
    if (r0 == 0.0) {
        res.report.converged = true;
        res.x = std::move(x);
        return res;
    }
    Eigen::VectorXd z = M(r), p = z;
    double rz = r.dot(z);
    std::vector<double> alpha, beta;
    Eigen::VectorXd best = x;
    double best_res = r0;
    for (int it = 0; it < max_iter; ++it) {
        const Eigen::VectorXd q = A(p);
        const double pq = p.dot(q);
        if (!(pq > 0.0) || !(rz > 0.0)) break;
        const double a = rz / pq;
        alpha.push_back(a);
        x += a * p;
        r -= a * q;
        const double rn = r.norm();
        res.report.residual_history.push_back(rn / r0);
        res.report.iterations = it + 1;
        if (rn < best_res) best_res = rn, best = x;
        if (rn <= tol * r0) {
            res.report.converged = true;
            break;
        }
        z = M(r);
        const double rz_new = r.dot(z);
        const double bcoef = rz_new / rz;
        beta.push_back(bcoef);
        rz = rz_new;
        p = z + bcoef * p;
    }
    res.x = res.report.converged ? x : best;
    const Eigen::VectorXd ritz = lanczos_ritz_values(alpha, beta);
    if (ritz.size() > 0) {
        res.report.lambda_min = ritz.minCoeff();
        res.report.lambda_max = ritz.maxCoeff();
        res.report.condition = res.report.lambda_max / res.report.lambda_min;
    }
    return res;
}

/// Uniform random vector in [-1,1]^n from a seeded generator.
inline Eigen::VectorXd random_vector(int n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = U(rng);
    return v;
}

/// PCG on F lambda = g preconditioned by M_sD, random initial guess.
inline PcgResult solve_pcg(const IetiOperator& op, const Eigen::VectorXd& g, double tol = 1e-6, int max_iter = 500,
                           std::uint64_t seed = 42)
{
    const auto t0 = std::chrono::steady_clock::now();
    PcgResult res = pcg([&](const Eigen::VectorXd& v) { return op.apply_F(v); },
                        [&](const Eigen::VectorXd& v) { return op.apply_preconditioner(v); }, g,
                        random_vector(op.num_multipliers(), seed), tol, max_iter);
    res.report.timings = op.timings();
    res.report.timings["cg"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

}  // namespace ietidp
