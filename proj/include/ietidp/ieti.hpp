#pragma once

// Dual-primal tearing and interconnecting: primal coarse problem, dual Schur
// operator F, scaled Dirichlet preconditioner and solution recovery.

#include <Eigen/SparseCholesky>

#include <chrono>
#include <map>
#include <optional>
#include <string>

#include "ietidp/local_solver.hpp"

namespace ietidp {

struct IetiOptions {
    bool global_pressure_mean = true;  // enforce the zero global pressure mean in the primal problem
    int threads = 1;
};

class IetiOperator {
public:
    IetiOperator(const Discretization& d, IetiOptions opt = {}) : d_(&d), opt_(opt)
    {
        using clock = std::chrono::steady_clock;
        const int K = d.num_patches();
        auto t0 = clock::now();
        constraints_ = build_primal_constraints(d);
        jump_ = build_jump_operator(d);
        std::vector<std::optional<AugmentedLocalSystem>> slots(K);
        kii_.resize(K);
        parallel_for(K, opt_.threads, [&](int k) {
            slots[k].emplace(d.systems[k], constraints_.patches[k]);
            auto f = std::make_shared<Eigen::SimplicialLLT<SpMat>>();
            if (d.systems[k].K_II.rows() > 0) {
                f->compute(d.systems[k].K_II);
                IETIDP_REQUIRE(f->info() == Eigen::Success, SingularMatrix,
                               "interior stiffness of patch " + std::to_string(k) + " is not positive definite");
            }
            kii_[k] = std::move(f);
        });
        for (auto& s : slots) local_.push_back(std::move(*s));
        timings_["factorization"] = seconds_since(t0);

        t0 = clock::now();
        basis_.resize(K);
        parallel_for(K, opt_.threads, [&](int k) { basis_[k] = build_primal_basis(local_[k], constraints_.patches[k]); });

        const int nP = constraints_.num_primal();
        const int nL = jump_.num_multipliers();
        Eigen::MatrixXd A_pi = Eigen::MatrixXd::Zero(nP, nP);
        b_pi_ = Eigen::VectorXd::Zero(nP);
        B_pi_ = Eigen::MatrixXd::Zero(nL, nP);
        local_rhs_.resize(K);
        for (int k = 0; k < K; ++k) {
            const auto& sys = d.systems[k];
            const auto& pc = constraints_.patches[k];
            const auto& pb = basis_[k];
            const SpMat A = patch_saddle_matrix(sys);
            const Eigen::MatrixXd APsi = A * pb.Psi;
            const Eigen::MatrixXd local_api = pb.Psi.transpose() * APsi;
            Eigen::VectorXd b(local_[k].num_primary());
            b << sys.f_G, sys.f_I, sys.g_p;
            const Eigen::VectorXd local_bpi = pb.Psi.transpose() * b;
            const Eigen::MatrixXd BPsi = jump_.B[k] * pb.gamma_block();
            const int m = pc.num_local_primal();
            for (int i = 0; i < m; ++i) {
                const int gi = pc.global_of_local(i);
                b_pi_[gi] += local_bpi[i];
                B_pi_.col(gi) += BPsi.col(i);
                for (int j = 0; j < m; ++j) A_pi(gi, pc.global_of_local(j)) += local_api(i, j);
            }
            local_rhs_[k] = Eigen::VectorXd::Zero(local_[k].size());
            local_rhs_[k].head(b.size()) = b;
        }
        A_pi_ = A_pi;

        // augmented primal matrix with the global mean row
        const int n = nP + (opt_.global_pressure_mean ? 1 : 0);
        Eigen::MatrixXd Abar = Eigen::MatrixXd::Zero(n, n);
        Abar.topLeftCorner(nP, nP) = A_pi;
        if (opt_.global_pressure_mean) {
            const double total = d.domain.total_area();
            for (int k = 0; k < K; ++k) {
                const int gi = constraints_.patches[k].R_A;
                Abar(nP, gi) = Abar(gi, nP) = d.systems[k].area / total;
            }
        }
        primal_lu_.compute(Abar);
        const double rc = primal_lu_.rcond();
        IETIDP_REQUIRE(rc > 1e-14, SingularMatrix,
                       opt_.global_pressure_mean
                           ? "primal system is singular"
                           : "primal system is singular; the global pressure mean may need to be enforced");
        primal_size_ = n;
        timings_["primal_setup"] = seconds_since(t0);
    }

    const Discretization& discretization() const { return *d_; }
    const PrimalConstraints& constraints() const { return constraints_; }
    const JumpOperator& jump() const { return jump_; }
    const AugmentedLocalSystem& local(int k) const { return local_[k]; }
    const PrimalBasis& primal_basis(int k) const { return basis_[k]; }
    const Eigen::MatrixXd& primal_matrix() const { return A_pi_; }
    const Eigen::MatrixXd& B_pi() const { return B_pi_; }
    const std::map<std::string, double>& timings() const { return timings_; }
    int num_multipliers() const { return jump_.num_multipliers(); }
    int num_primal() const { return constraints_.num_primal(); }

    /// F lambda = B_Pi A_Pi^-1 B_Pi^T lambda + sum_k B_k A_k^-1 B_k^T lambda.
    Eigen::VectorXd apply_F(const Eigen::VectorXd& lambda) const
    {
        Eigen::VectorXd out = B_pi_ * primal_solve(B_pi_.transpose() * lambda);
        std::vector<Eigen::VectorXd> part(d_->num_patches());
        parallel_for(d_->num_patches(), opt_.threads, [&](int k) {
            Eigen::VectorXd r = Eigen::VectorXd::Zero(local_[k].size());
            r.head(local_[k].num_gamma()) = jump_.B[k].transpose() * lambda;
            part[k] = jump_.B[k] * local_[k].solve(r).head(local_[k].num_gamma());
        });
        for (const auto& p : part) out += p;
        return out;
    }

    /// g = B_Pi A_Pi^-1 b_Pi + sum_k B_k A_k^-1 b_k.
    Eigen::VectorXd rhs() const
    {
        Eigen::VectorXd out = B_pi_ * primal_solve(b_pi_);
        for (int k = 0; k < d_->num_patches(); ++k)
            out += jump_.B[k] * local_[k].solve(local_rhs_[k]).head(local_[k].num_gamma());
        return out;
    }

    /// M_sD lambda = sum_k B_k D^-1 S_K D^-1 B_k^T lambda with D = 2 I.
    Eigen::VectorXd apply_preconditioner(const Eigen::VectorXd& lambda) const
    {
        std::vector<Eigen::VectorXd> part(d_->num_patches());
        parallel_for(d_->num_patches(), opt_.threads, [&](int k) {
            const Eigen::VectorXd w = 0.5 * (jump_.B[k].transpose() * lambda);
            part[k] = jump_.B[k] * (0.5 * apply_schur(k, w));
        });
        Eigen::VectorXd out = Eigen::VectorXd::Zero(lambda.size());
        for (const auto& p : part) out += p;
        return out;
    }

    /// S_K w = K_GG w - K_GI K_II^-1 K_IG w.
    Eigen::VectorXd apply_schur(int k, const Eigen::VectorXd& w) const
    {
        const auto& sys = d_->systems[k];
        Eigen::VectorXd y = sys.K_GG * w;
        if (sys.K_II.rows() > 0) y -= sys.K_GI * kii_[k]->solve(Eigen::VectorXd(sys.K_IG * w));
        return y;
    }

    /// Primal coefficients and per-patch fields for a given multiplier vector.
    std::vector<PatchField> recover(const Eigen::VectorXd& lambda, Eigen::VectorXd* primal_out = nullptr) const
    {
        const Eigen::VectorXd x_pi = primal_solve(b_pi_ - B_pi_.transpose() * lambda);
        if (primal_out) *primal_out = x_pi;
        std::vector<PatchField> out(d_->num_patches());
        parallel_for(d_->num_patches(), opt_.threads, [&](int k) {
            const auto& L = local_[k];
            const auto& pc = constraints_.patches[k];
            Eigen::VectorXd r = local_rhs_[k];
            r.head(L.num_gamma()) -= jump_.B[k].transpose() * lambda;
            const Eigen::VectorXd x = L.solve(r);
            Eigen::VectorXd coarse(pc.num_local_primal());
            for (int j = 0; j < coarse.size(); ++j) coarse[j] = x_pi[pc.global_of_local(j)];
            const Eigen::VectorXd up = x.head(L.num_primary()) + basis_[k].Psi * coarse;
            const auto& sp = d_->spaces[k];
            out[k].u = d_->systems[k].lift;
            for (int full = 0; full < sp.num_velocity(); ++full)
                if (const int pos = sp.free_position(full); pos >= 0) out[k].u[full] = up[pos];
            out[k].p = up.tail(L.num_pressure());
        });
        return out;
    }

private:
    static double seconds_since(std::chrono::steady_clock::time_point t0)
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

    // solves the augmented primal system for a primal-sized rhs, returns the primal part
    Eigen::VectorXd primal_solve(const Eigen::VectorXd& rhs) const
    {
        Eigen::VectorXd r = Eigen::VectorXd::Zero(primal_size_);
        r.head(rhs.size()) = rhs;
        return primal_lu_.solve(r).head(rhs.size());
    }

    const Discretization* d_;
    IetiOptions opt_;
    PrimalConstraints constraints_;
    JumpOperator jump_;
    std::vector<AugmentedLocalSystem> local_;
    std::vector<std::shared_ptr<Eigen::SimplicialLLT<SpMat>>> kii_;
    std::vector<PrimalBasis> basis_;
    std::vector<Eigen::VectorXd> local_rhs_;
    Eigen::MatrixXd A_pi_, B_pi_;
    Eigen::VectorXd b_pi_;
    Eigen::PartialPivLU<Eigen::MatrixXd> primal_lu_;
    int primal_size_ = 0;
    std::map<std::string, double> timings_;
};

}  // namespace ietidp
