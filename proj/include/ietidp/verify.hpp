#pragma once

// Executable property suites over every module; each check reports a measured
// defect against its tolerance.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "ietidp/analysis.hpp"
#include "ietidp/domains.hpp"
#include "ietidp/fortin.hpp"
#include "ietidp/norms.hpp"
#include "ietidp/problems.hpp"
#include "ietidp/supmat.hpp"

namespace ietidp {

struct CheckResult {
    std::string suite, name;
    double value = 0.0;      // measured defect
    double tolerance = 0.0;  // passes when value <= tolerance
    std::string note;
    bool passed() const { return std::isfinite(value) && value <= tolerance; }
};

struct VerifyConfig {
    std::string domain_name = "grid:2,2";
    MultiPatch domain = grid(2, 2);
    std::vector<int> degrees{1, 2};
    std::vector<int> refinements{1, 2};
    std::optional<int> smoothness;
    double tol = 1e-6;
    int max_iter = 500;
    std::uint64_t seed = 42;
    int threads = 1;
    int supmat_instances = 50;
    int fortin_fields = 20;
};

namespace detail {

struct Recorder {
    std::string suite;
    std::vector<CheckResult> out;
    void operator()(std::string name, double value, double tol, std::string note = {})
    {
        out.push_back({suite, std::move(name), value, tol, std::move(note)});
    }
};

inline std::string cell(int p, int ell) { return "p=" + std::to_string(p) + " l=" + std::to_string(ell); }

inline double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline double sparse_max_abs(const SpMat& m) { return m.nonZeros() ? max_abs(Eigen::MatrixXd(m)) : 0.0; }

}  // namespace detail

inline std::vector<CheckResult> verify_spline(const VerifyConfig& cfg)
{
    detail::Recorder rec{"spline", {}};
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const Breakpoints z({0, 0.1, 0.35, 0.6, 0.61, 1});
    double pou = 0.0, fd = 0.0, nest = 0.0;
    int dim_mismatch = 0;
    for (int p = 1; p <= 6; ++p)
        for (int s = 0; s < p; ++s) {
            const SplineSpace sp(z, p, s);
            for (int k = 0; k < 1000; ++k) pou = std::max(pou, std::abs(sp.eval_all(U(rng)).sum() - 1.0));
            for (int k = 0; k < 100; ++k) {
                const double x = U(rng), h = 1e-6;
                if (std::abs(x - 0.61) < 0.02 || x < 0.01 || x > 0.99) continue;
                bool near_break = false;
                for (double b : z.values()) near_break = near_break || std::abs(x - b) < 1e-3;
                if (near_break) continue;
                const Eigen::VectorXd d = (sp.eval_all(x + h) - sp.eval_all(x - h)) / (2 * h);
                const Eigen::VectorXd e = sp.eval_all(x, 1);
                fd = std::max(fd, (e - d).cwiseAbs().maxCoeff() / std::max(1.0, e.cwiseAbs().maxCoeff()));
            }
            const SplineSpace fine = refine_uniform(sp, 1);
            const Eigen::MatrixXd R = refinement_matrix(sp, fine);
            for (int k = 0; k < 100; ++k) {
                const double x = U(rng);
                nest = std::max(nest, detail::max_abs(sp.eval_all(x) - R.transpose() * fine.eval_all(x)));
            }
            for (int interior = 0; interior <= 3; ++interior) {
                const SplineSpace u(Breakpoints::uniform(interior + 1), p, s);
                const int expected = (p + 1) + interior * (p - s);
                const int samples = 4 * expected + 10;
                Eigen::MatrixXd E(samples, u.dim());
                for (int r = 0; r < samples; ++r) E.row(r) = u.eval_all((r + 0.5) / samples).transpose();
                Eigen::FullPivLU<Eigen::MatrixXd> lu(E);
                lu.setThreshold(1e-10);
                dim_mismatch += (u.dim() != expected) + (lu.rank() != expected);
            }
        }
    rec("partition of unity", pou, 1e-12);
    rec("derivative vs finite difference", fd, 1e-5);
    rec("knot insertion nestedness", nest, 1e-12);
    rec("dimension formula (p <= 6)", dim_mismatch, 0);
    return rec.out;
}

inline std::vector<CheckResult> verify_geometry(const VerifyConfig& cfg)
{
    detail::Recorder rec{"geometry", {}};
    const MultiPatch& mp = cfg.domain;
    rec("topology violations", static_cast<double>(validate_topology(mp, mp.tolerance()).violations.size()), 0);
    int nonpositive = 0;
    for (const auto& g : mp.patches())
        for (int i = 0; i <= 10; ++i)
            for (int j = 0; j <= 10; ++j) nonpositive += g.eval(i / 10.0, j / 10.0).det <= 0.0;
    rec("positive Jacobian", nonpositive, 0);
    double trace = 0.0;
    for (const auto& i : mp.interfaces())
        for (int q = 0; q <= 20; ++q) {
            const double t = q / 20.0;
            const Eigen::Vector2d a = side_point(i.side_a, t), b = side_point(i.side_b, i.reversed ? 1.0 - t : t);
            trace = std::max(trace, (mp.patch(i.patch_a).point(a[0], a[1]) - mp.patch(i.patch_b).point(b[0], b[1])).norm());
        }
    rec("interface trace coincidence", trace, 1e-10 * mp.domain_diameter());
    double area = 0.0;
    for (int k = 0; k < mp.num_patches(); ++k) area += mp.area(k);
    rec("patch areas sum to domain area", std::abs(area - mp.total_area()), 1e-12 * mp.total_area());
    return rec.out;
}

inline std::vector<CheckResult> verify_assembly(const VerifyConfig& cfg)
{
    detail::Recorder rec{"assembly", {}};
    for (int ell : cfg.refinements)
        for (int p : cfg.degrees) {
            const Discretization d = discretize(cfg.domain, p, cfg.smoothness.value_or(p - 1), ell, {});
            double div = 0.0, kern = 0.0, sym = 0.0;
            int spd_fail = 0;
            for (const auto& sys : d.systems) {
                const Eigen::VectorXd ones = Eigen::VectorXd::Ones(sys.D_I.rows());
                const double scale = std::max(detail::sparse_max_abs(sys.D_full), 1e-300);
                div = std::max(div, sys.D_I.cols() ? (sys.D_I.transpose() * ones).cwiseAbs().maxCoeff() / scale : 0.0);
                const int nv = static_cast<int>(sys.K_full.rows()) / 2;
                const double kscale = detail::sparse_max_abs(sys.K_full);
                for (int c = 0; c < 2; ++c) {
                    Eigen::VectorXd v = Eigen::VectorXd::Zero(2 * nv);
                    v.segment(c * nv, nv).setOnes();
                    kern = std::max(kern, (sys.K_full * v).cwiseAbs().maxCoeff() / kscale);
                }
                sym = std::max(sym, detail::sparse_max_abs(sys.K_full - SpMat(sys.K_full.transpose())) / kscale);
                spd_fail += Eigen::SimplicialLLT<SpMat>(sys.M_p).info() != Eigen::Success;
            }
            const std::string c = detail::cell(p, ell);
            rec("D_I^T 1 = 0 " + c, div, 1e-12);
            rec("K constant kernel " + c, kern, 1e-12);
            rec("K symmetric " + c, sym, 1e-14);
            rec("M_p positive definite " + c, spd_fail, 0);
        }
    return rec.out;
}

/// Coefficient-wise check of D^-1 B^T B v = (v_k - v_l) / 2 on the non-corner
/// interface dofs, for arbitrary (discontinuous) v.
inline double jump_representation_defect(const JumpOperator& J, const Discretization& d, std::uint64_t seed)
{
    std::vector<Eigen::VectorXd> v(d.num_patches());
    Eigen::VectorXd Bv = Eigen::VectorXd::Zero(J.num_multipliers());
    for (int k = 0; k < d.num_patches(); ++k) {
        v[k] = random_vector(d.spaces[k].num_gamma(), seed + k);
        Bv += J.B[k] * v[k];
    }
    double defect = 0.0;
    std::vector<Eigen::VectorXd> w(d.num_patches());
    std::vector<Eigen::VectorXi> touched(d.num_patches());
    for (int k = 0; k < d.num_patches(); ++k) {
        w[k] = 0.5 * (J.B[k].transpose() * Bv);
        touched[k] = Eigen::VectorXi::Zero(w[k].size());
    }
    for (const auto& r : J.rows) {
        const double jump = v[r.patch_a][r.pos_a] - v[r.patch_b][r.pos_b];
        defect = std::max(defect, std::abs(w[r.patch_a][r.pos_a] - 0.5 * jump));
        defect = std::max(defect, std::abs(w[r.patch_b][r.pos_b] + 0.5 * jump));
        touched[r.patch_a][r.pos_a] = touched[r.patch_b][r.pos_b] = 1;
    }
    // corner and other unpaired Gamma dofs are not affected
    for (int k = 0; k < d.num_patches(); ++k)
        for (int i = 0; i < w[k].size(); ++i)
            if (!touched[k][i]) defect = std::max(defect, std::abs(w[k][i]));
    return defect;
}

inline double bdbb_defect(const JumpOperator& J, const Discretization& d, std::uint64_t seed, int trials = 20)
{
    double defect = 0.0;
    for (int t = 0; t < trials; ++t) {
        Eigen::VectorXd Bv = Eigen::VectorXd::Zero(J.num_multipliers());
        for (int k = 0; k < d.num_patches(); ++k)
            Bv += J.B[k] * random_vector(d.spaces[k].num_gamma(), seed + 1000 * t + k);
        Eigen::VectorXd lhs = Eigen::VectorXd::Zero(J.num_multipliers());
        for (int k = 0; k < d.num_patches(); ++k) lhs += J.B[k] * (0.5 * (J.B[k].transpose() * Bv));
        defect = std::max(defect, (lhs - Bv).cwiseAbs().maxCoeff());
    }
    return defect;
}

/// Largest deviation of the average primal basis columns from (0; 0; 1).
inline double psi_average_defect(const IetiOperator& op)
{
    double defect = 0.0;
    for (int k = 0; k < op.discretization().num_patches(); ++k) {
        const auto& pb = op.primal_basis(k);
        const int a = op.constraints().patches[k].num_local_primal() - 1;
        defect = std::max(defect, detail::max_abs(pb.gamma_block().col(a)));
        if (pb.num_interior) defect = std::max(defect, detail::max_abs(pb.interior_block().col(a)));
        defect = std::max(defect, (pb.pressure_block().col(a).array() - 1.0).abs().maxCoeff());
    }
    return defect;
}

struct OperatorSymmetry {
    double asymmetry = 0.0;     // max |a.Fb - b.Fa| / (|a.Fb| + scale)
    double negativity = 0.0;    // max(0, -min a.Fa / (|a|^2 ||F||))
};

inline OperatorSymmetry operator_symmetry(const LinearMap& F, int n, std::uint64_t seed, int trials = 100)
{
    double est = 0.0;
    for (int t = 0; t < 5; ++t) {
        const Eigen::VectorXd l = random_vector(n, seed + 7919 * t);
        est = std::max(est, F(l).norm() / l.norm());
    }
    OperatorSymmetry out;
    for (int t = 0; t < trials; ++t) {
        const Eigen::VectorXd a = random_vector(n, seed + 2 * t + 1), b = random_vector(n, seed + 2 * t + 2);
        const Eigen::VectorXd Fa = F(a), Fb = F(b);
        out.asymmetry = std::max(out.asymmetry, std::abs(a.dot(Fb) - b.dot(Fa)) / (est * a.norm() * b.norm()));
        out.negativity = std::max(out.negativity, -a.dot(Fa) / (est * a.squaredNorm()));
    }
    return out;
}

struct MonolithicComparison {
    double velocity = 0.0, pressure = 0.0;  // relative discrete H1 / mean-adjusted L2 differences
    int iterations = 0;
    bool converged = false;
};

inline MonolithicComparison compare_ieti_with_monolithic(const Discretization& d, bool global_mean, double tol,
                                                         int max_iter, std::uint64_t seed, int threads = 1)
{
    const auto mono = solve_global(d, assemble_global(d, global_mean));
    const IetiOperator op(d, {global_mean, threads});
    const PcgResult r = solve_pcg(op, op.rhs(), tol, max_iter, seed);
    const auto ieti = op.recover(r.x);
    const auto diff = DiscreteNorms::difference(ieti, mono);
    MonolithicComparison c;
    const double vn = DiscreteNorms::velocity_h1(d, mono), pn = DiscreteNorms::pressure_l2(d, mono);
    c.velocity = DiscreteNorms::velocity_h1(d, diff) / (vn > 0 ? vn : 1.0);
    c.pressure = DiscreteNorms::pressure_l2(d, diff) / (pn > 0 ? pn : 1.0);
    c.iterations = r.report.iterations;
    c.converged = r.report.converged;
    return c;
}

inline std::vector<CheckResult> verify_ieti(const VerifyConfig& cfg)
{
    detail::Recorder rec{"ieti", {}};
    const bool mean = !cfg.domain.has_neumann();
    for (int ell : cfg.refinements)
        for (int p : cfg.degrees) {
            const std::string c = detail::cell(p, ell);
            const Discretization d =
                discretize(cfg.domain, p, cfg.smoothness.value_or(p - 1), ell, Manufactured::problem());
            const IetiOperator op(d, {mean, cfg.threads});
            rec("Psi_A structure " + c, psi_average_defect(op), 1e-10);
            rec("B D^-1 B^T B = B " + c, bdbb_defect(op.jump(), d, cfg.seed), 1e-12);
            rec("jump representation " + c, jump_representation_defect(op.jump(), d, cfg.seed), 1e-14);
            const int n = op.num_multipliers();
            const auto F = operator_symmetry([&](const Eigen::VectorXd& v) { return op.apply_F(v); }, n, cfg.seed);
            rec("F symmetric " + c, F.asymmetry, 1e-10);
            rec("F positive semidefinite " + c, F.negativity, 1e-10);
            const auto M = operator_symmetry([&](const Eigen::VectorXd& v) { return op.apply_preconditioner(v); }, n,
                                             cfg.seed + 1);
            rec("M_sD symmetric " + c, M.asymmetry, 1e-10);
            rec("M_sD positive " + c, M.negativity, 0.0);
            const MonolithicComparison m = compare_ieti_with_monolithic(d, mean, cfg.tol, cfg.max_iter, cfg.seed, cfg.threads);
            rec("IETI = monolithic velocity " + c, m.velocity, 1e-5, std::to_string(m.iterations) + " it");
            rec("IETI = monolithic pressure " + c, m.pressure, 1e-5);
            const PcgResult a = solve_pcg(op, op.rhs(), cfg.tol, cfg.max_iter, cfg.seed);
            const PcgResult b = solve_pcg(op, op.rhs(), cfg.tol, cfg.max_iter, cfg.seed);
            rec("same seed reproducible " + c, a.report.residual_history == b.report.residual_history ? 0.0 : 1.0, 0.0);
        }
    return rec.out;
}

inline std::vector<CheckResult> verify_skeleton(const VerifyConfig& cfg)
{
    detail::Recorder rec{"lemma3", {}};
    const std::vector<std::pair<std::string, GeometryMap>> patches{
        {"unit square", GeometryMap::rectangle(0, 0, 1, 1)}, {"quarter annulus", quarter_annulus_patch(1, 2)}};
    for (const auto& [name, g] : patches)
        for (int ell : cfg.refinements)
            for (int p : cfg.degrees) {
                const int s = cfg.smoothness.value_or(p - 1);
                const double beta = local_infsup(g, p, s, ell);
                const SkeletonSpectra sk = skeleton_spectra(g, p, s, ell);
                const std::string c = name + " " + detail::cell(p, ell);
                const double upper = 6.0 / (beta * beta);
                rec("S_A >= S_K " + c, 1.0 - sk.eigenvalues.minCoeff(), 1e-8);
                rec("S_A <= 6/beta^2 S_K " + c, sk.eigenvalues.maxCoeff() - upper, 1e-8,
                    "max " + std::to_string(sk.eigenvalues.maxCoeff()) + " bound " + std::to_string(upper));
                const double scale = detail::max_abs(sk.S_K);
                double kern = 0.0;
                for (int col = 0; col < 2; ++col) {
                    const Eigen::VectorXd v = sk.constants.col(col);
                    const double n2 = scale * v.squaredNorm();
                    kern = std::max({kern, std::abs(v.dot(sk.S_A * v)) / n2, std::abs(v.dot(sk.S_K * v)) / n2});
                }
                rec("constant velocity kernel " + c, kern, 1e-12);
            }
    return rec.out;
}

inline std::vector<CheckResult> verify_supmat(const VerifyConfig& cfg)
{
    detail::Recorder rec{"supmat", {}};
    std::mt19937_64 rng(cfg.seed);
    double defect = 0.0;
    for (int t = 0; t < cfg.supmat_instances; ++t) {
        const SupmatInstance s = random_supmat_instance(rng);
        const Eigen::VectorXd lambda = random_vector(static_cast<int>(s.B.rows()), cfg.seed + 31 * t);
        const double sup = supmat_brute_force(s, lambda);
        const double form = lambda.dot(supmat_matrix(s) * lambda);
        defect = std::max(defect, std::abs(form - sup * sup) / std::max(1.0, sup * sup));
    }
    rec(std::to_string(cfg.supmat_instances) + " random instances", defect, 1e-8);
    return rec.out;
}

/// Largest |(div (I - Pi) u, q)| over patchwise-constant mean-zero q and
/// random conforming fields vanishing on the boundary.
inline double flux_correction_defect(const MultiPatch& mp, int p, int ell, int fields, std::uint64_t seed)
{
    const Discretization d = discretize(mp, p, p - 1, ell, {});
    const GlobalNumbering num = number_velocity_dofs(d);
    const InterfaceFluxCorrection pi(d);
    const double total = d.domain.total_area();
    double defect = 0.0;
    for (int t = 0; t < fields; ++t) {
        const auto u = random_conforming_velocity(d, num, seed + t);
        const auto pu = pi.apply(u);
        std::vector<Eigen::VectorXd> r(u.size());
        for (std::size_t k = 0; k < u.size(); ++k) r[k] = u[k] - pu[k];
        const Eigen::VectorXd I = patch_divergence_integrals(d, r);
        for (int k = 0; k < d.num_patches(); ++k)
            defect = std::max(defect, std::abs(I[k] - d.domain.area(k) / total * I.sum()));
    }
    return defect;
}

inline std::vector<CheckResult> verify_fortin(const VerifyConfig& cfg)
{
    detail::Recorder rec{"fortin", {}};
    for (const auto& [name, mp] : {std::pair{"grid:2,2", grid(2, 2)}, std::pair{"grid:3,3", grid(3, 3)}})
        for (int p : cfg.degrees)
            rec(std::string("divergence against patch constants ") + name + " p=" + std::to_string(p),
                flux_correction_defect(mp, p, 1, cfg.fortin_fields, cfg.seed), 1e-10);
    return rec.out;
}

inline std::vector<CheckResult> verify_infsup(const VerifyConfig& cfg)
{
    detail::Recorder rec{"infsup", {}};
    auto kappa = [](const MultiPatch& mp, int p, int ell, EigenMethod m) {
        return pressure_schur_condition(assemble_global(discretize(mp, p, p - 1, ell, {}), false), m);
    };
    const int p = cfg.degrees.front(), ell = cfg.refinements.front();
    const MultiPatch sq = grid(1, 1);
    const SchurSpectrum dense = kappa(sq, 2, 2, EigenMethod::Dense);
    const SchurSpectrum iter = kappa(sq, 2, 2, EigenMethod::Iterative);
    rec("dense vs iterative kappa", std::abs(dense.kappa - iter.kappa) / dense.kappa, 0.01);
    rec("kappa >= 1", 1.0 - dense.kappa, 0.0);

    const MultiPatch qa = quarter_annulus(1, 2, 2, 1);
    const double ref = kappa(qa, p, ell, EigenMethod::Dense).kappa;
    Eigen::Matrix2d R;
    R << std::cos(0.7), -std::sin(0.7), std::sin(0.7), std::cos(0.7);
    const double rot = kappa(affine_image(qa, R, Eigen::Vector2d(3.0, -1.5)), p, ell, EigenMethod::Dense).kappa;
    const double big =
        kappa(affine_image(qa, 2.5 * Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero()), p, ell, EigenMethod::Dense)
            .kappa;
    rec("rigid motion invariance", std::abs(rot - ref) / ref, 1e-8);
    rec("scaling invariance", std::abs(big - ref) / ref, 1e-8);

    const GeometryMap unit = GeometryMap::rectangle(0, 0, 1, 1);
    double lo = 1e300, hi = 0.0;
    for (int l : {1, 2, 3}) {
        const double b = local_infsup(unit, p, p - 1, l);
        lo = std::min(lo, b), hi = std::max(hi, b);
    }
    rec("local inf-sup stable under refinement", (hi - lo) / lo, 0.03);
    rec("local inf-sup <= sqrt(2)", hi - std::sqrt(2.0), 0.0);
    rec("stretched patch less stable",
        local_infsup(GeometryMap::rectangle(0, 0, 4, 1), 1, 0, 2) - local_infsup(unit, 1, 0, 2), 0.0);
    return rec.out;
}

using VerifySuite = std::function<std::vector<CheckResult>(const VerifyConfig&)>;

inline const std::vector<std::pair<std::string, VerifySuite>>& verify_suites()
{
    static const std::vector<std::pair<std::string, VerifySuite>> suites{
        {"spline", verify_spline}, {"geometry", verify_geometry}, {"assembly", verify_assembly},
        {"ieti", verify_ieti},     {"lemma3", verify_skeleton},     {"supmat", verify_supmat},
        {"fortin", verify_fortin}, {"infsup", verify_infsup}};
    return suites;
}

/// Runs the named suites (all when empty); unknown names throw.
inline std::vector<CheckResult> run_verify(const VerifyConfig& cfg, const std::vector<std::string>& names = {})
{
    for (const auto& n : names) {
        bool known = false;
        for (const auto& s : verify_suites()) known = known || s.first == n;
        IETIDP_REQUIRE(known, InvalidArgument, "unknown suite '" + n + "'");
    }
    std::vector<CheckResult> out;
    for (const auto& [name, suite] : verify_suites()) {
        if (!names.empty() && std::find(names.begin(), names.end(), name) == names.end()) continue;
        auto r = suite(cfg);
        out.insert(out.end(), r.begin(), r.end());
    }
    return out;
}

}  // namespace ietidp
