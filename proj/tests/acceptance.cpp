// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "ietidp/report.hpp"
#include "ietidp/verify.hpp"

using namespace ietidp;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

std::string num(double v, int digits = 4) { return fmt(v, digits); }

Outcome from_checks(const std::vector<CheckResult>& checks)
{
    Outcome o{true, ""};
    double worst = 0.0;
    std::string worst_name;
    for (const auto& c : checks) {
        if (!c.passed()) {
            o.passed = false;
            o.detail += "failed: " + c.suite + "/" + c.name + " = " + num(c.value, 3) + "; ";
        }
        const double r = c.tolerance > 0 ? c.value / c.tolerance : 0.0;
        if (r > worst) worst = r, worst_name = c.name;
    }
    o.detail += std::to_string(checks.size()) + " checks";
    if (!worst_name.empty()) o.detail += ", tightest " + worst_name + " at " + num(worst, 2) + " of tolerance";
    return o;
}

double slope(const std::vector<double>& h, const std::vector<double>& e)
{
    const int n = static_cast<int>(h.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double x = std::log(h[i]), y = std::log(e[i]);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

MultiPatch with_east_neumann(const MultiPatch& g, int m)
{
    std::vector<BoundaryEdge> edges = g.boundary_edges();
    for (auto& e : edges)
        if (e.side == Side::East && e.patch % m == m - 1) e.tag = BoundaryTag::Neumann;
    return MultiPatch(g.patches(), edges);
}

Outcome spline_suite() { return from_checks(verify_spline({})); }

Outcome discretization_rates()
{
    Outcome o{true, ""};
    for (int p : {1, 2}) {
        std::vector<double> h, eu, ep;
        for (int ell = 2; ell <= 5; ++ell) {
            const Discretization d = discretize(grid(1, 1), p, p - 1, ell, Manufactured::problem());
            const auto f = solve_global(d, assemble_global(d, true));
            const ErrorNorms e = compute_errors(d, f, Manufactured::exact());
            h.push_back(std::pow(0.5, ell));
            eu.push_back(e.velocity_h1_semi);
            ep.push_back(e.pressure_l2);
        }
        const double ru = slope(h, eu), rp = slope(h, ep);
        o.passed = o.passed && std::abs(ru - (p + 1)) <= 0.2 && std::abs(rp - (p + 1)) <= 0.3;
        o.detail += "p=" + std::to_string(p) + ": velocity H1 rate " + num(ru, 3) + ", pressure L2 rate " +
                    num(rp, 3) + "; ";
    }
    return o;
}

Outcome infsup_invariance()
{
    const auto rows = study_infsup("grid:1,1", grid(1, 1), {1, 2, 3, 4}, {1, 2, 3}, std::nullopt, EigenMethod::Dense,
                                   default_threads());
    double lo = 1e300, hi = 0.0;
    for (const auto& r : rows) lo = std::min(lo, r.spectrum.kappa), hi = std::max(hi, r.spectrum.kappa);
    const double spread = hi / lo - 1.0;
    return {spread < 0.05, "kappa in [" + num(lo) + ", " + num(hi) + "], spread " + num(100 * spread, 3) +
                               "% (limit 5%)"};
}

Outcome elongation_trend()
{
    Outcome o{true, ""};
    for (int p : {1, 2}) {
        double prev = 0.0;
        o.detail += "p=" + std::to_string(p) + " l=2:";
        for (int L : {1, 2, 4, 8}) {
            const SchurSpectrum s =
                pressure_schur_condition(assemble_global(discretize(strip(L), p, p - 1, 2, {}), false));
            o.passed = o.passed && s.kappa > prev;
            prev = s.kappa;
            o.detail += " " + num(s.kappa);
        }
        o.detail += "; ";
    }
    return o;
}

Outcome ieti_equals_monolithic()
{
    Outcome o{true, ""};
    double worst = 0.0;
    for (int m : {2, 3}) {
        const MultiPatch dir = grid(m, m);
        for (const MultiPatch& mp : {dir, with_east_neumann(dir, m)}) {
            for (int p : {1, 2}) {
                const Discretization d = discretize(mp, p, p - 1, 2, Manufactured::problem());
                const auto c = compare_ieti_with_monolithic(d, !mp.has_neumann(), 1e-6, 500, 42);
                o.passed = o.passed && c.converged && c.velocity <= 1e-5 && c.pressure <= 1e-5;
                worst = std::max({worst, c.velocity, c.pressure});
            }
        }
    }
    o.detail = "grid(2,2), grid(3,3), Dirichlet and Dirichlet/Neumann, p=1,2, l=2: max relative difference " +
               num(worst, 3) + " (limit 1e-5)";
    return o;
}

Outcome algebraic_identities()
{
    VerifyConfig cfg;
    auto checks = verify_assembly(cfg);
    const auto ieti = verify_ieti(cfg);
    checks.insert(checks.end(), ieti.begin(), ieti.end());
    return from_checks(checks);
}

Outcome skeleton_bounds() { return from_checks(verify_skeleton({})); }

Outcome sup_representation() { return from_checks(verify_supmat({})); }

Outcome flux_correction() { return from_checks(verify_fortin({})); }

Outcome benchmark_bands()
{
    const MultiPatch mp = quarter_annulus(1, 2, 8, 8);
    struct Cell {
        int p, ell;
        SolveReport r;
    };
    std::vector<Cell> cells;
    for (int p : {2, 3})
        for (int ell : {2, 3, 4}) cells.push_back({p, ell, {}});
    parallel_for(static_cast<int>(cells.size()), default_threads(), [&](int i) {
        const Discretization d = discretize(mp, cells[i].p, cells[i].p - 1, cells[i].ell, Manufactured::problem());
        const IetiOperator op(d, {true, 1});
        cells[i].r = solve_pcg(op, op.rhs(), 1e-6, 500, 42).report;
    });
    Outcome o{true, ""};
    for (int p : {2, 3}) {
        std::vector<double> k;
        o.detail += "p=" + std::to_string(p) + ":";
        for (const auto& c : cells)
            if (c.p == p) {
                o.passed = o.passed && c.r.converged && c.r.iterations <= 35;
                k.push_back(c.r.condition);
                o.detail += " l=" + std::to_string(c.ell) + " it " + std::to_string(c.r.iterations) + " kappa " +
                            num(c.r.condition);
            }
        if (p == 2) o.passed = o.passed && k[0] >= 4.0 && k[0] <= 15.0;
        const double d1 = k[1] - k[0], d2 = k[2] - k[1];
        const double ratio = d2 / d1;
        o.passed = o.passed && d1 > 0 && d2 > 0 && ratio >= 0.4 && ratio <= 2.5;
        o.detail += ", increment ratio " + num(ratio, 3) + "; ";
    }
    return o;
}

Outcome rectangle_with_hole_mode()
{
    const Discretization d = discretize(rectangle_with_hole(), 2, 1, 2, ChannelFlow::problem());
    const IetiOperator op(d, {false, default_threads()});
    const SolveReport r = solve_pcg(op, op.rhs(), 1e-6, 500, 42).report;
    return {r.converged && r.iterations <= 25,
            "l=2 p=2 without global mean: " + std::to_string(r.iterations) + " iterations, kappa " + num(r.condition)};
}

}  // namespace

int main()
{
    struct Criterion {
        int id;
        const char* name;
        double limit_seconds;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "spline suite", 10, spline_suite},
        {2, "manufactured solution convergence rates", 120, discretization_rates},
        {3, "inf-sup constant independent of l and p", 300, infsup_invariance},
        {4, "condition grows with strip elongation", 300, elongation_trend},
        {5, "IETI-DP matches monolithic solve", 60, ieti_equals_monolithic},
        {6, "algebraic identities", 60, algebraic_identities},
        {7, "skeleton Schur complement spectral bounds", 120, skeleton_bounds},
        {8, "sup representation brute force", 10, sup_representation},
        {9, "flux correction preserves patch divergence", 30, flux_correction},
        {10, "quarter annulus benchmark bands", 600, benchmark_bands},
        {11, "rectangle with hole without global mean", 120, rectangle_with_hole_mode},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool pass = o.passed && sec <= c.limit_seconds;
        failed += !pass;
        std::printf("%s criterion %2d: %s | %s | %.1f s (limit %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                    o.detail.c_str(), sec, c.limit_seconds);
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed ? 1 : 0;
}
