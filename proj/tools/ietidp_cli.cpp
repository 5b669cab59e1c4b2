// ietidp: benchmark, inf-sup study, single solve and property verification.

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <mutex>

#include "ietidp/analysis.hpp"
#include "ietidp/geometry_io.hpp"
#include "ietidp/report.hpp"
#include "ietidp/verify.hpp"

using namespace ietidp;

namespace {

enum Exit { ok = 0, not_converged = 1, invalid_config = 2, property_failure = 3 };

struct RunConfig {
    std::string domain = "quarter_annulus";
    std::string geometry;
    std::vector<int> degrees{2};
    std::vector<int> refinements{2};
    std::optional<int> smoothness;
    double tol = 1e-6;
    int max_iter = 500;
    std::uint64_t seed = 42;
    std::string output;
    int threads = default_threads();
    bool no_global_mean = false;
    std::string problem = "auto";
    std::string method = "auto";
    int lattice = 10;
    std::string export_geometry;
    std::vector<std::string> suites;
};

void add_common(CLI::App* app, RunConfig& cfg)
{
    auto* dom = app->add_option("-d,--domain", cfg.domain,
                                "grid:M,N | strip:L | quarter_annulus[:r_in,r_out,m,n] | rectangle_with_hole")
                    ->capture_default_str();
    app->add_option("-g,--geometry", cfg.geometry, "geometry file (overrides --domain)")->excludes(dom);
    app->add_option("-p,--degree", cfg.degrees, "spline degree parameters p (list)")->delimiter(',')->capture_default_str();
    app->add_option("-l,--refinement", cfg.refinements, "refinement levels (list)")->delimiter(',')->capture_default_str();
    app->add_option("-s,--smoothness", cfg.smoothness, "spline smoothness (default p-1)");
    app->add_option("--tol", cfg.tol, "CG relative residual tolerance")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    app->add_option("--max-iter", cfg.max_iter, "CG iteration limit")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--seed", cfg.seed, "seed of the random initial guess")->capture_default_str();
    app->add_option("-o,--output", cfg.output, "output file");
    app->add_option("-t,--threads", cfg.threads, "worker threads (env IETIDP_THREADS)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
}

void add_problem(CLI::App* app, RunConfig& cfg)
{
    app->add_flag("--no-global-pressure-mean", cfg.no_global_mean,
                  "do not enforce a zero global pressure mean (implied by Neumann boundaries)");
    app->add_option("--problem", cfg.problem, "auto | manufactured | channel | zero")
        ->check(CLI::IsMember({"auto", "manufactured", "channel", "zero"}))
        ->capture_default_str();
}

void validate(const RunConfig& cfg)
{
    IETIDP_REQUIRE(!cfg.degrees.empty() && !cfg.refinements.empty(), InvalidArgument,
                   "degree and refinement lists must be non-empty");
    IETIDP_REQUIRE(cfg.tol > 0.0 && cfg.tol < 1.0, InvalidArgument, "tolerance must lie in (0,1)");
    for (int p : cfg.degrees) IETIDP_REQUIRE(p >= 1, InvalidArgument, "degrees must be >= 1");
    for (int l : cfg.refinements) IETIDP_REQUIRE(l >= 0, InvalidArgument, "refinement levels must be >= 0");
}

std::string domain_label(const RunConfig& cfg) { return cfg.geometry.empty() ? cfg.domain : cfg.geometry; }

MultiPatch load_domain(const RunConfig& cfg)
{
    return cfg.geometry.empty() ? build_domain(cfg.domain) : read_geometry_file(cfg.geometry);
}

struct ProblemChoice {
    StokesProblem data;
    std::optional<ExactSolution> exact;
    std::string name;
};

ProblemChoice choose_problem(const RunConfig& cfg)
{
    std::string p = cfg.problem;
    if (p == "auto") p = (cfg.geometry.empty() && cfg.domain == "rectangle_with_hole") ? "channel" : "manufactured";
    if (p == "channel") return {ChannelFlow::problem(), std::nullopt, p};
    if (p == "zero") return {StokesProblem{}, std::nullopt, p};
    return {Manufactured::problem(), Manufactured::exact(), p};
}

bool enforce_mean(const RunConfig& cfg, const MultiPatch& mp) { return !cfg.no_global_mean && !mp.has_neumann(); }

int total_dofs(const Discretization& d)
{
    int np = 0;
    for (const auto& s : d.spaces) np += s.num_pressure();
    return number_velocity_dofs(d).num_velocity + np;
}

void emit(const RunConfig& cfg, const Row& header, const std::vector<Row>& rows)
{
    write_table(std::cout, header, rows);
    if (cfg.output.empty()) return;
    std::ofstream out(cfg.output);
    IETIDP_REQUIRE(out.good(), InvalidArgument, "cannot write '" + cfg.output + "'");
    write_csv(out, header, rows);
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_bench(const RunConfig& cfg)
{
    validate(cfg);
    const MultiPatch mp = load_domain(cfg);
    const ProblemChoice prob = choose_problem(cfg);
    const bool mean = enforce_mean(cfg, mp);
    struct Cell {
        int p, l;
        Row row;
        bool converged = false;
    };
    std::vector<Cell> cells;
    for (int l : cfg.refinements)
        for (int p : cfg.degrees) cells.push_back({p, l, {}, false});
    const int outer = std::min<int>(cfg.threads, static_cast<int>(cells.size()));
    const int inner = std::max(1, cfg.threads / std::max(outer, 1));
    std::mutex log;
    parallel_for(static_cast<int>(cells.size()), outer, [&](int i) {
        Cell& c = cells[i];
        const int s = cfg.smoothness.value_or(c.p - 1);
        const auto t0 = std::chrono::steady_clock::now();
        const Discretization d = discretize(mp, c.p, s, c.l, prob.data, {}, inner);
        const IetiOperator op(d, {mean, inner});
        const double setup = seconds_since(t0);
        const auto t1 = std::chrono::steady_clock::now();
        const PcgResult r = solve_pcg(op, op.rhs(), cfg.tol, cfg.max_iter, cfg.seed);
        const double solve = seconds_since(t1);
        c.converged = r.report.converged;
        c.row = {domain_label(cfg),
                 std::to_string(c.p),
                 std::to_string(c.l),
                 std::to_string(s),
                 std::to_string(r.report.iterations),
                 fmt(r.report.condition, 4),
                 c.converged ? "yes" : "no",
                 std::to_string(op.num_multipliers()),
                 std::to_string(op.num_primal()),
                 std::to_string(total_dofs(d)),
                 fmt(setup, 3),
                 fmt(solve, 3)};
        if (!c.converged) {
            std::lock_guard lock(log);
            std::cerr << "warning: p=" << c.p << " l=" << c.l << " did not converge in " << cfg.max_iter
                      << " iterations\n";
        }
    });
    std::vector<Row> rows;
    bool all = true;
    for (auto& c : cells) rows.push_back(std::move(c.row)), all = all && c.converged;
    std::cout << "IETI-DP on " << domain_label(cfg) << " (" << prob.name << " data, global pressure mean "
              << (mean ? "enforced" : "free") << ")\n";
    emit(cfg,
         {"domain", "p", "l", "s", "iterations", "kappa", "converged", "multipliers", "primal", "dofs",
          "setup_seconds", "solve_seconds"},
         rows);
    return all ? ok : not_converged;
}

int run_study(const RunConfig& cfg)
{
    validate(cfg);
    const MultiPatch mp = load_domain(cfg);
    const EigenMethod m = cfg.method == "dense"       ? EigenMethod::Dense
                          : cfg.method == "iterative" ? EigenMethod::Iterative
                                                      : EigenMethod::Auto;
    const auto rows = study_infsup(domain_label(cfg), mp, cfg.degrees, cfg.refinements, cfg.smoothness, m, cfg.threads);
    std::vector<Row> out;
    for (const auto& r : rows)
        out.push_back({r.domain, std::to_string(r.degree), std::to_string(r.refinement), fmt(r.spectrum.kappa),
                       fmt(r.spectrum.beta), fmt(r.spectrum.delta), std::to_string(r.spectrum.dofs),
                       method_name(r.spectrum.method), fmt(r.seconds, 3)});
    emit(cfg, {"domain", "p", "l", "kappa", "beta", "delta_h", "dofs", "method", "seconds"}, out);
    return ok;
}

int run_solve(const RunConfig& cfg)
{
    validate(cfg);
    const MultiPatch mp = load_domain(cfg);
    if (!cfg.export_geometry.empty()) {
        std::ofstream g(cfg.export_geometry);
        IETIDP_REQUIRE(g.good(), InvalidArgument, "cannot write '" + cfg.export_geometry + "'");
        write_geometry(g, mp);
    }
    const ProblemChoice prob = choose_problem(cfg);
    const bool mean = enforce_mean(cfg, mp);
    const int p = cfg.degrees.front(), l = cfg.refinements.front();
    const Discretization d = discretize(mp, p, cfg.smoothness.value_or(p - 1), l, prob.data, {}, cfg.threads);
    const IetiOperator op(d, {mean, cfg.threads});
    const PcgResult r = solve_pcg(op, op.rhs(), cfg.tol, cfg.max_iter, cfg.seed);
    const auto fields = op.recover(r.x);
    std::cout << "domain " << domain_label(cfg) << "  p " << p << "  l " << l << "  data " << prob.name
              << "  global mean " << (mean ? "enforced" : "free") << '\n';
    std::cout << "iterations " << r.report.iterations << "  kappa " << fmt(r.report.condition, 4) << "  converged "
              << (r.report.converged ? "yes" : "no") << '\n';
    if (prob.exact) {
        const ErrorNorms e = compute_errors(d, fields, *prob.exact);
        std::cout << "velocity H1-seminorm error " << fmt(e.velocity_h1_semi) << "  velocity L2 error "
                  << fmt(e.velocity_l2) << "  pressure L2 error " << fmt(e.pressure_l2) << '\n';
    }
    if (!cfg.output.empty()) {
        std::ofstream out(cfg.output);
        IETIDP_REQUIRE(out.good(), InvalidArgument, "cannot write '" + cfg.output + "'");
        out << "domain " << domain_label(cfg) << '\n';
        write_fields(out, d, fields, cfg.lattice);
    }
    return r.report.converged ? ok : not_converged;
}

int run_verify_cmd(const RunConfig& cfg)
{
    validate(cfg);
    VerifyConfig v;
    v.domain_name = domain_label(cfg);
    v.domain = load_domain(cfg);
    v.degrees = cfg.degrees;
    v.refinements = cfg.refinements;
    v.smoothness = cfg.smoothness;
    v.tol = cfg.tol;
    v.max_iter = cfg.max_iter;
    v.seed = cfg.seed;
    v.threads = cfg.threads;
    const auto results = run_verify(v, cfg.suites);
    std::vector<Row> rows;
    int failed = 0;
    for (const auto& c : results) {
        rows.push_back({c.suite, c.name, fmt(c.value, 3), fmt(c.tolerance, 3), c.passed() ? "PASS" : "FAIL", c.note});
        failed += !c.passed();
    }
    emit(cfg, {"suite", "check", "value", "tolerance", "status", "note"}, rows);
    std::cout << results.size() - failed << "/" << results.size() << " checks passed\n";
    return failed ? property_failure : ok;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"IETI-DP solver for multi-patch isogeometric Stokes discretizations"};
    app.require_subcommand(1);
    RunConfig bench, study, solve, verify;

    auto* b = app.add_subcommand("bench-ieti", "iteration counts and condition numbers over (l, p)");
    add_common(b, bench);
    add_problem(b, bench);

    auto* s = app.add_subcommand("study-infsup", "condition of the mass-preconditioned pressure Schur complement");
    study.domain = "grid:1,1";
    study.degrees = {1, 2, 3, 4};
    study.refinements = {1, 2, 3};
    add_common(s, study);
    s->add_option("--method", study.method, "auto | dense | iterative")
        ->check(CLI::IsMember({"auto", "dense", "iterative"}))
        ->capture_default_str();

    auto* v = app.add_subcommand("solve", "one IETI-DP solve with field export");
    add_common(v, solve);
    add_problem(v, solve);
    v->add_option("--lattice", solve.lattice, "samples per parameter direction minus one")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    v->add_option("--export-geometry", solve.export_geometry, "write the domain in the geometry file format");

    auto* c = app.add_subcommand("verify", "run the property suites");
    verify.domain = "grid:2,2";
    verify.degrees = {1, 2};
    verify.refinements = {1, 2};
    add_common(c, verify);
    c->add_option("--suite", verify.suites,
                  "spline | geometry | assembly | ieti | lemma3 | supmat | fortin | infsup (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : invalid_config;
    }
    try {
        if (*b) return run_bench(bench);
        if (*s) return run_study(study);
        if (*v) return run_solve(solve);
        return run_verify_cmd(verify);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return invalid_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return invalid_config;
    }
}
