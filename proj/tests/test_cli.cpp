#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "ietidp/geometry_io.hpp"
#include "ietidp/report.hpp"

using namespace ietidp;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args)
{
    const std::string cmd = std::string(IETIDP_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p)
{
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> r;
        std::stringstream ss(line);
        for (std::string f; std::getline(ss, f, ',');) r.push_back(f);
        rows.push_back(r);
    }
    return rows;
}

fs::path scratch(const std::string& name) { return fs::temp_directory_path() / ("ietidp_cli_" + name); }

}  // namespace

TEST(Report, CsvQuotesOnlySeparators)
{
    EXPECT_EQ(csv_field("plain"), "plain");
    EXPECT_EQ(csv_field("grid:2,2"), "\"grid:2,2\"");
    EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    EXPECT_EQ(csv_field("a\nb"), "\"a\nb\"");
    std::ostringstream os;
    write_csv(os, {"a", "b"}, {{"1", "x,y"}});
    EXPECT_EQ(os.str(), "a,b\n1,\"x,y\"\n");
}

TEST(Report, TableIsAligned)
{
    std::ostringstream os;
    write_table(os, {"p", "kappa"}, {{"1", "4.5"}, {"10", "12.25"}});
    EXPECT_EQ(os.str(), " p  kappa\n---------\n 1    4.5\n10  12.25\n");
}

TEST(Cli, BenchCsvIsDeterministicUpToTiming)
{
    const auto a = scratch("a.csv"), b = scratch("b.csv");
    const std::string args = "bench-ieti -d strip:2 -p 1,2 -l 1 --seed 5 -t 2 -o ";
    ASSERT_EQ(run(args + a.string()), 0);
    ASSERT_EQ(run(args + b.string()), 0);
    const auto ra = read_csv(a), rb = read_csv(b);
    ASSERT_EQ(ra.size(), 3u);
    ASSERT_EQ(ra.size(), rb.size());
    const std::vector<std::string> header{"domain",      "p",      "l",    "s",
                                          "iterations",  "kappa",  "converged", "multipliers",
                                          "primal",      "dofs",   "setup_seconds", "solve_seconds"};
    EXPECT_EQ(ra[0], header);
    for (std::size_t i = 1; i < ra.size(); ++i) {
        ASSERT_EQ(ra[i].size(), header.size());
        for (std::size_t c = 0; c + 2 < header.size(); ++c) EXPECT_EQ(ra[i][c], rb[i][c]) << header[c];
        EXPECT_EQ(ra[i][6], "yes");
    }
    fs::remove(a), fs::remove(b);
}

TEST(Cli, ExitCodes)
{
    EXPECT_EQ(run("bench-ieti -d grid:2,2 -p 1 -l 1"), 0);
    EXPECT_EQ(run("bench-ieti -d grid:2,2 -p 2 -l 2 --max-iter 1"), 1);
    EXPECT_EQ(run("solve -d grid:2,2 -p 2 -l 2 --max-iter 1"), 1);
    EXPECT_EQ(run("bench-ieti --tol 1.5"), 2);
    EXPECT_EQ(run("bench-ieti -d nowhere"), 2);
    EXPECT_EQ(run("bench-ieti -l -1"), 2);
    EXPECT_EQ(run("study-infsup --method magic"), 2);
    EXPECT_EQ(run("verify --suite nonsense"), 2);
    EXPECT_EQ(run("solve -g /nonexistent/file.geo"), 2);
    EXPECT_EQ(run(""), 2);
}

TEST(Cli, VerifySingleSuite)
{
    const auto out = scratch("verify.csv");
    ASSERT_EQ(run("verify --suite lemma3 -o " + out.string()), 0);
    const auto rows = read_csv(out);
    ASSERT_GT(rows.size(), 1u);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i][0], "lemma3");
        EXPECT_EQ(rows[i][4], "PASS");
    }
    fs::remove(out);
}

TEST(Cli, ZeroDataGivesZeroFields)
{
    const auto out = scratch("fields.txt");
    ASSERT_EQ(run("solve -d grid:2,1 --problem zero -p 1 -l 1 --lattice 3 -o " + out.string()), 0);
    std::ifstream in(out);
    int samples = 0;
    for (std::string line; std::getline(in, line);) {
        if (line.rfind("samples", 0) != 0) continue;
        for (int k = 0; k < 16; ++k, ++samples) {
            std::getline(in, line);
            std::istringstream ss(line);
            double xi, eta, x, y, ux, uy, p;
            ss >> xi >> eta >> x >> y >> ux >> uy >> p;
            EXPECT_LT(std::abs(ux) + std::abs(uy) + std::abs(p), 1e-10);
        }
    }
    EXPECT_EQ(samples, 32);
    fs::remove(out);
}

TEST(Cli, ExportedGeometryRoundTrips)
{
    const auto geo = scratch("hole.geo"), a = scratch("g1.csv"), b = scratch("g2.csv");
    ASSERT_EQ(run("solve -d rectangle_with_hole -p 1 -l 1 --export-geometry " + geo.string()), 0);
    const MultiPatch mp = read_geometry_file(geo.string());
    EXPECT_EQ(mp.num_patches(), rectangle_with_hole().num_patches());
    EXPECT_TRUE(mp.has_neumann());
    ASSERT_EQ(run("bench-ieti -d rectangle_with_hole -p 1 -l 1 --problem channel -o " + a.string()), 0);
    ASSERT_EQ(run("bench-ieti -g " + geo.string() + " -p 1 -l 1 --problem channel -o " + b.string()), 0);
    const auto ra = read_csv(a), rb = read_csv(b);
    for (std::size_t c = 1; c < 10; ++c) EXPECT_EQ(ra[1][c], rb[1][c]);
    fs::remove(geo), fs::remove(a), fs::remove(b);
}
