#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "ietidp/domains.hpp"
#include "ietidp/geometry_io.hpp"

using namespace ietidp;

TEST(EvalMap, Identity)
{
    const GeometryMap g = GeometryMap::rectangle(0, 0, 1, 1);
    const MapPoint p = eval_map(g, {0.3, 0.7});
    EXPECT_NEAR(p.x[0], 0.3, 1e-15);
    EXPECT_NEAR(p.x[1], 0.7, 1e-15);
    EXPECT_LT((p.jacobian - Eigen::Matrix2d::Identity()).norm(), 1e-15);
    EXPECT_NEAR(p.det, 1.0, 1e-15);
}

TEST(EvalMap, AffineScaling)
{
    const GeometryMap g = GeometryMap::rectangle(0, 0, 2, 1);
    for (double x : {0.0, 0.4, 1.0}) EXPECT_NEAR(eval_map(g, {x, 0.9}).det, 2.0, 1e-14);
}

TEST(EvalMap, DegenerateAndOutOfRange)
{
    const GeometryMap flipped = GeometryMap::rectangle(1, 0, 0, 1);
    EXPECT_THROW(eval_map(flipped, {0.5, 0.5}), DegenerateGeometry);
    EXPECT_THROW(eval_map(GeometryMap::rectangle(0, 0, 1, 1), {1.5, 0.5}), InvalidArgument);
}

TEST(EvalMap, RationalJacobianMatchesFiniteDifference)
{
    const GeometryMap g = quarter_annulus_patch(1.0, 2.0);
    const double h = 1e-6;
    for (double xi : {0.1, 0.5, 0.9})
        for (double eta : {0.2, 0.6}) {
            const MapPoint p = eval_map(g, {xi, eta});
            const Eigen::Vector2d dx = (g.point(xi + h, eta) - g.point(xi - h, eta)) / (2 * h);
            const Eigen::Vector2d dy = (g.point(xi, eta + h) - g.point(xi, eta - h)) / (2 * h);
            EXPECT_LT((p.jacobian.col(0) - dx).norm(), 1e-8);
            EXPECT_LT((p.jacobian.col(1) - dy).norm(), 1e-8);
            EXPECT_NEAR(p.x.norm(), 1.0 + xi, 1e-14);  // exact circle
        }
}

TEST(EvalMap, QuarterAnnulusArea)
{
    EXPECT_NEAR(patch_area(quarter_annulus_patch(1.0, 2.0)), 0.75 * std::numbers::pi, 1e-10);
}

TEST(Topology, GridCombinatorics)
{
    const MultiPatch mp = grid(2, 2);
    EXPECT_EQ(mp.num_patches(), 4);
    EXPECT_EQ(mp.interfaces().size(), 4u);
    int interior = 0;
    for (const auto& v : mp.vertices())
        if (v.num_patches() == 4) ++interior;
    EXPECT_EQ(interior, 1);
    EXPECT_EQ(mp.report().max_vertex_patches, 4);
}

TEST(Topology, CornerContactOnly)
{
    const std::vector<GeometryMap> p{GeometryMap::rectangle(0, 0, 1, 1), GeometryMap::rectangle(1, 1, 2, 2)};
    const TopologyReport r = validate_topology(p, 1e-9);
    EXPECT_TRUE(r.ok());
    EXPECT_EQ(r.interfaces.size(), 0u);
    int shared = 0;
    for (const auto& v : r.vertices)
        if (v.num_patches() == 2) ++shared;
    EXPECT_EQ(shared, 1);
}

TEST(Topology, TJunctionDetected)
{
    const std::vector<GeometryMap> p{GeometryMap::rectangle(0, 0, 1, 1), GeometryMap::rectangle(0, 1, 1, 2),
                                     GeometryMap::rectangle(1, 0, 3, 2)};
    const TopologyReport r = validate_topology(p, 1e-9);
    EXPECT_FALSE(r.ok());
    bool names_pair = false;
    for (const auto& v : r.violations)
        if ((v.patch_a == 2 || v.patch_b == 2)) names_pair = true;
    EXPECT_TRUE(names_pair);
    EXPECT_THROW(MultiPatch(p, {}, {}, std::nullopt, BoundaryTag::Dirichlet), TopologyError);
}

TEST(Topology, UntaggedBoundaryRejected)
{
    std::vector<GeometryMap> p{GeometryMap::rectangle(0, 0, 1, 1)};
    EXPECT_THROW(MultiPatch(p, {}), TopologyError);
}

TEST(Topology, OrderIndependentAndIdempotent)
{
    const MultiPatch mp = quarter_annulus(1.0, 2.0, 3, 2);
    std::vector<GeometryMap> patches = mp.patches();
    const TopologyReport a = validate_topology(patches, 1e-9);
    const TopologyReport b = validate_topology(patches, 1e-9);
    EXPECT_EQ(a.interfaces.size(), b.interfaces.size());

    std::vector<int> perm(patches.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(5);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<GeometryMap> shuffled;
    for (int k : perm) shuffled.push_back(patches[k]);
    const TopologyReport c = validate_topology(shuffled, 1e-9);
    auto key_set = [](const TopologyReport& r, const std::vector<int>& map) {
        std::set<std::tuple<int, int, int, int>> s;
        for (const auto& i : r.interfaces) {
            std::pair<int, int> x{map[i.patch_a], static_cast<int>(i.side_a)};
            std::pair<int, int> y{map[i.patch_b], static_cast<int>(i.side_b)};
            if (y < x) std::swap(x, y);
            s.insert({x.first, x.second, y.first, y.second});
        }
        return s;
    };
    std::vector<int> ident(patches.size());
    std::iota(ident.begin(), ident.end(), 0);
    EXPECT_EQ(key_set(a, ident), key_set(c, perm));
}

TEST(Domains, Examples)
{
    EXPECT_EQ(grid(2, 2).interfaces().size(), 4u);
    const MultiPatch qa = quarter_annulus(1.0, 2.0, 8, 8);
    EXPECT_EQ(qa.num_patches(), 64);
    EXPECT_EQ(qa.interfaces().size(), 112u);
    EXPECT_NEAR(strip(4).domain_diameter(), std::sqrt(17.0), 1e-12);
    EXPECT_THROW(quarter_annulus(2.0, 1.0), InvalidArgument);
    EXPECT_THROW(grid(0, 1), InvalidArgument);
    EXPECT_THROW(build_domain("nonsense"), InvalidArgument);
}

TEST(Domains, AreasMatchAnalytic)
{
    const std::vector<std::pair<MultiPatch, double>> cases{
        {grid(3, 2), 6.0},
        {strip(8), 8.0},
        {quarter_annulus(), 0.75 * std::numbers::pi},
        {rectangle_with_hole(), rectangle_with_hole_area()},
    };
    for (const auto& [mp, area] : cases) EXPECT_NEAR(mp.total_area() / area, 1.0, 1e-8);
}

TEST(Domains, InterfaceTracesCoincide)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (const MultiPatch& mp : {quarter_annulus(), rectangle_with_hole(), grid(3, 3)}) {
        for (const auto& i : mp.interfaces())
            for (int k = 0; k < 50; ++k) {
                const double t = U(rng);
                const Eigen::Vector2d a = mp.patch(i.patch_a).point(side_point(i.side_a, t));
                const Eigen::Vector2d b = mp.patch(i.patch_b).point(side_point(i.side_b, i.partner_t(t)));
                EXPECT_LT((a - b).norm(), 1e-10);
            }
    }
}

TEST(Domains, PositiveJacobian)
{
    const GaussRule1D g = gauss_legendre(6);
    for (const MultiPatch& mp : {quarter_annulus(), rectangle_with_hole(), strip(3)})
        for (const auto& p : mp.patches())
            for (double x : g.nodes)
                for (double y : g.nodes) EXPECT_GT(p.eval(x, y).det, 0.0);
}

TEST(Domains, RectangleWithHoleLayout)
{
    const MultiPatch mp = rectangle_with_hole();
    EXPECT_EQ(mp.num_patches(), 11);
    // 4 ring interfaces, ring-to-channel, 6 channel-to-channel
    EXPECT_EQ(mp.interfaces().size(), 11u);
    EXPECT_TRUE(mp.has_neumann());
    EXPECT_EQ(mp.boundary_tag(10, Side::East), BoundaryTag::Neumann);
    for (double t : {0.0, 0.3, 1.0}) EXPECT_NEAR(mp.patch(0).point(side_point(Side::West, t)).norm(), 1.0, 1e-14);
}

TEST(InterfaceMatching, Examples)
{
    const MultiPatch two = grid(2, 1);
    const SplineSpace s = build_space(Breakpoints::uniform(2), 2, 1);
    const std::vector<TensorSpace> same{TensorSpace(s, s), TensorSpace(s, s)};
    EXPECT_TRUE(check_interface_matching(two, same, 1e-10).ok);

    const std::vector<TensorSpace> refined{TensorSpace(s, s), TensorSpace(s, s).refined(1)};
    const MatchingReport bad = check_interface_matching(two, refined, 1e-10);
    EXPECT_FALSE(bad.ok);
    EXPECT_NE(bad.message.find("interface 0"), std::string::npos);

    // second patch parameterized with eta running downward: shared edge is reversed
    std::vector<GeometryMap> p{GeometryMap::rectangle(0, 0, 1, 1),
                               GeometryMap::bilinear({1, 1}, {2, 1}, {1, 0}, {2, 0})};
    // bilinear above is orientation-reversing; swap xi as well to keep det > 0
    p[1] = GeometryMap::bilinear({2, 1}, {1, 1}, {2, 0}, {1, 0});
    const MultiPatch rev(p, {}, {}, std::nullopt, BoundaryTag::Dirichlet);
    ASSERT_EQ(rev.interfaces().size(), 1u);
    const Breakpoints z({0, 0.3, 1});
    const Breakpoints zr = z.reversed();
    const std::vector<TensorSpace> sp{TensorSpace(build_space(z, 2, 1), build_space(z, 2, 1)),
                                      TensorSpace(build_space(z, 2, 1), build_space(zr, 2, 1))};
    const MatchingReport r = check_interface_matching(rev, sp, 1e-10);
    EXPECT_TRUE(r.ok) << r.message;
    ASSERT_EQ(r.reversed.size(), 1u);
    EXPECT_TRUE(r.reversed[0]);
}

TEST(GeometryIO, RoundTrip)
{
    for (const MultiPatch& mp : {rectangle_with_hole(), quarter_annulus(1.0, 2.0, 2, 2), grid(2, 1)}) {
        std::stringstream ss;
        write_geometry(ss, mp);
        const MultiPatch back = read_geometry(ss);
        ASSERT_EQ(back.num_patches(), mp.num_patches());
        EXPECT_EQ(back.interfaces().size(), mp.interfaces().size());
        EXPECT_NEAR(back.total_area(), mp.total_area(), 1e-12);
        for (int k = 0; k < mp.num_patches(); ++k)
            for (Side s : all_sides) EXPECT_EQ(back.boundary_tag(k, s), mp.boundary_tag(k, s));
    }
}

TEST(GeometryIO, RejectsMalformed)
{
    std::stringstream ss("patches 1\npatch 0\ndegree 1 1\nbreakpoints_x 2 0 1\nbreakpoints_y 2 0 1\n"
                         "smoothness 0 0\ncontrols 2 2\n0 0\n1 0\n0 1\nend\n");
    EXPECT_THROW(read_geometry(ss), InvalidArgument);
}
