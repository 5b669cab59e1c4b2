#pragma once

// Built-in multi-patch domains.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "ietidp/geometry.hpp"

namespace ietidp {

/// m x n grid of unit squares, patch (i, j) = [i,i+1] x [j,j+1] with index i + m j.
inline MultiPatch grid(int m, int n, BoundaryTag outer = BoundaryTag::Dirichlet)
{
    IETIDP_REQUIRE(m >= 1 && n >= 1, InvalidArgument, "grid: m and n must be >= 1");
    std::vector<GeometryMap> patches;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < m; ++i) patches.push_back(GeometryMap::rectangle(i, j, i + 1, j + 1));
    return MultiPatch(std::move(patches), {}, {}, std::nullopt, outer);
}

/// L unit squares in a row.
inline MultiPatch strip(int length)
{
    IETIDP_REQUIRE(length >= 1, InvalidArgument, "strip: L must be >= 1");
    return grid(length, 1);
}

/// Exact quarter annulus in the first quadrant: xi radial (degree 1), eta angular (degree 2).
inline GeometryMap quarter_annulus_patch(double r_in, double r_out)
{
    IETIDP_REQUIRE(0.0 < r_in && r_in < r_out, InvalidArgument, "quarter_annulus: need 0 < r_in < r_out");
    const SplineSpace radial(Breakpoints(), 1, 0);
    const SplineSpace angular(Breakpoints(), 2, 1);
    Eigen::MatrixX2d c(6, 2);
    Eigen::VectorXd w(6);
    const double r[2] = {r_in, r_out};
    for (int i = 0; i < 2; ++i) {
        c.row(i + 0) << r[i], 0.0;
        c.row(i + 2) << r[i], r[i];
        c.row(i + 4) << 0.0, r[i];
        w[i] = 1.0;
        w[i + 2] = std::sqrt(0.5);
        w[i + 4] = 1.0;
    }
    return GeometryMap(TensorSpace(radial, angular), c, w);
}

/// Quarter annulus split into m (radial) x n (angular) patches in parameter space.
inline MultiPatch quarter_annulus(double r_in = 1.0, double r_out = 2.0, int m = 8, int n = 8)
{
    IETIDP_REQUIRE(m >= 1 && n >= 1, InvalidArgument, "quarter_annulus: m and n must be >= 1");
    const GeometryMap whole = quarter_annulus_patch(r_in, r_out);
    std::vector<GeometryMap> patches;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < m; ++i)
            patches.push_back(whole.sub_patch(static_cast<double>(i) / m, static_cast<double>(i + 1) / m,
                                              static_cast<double>(j) / n, static_cast<double>(j + 1) / n));
    return MultiPatch(std::move(patches), {}, {}, std::nullopt, BoundaryTag::Dirichlet);
}

/// Patch indices of the hole and inflow boundaries of rectangle_with_hole.
struct HoleChannelLayout {
    static constexpr int ring_west = 0, ring_south = 1, ring_east = 2, ring_north = 3;
    static constexpr int first_channel = 4, num_channel = 7;
    static constexpr double hole_radius = 1.0, half_width = 2.0, x_end = 30.0;
};

/// Channel [-2,30] x [-2,2] with a circular hole of radius 1 at the origin:
/// four rational ring patches around the hole and seven affine channel patches.
/// Inlet (x = -2), walls and hole are Dirichlet, the outlet (x = 30) is Neumann.
inline MultiPatch rectangle_with_hole()
{
    using L = HoleChannelLayout;
    const SplineSpace radial(Breakpoints(), 1, 0);
    const SplineSpace angular(Breakpoints(), 2, 1);
    const double s = std::sqrt(0.5);
    // east ring patch, eta from -45 to +45 degrees; rows i = 0 (arc) and i = 1 (square side)
    Eigen::MatrixX2d east(6, 2);
    east << s, -s, 2.0, -2.0, std::sqrt(2.0), 0.0, 2.0, 0.0, s, s, 2.0, 2.0;
    Eigen::VectorXd w(6);
    w << 1.0, 1.0, s, 1.0, 1.0, 1.0;

    std::vector<GeometryMap> patches;
    const double rot[4] = {std::numbers::pi, 1.5 * std::numbers::pi, 0.0, 0.5 * std::numbers::pi};
    for (double a : rot) {
        Eigen::Matrix2d R;
        R << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
        Eigen::MatrixX2d c = (R * east.transpose()).transpose();
        patches.emplace_back(TensorSpace(radial, angular), c, w);
    }
    for (int i = 0; i < L::num_channel; ++i)
        patches.push_back(GeometryMap::rectangle(2.0 + 4.0 * i, -2.0, 6.0 + 4.0 * i, 2.0));

    std::vector<BoundaryEdge> bnd;
    for (int k = 0; k < 4; ++k) bnd.push_back({k, Side::West, BoundaryTag::Dirichlet});  // hole
    bnd.push_back({L::ring_west, Side::East, BoundaryTag::Dirichlet});                  // inlet
    bnd.push_back({L::ring_south, Side::East, BoundaryTag::Dirichlet});
    bnd.push_back({L::ring_north, Side::East, BoundaryTag::Dirichlet});
    for (int i = 0; i < L::num_channel; ++i) {
        bnd.push_back({L::first_channel + i, Side::South, BoundaryTag::Dirichlet});
        bnd.push_back({L::first_channel + i, Side::North, BoundaryTag::Dirichlet});
    }
    bnd.push_back({L::first_channel + L::num_channel - 1, Side::East, BoundaryTag::Neumann});
    return MultiPatch(std::move(patches), std::move(bnd));
}

inline double rectangle_with_hole_area()
{
    return 16.0 - std::numbers::pi + 4.0 * 28.0;
}

/// Builds a named domain: "grid:M,N", "strip:L", "quarter_annulus[:r_in,r_out,m,n]",
/// "rectangle_with_hole".
inline MultiPatch build_domain(const std::string& spec)
{
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    std::vector<double> args;
    if (colon != std::string::npos) {
        std::string rest = spec.substr(colon + 1);
        std::size_t pos = 0;
        while (pos <= rest.size()) {
            const auto comma = rest.find(',', pos);
            const std::string tok = rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            try {
                std::size_t used = 0;
                args.push_back(std::stod(tok, &used));
                IETIDP_REQUIRE(used == tok.size(), InvalidArgument, "");
            } catch (const std::exception&) {
                throw InvalidArgument("domain '" + spec + "': bad parameter '" + tok + "'");
            }
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }
    auto as_int = [&](double v) {
        IETIDP_REQUIRE(v == std::floor(v), InvalidArgument, "domain '" + spec + "': expected an integer");
        return static_cast<int>(v);
    };
    if (name == "grid") {
        IETIDP_REQUIRE(args.size() == 2, InvalidArgument, "grid needs two parameters, e.g. grid:2,2");
        return grid(as_int(args[0]), as_int(args[1]));
    }
    if (name == "strip") {
        IETIDP_REQUIRE(args.size() == 1, InvalidArgument, "strip needs one parameter, e.g. strip:4");
        return strip(as_int(args[0]));
    }
    if (name == "quarter_annulus") {
        if (args.empty()) return quarter_annulus();
        IETIDP_REQUIRE(args.size() == 4, InvalidArgument,
                       "quarter_annulus needs r_in,r_out,m,n, e.g. quarter_annulus:1,2,8,8");
        return quarter_annulus(args[0], args[1], as_int(args[2]), as_int(args[3]));
    }
    if (name == "rectangle_with_hole") {
        IETIDP_REQUIRE(args.empty(), InvalidArgument, "rectangle_with_hole takes no parameters");
        return rectangle_with_hole();
    }
    throw InvalidArgument("unknown domain '" + name + "'");
}

/// Image of every patch under x -> A x + b (det A > 0), same boundary tags.
inline MultiPatch affine_image(const MultiPatch& mp, const Eigen::Matrix2d& A, const Eigen::Vector2d& b)
{
    IETIDP_REQUIRE(A.determinant() > 0.0, InvalidArgument, "affine image: map must preserve orientation");
    std::vector<GeometryMap> patches;
    for (const auto& g : mp.patches()) {
        Eigen::MatrixX2d c = g.controls() * A.transpose();
        c.rowwise() += b.transpose();
        patches.emplace_back(g.space(), std::move(c), g.weights());
    }
    return MultiPatch(std::move(patches), mp.boundary_edges());
}

}  // namespace ietidp
