#pragma once

// Patch geometry maps (polynomial or rational tensor splines) and multi-patch
// topology: interface detection, vertex incidence and boundary tagging.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ietidp/bspline.hpp"
#include "ietidp/error.hpp"

namespace ietidp {

enum class Side : int { West = 0, East = 1, South = 2, North = 3 };

inline constexpr std::array<Side, 4> all_sides{Side::West, Side::East, Side::South, Side::North};

inline const char* side_name(Side s)
{
    switch (s) {
        case Side::West: return "west";
        case Side::East: return "east";
        case Side::South: return "south";
        case Side::North: return "north";
    }
    return "?";
}

inline Side parse_side(const std::string& s)
{
    if (s == "west") return Side::West;
    if (s == "east") return Side::East;
    if (s == "south") return Side::South;
    if (s == "north") return Side::North;
    throw InvalidArgument("unknown side '" + s + "'");
}

/// Parameter direction running along a side (0 = xi, 1 = eta).
inline int tangent_dir(Side s) { return (s == Side::West || s == Side::East) ? 1 : 0; }

/// Parameter point on a side for edge parameter t in [0,1].
inline Eigen::Vector2d side_point(Side s, double t)
{
    switch (s) {
        case Side::West: return {0.0, t};
        case Side::East: return {1.0, t};
        case Side::South: return {t, 0.0};
        case Side::North: return {t, 1.0};
    }
    return {0.0, 0.0};
}

/// Corner numbering: i + 2 j for parameter corner (i, j) in {0,1}^2.
inline std::array<int, 2> side_corners(Side s)
{
    switch (s) {
        case Side::West: return {0, 2};
        case Side::East: return {1, 3};
        case Side::South: return {0, 1};
        case Side::North: return {2, 3};
    }
    return {0, 0};
}

/// Sign so that sign * rot90cw(dG/dt) is the outward normal.
inline double outward_sign(Side s) { return (s == Side::East || s == Side::South) ? 1.0 : -1.0; }

struct MapPoint {
    Eigen::Vector2d x;
    Eigen::Matrix2d jacobian;  // columns: dG/dxi, dG/deta
    double det = 0.0;
};

class GeometryMap {
public:
    GeometryMap() = default;

    GeometryMap(TensorSpace space, Eigen::MatrixX2d controls, Eigen::VectorXd weights = {})
        : space_(std::move(space)), controls_(std::move(controls)), weights_(std::move(weights))
    {
        IETIDP_REQUIRE(controls_.rows() == space_.dim(), InvalidArgument,
                       "geometry map: control grid size does not match the spline space");
        if (weights_.size() == 0) weights_ = Eigen::VectorXd::Ones(space_.dim());
        IETIDP_REQUIRE(weights_.size() == space_.dim(), InvalidArgument,
                       "geometry map: weight grid size does not match the spline space");
        IETIDP_REQUIRE(weights_.minCoeff() > 0.0, InvalidArgument, "geometry map: weights must be positive");
        rational_ = (weights_.array() - 1.0).abs().maxCoeff() > 0.0;
    }

    /// Bilinear map with the given parameter-corner images (SW, SE, NW, NE).
    static GeometryMap bilinear(const Eigen::Vector2d& sw, const Eigen::Vector2d& se, const Eigen::Vector2d& nw,
                                const Eigen::Vector2d& ne)
    {
        SplineSpace lin(Breakpoints(), 1, 0);
        Eigen::MatrixX2d c(4, 2);
        c.row(0) = sw;
        c.row(1) = se;
        c.row(2) = nw;
        c.row(3) = ne;
        return GeometryMap(TensorSpace(lin, lin), c);
    }

    /// Axis-aligned rectangle [x0,x1] x [y0,y1].
    static GeometryMap rectangle(double x0, double y0, double x1, double y1)
    {
        return bilinear({x0, y0}, {x1, y0}, {x0, y1}, {x1, y1});
    }

    const TensorSpace& space() const { return space_; }
    const Eigen::MatrixX2d& controls() const { return controls_; }
    const Eigen::VectorXd& weights() const { return weights_; }
    bool rational() const { return rational_; }

    /// Point, Jacobian and determinant (no degeneracy check).
    MapPoint eval(double xi, double eta) const
    {
        const BasisEval bx = space_.x().eval(xi, 1);
        const BasisEval by = space_.y().eval(eta, 1);
        Eigen::Vector3d s = Eigen::Vector3d::Zero(), sx = Eigen::Vector3d::Zero(), sy = Eigen::Vector3d::Zero();
        for (int b = 0; b < by.ders.cols(); ++b) {
            for (int a = 0; a < bx.ders.cols(); ++a) {
                const int idx = space_.index(bx.first + a, by.first + b);
                const double w = weights_[idx];
                const Eigen::Vector3d h(w * controls_(idx, 0), w * controls_(idx, 1), w);
                s += bx.ders(0, a) * by.ders(0, b) * h;
                sx += bx.ders(1, a) * by.ders(0, b) * h;
                sy += bx.ders(0, a) * by.ders(1, b) * h;
            }
        }
        MapPoint out;
        out.x = s.head<2>() / s[2];
        out.jacobian.col(0) = (sx.head<2>() - out.x * sx[2]) / s[2];
        out.jacobian.col(1) = (sy.head<2>() - out.x * sy[2]) / s[2];
        out.det = out.jacobian.determinant();
        return out;
    }

    Eigen::Vector2d point(double xi, double eta) const { return eval(xi, eta).x; }
    Eigen::Vector2d point(const Eigen::Vector2d& xi) const { return eval(xi[0], xi[1]).x; }

    Eigen::Vector2d corner(int c) const { return point(c % 2, c / 2); }

    /// Restriction to the parameter box [a0,a1] x [b0,b1], reparameterized onto
    /// the unit square. Requires a single-element (Bezier) map.
    GeometryMap sub_patch(double a0, double a1, double b0, double b1) const
    {
        IETIDP_REQUIRE(space_.x().num_elements() == 1 && space_.y().num_elements() == 1, InvalidArgument,
                       "sub_patch: only single-element maps can be split");
        const int nx = space_.nx(), ny = space_.ny();
        std::vector<Eigen::Vector3d> h(nx * ny);
        for (int i = 0; i < nx * ny; ++i)
            h[i] = Eigen::Vector3d(weights_[i] * controls_(i, 0), weights_[i] * controls_(i, 1), weights_[i]);
        auto restrict_curve = [](std::vector<Eigen::Vector3d> pts, double a, double b) {
            // split at b, keep the left part, split that at a/b, keep the right part
            auto split = [](std::vector<Eigen::Vector3d> q, double t, bool keep_left) {
                const int p = static_cast<int>(q.size()) - 1;
                std::vector<Eigen::Vector3d> left(p + 1), right(p + 1);
                left[0] = q[0];
                right[p] = q[p];
                for (int r = 1; r <= p; ++r) {
                    for (int i = 0; i <= p - r; ++i) q[i] = (1.0 - t) * q[i] + t * q[i + 1];
                    left[r] = q[0];
                    right[p - r] = q[p - r];
                }
                return keep_left ? left : right;
            };
            if (b < 1.0) pts = split(pts, b, true);
            if (a > 0.0) pts = split(pts, a / b, false);
            return pts;
        };
        for (int j = 0; j < ny; ++j) {
            std::vector<Eigen::Vector3d> row(nx);
            for (int i = 0; i < nx; ++i) row[i] = h[i + nx * j];
            row = restrict_curve(row, a0, a1);
            for (int i = 0; i < nx; ++i) h[i + nx * j] = row[i];
        }
        for (int i = 0; i < nx; ++i) {
            std::vector<Eigen::Vector3d> col(ny);
            for (int j = 0; j < ny; ++j) col[j] = h[i + nx * j];
            col = restrict_curve(col, b0, b1);
            for (int j = 0; j < ny; ++j) h[i + nx * j] = col[j];
        }
        Eigen::MatrixX2d c(nx * ny, 2);
        Eigen::VectorXd w(nx * ny);
        for (int i = 0; i < nx * ny; ++i) {
            w[i] = h[i][2];
            c.row(i) = h[i].head<2>() / h[i][2];
        }
        if (!rational_) w.setOnes();
        return GeometryMap(space_, c, w);
    }

private:
    TensorSpace space_;
    Eigen::MatrixX2d controls_;
    Eigen::VectorXd weights_;
    bool rational_ = false;
};

/// Map evaluation that rejects non-orientation-preserving points.
inline MapPoint eval_map(const GeometryMap& map, const Eigen::Vector2d& xi)
{
    IETIDP_REQUIRE(xi[0] >= 0.0 && xi[0] <= 1.0 && xi[1] >= 0.0 && xi[1] <= 1.0, InvalidArgument,
                   "eval_map: parameter point outside the unit square");
    MapPoint p = map.eval(xi[0], xi[1]);
    if (!(p.det > 0.0)) {
        std::ostringstream os;
        os << "degenerate Jacobian (det = " << p.det << ") at xi = (" << xi[0] << ", " << xi[1] << ")";
        throw DegenerateGeometry(os.str());
    }
    return p;
}

/// Physical tangent dG/dt along a side.
inline Eigen::Vector2d side_tangent(const MapPoint& p, Side s) { return p.jacobian.col(tangent_dir(s)); }

/// Outward normal times the length element: n ds = this * dt.
inline Eigen::Vector2d side_normal_ds(const MapPoint& p, Side s)
{
    const Eigen::Vector2d t = side_tangent(p, s);
    return outward_sign(s) * Eigen::Vector2d(t[1], -t[0]);
}

inline Eigen::Vector2d side_unit_normal(const MapPoint& p, Side s)
{
    return side_normal_ds(p, s).normalized();
}

/// Area of a patch by tensor Gauss quadrature on a sub-grid of the map's elements.
inline double patch_area(const GeometryMap& g, int subdivisions = 8, int points = 8)
{
    double area = 0.0;
    const GaussRule1D gr = gauss_legendre(points);
    const auto& bx = g.space().x().breakpoints();
    const auto& by = g.space().y().breakpoints();
    for (int ey = 0; ey < by.num_elements(); ++ey)
        for (int ex = 0; ex < bx.num_elements(); ++ex)
            for (int sy = 0; sy < subdivisions; ++sy)
                for (int sx = 0; sx < subdivisions; ++sx) {
                    const double hx = bx.width(ex) / subdivisions, hy = by.width(ey) / subdivisions;
                    const double x0 = bx[ex] + sx * hx, y0 = by[ey] + sy * hy;
                    for (int qy = 0; qy < points; ++qy)
                        for (int qx = 0; qx < points; ++qx)
                            area += g.eval(x0 + hx * gr.nodes[qx], y0 + hy * gr.nodes[qy]).det * hx * hy *
                                    gr.weights[qx] * gr.weights[qy];
                }
    return area;
}

/// Samples of the patch boundary curve (n points per side).
inline std::vector<Eigen::Vector2d> boundary_samples(const GeometryMap& g, int n = 16)
{
    std::vector<Eigen::Vector2d> pts;
    for (Side s : all_sides)
        for (int i = 0; i <= n; ++i) pts.push_back(g.point(side_point(s, static_cast<double>(i) / n)));
    return pts;
}

inline double diameter_of(const std::vector<Eigen::Vector2d>& pts)
{
    double d = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, (pts[i] - pts[j]).norm());
    return d;
}

inline double patch_diameter(const GeometryMap& g) { return diameter_of(boundary_samples(g)); }

enum class BoundaryTag { Dirichlet, Neumann };

inline const char* tag_name(BoundaryTag t) { return t == BoundaryTag::Dirichlet ? "dirichlet" : "neumann"; }

struct Interface {
    int patch_a = 0;
    Side side_a = Side::West;
    int patch_b = 0;
    Side side_b = Side::West;
    bool reversed = false;  // edge parameter t on side_a meets 1-t on side_b

    double partner_t(double t) const { return reversed ? 1.0 - t : t; }
};

struct BoundaryEdge {
    int patch = 0;
    Side side = Side::West;
    BoundaryTag tag = BoundaryTag::Dirichlet;
};

struct Vertex {
    Eigen::Vector2d x;
    std::vector<std::pair<int, int>> incident;  // (patch, corner)

    /// Number of distinct patches touching the vertex.
    int num_patches() const
    {
        std::vector<int> p;
        for (auto [k, c] : incident) p.push_back(k);
        std::sort(p.begin(), p.end());
        return static_cast<int>(std::unique(p.begin(), p.end()) - p.begin());
    }
};

struct TopologyViolation {
    int patch_a = -1;
    int patch_b = -1;
    std::string what;
};

struct TopologyReport {
    std::vector<Interface> interfaces;
    std::vector<Vertex> vertices;
    std::vector<std::array<int, 4>> corner_vertex;  // per patch: vertex index of each corner
    std::vector<TopologyViolation> violations;
    int max_vertex_patches = 0;
    std::vector<double> diameters;
    std::vector<double> distortion;          // max_x ||J|| ||J^-1|| per patch
    std::vector<double> min_normal_alignment;  // per interface: min n(xbar).n(x)

    bool ok() const { return violations.empty(); }
};

namespace detail {

inline double distance_to_side(const GeometryMap& g, Side s, const Eigen::Vector2d& x, double* t_best = nullptr)
{
    constexpr int n = 64;
    int best = 0;
    double dbest = 1e300;
    for (int i = 0; i <= n; ++i) {
        const double d = (g.point(side_point(s, static_cast<double>(i) / n)) - x).norm();
        if (d < dbest) dbest = d, best = i;
    }
    double lo = std::max(0.0, (best - 1.0) / n), hi = std::min(1.0, (best + 1.0) / n);
    auto f = [&](double t) { return (g.point(side_point(s, t)) - x).norm(); };
    for (int it = 0; it < 100; ++it) {
        const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
        if (f(m1) < f(m2)) hi = m2; else lo = m1;
    }
    const double t = 0.5 * (lo + hi);
    if (t_best) *t_best = t;
    return std::min(dbest, f(t));
}

inline double jacobian_distortion(const GeometryMap& g)
{
    const auto& bx = g.space().x().breakpoints();
    const auto& by = g.space().y().breakpoints();
    const GaussRule1D gr = gauss_legendre(3);
    constexpr int sub = 4;
    double worst = 0.0;
    for (int ey = 0; ey < by.num_elements(); ++ey)
        for (int ex = 0; ex < bx.num_elements(); ++ex)
            for (int sy = 0; sy < sub; ++sy)
                for (int sx = 0; sx < sub; ++sx)
                    for (double qy : gr.nodes)
                        for (double qx : gr.nodes) {
                            const double xi = bx[ex] + bx.width(ex) * (sx + qx) / sub;
                            const double eta = by[ey] + by.width(ey) * (sy + qy) / sub;
                            const MapPoint p = g.eval(xi, eta);
                            Eigen::JacobiSVD<Eigen::Matrix2d> svd(p.jacobian);
                            const auto sv = svd.singularValues();
                            worst = std::max(worst, sv[0] / sv[1]);
                        }
    return worst;
}

}  // namespace detail

/// Detects interfaces (matching edge corner pairs and midpoints), clusters
/// patch corners into vertices and reports conformity violations (T-junctions).
inline TopologyReport validate_topology(std::span<const GeometryMap> patches, double tol)
{
    IETIDP_REQUIRE(tol > 0.0, InvalidArgument, "validate_topology: tol must be positive");
    TopologyReport rep;
    const int K = static_cast<int>(patches.size());
    for (const auto& g : patches) rep.diameters.push_back(patch_diameter(g));
    for (const auto& g : patches) rep.distortion.push_back(detail::jacobian_distortion(g));

    // vertices
    rep.corner_vertex.assign(K, {-1, -1, -1, -1});
    for (int k = 0; k < K; ++k) {
        for (int c = 0; c < 4; ++c) {
            const Eigen::Vector2d x = patches[k].corner(c);
            int found = -1;
            for (std::size_t v = 0; v < rep.vertices.size(); ++v)
                if ((rep.vertices[v].x - x).norm() <= tol) {
                    found = static_cast<int>(v);
                    break;
                }
            if (found < 0) {
                rep.vertices.push_back({x, {}});
                found = static_cast<int>(rep.vertices.size()) - 1;
            }
            rep.vertices[found].incident.push_back({k, c});
            rep.corner_vertex[k][c] = found;
        }
    }
    for (const auto& v : rep.vertices) rep.max_vertex_patches = std::max(rep.max_vertex_patches, v.num_patches());

    // interfaces: edge pairs with matching end vertices and midpoints
    std::vector<std::array<bool, 4>> used(K, {false, false, false, false});
    for (int a = 0; a < K; ++a) {
        for (Side sa : all_sides) {
            const auto ca = side_corners(sa);
            const int va0 = rep.corner_vertex[a][ca[0]], va1 = rep.corner_vertex[a][ca[1]];
            for (int b = a + 1; b < K; ++b) {
                for (Side sb : all_sides) {
                    const auto cb = side_corners(sb);
                    const int vb0 = rep.corner_vertex[b][cb[0]], vb1 = rep.corner_vertex[b][cb[1]];
                    bool reversed;
                    if (va0 == vb0 && va1 == vb1) reversed = false;
                    else if (va0 == vb1 && va1 == vb0) reversed = true;
                    else continue;
                    const Eigen::Vector2d ma = patches[a].point(side_point(sa, 0.5));
                    const Eigen::Vector2d mb = patches[b].point(side_point(sb, 0.5));
                    if ((ma - mb).norm() > tol) continue;
                    if (used[a][static_cast<int>(sa)] || used[b][static_cast<int>(sb)]) {
                        rep.violations.push_back({a, b, "edge shared by more than two patches"});
                        continue;
                    }
                    used[a][static_cast<int>(sa)] = used[b][static_cast<int>(sb)] = true;
                    rep.interfaces.push_back({a, sa, b, sb, reversed});
                }
            }
        }
    }

    // two patches may share at most one edge
    {
        std::map<std::pair<int, int>, int> count;
        for (const auto& i : rep.interfaces) ++count[{i.patch_a, i.patch_b}];
        for (auto [key, n] : count)
            if (n > 1) rep.violations.push_back({key.first, key.second, "patches share more than one edge"});
    }

    // T-junctions: a vertex lying in the interior of another patch's edge
    for (std::size_t v = 0; v < rep.vertices.size(); ++v) {
        const Vertex& vx = rep.vertices[v];
        for (int k = 0; k < K; ++k) {
            for (Side s : all_sides) {
                const auto c = side_corners(s);
                if (rep.corner_vertex[k][c[0]] == static_cast<int>(v) ||
                    rep.corner_vertex[k][c[1]] == static_cast<int>(v))
                    continue;
                double t = 0.0;
                if (detail::distance_to_side(patches[k], s, vx.x, &t) <= tol && t > 1e-9 && t < 1.0 - 1e-9) {
                    std::ostringstream os;
                    os << "T-junction: corner of patch " << vx.incident.front().first << " lies inside the "
                       << side_name(s) << " edge of patch " << k;
                    rep.violations.push_back({vx.incident.front().first, k, os.str()});
                }
            }
        }
    }

    // Assumption on interface normals: min over edge points of n(xbar).n(x)
    for (const auto& i : rep.interfaces) {
        const auto& g = patches[i.patch_a];
        const Eigen::Vector2d nbar = side_unit_normal(g.eval(side_point(i.side_a, 0.5)[0],
                                                             side_point(i.side_a, 0.5)[1]),
                                                      i.side_a);
        double m = 1.0;
        for (int q = 0; q <= 32; ++q) {
            const Eigen::Vector2d xi = side_point(i.side_a, q / 32.0);
            m = std::min(m, nbar.dot(side_unit_normal(g.eval(xi[0], xi[1]), i.side_a)));
        }
        rep.min_normal_alignment.push_back(m);
    }
    return rep;
}

/// Multi-patch domain with validated topology and complete boundary tagging.
class MultiPatch {
public:
    MultiPatch() = default;

    /// Builds the topology; interfaces are detected when `interfaces` is empty.
    /// Untagged external edges receive `default_tag` when given, else are an error.
    MultiPatch(std::vector<GeometryMap> patches, std::vector<BoundaryEdge> boundary,
               std::vector<Interface> interfaces = {}, std::optional<double> tol = std::nullopt,
               std::optional<BoundaryTag> default_tag = std::nullopt)
        : patches_(std::move(patches))
    {
        IETIDP_REQUIRE(!patches_.empty(), InvalidArgument, "multipatch: no patches");
        double hmax = 0.0;
        for (const auto& g : patches_) hmax = std::max(hmax, patch_diameter(g));
        tol_ = tol.value_or(1e-8 * hmax);
        report_ = validate_topology(patches_, tol_);
        if (!report_.ok()) throw TopologyError(report_.violations.front().what);
        if (!interfaces.empty()) {
            // explicit interfaces must agree with the detected ones
            for (const auto& i : interfaces) {
                bool found = false;
                for (const auto& d : report_.interfaces) {
                    const bool same = (d.patch_a == i.patch_a && d.side_a == i.side_a && d.patch_b == i.patch_b &&
                                       d.side_b == i.side_b) ||
                                      (d.patch_a == i.patch_b && d.side_a == i.side_b && d.patch_b == i.patch_a &&
                                       d.side_b == i.side_a);
                    if (same) {
                        found = true;
                        IETIDP_REQUIRE(d.reversed == i.reversed, TopologyError,
                                       "multipatch: interface orientation disagrees with the geometry");
                    }
                }
                IETIDP_REQUIRE(found, TopologyError, "multipatch: listed interface does not match the geometry");
            }
            IETIDP_REQUIRE(interfaces.size() == report_.interfaces.size(), TopologyError,
                           "multipatch: interface list is incomplete");
        }
        interfaces_ = report_.interfaces;

        side_kind_.assign(patches_.size(), {-1, -1, -1, -1});
        side_interface_.assign(patches_.size(), {-1, -1, -1, -1});
        for (std::size_t n = 0; n < interfaces_.size(); ++n) {
            const auto& i = interfaces_[n];
            side_interface_[i.patch_a][static_cast<int>(i.side_a)] = static_cast<int>(n);
            side_interface_[i.patch_b][static_cast<int>(i.side_b)] = static_cast<int>(n);
        }
        for (const auto& e : boundary) {
            IETIDP_REQUIRE(e.patch >= 0 && e.patch < num_patches(), InvalidArgument,
                           "multipatch: boundary entry refers to an unknown patch");
            IETIDP_REQUIRE(side_interface_[e.patch][static_cast<int>(e.side)] < 0, TopologyError,
                           "multipatch: boundary tag on an interface edge");
            IETIDP_REQUIRE(side_kind_[e.patch][static_cast<int>(e.side)] < 0, TopologyError,
                           "multipatch: edge tagged twice");
            side_kind_[e.patch][static_cast<int>(e.side)] = static_cast<int>(e.tag);
        }
        for (int k = 0; k < num_patches(); ++k)
            for (Side s : all_sides) {
                const int si = static_cast<int>(s);
                if (side_interface_[k][si] >= 0 || side_kind_[k][si] >= 0) continue;
                if (!default_tag) {
                    std::ostringstream os;
                    os << "multipatch: boundary edge (patch " << k << ", " << side_name(s) << ") has no tag";
                    throw TopologyError(os.str());
                }
                side_kind_[k][si] = static_cast<int>(*default_tag);
            }
        for (const auto& g : patches_) areas_.push_back(patch_area(g));
    }

    int num_patches() const { return static_cast<int>(patches_.size()); }
    const GeometryMap& patch(int k) const { return patches_[k]; }
    const std::vector<GeometryMap>& patches() const { return patches_; }
    const std::vector<Interface>& interfaces() const { return interfaces_; }
    const std::vector<Vertex>& vertices() const { return report_.vertices; }
    const TopologyReport& report() const { return report_; }
    double tolerance() const { return tol_; }

    bool is_interface(int k, Side s) const { return side_interface_[k][static_cast<int>(s)] >= 0; }
    int interface_index(int k, Side s) const { return side_interface_[k][static_cast<int>(s)]; }
    std::optional<BoundaryTag> boundary_tag(int k, Side s) const
    {
        const int t = side_kind_[k][static_cast<int>(s)];
        if (t < 0) return std::nullopt;
        return static_cast<BoundaryTag>(t);
    }
    bool is_dirichlet(int k, Side s) const { return boundary_tag(k, s) == BoundaryTag::Dirichlet; }
    bool has_neumann() const
    {
        for (int k = 0; k < num_patches(); ++k)
            for (Side s : all_sides)
                if (boundary_tag(k, s) == BoundaryTag::Neumann) return true;
        return false;
    }

    std::vector<BoundaryEdge> boundary_edges() const
    {
        std::vector<BoundaryEdge> out;
        for (int k = 0; k < num_patches(); ++k)
            for (Side s : all_sides)
                if (auto t = boundary_tag(k, s)) out.push_back({k, s, *t});
        return out;
    }

    int corner_vertex(int k, int c) const { return report_.corner_vertex[k][c]; }

    /// True iff the vertex touches a Dirichlet edge of any patch.
    bool vertex_on_dirichlet(int v) const
    {
        for (auto [k, c] : report_.vertices[v].incident)
            for (Side s : all_sides) {
                const auto sc = side_corners(s);
                if ((sc[0] == c || sc[1] == c) && is_dirichlet(k, s)) return true;
            }
        return false;
    }

    /// Patches sharing an edge with patch k.
    std::vector<int> edge_neighbors(int k) const
    {
        std::vector<int> out;
        for (const auto& i : interfaces_) {
            if (i.patch_a == k) out.push_back(i.patch_b);
            if (i.patch_b == k) out.push_back(i.patch_a);
        }
        return out;
    }

    double area(int k) const { return areas_[k]; }
    double total_area() const
    {
        double a = 0.0;
        for (double x : areas_) a += x;
        return a;
    }
    double patch_diameter_of(int k) const { return report_.diameters[k]; }

    double domain_diameter() const
    {
        std::vector<Eigen::Vector2d> pts;
        for (const auto& g : patches_) {
            auto s = boundary_samples(g, 8);
            pts.insert(pts.end(), s.begin(), s.end());
        }
        return diameter_of(pts);
    }

private:
    std::vector<GeometryMap> patches_;
    std::vector<Interface> interfaces_;
    TopologyReport report_;
    std::vector<std::array<int, 4>> side_kind_;       // -1 interface/untagged, else BoundaryTag
    std::vector<std::array<int, 4>> side_interface_;  // interface index or -1
    std::vector<double> areas_;
    double tol_ = 1e-8;
};

inline TopologyReport validate_topology(const MultiPatch& mp, double tol)
{
    return validate_topology(std::span<const GeometryMap>(mp.patches()), tol);
}

struct MatchingReport {
    bool ok = true;
    std::string message;
    std::vector<bool> reversed;  // per interface
};

/// Checks that degree, smoothness, breakpoints and geometry traces agree along
/// every interface so that trace dofs pair one-to-one.
inline MatchingReport check_interface_matching(const MultiPatch& mp, std::span<const TensorSpace> spaces, double tol)
{
    MatchingReport rep;
    IETIDP_REQUIRE(static_cast<int>(spaces.size()) == mp.num_patches(), InvalidArgument,
                   "check_interface_matching: one space per patch required");
    for (std::size_t n = 0; n < mp.interfaces().size(); ++n) {
        const Interface& i = mp.interfaces()[n];
        const SplineSpace& ea = spaces[i.patch_a].dir(tangent_dir(i.side_a));
        const SplineSpace& eb = spaces[i.patch_b].dir(tangent_dir(i.side_b));
        std::ostringstream where;
        where << "interface " << n << " (patch " << i.patch_a << " " << side_name(i.side_a) << " / patch "
              << i.patch_b << " " << side_name(i.side_b) << ")";
        if (ea.degree() != eb.degree() || ea.smoothness() != eb.smoothness()) {
            rep.ok = false;
            rep.message = where.str() + ": degree or smoothness differ";
            return rep;
        }
        const Breakpoints zb = i.reversed ? eb.breakpoints().reversed() : eb.breakpoints();
        if (!ea.breakpoints().approx_equal(zb, 1e-12)) {
            rep.ok = false;
            rep.message = where.str() + ": breakpoints differ";
            return rep;
        }
        for (double t : ea.greville()) {
            const Eigen::Vector2d xa = mp.patch(i.patch_a).point(side_point(i.side_a, t));
            const Eigen::Vector2d xb = mp.patch(i.patch_b).point(side_point(i.side_b, i.partner_t(t)));
            if ((xa - xb).norm() > tol) {
                rep.ok = false;
                rep.message = where.str() + ": geometry traces differ";
                return rep;
            }
        }
        rep.reversed.push_back(i.reversed);
    }
    return rep;
}

}  // namespace ietidp
