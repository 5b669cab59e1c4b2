#pragma once

// Plain-text multi-patch geometry format (see docs/geometry_format.md).

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ietidp/geometry.hpp"

namespace ietidp {

namespace detail {

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    // next non-empty, non-comment line split into tokens; empty at end of input
    std::vector<std::string> next()
    {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
            std::istringstream ss(line);
            std::vector<std::string> tok;
            for (std::string t; ss >> t;) tok.push_back(t);
            if (!tok.empty()) return tok;
        }
        return {};
    }

    [[noreturn]] void fail(const std::string& msg) const
    {
        throw InvalidArgument("geometry file, line " + std::to_string(line_no_) + ": " + msg);
    }

    std::vector<std::string> expect(const std::string& keyword, std::size_t min_tokens)
    {
        auto t = next();
        if (t.empty()) fail("unexpected end of file, expected '" + keyword + "'");
        if (t[0] != keyword) fail("expected '" + keyword + "', found '" + t[0] + "'");
        if (t.size() < min_tokens) fail("'" + keyword + "' line is too short");
        return t;
    }

    double number(const std::string& s) const
    {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) fail("bad number '" + s + "'");
            return v;
        } catch (const std::logic_error&) {
            fail("bad number '" + s + "'");
        }
    }

    int integer(const std::string& s) const
    {
        const double v = number(s);
        if (v != static_cast<int>(v)) fail("expected an integer, found '" + s + "'");
        return static_cast<int>(v);
    }

private:
    std::istream& in_;
    int line_no_ = 0;
};

}  // namespace detail

inline MultiPatch read_geometry(std::istream& in)
{
    detail::LineReader rd(in);
    const auto head = rd.expect("patches", 2);
    const int K = rd.integer(head[1]);
    if (K < 1) rd.fail("need at least one patch");
    std::vector<GeometryMap> patches;
    for (int k = 0; k < K; ++k) {
        const auto ph = rd.expect("patch", 2);
        if (rd.integer(ph[1]) != k) rd.fail("patches must be listed in order");
        const auto deg = rd.expect("degree", 3);
        const int px = rd.integer(deg[1]), py = rd.integer(deg[2]);
        auto read_bp = [&](const std::string& key) {
            const auto t = rd.expect(key, 2);
            const int n = rd.integer(t[1]);
            if (static_cast<int>(t.size()) != n + 2) rd.fail("'" + key + "' count does not match its values");
            std::vector<double> z;
            for (int i = 0; i < n; ++i) z.push_back(rd.number(t[i + 2]));
            return Breakpoints(std::move(z));
        };
        const Breakpoints bx = read_bp("breakpoints_x");
        const Breakpoints by = read_bp("breakpoints_y");
        const auto sm = rd.expect("smoothness", 3);
        const TensorSpace space(SplineSpace(bx, px, rd.integer(sm[1])), SplineSpace(by, py, rd.integer(sm[2])));
        const auto ct = rd.expect("controls", 3);
        const int nx = rd.integer(ct[1]), ny = rd.integer(ct[2]);
        if (nx != space.nx() || ny != space.ny()) rd.fail("control grid does not match degree and breakpoints");
        Eigen::MatrixX2d c(nx * ny, 2);
        Eigen::VectorXd w = Eigen::VectorXd::Ones(nx * ny);
        int width = -1;
        for (int i = 0; i < nx * ny; ++i) {
            const auto row = rd.next();
            if (row.size() != 2 && row.size() != 3) rd.fail("control rows need 'x y' or 'x y w'");
            if (width < 0) width = static_cast<int>(row.size());
            if (static_cast<int>(row.size()) != width) rd.fail("weights must be given for all or no control points");
            c(i, 0) = rd.number(row[0]);
            c(i, 1) = rd.number(row[1]);
            if (width == 3) w[i] = rd.number(row[2]);
        }
        rd.expect("end", 1);
        patches.emplace_back(space, c, w);
    }

    std::vector<Interface> interfaces;
    std::vector<BoundaryEdge> boundary;
    for (auto t = rd.next(); !t.empty(); t = rd.next()) {
        if (t[0] == "interfaces" && t.size() == 2) {
            const int n = rd.integer(t[1]);
            for (int i = 0; i < n; ++i) {
                const auto r = rd.next();
                if (r.size() != 5) rd.fail("interface rows are 'patch side patch side aligned|reversed'");
                if (r[4] != "aligned" && r[4] != "reversed") rd.fail("orientation must be aligned or reversed");
                interfaces.push_back(
                    {rd.integer(r[0]), parse_side(r[1]), rd.integer(r[2]), parse_side(r[3]), r[4] == "reversed"});
            }
        } else if (t[0] == "boundary" && t.size() == 2) {
            const int n = rd.integer(t[1]);
            for (int i = 0; i < n; ++i) {
                const auto r = rd.next();
                if (r.size() != 3) rd.fail("boundary rows are 'patch side dirichlet|neumann'");
                BoundaryTag tag;
                if (r[2] == "dirichlet") tag = BoundaryTag::Dirichlet;
                else if (r[2] == "neumann") tag = BoundaryTag::Neumann;
                else rd.fail("unknown boundary tag '" + r[2] + "'");
                boundary.push_back({rd.integer(r[0]), parse_side(r[1]), tag});
            }
        } else {
            rd.fail("unknown section '" + t[0] + "'");
        }
    }
    if (boundary.empty()) return MultiPatch(std::move(patches), {}, std::move(interfaces), std::nullopt,
                                            BoundaryTag::Dirichlet);
    return MultiPatch(std::move(patches), std::move(boundary), std::move(interfaces));
}

inline MultiPatch read_geometry_file(const std::string& path)
{
    std::ifstream in(path);
    IETIDP_REQUIRE(in.good(), InvalidArgument, "cannot open geometry file '" + path + "'");
    return read_geometry(in);
}

inline void write_geometry(std::ostream& out, const MultiPatch& mp)
{
    out << std::setprecision(17);
    out << "patches " << mp.num_patches() << "\n";
    for (int k = 0; k < mp.num_patches(); ++k) {
        const GeometryMap& g = mp.patch(k);
        const TensorSpace& s = g.space();
        out << "patch " << k << "\n";
        out << "degree " << s.x().degree() << " " << s.y().degree() << "\n";
        for (int d = 0; d < 2; ++d) {
            const auto z = s.dir(d).breakpoints().values();
            out << (d == 0 ? "breakpoints_x " : "breakpoints_y ") << z.size();
            for (double v : z) out << " " << v;
            out << "\n";
        }
        out << "smoothness " << s.x().smoothness() << " " << s.y().smoothness() << "\n";
        out << "controls " << s.nx() << " " << s.ny() << "\n";
        for (int i = 0; i < s.dim(); ++i) {
            out << g.controls()(i, 0) << " " << g.controls()(i, 1);
            if (g.rational()) out << " " << g.weights()[i];
            out << "\n";
        }
        out << "end\n";
    }
    out << "interfaces " << mp.interfaces().size() << "\n";
    for (const auto& i : mp.interfaces())
        out << i.patch_a << " " << side_name(i.side_a) << " " << i.patch_b << " " << side_name(i.side_b) << " "
            << (i.reversed ? "reversed" : "aligned") << "\n";
    const auto bnd = mp.boundary_edges();
    out << "boundary " << bnd.size() << "\n";
    for (const auto& e : bnd) out << e.patch << " " << side_name(e.side) << " " << tag_name(e.tag) << "\n";
}

}  // namespace ietidp
