#pragma once

// Tabular output: CSV with a fixed header and minimal quoting, aligned text
// tables, and the structured-text export of patch fields.

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "ietidp/norms.hpp"

namespace ietidp {

using Row = std::vector<std::string>;

inline std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

inline void write_csv(std::ostream& os, const Row& header, const std::vector<Row>& rows)
{
    auto line = [&](const Row& r) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_field(r[i]);
        os << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
}

inline void write_table(std::ostream& os, const Row& header, const std::vector<Row>& rows)
{
    std::vector<std::size_t> w(header.size());
    for (std::size_t i = 0; i < header.size(); ++i) w[i] = header[i].size();
    for (const auto& r : rows)
        for (std::size_t i = 0; i < r.size() && i < w.size(); ++i) w[i] = std::max(w[i], r[i].size());
    auto line = [&](const Row& r) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i) os << "  ";
            os << std::string(w[i] - r[i].size(), ' ') << r[i];
        }
        os << '\n';
    };
    line(header);
    std::size_t total = 0;
    for (auto x : w) total += x;
    os << std::string(total + 2 * (w.size() - 1), '-') << '\n';
    for (const auto& r : rows) line(r);
}

/// Shortest round-trippable-enough decimal for reports.
inline std::string fmt(double v, int digits = 6)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

/// Per-patch coefficient grids plus field samples on an (n+1) x (n+1)
/// parameter lattice.
inline void write_fields(std::ostream& os, const Discretization& d, const std::vector<PatchField>& f, int lattice)
{
    os << "# ietidp fields\n";
    os << "degree " << d.degree << " smoothness " << d.smoothness << " refinement " << d.refinement << '\n';
    os << "patches " << d.num_patches() << '\n';
    for (int k = 0; k < d.num_patches(); ++k) {
        const auto& sp = d.spaces[k];
        const int nv = sp.scalar_velocity_dim();
        os << "patch " << k << '\n';
        os << "velocity " << sp.velocity().nx() << ' ' << sp.velocity().ny() << '\n';
        for (int i = 0; i < nv; ++i) os << fmt(f[k].u[i], 12) << ' ' << fmt(f[k].u[nv + i], 12) << '\n';
        os << "pressure " << sp.pressure().nx() << ' ' << sp.pressure().ny() << '\n';
        for (int i = 0; i < sp.num_pressure(); ++i) os << fmt(f[k].p[i], 12) << '\n';
        os << "samples " << lattice + 1 << ' ' << lattice + 1 << '\n';
        for (int j = 0; j <= lattice; ++j)
            for (int i = 0; i <= lattice; ++i) {
                const double xi = static_cast<double>(i) / lattice, eta = static_cast<double>(j) / lattice;
                const FieldValue v = eval_field(sp, d.domain.patch(k), f[k], xi, eta);
                os << fmt(xi, 12) << ' ' << fmt(eta, 12) << ' ' << fmt(v.x[0], 12) << ' ' << fmt(v.x[1], 12) << ' '
                   << fmt(v.u[0], 12) << ' ' << fmt(v.u[1], 12) << ' ' << fmt(v.p, 12) << '\n';
            }
        os << "end\n";
    }
}

}  // namespace ietidp
