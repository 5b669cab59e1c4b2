#pragma once

// Field evaluation and error norms for patch-wise discrete solutions.

#include <cmath>
#include <vector>

#include "ietidp/assembly.hpp"
#include "ietidp/problems.hpp"

namespace ietidp {

struct FieldValue {
    Eigen::Vector2d x;
    Eigen::Vector2d u;
    Eigen::Matrix2d grad_u;  // physical gradient, (i, j) = d u_i / d x_j
    double p = 0.0;
    double det = 0.0;
};

inline FieldValue eval_field(const TaylorHoodPatchSpace& sp, const GeometryMap& map, const PatchField& f, double xi,
                             double eta)
{
    const TensorSpace& V = sp.velocity();
    const TensorSpace& Q = sp.pressure();
    const int nv = V.dim();
    const MapPoint mp = map.eval(xi, eta);
    const Eigen::Matrix2d JinvT = mp.jacobian.inverse().transpose();
    FieldValue out;
    out.x = mp.x;
    out.det = mp.det;
    out.u.setZero();
    out.grad_u.setZero();
    const BasisEval bx = V.x().eval(xi, 1), by = V.y().eval(eta, 1);
    for (int j = 0; j < by.ders.cols(); ++j)
        for (int i = 0; i < bx.ders.cols(); ++i) {
            const int idx = V.index(bx.first + i, by.first + j);
            const double phi = bx.ders(0, i) * by.ders(0, j);
            const Eigen::Vector2d g = JinvT * Eigen::Vector2d(bx.ders(1, i) * by.ders(0, j),
                                                              bx.ders(0, i) * by.ders(1, j));
            for (int c = 0; c < 2; ++c) {
                out.u[c] += f.u[c * nv + idx] * phi;
                out.grad_u.row(c) += f.u[c * nv + idx] * g.transpose();
            }
        }
    const BasisEval qx = Q.x().eval(xi, 0), qy = Q.y().eval(eta, 0);
    for (int j = 0; j < qy.ders.cols(); ++j)
        for (int i = 0; i < qx.ders.cols(); ++i) out.p += f.p[Q.index(qx.first + i, qy.first + j)] * qx.ders(0, i) * qy.ders(0, j);
    return out;
}

/// Calls fn(FieldValue, weight) at every quadrature point of every patch.
template <class Fn>
void for_each_quadrature_point(const Discretization& d, const std::vector<PatchField>& fields, int extra_points,
                               Fn&& fn)
{
    for (int k = 0; k < d.num_patches(); ++k) {
        const auto& sp = d.spaces[k];
        const int n = sp.velocity().x().degree() + 2 + extra_points;
        const QuadratureRule rule =
            QuadratureRule::on(sp.velocity().x().breakpoints(), sp.velocity().y().breakpoints(), n);
        for (const auto& ry : rule.elements[1])
            for (const auto& rx : rule.elements[0])
                for (int qy = 0; qy < n; ++qy)
                    for (int qx = 0; qx < n; ++qx) {
                        const FieldValue v = eval_field(sp, d.domain.patch(k), fields[k], rx.nodes[qx], ry.nodes[qy]);
                        fn(k, v, rx.weights[qx] * ry.weights[qy] * v.det);
                    }
    }
}

struct ErrorNorms {
    double velocity_h1_semi = 0.0;
    double velocity_l2 = 0.0;
    double pressure_l2 = 0.0;  // both pressures shifted to zero mean
};

inline ErrorNorms compute_errors(const Discretization& d, const std::vector<PatchField>& fields,
                                 const ExactSolution& exact, int extra_points = 3)
{
    double area = 0.0, mean_h = 0.0, mean_e = 0.0;
    for_each_quadrature_point(d, fields, extra_points, [&](int, const FieldValue& v, double w) {
        area += w;
        mean_h += w * v.p;
        mean_e += w * exact.p(v.x);
    });
    mean_h /= area;
    mean_e /= area;
    ErrorNorms e;
    for_each_quadrature_point(d, fields, extra_points, [&](int, const FieldValue& v, double w) {
        e.velocity_h1_semi += w * (v.grad_u - exact.grad_u(v.x)).squaredNorm();
        e.velocity_l2 += w * (v.u - exact.u(v.x)).squaredNorm();
        const double dp = (v.p - mean_h) - (exact.p(v.x) - mean_e);
        e.pressure_l2 += w * dp * dp;
    });
    e.velocity_h1_semi = std::sqrt(e.velocity_h1_semi);
    e.velocity_l2 = std::sqrt(e.velocity_l2);
    e.pressure_l2 = std::sqrt(e.pressure_l2);
    return e;
}

/// Discrete norms of patch-wise coefficient fields: |u|_K^2 = sum u^T K u,
/// ||p||^2 = sum p^T M_p p after removing the global mean.
struct DiscreteNorms {
    static double velocity_h1(const Discretization& d, const std::vector<PatchField>& f)
    {
        double s = 0.0;
        for (int k = 0; k < d.num_patches(); ++k) s += f[k].u.dot(d.systems[k].K_full * f[k].u);
        return std::sqrt(std::max(s, 0.0));
    }

    static double global_mean_pressure(const Discretization& d, const std::vector<PatchField>& f)
    {
        double integral = 0.0, area = 0.0;
        for (int k = 0; k < d.num_patches(); ++k) {
            const Eigen::VectorXd m = d.systems[k].M_p * Eigen::VectorXd::Ones(f[k].p.size());
            integral += m.dot(f[k].p);
            area += d.systems[k].area;
        }
        return integral / area;
    }

    static double pressure_l2(const Discretization& d, const std::vector<PatchField>& f)
    {
        const double mean = global_mean_pressure(d, f);
        double s = 0.0;
        for (int k = 0; k < d.num_patches(); ++k) {
            const Eigen::VectorXd q = f[k].p.array() - mean;
            s += q.dot(d.systems[k].M_p * q);
        }
        return std::sqrt(std::max(s, 0.0));
    }

    static std::vector<PatchField> difference(const std::vector<PatchField>& a, const std::vector<PatchField>& b)
    {
        std::vector<PatchField> out(a.size());
        for (std::size_t k = 0; k < a.size(); ++k) out[k] = {a[k].u - b[k].u, a[k].p - b[k].p};
        return out;
    }
};

}  // namespace ietidp
