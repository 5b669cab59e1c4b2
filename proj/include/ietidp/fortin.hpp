#pragma once

// Interface bubble correction: for each interface a continuous velocity
// supported on the two adjacent patches restores the normal flux of a field
// through that interface.

#include <Eigen/Dense>

#include <random>
#include <vector>

#include "ietidp/constraints.hpp"

namespace ietidp {

namespace detail {

/// Coefficients of a polynomial in a spline space of sufficient degree, by
/// interpolation at the Greville abscissae.
template <class F>
Eigen::VectorXd interpolate_polynomial(const SplineSpace& s, F&& f)
{
    const std::vector<double> g = s.greville();
    const int n = s.dim();
    Eigen::MatrixXd colloc = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd rhs(n);
    for (int i = 0; i < n; ++i) {
        const BasisEval be = s.eval(g[i], 0);
        for (int a = 0; a < be.ders.cols(); ++a) colloc(i, be.first + a) = be.ders(0, a);
        rhs[i] = f(g[i]);
    }
    return colloc.partialPivLu().solve(rhs);
}

/// Bubble that is t(1-t) along side s, linear across, zero on the other sides.
inline Eigen::VectorXd side_bubble(const TensorSpace& V, Side s)
{
    const auto bump = [](double t) { return t * (1.0 - t); };
    const auto up = [](double t) { return t; };
    const auto down = [](double t) { return 1.0 - t; };
    Eigen::VectorXd cx, cy;
    switch (s) {
    case Side::East: cx = interpolate_polynomial(V.x(), up), cy = interpolate_polynomial(V.y(), bump); break;
    case Side::West: cx = interpolate_polynomial(V.x(), down), cy = interpolate_polynomial(V.y(), bump); break;
    case Side::South: cx = interpolate_polynomial(V.x(), bump), cy = interpolate_polynomial(V.y(), down); break;
    case Side::North: cx = interpolate_polynomial(V.x(), bump), cy = interpolate_polynomial(V.y(), up); break;
    }
    Eigen::VectorXd c(V.dim());
    for (int j = 0; j < V.ny(); ++j)
        for (int i = 0; i < V.nx(); ++i) c[V.index(i, j)] = cx[i] * cy[j];
    return c;
}

}  // namespace detail

class InterfaceFluxCorrection {
public:
    explicit InterfaceFluxCorrection(const Discretization& d) : d_(&d)
    {
        const MultiPatch& mp = d.domain;
        for (std::size_t n = 0; n < mp.interfaces().size(); ++n) {
            const Interface& i = mp.interfaces()[n];
            Bubble b;
            b.patch_a = i.patch_a;
            b.patch_b = i.patch_b;
            b.side_a = i.side_a;
            const GeometryMap& ga = mp.patch(i.patch_a);
            const Eigen::Vector2d xi = side_point(i.side_a, 0.5);
            b.normal = side_unit_normal(ga.eval(xi[0], xi[1]), i.side_a);
            b.weights = detail::edge_flux_weights(d.spaces[i.patch_a], ga, i.side_a);
            b.psi_a = field_of(i.patch_a, detail::side_bubble(d.spaces[i.patch_a].velocity(), i.side_a), b.normal);
            b.psi_b = field_of(i.patch_b, detail::side_bubble(d.spaces[i.patch_b].velocity(), i.side_b), b.normal);
            b.psi_flux = flux(b, b.psi_a);
            IETIDP_REQUIRE(std::abs(b.psi_flux) > 0.0, DegenerateGeometry, "flux correction: bubble has zero flux");
            bubbles_.push_back(std::move(b));
        }
    }

    int num_interfaces() const { return static_cast<int>(bubbles_.size()); }

    /// Normal flux of patchwise full velocity vectors through interface n,
    /// measured with the normal of its first patch.
    double interface_flux(int n, const std::vector<Eigen::VectorXd>& u) const
    {
        return flux(bubbles_[n], u[bubbles_[n].patch_a]);
    }

    /// Pi u = sum_n flux_n(u) / flux_n(psi_n) psi_n, on full patch velocity vectors.
    std::vector<Eigen::VectorXd> apply(const std::vector<Eigen::VectorXd>& u) const
    {
        std::vector<Eigen::VectorXd> out(u.size());
        for (std::size_t k = 0; k < u.size(); ++k) out[k] = Eigen::VectorXd::Zero(u[k].size());
        for (const auto& b : bubbles_) {
            const double c = flux(b, u[b.patch_a]) / b.psi_flux;
            out[b.patch_a] += c * b.psi_a;
            out[b.patch_b] += c * b.psi_b;
        }
        return out;
    }

    /// The bubble of interface n on both patches.
    std::pair<const Eigen::VectorXd&, const Eigen::VectorXd&> bubble(int n) const
    {
        return {bubbles_[n].psi_a, bubbles_[n].psi_b};
    }

private:
    struct Bubble {
        int patch_a = 0, patch_b = 0;
        Side side_a = Side::West;
        Eigen::Vector2d normal;
        Eigen::MatrixX2d weights;
        Eigen::VectorXd psi_a, psi_b;
        double psi_flux = 0.0;
    };

    Eigen::VectorXd field_of(int k, const Eigen::VectorXd& scalar, const Eigen::Vector2d& n) const
    {
        const int nv = d_->spaces[k].scalar_velocity_dim();
        Eigen::VectorXd v(2 * nv);
        v << n[0] * scalar, n[1] * scalar;
        return v;
    }

    double flux(const Bubble& b, const Eigen::VectorXd& ua) const
    {
        const auto& sp = d_->spaces[b.patch_a];
        const int nv = sp.scalar_velocity_dim();
        const auto dofs = sp.side_dofs(b.side_a);
        double f = 0.0;
        for (std::size_t e = 0; e < dofs.size(); ++e)
            f += b.weights(e, 0) * ua[dofs[e]] + b.weights(e, 1) * ua[nv + dofs[e]];
        return f;
    }

    const Discretization* d_;
    std::vector<Bubble> bubbles_;
};

/// Integral of div u over each patch, from the assembled divergence matrices.
inline Eigen::VectorXd patch_divergence_integrals(const Discretization& d, const std::vector<Eigen::VectorXd>& u)
{
    Eigen::VectorXd out(d.num_patches());
    for (int k = 0; k < d.num_patches(); ++k)
        out[k] = (d.systems[k].D_full * u[k]).sum();
    return out;
}

/// Random conforming velocity vanishing on the Dirichlet boundary, as full patch vectors.
inline std::vector<Eigen::VectorXd> random_conforming_velocity(const Discretization& d, const GlobalNumbering& num,
                                                              std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Eigen::VectorXd x(num.num_velocity);
    for (int i = 0; i < x.size(); ++i) x[i] = U(rng);
    std::vector<Eigen::VectorXd> u(d.num_patches());
    for (int k = 0; k < d.num_patches(); ++k) {
        const auto& sp = d.spaces[k];
        u[k] = Eigen::VectorXd::Zero(sp.num_velocity());
        for (int full = 0; full < sp.num_velocity(); ++full)
            if (const int pos = sp.free_position(full); pos >= 0) u[k][full] = x[num.free_to_global[k][pos]];
    }
    return u;
}

}  // namespace ietidp
