#pragma once

// Problem data: manufactured Stokes solution and the channel-with-hole flow.

#include <cmath>
#include <numbers>

#include "ietidp/assembly.hpp"
#include "ietidp/domains.hpp"

namespace ietidp {

struct ExactSolution {
    VectorField u;
    std::function<Eigen::Matrix2d(const Eigen::Vector2d&)> grad_u;  // (i, j) = d u_i / d x_j
    ScalarField p;                                                // up to an additive constant
};

/// u = (-sin(pi x) cos(pi y), cos(pi x) sin(pi y)), p = sin(pi x) (+ const),
/// f = -Laplace(u) - grad(p) for the sign convention K u + D^T p = f.
struct Manufactured {
    static Eigen::Vector2d u(const Eigen::Vector2d& x)
    {
        constexpr double pi = std::numbers::pi;
        return {-std::sin(pi * x[0]) * std::cos(pi * x[1]), std::cos(pi * x[0]) * std::sin(pi * x[1])};
    }
    static Eigen::Matrix2d grad_u(const Eigen::Vector2d& x)
    {
        constexpr double pi = std::numbers::pi;
        const double sx = std::sin(pi * x[0]), cx = std::cos(pi * x[0]);
        const double sy = std::sin(pi * x[1]), cy = std::cos(pi * x[1]);
        Eigen::Matrix2d g;
        g << -pi * cx * cy, pi * sx * sy, -pi * sx * sy, pi * cx * cy;
        return g;
    }
    static double p(const Eigen::Vector2d& x) { return std::sin(std::numbers::pi * x[0]); }
    static Eigen::Vector2d f(const Eigen::Vector2d& x)
    {
        constexpr double pi = std::numbers::pi;
        const double sx = std::sin(pi * x[0]), cx = std::cos(pi * x[0]);
        const double sy = std::sin(pi * x[1]), cy = std::cos(pi * x[1]);
        return {-pi * cx - 2.0 * pi * pi * sx * cy, 2.0 * pi * pi * cx * sy};
    }

    static StokesProblem problem() { return {f, u}; }
    static ExactSolution exact() { return {u, grad_u, p}; }
};

/// Zero load, parabolic-sine inflow at x = -2, no-slip elsewhere (walls and hole).
struct ChannelFlow {
    static Eigen::Vector2d dirichlet(const Eigen::Vector2d& x)
    {
        if (std::abs(x[0] + HoleChannelLayout::half_width) < 1e-9)
            return {std::sin(std::numbers::pi * (HoleChannelLayout::half_width + x[1]) / 4.0), 0.0};
        return {0.0, 0.0};
    }
    static StokesProblem problem() { return {nullptr, dirichlet}; }
};

}  // namespace ietidp
