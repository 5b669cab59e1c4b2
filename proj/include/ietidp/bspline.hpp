#pragma once

// Univariate and tensor-product B-spline spaces on the unit interval/square.
//
// Spaces are built from strictly increasing breakpoints, a degree p and a
// smoothness s: the knot vector repeats the end breakpoints p+1 times and the
// interior ones p-s times. Bases are evaluated with the Cox-de Boor recursion.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <iterator>
#include <cmath>
#include <span>
#include <vector>

#include "ietidp/error.hpp"

namespace ietidp {

class Breakpoints {
public:
    Breakpoints() : values_{0.0, 1.0} {}

    explicit Breakpoints(std::vector<double> values) : values_(std::move(values))
    {
        IETIDP_REQUIRE(values_.size() >= 2, InvalidArgument, "breakpoints: need at least 2 entries");
        IETIDP_REQUIRE(values_.front() == 0.0 && values_.back() == 1.0, InvalidArgument,
                       "breakpoints: first must be 0 and last must be 1");
        for (std::size_t i = 1; i < values_.size(); ++i)
            IETIDP_REQUIRE(values_[i] > values_[i - 1], InvalidArgument,
                           "breakpoints: values must be strictly increasing");
    }

    static Breakpoints uniform(int num_elements)
    {
        IETIDP_REQUIRE(num_elements >= 1, InvalidArgument, "breakpoints: need at least one element");
        std::vector<double> v(num_elements + 1);
        for (int i = 0; i <= num_elements; ++i) v[i] = static_cast<double>(i) / num_elements;
        v.back() = 1.0;
        return Breakpoints(std::move(v));
    }

    std::span<const double> values() const { return values_; }
    int num_elements() const { return static_cast<int>(values_.size()) - 1; }
    int num_interior() const { return static_cast<int>(values_.size()) - 2; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }

    double width(int e) const { return values_[e + 1] - values_[e]; }

    double max_width() const
    {
        double h = 0.0;
        for (int e = 0; e < num_elements(); ++e) h = std::max(h, width(e));
        return h;
    }

    double min_width() const
    {
        double h = 1.0;
        for (int e = 0; e < num_elements(); ++e) h = std::min(h, width(e));
        return h;
    }

    /// Element containing x; right-continuous except at x = 1.
    int element_of(double x) const
    {
        auto it = std::upper_bound(values_.begin(), values_.end(), x);
        int e = static_cast<int>(it - values_.begin()) - 1;
        return std::clamp(e, 0, num_elements() - 1);
    }

    /// Breakpoints of the mirrored interval, t -> 1 - t.
    Breakpoints reversed() const
    {
        std::vector<double> v(values_.size());
        for (std::size_t i = 0; i < values_.size(); ++i) v[i] = 1.0 - values_[values_.size() - 1 - i];
        v.front() = 0.0;
        v.back() = 1.0;
        return Breakpoints(std::move(v));
    }

    bool approx_equal(const Breakpoints& other, double tol = 1e-12) const
    {
        if (values_.size() != other.values_.size()) return false;
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (std::abs(values_[i] - other.values_[i]) > tol) return false;
        return true;
    }

    friend bool operator==(const Breakpoints&, const Breakpoints&) = default;

private:
    std::vector<double> values_;
};

/// Active basis functions at a point: indices first..first+p and their
/// values (row 0) and derivatives (rows 1..n).
struct BasisEval {
    int first = 0;
    Eigen::MatrixXd ders;  // (order+1) x (p+1)
};

/// Inserts knot t once into a curve with the given knots/coefficients (Boehm).
/// Coefficients are stored one per row.
inline void insert_knot(std::vector<double>& knots, int degree, Eigen::MatrixXd& coeffs, double t)
{
    const int n = static_cast<int>(coeffs.rows());
    auto it = std::upper_bound(knots.begin(), knots.end(), t);
    int k = static_cast<int>(it - knots.begin()) - 1;
    k = std::min(k, n - 1);
    Eigen::MatrixXd q(n + 1, coeffs.cols());
    for (int i = 0; i <= k - degree; ++i) q.row(i) = coeffs.row(i);
    for (int i = k - degree + 1; i <= k; ++i) {
        const double denom = knots[i + degree] - knots[i];
        const double alpha = denom > 0.0 ? (t - knots[i]) / denom : 0.0;
        q.row(i) = alpha * coeffs.row(i) + (1.0 - alpha) * coeffs.row(i - 1);
    }
    for (int i = k + 1; i <= n; ++i) q.row(i) = coeffs.row(i - 1);
    knots.insert(knots.begin() + k + 1, t);
    coeffs = std::move(q);
}

class SplineSpace {
public:
    SplineSpace() : SplineSpace(Breakpoints(), 1, 0) {}

    SplineSpace(Breakpoints breakpoints, int degree, int smoothness)
        : breakpoints_(std::move(breakpoints)), degree_(degree), smoothness_(smoothness)
    {
        IETIDP_REQUIRE(degree_ >= 1, InvalidArgument, "spline space: degree must be >= 1");
        IETIDP_REQUIRE(smoothness_ >= 0 && smoothness_ <= degree_ - 1, InvalidArgument,
                       "spline space: smoothness must satisfy 0 <= s <= p-1");
        const auto z = breakpoints_.values();
        for (int r = 0; r <= degree_; ++r) knots_.push_back(z.front());
        for (std::size_t i = 1; i + 1 < z.size(); ++i)
            for (int r = 0; r < degree_ - smoothness_; ++r) knots_.push_back(z[i]);
        for (int r = 0; r <= degree_; ++r) knots_.push_back(z.back());
    }

    const Breakpoints& breakpoints() const { return breakpoints_; }
    int degree() const { return degree_; }
    int smoothness() const { return smoothness_; }
    std::span<const double> knots() const { return knots_; }
    int dim() const { return static_cast<int>(knots_.size()) - degree_ - 1; }
    int num_elements() const { return breakpoints_.num_elements(); }

    /// Knot span index mu with knots[mu] <= x < knots[mu+1] (left limit at x = 1).
    int find_span(double x) const
    {
        auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
        int mu = static_cast<int>(it - knots_.begin()) - 1;
        return std::clamp(mu, degree_, dim() - 1);
    }

    /// Values and derivatives up to `order` of the p+1 active functions at x.
    BasisEval eval(double x, int order) const
    {
        IETIDP_REQUIRE(x >= 0.0 && x <= 1.0, InvalidArgument, "spline eval: x outside [0,1]");
        const int p = degree_;
        const int mu = find_span(x);
        const int n = std::min(order, p);

        // Triangular table of basis values and knot differences (Piegl-Tiller A2.3).
        Eigen::MatrixXd ndu(p + 1, p + 1);
        std::vector<double> left(p + 1), right(p + 1);
        ndu(0, 0) = 1.0;
        for (int j = 1; j <= p; ++j) {
            left[j] = x - knots_[mu + 1 - j];
            right[j] = knots_[mu + j] - x;
            double saved = 0.0;
            for (int r = 0; r < j; ++r) {
                ndu(j, r) = right[r + 1] + left[j - r];
                const double temp = ndu(r, j - 1) / ndu(j, r);
                ndu(r, j) = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu(j, j) = saved;
        }

        BasisEval out;
        out.first = mu - p;
        out.ders = Eigen::MatrixXd::Zero(order + 1, p + 1);
        for (int j = 0; j <= p; ++j) out.ders(0, j) = ndu(j, p);

        Eigen::MatrixXd a(2, p + 1);
        for (int r = 0; r <= p; ++r) {
            int s1 = 0, s2 = 1;
            a(0, 0) = 1.0;
            for (int k = 1; k <= n; ++k) {
                double d = 0.0;
                const int rk = r - k, pk = p - k;
                if (r >= k) {
                    a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
                    d = a(s2, 0) * ndu(rk, pk);
                }
                const int j1 = rk >= -1 ? 1 : -rk;
                const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
                for (int j = j1; j <= j2; ++j) {
                    a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
                    d += a(s2, j) * ndu(rk + j, pk);
                }
                if (r <= pk) {
                    a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
                    d += a(s2, k) * ndu(r, pk);
                }
                out.ders(k, r) = d;
                std::swap(s1, s2);
            }
        }
        double fac = p;
        for (int k = 1; k <= n; ++k) {
            out.ders.row(k) *= fac;
            fac *= (p - k);
        }
        return out;
    }

    /// Value of every basis function at x (dense, length dim()).
    Eigen::VectorXd eval_all(double x, int order = 0) const
    {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(dim());
        const BasisEval b = eval(x, order);
        for (int j = 0; j <= degree_; ++j) v[b.first + j] = b.ders(order, j);
        return v;
    }

    /// Greville abscissae (knot averages).
    std::vector<double> greville() const
    {
        std::vector<double> g(dim());
        for (int i = 0; i < dim(); ++i) {
            double s = 0.0;
            for (int r = 1; r <= degree_; ++r) s += knots_[i + r];
            g[i] = s / degree_;
        }
        return g;
    }

    bool same_discretization(const SplineSpace& o, double tol = 1e-12) const
    {
        return degree_ == o.degree_ && smoothness_ == o.smoothness_ &&
               breakpoints_.approx_equal(o.breakpoints_, tol);
    }

private:
    Breakpoints breakpoints_;
    int degree_;
    int smoothness_;
    std::vector<double> knots_;
};

inline SplineSpace build_space(const Breakpoints& breakpoints, int degree, int smoothness)
{
    return SplineSpace(breakpoints, degree, smoothness);
}

/// Univariate evaluation: first active index and the p+1 active values of the
/// basis (order 0) or of its first derivatives (order 1).
inline std::pair<int, Eigen::VectorXd> eval_basis(const SplineSpace& space, double x, int derivative_order)
{
    IETIDP_REQUIRE(derivative_order == 0 || derivative_order == 1, InvalidArgument,
                   "eval_basis: derivative order must be 0 or 1");
    const BasisEval b = space.eval(x, derivative_order);
    return {b.first, b.ders.row(derivative_order).transpose()};
}

inline Breakpoints bisect(const Breakpoints& z, int levels)
{
    std::vector<double> v(z.values().begin(), z.values().end());
    for (int l = 0; l < levels; ++l) {
        std::vector<double> w;
        w.reserve(2 * v.size() - 1);
        for (std::size_t i = 0; i + 1 < v.size(); ++i) {
            w.push_back(v[i]);
            w.push_back(0.5 * (v[i] + v[i + 1]));
        }
        w.push_back(v.back());
        v = std::move(w);
    }
    return Breakpoints(std::move(v));
}

inline SplineSpace refine_uniform(const SplineSpace& space, int levels)
{
    IETIDP_REQUIRE(levels >= 0, InvalidArgument, "refine_uniform: levels must be >= 0");
    return SplineSpace(bisect(space.breakpoints(), levels), space.degree(), space.smoothness());
}

/// Matrix E (fine.dim x coarse.dim) with coarse_basis_j = sum_i E(i,j) fine_basis_i,
/// obtained by inserting the missing knots one at a time.
inline Eigen::MatrixXd refinement_matrix(const SplineSpace& coarse, const SplineSpace& fine)
{
    IETIDP_REQUIRE(coarse.degree() == fine.degree(), InvalidArgument,
                   "refinement_matrix: degrees differ");
    std::vector<double> missing;
    const auto ck = coarse.knots();
    const auto fk = fine.knots();
    std::set_difference(fk.begin(), fk.end(), ck.begin(), ck.end(), std::back_inserter(missing));
    std::vector<double> knots(ck.begin(), ck.end());
    Eigen::MatrixXd coeffs = Eigen::MatrixXd::Identity(coarse.dim(), coarse.dim());
    for (double t : missing) insert_knot(knots, coarse.degree(), coeffs, t);
    IETIDP_REQUIRE(static_cast<int>(coeffs.rows()) == fine.dim(), InvalidArgument,
                   "refinement_matrix: fine space does not contain the coarse space");
    return coeffs;
}

/// Tensor-product space with lexicographic dof ordering (x fastest).
class TensorSpace {
public:
    TensorSpace() = default;
    TensorSpace(SplineSpace sx, SplineSpace sy) : sx_(std::move(sx)), sy_(std::move(sy)) {}

    const SplineSpace& x() const { return sx_; }
    const SplineSpace& y() const { return sy_; }
    const SplineSpace& dir(int d) const { return d == 0 ? sx_ : sy_; }
    int nx() const { return sx_.dim(); }
    int ny() const { return sy_.dim(); }
    int dim() const { return nx() * ny(); }
    int index(int i, int j) const { return i + nx() * j; }

    double grid_size() const { return std::max(sx_.breakpoints().max_width(), sy_.breakpoints().max_width()); }
    double min_grid_size() const
    {
        return std::min(sx_.breakpoints().min_width(), sy_.breakpoints().min_width());
    }
    double quasi_uniformity() const { return min_grid_size() / grid_size(); }

    TensorSpace refined(int levels) const { return {refine_uniform(sx_, levels), refine_uniform(sy_, levels)}; }

private:
    SplineSpace sx_;
    SplineSpace sy_;
};

/// Gauss-Legendre nodes and weights on [0,1].
struct GaussRule1D {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline GaussRule1D gauss_legendre(int n)
{
    IETIDP_REQUIRE(n >= 1, InvalidArgument, "gauss_legendre: need n >= 1");
    // (P_n(x), P_n'(x)) by the three-term recurrence
    auto legendre = [n](double x) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        if (n == 1) p0 = 1.0;
        return std::pair{p1, n * (x * p1 - p0) / (x * x - 1.0)};
    };
    GaussRule1D rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            const auto [p, dp] = legendre(x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double dp = legendre(x).second;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = 0.5 * (1.0 - x);
        rule.nodes[n - 1 - i] = 0.5 * (1.0 + x);
        rule.weights[i] = rule.weights[n - 1 - i] = 0.5 * w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.5;
    return rule;
}

/// Per-element Gauss rule in each parameter direction.
struct QuadratureRule {
    int points_per_direction = 0;
    // [direction][element] -> nodes/weights in parameter coordinates
    std::array<std::vector<GaussRule1D>, 2> elements;

    static QuadratureRule on(const Breakpoints& bx, const Breakpoints& by, int n)
    {
        QuadratureRule q;
        q.points_per_direction = n;
        const GaussRule1D ref = gauss_legendre(n);
        const Breakpoints* b[2] = {&bx, &by};
        for (int d = 0; d < 2; ++d) {
            for (int e = 0; e < b[d]->num_elements(); ++e) {
                GaussRule1D r;
                const double a = (*b[d])[e], h = b[d]->width(e);
                for (int k = 0; k < n; ++k) {
                    r.nodes.push_back(a + h * ref.nodes[k]);
                    r.weights.push_back(h * ref.weights[k]);
                }
                q.elements[d].push_back(std::move(r));
            }
        }
        return q;
    }
};

/// Per-element rule for a velocity/pressure pair: max degree + 2 points per direction.
inline QuadratureRule gauss_rule(const TensorSpace& a, const TensorSpace& b)
{
    const int pmax = std::max({a.x().degree(), a.y().degree(), b.x().degree(), b.y().degree()});
    return QuadratureRule::on(a.x().breakpoints(), a.y().breakpoints(), pmax + 2);
}

}  // namespace ietidp
