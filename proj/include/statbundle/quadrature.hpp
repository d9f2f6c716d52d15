#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "statbundle/hermite.hpp"
#include "statbundle/scalar_field.hpp"

namespace statbundle {

/// Compensated sum in a fixed order; keeps quadrature results deterministic
/// and accurate near the 1e-10 tolerances used throughout.
class KahanAccumulator {
public:
    void add(double v) {
        const double y = v - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double sum() const { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

struct GaussHermiteRule {
    std::vector<double> nodes;    // ascending
    std::vector<double> weights;  // sum to 1; exact for polynomials of degree <= 2m-1 against gamma
};

namespace detail {

/// Orthonormal probabilists' Hermite p_k = H_k / sqrt(k!) evaluated by the
/// normalized recurrence p_{k+1} = (t p_k - sqrt(k) p_{k-1}) / sqrt(k+1).
inline void orthonormal_hermite_table(int m, double t, std::span<double> out) {
    out[0] = 1.0;
    if (m >= 1) out[1] = t;
    for (int k = 1; k < m; ++k)
        out[static_cast<size_t>(k + 1)] =
            (t * out[static_cast<size_t>(k)] - std::sqrt(static_cast<double>(k)) * out[static_cast<size_t>(k - 1)]) /
            std::sqrt(static_cast<double>(k + 1));
}

}  // namespace detail

/// Gauss-Hermite rule for the standard Gaussian measure on R.  Nodes from the
/// Jacobi matrix (Golub-Welsch), polished by Newton on the orthonormal
/// recurrence; weights w_i = 1 / sum_{k<m} p_k(x_i)^2.
inline GaussHermiteRule gauss_hermite(int m) {
    if (m < 1 || m > 128) throw std::invalid_argument("gauss_hermite: order must be in [1, 128]");
    GaussHermiteRule rule;
    if (m == 1) {
        rule.nodes = {0.0};
        rule.weights = {1.0};
        return rule;
    }
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd sub(m - 1);
    for (int k = 1; k < m; ++k) sub(k - 1) = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);

    std::vector<double> tab(static_cast<size_t>(m + 1));
    rule.nodes.resize(static_cast<size_t>(m));
    rule.weights.resize(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
        double x = es.eigenvalues()(i);
        for (int it = 0; it < 8; ++it) {
            detail::orthonormal_hermite_table(m, x, tab);
            const double num = tab[static_cast<size_t>(m)];
            const double den = std::sqrt(static_cast<double>(m)) * tab[static_cast<size_t>(m - 1)];
            const double step = num / den;
            x -= step;
            if (std::abs(step) < 1e-15 * (1.0 + std::abs(x))) break;
        }
        detail::orthonormal_hermite_table(m, x, tab);
        double s = 0.0;
        for (int k = 0; k < m; ++k) s += tab[static_cast<size_t>(k)] * tab[static_cast<size_t>(k)];
        rule.nodes[static_cast<size_t>(i)] = x;
        rule.weights[static_cast<size_t>(i)] = 1.0 / s;
    }
    // enforce even symmetry of the rule
    for (int i = 0; i < m / 2; ++i) {
        const size_t j = static_cast<size_t>(m - 1 - i);
        const double n = 0.5 * (rule.nodes[static_cast<size_t>(i)] - rule.nodes[j]);
        rule.nodes[static_cast<size_t>(i)] = n;
        rule.nodes[j] = -n;
        const double w = 0.5 * (rule.weights[static_cast<size_t>(i)] + rule.weights[j]);
        rule.weights[static_cast<size_t>(i)] = w;
        rule.weights[j] = w;
    }
    if (m % 2 == 1) rule.nodes[static_cast<size_t>(m / 2)] = 0.0;
    return rule;
}

/// Tensor Gauss-Hermite grid integrating against the standard Gaussian on R^n.
/// Tensor grids are capped at n <= 4; higher dimensions go through Monte Carlo.
class QuadratureGrid {
public:
    static constexpr int kMaxTensorDim = 4;

    QuadratureGrid(int dim, int order = 40) : dim_(dim), order_(order) {
        if (dim < 1) throw std::invalid_argument("QuadratureGrid: dimension must be positive");
        if (dim > kMaxTensorDim)
            throw std::invalid_argument("QuadratureGrid: tensor grids capped at dimension 4; use Monte Carlo");
        const GaussHermiteRule rule = gauss_hermite(order);
        size_t count = 1;
        for (int i = 0; i < dim; ++i) count *= static_cast<size_t>(order);
        nodes_.resize(count * static_cast<size_t>(dim));
        weights_.resize(count);
        std::vector<size_t> idx(static_cast<size_t>(dim), 0);
        for (size_t k = 0; k < count; ++k) {
            double w = 1.0;
            for (int i = 0; i < dim; ++i) {
                nodes_[k * static_cast<size_t>(dim) + static_cast<size_t>(i)] = rule.nodes[idx[static_cast<size_t>(i)]];
                w *= rule.weights[idx[static_cast<size_t>(i)]];
            }
            weights_[k] = w;
            for (int i = dim - 1; i >= 0; --i) {
                if (++idx[static_cast<size_t>(i)] < static_cast<size_t>(order)) break;
                idx[static_cast<size_t>(i)] = 0;
            }
        }
    }

    int dim() const { return dim_; }
    int order() const { return order_; }
    size_t size() const { return weights_.size(); }
    std::span<const double> node(size_t k) const {
        return std::span<const double>(nodes_).subspan(k * static_cast<size_t>(dim_), static_cast<size_t>(dim_));
    }
    double weight(size_t k) const { return weights_[k]; }

private:
    int dim_;
    int order_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

/// Integral against gamma.  A non-finite integrand value at a node signals
/// overflow; the caller must reduce scale or raise the order.
template <typename F>
double integrate_fn(const QuadratureGrid& grid, F&& f) {
    KahanAccumulator acc;
    for (size_t k = 0; k < grid.size(); ++k) {
        const double v = f(grid.node(k));
        if (!std::isfinite(v)) throw std::range_error("integrate: non-finite integrand value at a node");
        acc.add(grid.weight(k) * v);
    }
    return acc.sum();
}

inline double integrate(const ScalarField& f, const QuadratureGrid& grid) {
    if (f.dim() != grid.dim()) throw std::invalid_argument("integrate: dimension mismatch");
    return integrate_fn(grid, [&](std::span<const double> x) { return f.value(x); });
}

inline double inner(const ScalarField& f, const ScalarField& g, const QuadratureGrid& grid) {
    if (f.dim() != grid.dim() || g.dim() != grid.dim())
        throw std::invalid_argument("inner: dimension mismatch");
    return integrate_fn(grid, [&](std::span<const double> x) { return f.value(x) * g.value(x); });
}

inline double variance(const ScalarField& f, const QuadratureGrid& grid) {
    const double m = integrate(f, grid);
    return integrate_fn(grid, [&](std::span<const double> x) {
        const double d = f.value(x) - m;
        return d * d;
    });
}

/// P_t f(x) = int f(e^{-t} x + sqrt(1 - e^{-2t}) y) gamma(dy), by quadrature.
inline double ou_semigroup_integral(const ScalarField& f, double t, std::span<const double> x,
                                    const QuadratureGrid& grid) {
    if (t < 0) throw std::domain_error("ou_semigroup_integral: t must be >= 0");
    if (f.dim() != grid.dim() || static_cast<int>(x.size()) != f.dim())
        throw std::invalid_argument("ou_semigroup_integral: dimension mismatch");
    const double a = std::exp(-t);
    const double b = std::sqrt(std::max(0.0, 1.0 - a * a));
    Point p(x.size());
    return integrate_fn(grid, [&](std::span<const double> y) {
        for (size_t i = 0; i < x.size(); ++i) p[i] = a * x[i] + b * y[i];
        return f.value(p);
    });
}

}  // namespace statbundle
