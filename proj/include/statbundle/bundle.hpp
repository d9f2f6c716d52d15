#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "statbundle/density.hpp"

namespace statbundle {

/// Element of a statistical-bundle fiber: a random variable with zero mean
/// under its base density.
struct FiberVector {
    DensityPtr base;
    FieldPtr v;
};

/// Builds a fiber vector, enforcing the centering E_base[v] = 0.
inline FiberVector make_fiber(DensityPtr base, FieldPtr v, const QuadratureGrid& grid) {
    const double m = expect(*base, *v, grid);
    return FiberVector{std::move(base), field_shift(v, -m)};
}

/// Exponential transport  u -> u - E_to[u].
inline FiberVector e_transport(const FiberVector& w, DensityPtr to, const QuadratureGrid& grid) {
    const double m = expect(*to, *w.v, grid);
    return FiberVector{std::move(to), field_shift(w.v, -m)};
}

/// Mixture transport  u -> (d from / d to) u; preserves centering by the
/// change-of-measure identity.
inline FiberVector m_transport(const FiberVector& w, DensityPtr to, const QuadratureGrid& grid) {
    (void)grid;
    if (w.base->dim() != to->dim()) throw std::invalid_argument("m_transport: dimension mismatch");
    DensityPtr from = w.base;
    FieldPtr v = w.v;
    auto field = std::make_shared<LambdaField>(to->dim(), [from, to, v](std::span<const double> x) {
        const double td = to->density(x);
        if (td == 0.0) throw std::range_error("m_transport: vanishing target density");
        return from->density(x) / td * v->value(x);
    });
    return FiberVector{std::move(to), field};
}

/// Pairing <u, v>_p = int u v p dgamma.
inline double fiber_inner(const FiberVector& a, const FiberVector& b, const QuadratureGrid& grid) {
    return integrate_fn(grid, [&](std::span<const double> x) {
        return a.base->density(x) * a.v->value(x) * b.v->value(x);
    });
}

/// The transport duality  <U^e u, v'>_nu = <u, U^m v'>_mu  together with the
/// induced transport of the inner product.
struct DualityReport {
    double pairing_lhs = 0.0;
    double pairing_rhs = 0.0;
    double inner_lhs = 0.0;
    double inner_rhs = 0.0;
    double pairing_gap() const { return std::abs(pairing_lhs - pairing_rhs); }
    double inner_gap() const { return std::abs(inner_lhs - inner_rhs); }
};

inline DualityReport duality_check(const DensityPtr& mu, const DensityPtr& nu, const FiberVector& u,
                                   const FiberVector& v, const QuadratureGrid& grid) {
    DualityReport rep;
    const FiberVector vp = e_transport(v, nu, grid);  // v' based at nu
    const FiberVector ue = e_transport(u, nu, grid);
    const FiberVector vm = m_transport(vp, mu, grid);
    rep.pairing_lhs = fiber_inner(ue, vp, grid);
    rep.pairing_rhs = fiber_inner(u, vm, grid);

    const FiberVector vmix = m_transport(v, nu, grid);
    rep.inner_lhs = fiber_inner(u, v, grid);
    rep.inner_rhs = integrate_fn(grid, [&](std::span<const double> x) {
        return nu->density(x) * ue.v->value(x) * vmix.v->value(x);
    });
    return rep;
}

/// Curve t -> e^{u(t) - K(u(t))} with u(t) = sum_i theta_i(t) b_i over a fixed
/// admissible basis.  Time derivatives of the coefficients default to central
/// differences (h = 1e-3) unless analytic ones are supplied.
class Curve {
public:
    using Coeffs = std::function<std::vector<double>(double)>;

    Curve(std::vector<FieldPtr> basis, Coeffs theta, double t0, double t1)
        : basis_(std::move(basis)), theta_(std::move(theta)), t0_(t0), t1_(t1) {
        if (basis_.empty()) throw std::invalid_argument("Curve: empty basis");
        dim_ = basis_[0]->dim();
        for (const auto& b : basis_)
            if (b->dim() != dim_) throw std::invalid_argument("Curve: basis dimension mismatch");
    }

    Curve& with_derivatives(Coeffs first, Coeffs second) {
        dtheta_ = std::move(first);
        ddtheta_ = std::move(second);
        return *this;
    }

    int dim() const { return dim_; }
    double t_min() const { return t0_; }
    double t_max() const { return t1_; }

    FieldPtr tilt(double t) const {
        const auto th = theta_(t);
        return combine(th);
    }

    ExpDensity at(double t, const QuadratureGrid& grid) const { return ExpDensity(tilt(t), grid); }

    /// log int e^{u(t)} dgamma (shifted sum)
    double log_normalizer(double t, const QuadratureGrid& grid) const {
        const FieldPtr u = tilt(t);
        double m = -std::numeric_limits<double>::infinity();
        std::vector<double> uv(grid.size());
        for (size_t k = 0; k < grid.size(); ++k) {
            uv[k] = u->value(grid.node(k));
            m = std::max(m, uv[k]);
        }
        KahanAccumulator acc;
        for (size_t k = 0; k < grid.size(); ++k) acc.add(grid.weight(k) * std::exp(uv[k] - m));
        return m + std::log(acc.sum());
    }

    std::vector<double> theta_dot(double t, double h) const {
        if (dtheta_) return dtheta_(t);
        const auto p = theta_(t + h);
        const auto m = theta_(t - h);
        std::vector<double> d(p.size());
        for (size_t i = 0; i < p.size(); ++i) d[i] = (p[i] - m[i]) / (2.0 * h);
        return d;
    }

    std::vector<double> theta_ddot(double t, double h) const {
        if (ddtheta_) return ddtheta_(t);
        const auto p = theta_(t + h);
        const auto c = theta_(t);
        const auto m = theta_(t - h);
        std::vector<double> d(p.size());
        for (size_t i = 0; i < p.size(); ++i) d[i] = (p[i] - 2.0 * c[i] + m[i]) / (h * h);
        return d;
    }

    FieldPtr combine(const std::vector<double>& coeffs) const {
        if (coeffs.size() != basis_.size()) throw std::invalid_argument("Curve: coefficient count mismatch");
        FieldPtr acc = field_scale(basis_[0], coeffs[0]);
        for (size_t i = 1; i < basis_.size(); ++i)
            acc = field_sum(acc, field_scale(basis_[i], coeffs[i]));
        return acc;
    }

    void require_interior(double t, double h) const {
        if (t - h < t0_ || t + h > t1_)
            throw std::domain_error("Curve: t too close to the parameter boundary");
    }

private:
    std::vector<FieldPtr> basis_;
    Coeffs theta_;
    Coeffs dtheta_, ddtheta_;
    double t0_, t1_;
    int dim_ = 0;
};

/// Velocity d/dt log p_t = u'(t) - K'(t): Fisher's score of the curve.  The
/// field part is exact through the basis; the scalar part uses central
/// normalizer differences.
inline FiberVector velocity(const Curve& c, double t, const QuadratureGrid& grid, double h = 1e-3) {
    c.require_interior(t, h);
    const FieldPtr udot = c.combine(c.theta_dot(t, h));
    const double ldot = (c.log_normalizer(t + h, grid) - c.log_normalizer(t - h, grid)) / (2.0 * h);
    auto base = std::make_shared<ExpDensity>(c.at(t, grid));
    return FiberVector{std::move(base), field_shift(udot, -ldot)};
}

/// Acceleration: the velocity of the velocity in the affine bundle, evaluated
/// through log-density derivatives as  l-double-dot + E_{p_t}[l-dot^2].
inline FiberVector acceleration(const Curve& c, double t, const QuadratureGrid& grid, double h = 1e-3) {
    c.require_interior(t, h);
    auto base = std::make_shared<ExpDensity>(c.at(t, grid));

    const FieldPtr udot = c.combine(c.theta_dot(t, h));
    const double lt = c.log_normalizer(t, grid);
    const double lp = c.log_normalizer(t + h, grid);
    const double lm = c.log_normalizer(t - h, grid);
    const double ldot = (lp - lm) / (2.0 * h);
    const double lddot = (lp - 2.0 * lt + lm) / (h * h);

    const FieldPtr uddot = c.combine(c.theta_ddot(t, h));
    const FieldPtr vel = field_shift(udot, -ldot);
    const double evel2 =
        integrate_fn(grid, [&](std::span<const double> x) {
            const double lv = vel->value(x);
            return base->density(x) * lv * lv;
        });
    return FiberVector{std::move(base), field_shift(uddot, -lddot + evel2)};
}

/// Exponential geodesic through p in direction v: t -> e^{t v - K_p(t v)} p,
/// affine in every chart.
inline Curve geodesic(const ExpDensity& p, const FiberVector& v) {
    if (!v.v->certificate().admissible_tilt())
        throw std::invalid_argument("geodesic: inadmissible direction (" +
                                    ExpDensity::certificate_verdict(v.v->certificate()) + ")");
    std::vector<FieldPtr> basis{p.tilt(), v.v};
    Curve c(std::move(basis), [](double t) { return std::vector<double>{1.0, t}; }, -1.0, 1.0);
    c.with_derivatives([](double) { return std::vector<double>{0.0, 1.0}; },
                       [](double) { return std::vector<double>{0.0, 0.0}; });
    return c;
}

/// Mixture geodesic t -> (1 - t) p + t q, defined for t in [0, 1] only
/// (positivity is not guaranteed beyond the segment).
class MixtureCurve {
public:
    MixtureCurve(DensityPtr p, DensityPtr q) : p_(std::move(p)), q_(std::move(q)) {
        if (p_->dim() != q_->dim()) throw std::invalid_argument("MixtureCurve: dimension mismatch");
    }

    DensityPtr at(double t) const {
        if (t < 0.0 || t > 1.0) throw std::domain_error("MixtureCurve: t outside [0, 1]");
        if (t == 0.0) return p_;
        if (t == 1.0) return q_;
        return std::make_shared<MixtureDensity>(
            std::vector<MixtureDensity::Component>{{1.0 - t, p_}, {t, q_}});
    }

    /// Mixture-bundle velocity (d/dt c_t)/c_t = (q - p)/c_t.
    FieldPtr velocity(double t) const {
        DensityPtr c = at(t);
        DensityPtr p = p_, q = q_;
        return std::make_shared<LambdaField>(p_->dim(), [c, p, q](std::span<const double> x) {
            return (q->density(x) - p->density(x)) / c->density(x);
        });
    }

    const DensityPtr& start() const { return p_; }
    const DensityPtr& end() const { return q_; }

private:
    DensityPtr p_, q_;
};

inline MixtureCurve mixture_geodesic(DensityPtr p, DensityPtr q) {
    return MixtureCurve(std::move(p), std::move(q));
}

}  // namespace statbundle
