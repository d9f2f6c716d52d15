#pragma once

#include <cmath>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "statbundle/expr.hpp"
#include "statbundle/quadrature.hpp"

namespace statbundle {

/// Probability density relative to the standard Gaussian gamma.
class Density {
public:
    virtual ~Density() = default;
    virtual int dim() const = 0;
    virtual double density(std::span<const double> x) const = 0;
};

using DensityPtr = std::shared_ptr<const Density>;

/// E_p[f] = int f p dgamma
inline double expect(const Density& p, const ScalarField& f, const QuadratureGrid& grid) {
    if (p.dim() != grid.dim() || f.dim() != grid.dim())
        throw std::invalid_argument("expect: dimension mismatch");
    return integrate_fn(grid, [&](std::span<const double> x) { return p.density(x) * f.value(x); });
}

/// Member of the maximal exponential family of gamma, stored as (u, K) with
/// density e^{u - K}.  The tilt is centered under gamma at construction and
/// must carry an admissible growth certificate (bounded, or quadratic below
/// the integrability threshold).
class ExpDensity final : public Density {
public:
    ExpDensity(const FieldPtr& tilt, const QuadratureGrid& grid) {
        dim_ = tilt->dim();
        cert_ = tilt->certificate();
        if (!cert_.admissible_tilt())
            throw std::invalid_argument("ExpDensity: inadmissible tilt (" + certificate_verdict(cert_) + ")");
        const double mean = integrate(*tilt, grid);
        u_ = field_shift(tilt, -mean);
        // K by a stable shifted log-sum
        double m = -std::numeric_limits<double>::infinity();
        std::vector<double> uv(grid.size());
        for (size_t k = 0; k < grid.size(); ++k) {
            uv[k] = u_->value(grid.node(k));
            m = std::max(m, uv[k]);
        }
        KahanAccumulator acc;
        for (size_t k = 0; k < grid.size(); ++k) acc.add(grid.weight(k) * std::exp(uv[k] - m));
        K_ = m + std::log(acc.sum());
        if (!std::isfinite(K_)) throw std::range_error("ExpDensity: cumulant overflow on this grid");
    }

    static ExpDensity standard(int dim, const QuadratureGrid& grid) {
        return ExpDensity(constant_field(dim, 0.0), grid);
    }

    static std::string certificate_verdict(const Certificate& c) {
        switch (c.kind) {
            case Certificate::Kind::Bounded: return "bounded";
            case Certificate::Kind::Quadratic:
                return c.admissible_tilt() ? "quadratic" : "quadratic above the 1/2 threshold";
            default: return "unbounded";
        }
    }

    int dim() const override { return dim_; }
    double density(std::span<const double> x) const override { return std::exp(u_->value(x) - K_); }

    const FieldPtr& tilt() const { return u_; }   // centered under gamma
    double log_normalizer() const { return K_; }  // K_gamma(u)
    const Certificate& tilt_certificate() const { return cert_; }

private:
    int dim_ = 0;
    FieldPtr u_;
    double K_ = 0.0;
    Certificate cert_;
};

/// Finite mixture of densities; weights positive and summing to one.
class MixtureDensity final : public Density {
public:
    using Component = std::pair<double, DensityPtr>;

    explicit MixtureDensity(std::vector<Component> components) : components_(std::move(components)) {
        if (components_.empty()) throw std::invalid_argument("MixtureDensity: no components");
        dim_ = components_[0].second->dim();
        double wsum = 0.0;
        for (const auto& [w, d] : components_) {
            if (w <= 0.0) throw std::invalid_argument("MixtureDensity: weights must be positive");
            if (d->dim() != dim_) throw std::invalid_argument("MixtureDensity: dimension mismatch");
            wsum += w;
        }
        if (std::abs(wsum - 1.0) > 1e-12)
            throw std::invalid_argument("MixtureDensity: weights must sum to 1");
    }

    int dim() const override { return dim_; }
    double density(std::span<const double> x) const override {
        double s = 0.0;
        for (const auto& [w, d] : components_) s += w * d->density(x);
        return s;
    }
    const std::vector<Component>& components() const { return components_; }

private:
    int dim_ = 0;
    std::vector<Component> components_;
};

/// K_p(v) = log int e^v p dgamma, evaluated by quadrature with a shifted sum.
/// The combined tilt u_p + v must stay integrable against gamma.
inline double cumulant(const ExpDensity& p, const ScalarField& v, const QuadratureGrid& grid) {
    if (p.dim() != grid.dim() || v.dim() != grid.dim())
        throw std::invalid_argument("cumulant: dimension mismatch");
    if (!Certificate::sum(p.tilt_certificate(), v.certificate()).admissible_tilt())
        throw std::range_error("cumulant: tilt too large for the Gaussian base (" +
                               ExpDensity::certificate_verdict(v.certificate()) + ")");
    double m = -std::numeric_limits<double>::infinity();
    std::vector<double> ev(grid.size());
    for (size_t k = 0; k < grid.size(); ++k) {
        ev[k] = v.value(grid.node(k)) + p.tilt()->value(grid.node(k));
        m = std::max(m, ev[k]);
    }
    KahanAccumulator acc;
    for (size_t k = 0; k < grid.size(); ++k) acc.add(grid.weight(k) * std::exp(ev[k] - m));
    const double K = m + std::log(acc.sum()) - p.log_normalizer();
    if (!std::isfinite(K)) throw std::range_error("cumulant: overflow on this grid");
    return K;
}

/// s_p(q) = log(q/p) - E_p[log(q/p)], computed as the centered tilt difference
/// (the normalizers cancel under centering).
inline FieldPtr exp_chart(const ExpDensity& p, const ExpDensity& q, const QuadratureGrid& grid) {
    if (p.dim() != q.dim()) throw std::invalid_argument("exp_chart: dimension mismatch");
    FieldPtr diff = field_sum(q.tilt(), field_scale(p.tilt(), -1.0));
    const double c = expect(p, *diff, grid);
    return field_shift(diff, -c);
}

/// s_p^{-1}(v) = e^{v - K_p(v)} p for a p-centered admissible v.
inline ExpDensity exp_chart_inverse(const ExpDensity& p, const FieldPtr& v, const QuadratureGrid& grid) {
    if (p.dim() != v->dim()) throw std::invalid_argument("exp_chart_inverse: dimension mismatch");
    if (!v->certificate().admissible_tilt())
        throw std::invalid_argument("exp_chart_inverse: inadmissible direction (" +
                                    ExpDensity::certificate_verdict(v->certificate()) + ")");
    const double ev = expect(p, *v, grid);
    if (std::abs(ev) > 1e-8)
        throw std::invalid_argument("exp_chart_inverse: direction is not centered under the base");
    return ExpDensity(field_sum(p.tilt(), v), grid);
}

/// Mixture chart s_p(q) = q/p - 1 as an evaluable field.
inline FieldPtr mix_chart(const DensityPtr& p, const DensityPtr& q) {
    if (p->dim() != q->dim()) throw std::invalid_argument("mix_chart: dimension mismatch");
    return std::make_shared<LambdaField>(p->dim(), [p, q](std::span<const double> x) {
        const double pd = p->density(x);
        if (pd == 0.0) throw std::range_error("mix_chart: vanishing base density at a node");
        return q->density(x) / pd - 1.0;
    });
}

/// Sufficient membership condition for E(gamma): int p^2 dgamma and
/// int 1/p dgamma finite, probed on a refinement schedule of quadrature
/// orders.  Pass needs both sequences Cauchy at 1e-4 relative; growth by more
/// than 10x across the schedule fails; anything else is inconclusive.
struct MembershipReport {
    enum class Verdict { Pass, Fail, Inconclusive };
    Verdict verdict = Verdict::Inconclusive;
    std::vector<int> orders;
    std::vector<double> second_moment;  // int p^2 dgamma per order
    std::vector<double> inverse_moment; // int 1/p dgamma per order
};

inline MembershipReport membership_check(const Density& p, std::vector<int> orders = {20, 40, 80}) {
    MembershipReport rep;
    rep.orders = orders;
    bool overflow = false;
    for (int m : orders) {
        QuadratureGrid grid(p.dim(), m);
        try {
            rep.second_moment.push_back(integrate_fn(grid, [&](std::span<const double> x) {
                const double v = p.density(x);
                return v * v;
            }));
            rep.inverse_moment.push_back(
                integrate_fn(grid, [&](std::span<const double> x) { return 1.0 / p.density(x); }));
        } catch (const std::range_error&) {
            overflow = true;
            break;
        }
    }
    const auto grew = [](const std::vector<double>& v) {
        return v.size() >= 2 && v.back() > 10.0 * v.front();
    };
    const auto cauchy = [](const std::vector<double>& v) {
        for (size_t i = 1; i < v.size(); ++i)
            if (std::abs(v[i] - v[i - 1]) > 1e-4 * std::abs(v[i - 1])) return false;
        return true;
    };
    if (overflow || grew(rep.second_moment) || grew(rep.inverse_moment))
        rep.verdict = MembershipReport::Verdict::Fail;
    else if (rep.second_moment.size() == rep.orders.size() && cauchy(rep.second_moment) &&
             cauchy(rep.inverse_moment))
        rep.verdict = MembershipReport::Verdict::Pass;
    return rep;
}

// -- JSON round trip ----------------------------------------------------------

/// {"dim": n, "u": "<fieldspec>", "K": value}; requires a printable tilt.
inline std::string to_json(const ExpDensity& p) {
    auto spec = p.tilt()->fieldspec();
    if (!spec) throw std::invalid_argument("to_json: density tilt has no textual form");
    nlohmann::ordered_json j;
    j["dim"] = p.dim();
    j["u"] = *spec;
    j["K"] = p.log_normalizer();
    return j.dump();
}

inline ExpDensity exp_density_from_json(const std::string& text, const QuadratureGrid& grid) {
    const auto j = nlohmann::json::parse(text);
    const int dim = j.at("dim").get<int>();
    if (dim != grid.dim()) throw std::invalid_argument("exp_density_from_json: dimension mismatch");
    ExpDensity p(parse_field(j.at("u").get<std::string>(), dim), grid);
    const double stored_k = j.at("K").get<double>();
    if (std::abs(stored_k - p.log_normalizer()) > 1e-6)
        throw std::invalid_argument("exp_density_from_json: stored normalizer is inconsistent");
    return p;
}

}  // namespace statbundle
