#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "statbundle/density.hpp"
#include "statbundle/sampler.hpp"

namespace statbundle {
namespace boltzmann {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm2(const Vec3& a) { return dot(a, a); }

/// Standard Gaussian density on R^3 (the Maxwellian).
inline double gamma3(const Vec3& v) {
    return std::pow(2.0 * std::numbers::pi, -1.5) * std::exp(-0.5 * norm2(v));
}

/// Pre/post collision velocities for direction x on the unit sphere:
///   v_x = v - x x'(v - w),  w_x = w + x x'(v - w).
/// Momentum is conserved exactly; energy to round-off.
struct CollisionPair {
    Vec3 v, w, x;
    Vec3 v_post, w_post;
    double relative_speed_along_x = 0.0;  // |x . (v - w)|, the kernel value
};

inline CollisionPair post_collision(const Vec3& v, const Vec3& w, const Vec3& x) {
    if (std::abs(norm2(x) - 1.0) > 1e-12)
        throw std::invalid_argument("post_collision: direction must lie on the unit sphere");
    CollisionPair c;
    c.v = v;
    c.w = w;
    c.x = x;
    const double a = dot(x, {v[0] - w[0], v[1] - w[1], v[2] - w[2]});
    for (int i = 0; i < 3; ++i) {
        c.v_post[static_cast<size_t>(i)] = v[static_cast<size_t>(i)] - a * x[static_cast<size_t>(i)];
        c.w_post[static_cast<size_t>(i)] = w[static_cast<size_t>(i)] + a * x[static_cast<size_t>(i)];
    }
    c.relative_speed_along_x = std::abs(a);
    const double e0 = norm2(v) + norm2(w);
    const double e1 = norm2(c.v_post) + norm2(c.w_post);
    if (std::abs(e1 - e0) > 1e-10 * (1.0 + e0))
        throw std::logic_error("post_collision: energy defect beyond round-off");
    return c;
}

/// Uniform direction on S^2 from two uniforms.
inline Vec3 sphere_point(double u1, double u2) {
    const double z = 1.0 - 2.0 * u1;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = 2.0 * std::numbers::pi * u2;
    return Vec3{r * std::cos(phi), r * std::sin(phi), z};
}

struct McEstimate {
    double value = 0.0;
    double se = 0.0;  // sample stdev / sqrt(count)
    std::size_t count = 0;
    std::uint64_t seed = 0;

    bool within_se(double k, double floor = 1e-13) const {
        return std::abs(value) <= k * se + floor;
    }
};

namespace detail {

class RunningMoments {
public:
    void add(double v) {
        ++n_;
        const double d = v - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (v - mean_);
    }
    McEstimate estimate(std::uint64_t seed) const {
        McEstimate e;
        e.value = mean_;
        e.count = n_;
        e.seed = seed;
        if (n_ > 1) e.se = std::sqrt(m2_ / (static_cast<double>(n_ - 1) * static_cast<double>(n_)));
        return e;
    }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

inline Vec3 gauss_point3(const GaussianSampler& s, std::uint64_t j) {
    return Vec3{s.normal(3 * j), s.normal(3 * j + 1), s.normal(3 * j + 2)};
}

inline double density_at(const Density& f, const Vec3& v) {
    return f.density(std::span<const double>(v.data(), 3));
}

}  // namespace detail

/// Q(F)(v) for the Lebesgue density F = f gamma3, estimated by importance
/// sampling w ~ gamma3 and x uniform on the sphere:
///   Q(F)(v) = gamma3(v) E[ (f(v_x) f(w_x) r - f(v) f(w)) |x.(v-w)| ],
/// with r the post/pre Gaussian ratio (analytically 1 by energy conservation,
/// kept explicit).
inline McEstimate collision_q(const Density& f, const Vec3& v, const GaussianSampler& sampler,
                              std::size_t n) {
    if (f.dim() != 3) throw std::invalid_argument("collision_q: density must live on R^3");
    detail::RunningMoments acc;
    const double fv = detail::density_at(f, v);
    const double gv = gamma3(v);
    for (std::size_t j = 0; j < n; ++j) {
        const Vec3 w = detail::gauss_point3(sampler, j);
        const Vec3 x = sphere_point(sampler.uniform(2 * j), sampler.uniform(2 * j + 1));
        const CollisionPair c = post_collision(v, w, x);
        const double ratio =
            std::exp(-0.5 * ((norm2(c.v_post) + norm2(c.w_post)) - (norm2(v) + norm2(w))));
        if (!std::isfinite(ratio)) throw std::range_error("collision_q: density ratio overflow");
        const double post = detail::density_at(f, c.v_post) * detail::density_at(f, c.w_post) * ratio;
        const double pre = fv * detail::density_at(f, w);
        acc.add((post - pre) * c.relative_speed_along_x * gv);
    }
    return acc.estimate(sampler.seed());
}

/// Functionals int Q(F)(v) phi(v) dv for phi in {1, v1, v2, v3, |v|^2} by a
/// double Monte Carlo with the fully symmetrized estimator (swap of (v, w)
/// and of pre/post states), plus the entropy-production probe
/// int Q(F) log f dv <= 0.
struct ConservationReport {
    std::array<McEstimate, 5> functionals;
    std::array<const char*, 5> names{"mass", "momentum_1", "momentum_2", "momentum_3", "energy"};
    McEstimate entropy_production;

    bool conserved_within(double k) const {
        for (const auto& e : functionals)
            if (!e.within_se(k)) return false;
        return true;
    }
};

inline ConservationReport conservation_check(const Density& f, const GaussianSampler& sampler,
                                             std::size_t n) {
    if (f.dim() != 3) throw std::invalid_argument("conservation_check: density must live on R^3");
    std::array<detail::RunningMoments, 5> acc;
    detail::RunningMoments entropy;
    for (std::size_t j = 0; j < n; ++j) {
        const Vec3 v = detail::gauss_point3(sampler, 2 * j);
        const Vec3 w = detail::gauss_point3(sampler, 2 * j + 1);
        const Vec3 x = sphere_point(sampler.uniform(2 * j), sampler.uniform(2 * j + 1));
        const CollisionPair c = post_collision(v, w, x);
        const double ratio =
            std::exp(-0.5 * ((norm2(c.v_post) + norm2(c.w_post)) - (norm2(v) + norm2(w))));
        const double fv = detail::density_at(f, v);
        const double fw = detail::density_at(f, w);
        const double fvp = detail::density_at(f, c.v_post);
        const double fwp = detail::density_at(f, c.w_post);
        const double pre = fv * fw;
        const double post = fvp * fwp * ratio;
        const double base = 0.25 * (post - pre) * c.relative_speed_along_x;

        const auto defect = [&](auto&& phi) {
            return phi(v) + phi(w) - phi(c.v_post) - phi(c.w_post);
        };
        acc[0].add(0.0);  // mass: the defect of phi = 1 vanishes identically
        acc[1].add(base * defect([](const Vec3& u) { return u[0]; }));
        acc[2].add(base * defect([](const Vec3& u) { return u[1]; }));
        acc[3].add(base * defect([](const Vec3& u) { return u[2]; }));
        acc[4].add(base * defect([](const Vec3& u) { return norm2(u); }));
        entropy.add(base * (std::log(fv) + std::log(fw) - std::log(fvp) - std::log(fwp)));
    }
    ConservationReport rep;
    for (int i = 0; i < 5; ++i) rep.functionals[static_cast<size_t>(i)] = acc[static_cast<size_t>(i)].estimate(sampler.seed());
    rep.entropy_production = entropy.estimate(sampler.seed());
    return rep;
}

/// Fixed 26-point spherical design (degree 7) for sphere averages.
struct SphereRule {
    std::vector<Vec3> points;
    std::vector<double> weights;  // sum to 1
};

inline SphereRule sphere_design_26() {
    SphereRule rule;
    const double w1 = 40.0 / 840.0, w2 = 32.0 / 840.0, w3 = 27.0 / 840.0;
    for (int i = 0; i < 3; ++i)
        for (double s : {1.0, -1.0}) {
            Vec3 p{0, 0, 0};
            p[static_cast<size_t>(i)] = s;
            rule.points.push_back(p);
            rule.weights.push_back(w1);
        }
    const double r = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            for (double si : {1.0, -1.0})
                for (double sj : {1.0, -1.0}) {
                    Vec3 p{0, 0, 0};
                    p[static_cast<size_t>(i)] = si * r;
                    p[static_cast<size_t>(j)] = sj * r;
                    rule.points.push_back(p);
                    rule.weights.push_back(w2);
                }
    const double c = 1.0 / std::sqrt(3.0);
    for (double sx : {1.0, -1.0})
        for (double sy : {1.0, -1.0})
            for (double sz : {1.0, -1.0}) {
                rule.points.push_back(Vec3{sx * c, sy * c, sz * c});
                rule.weights.push_back(w3);
            }
    return rule;
}

/// Monte Carlo fallback sphere rule with n directions.
inline SphereRule sphere_mc(const GaussianSampler& sampler, std::size_t n) {
    SphereRule rule;
    rule.points.reserve(n);
    rule.weights.assign(n, 1.0 / static_cast<double>(n));
    for (std::size_t j = 0; j < n; ++j)
        rule.points.push_back(sphere_point(sampler.uniform(2 * j), sampler.uniform(2 * j + 1)));
    return rule;
}

/// A g(v, w) = int 1/2 (g(v_x) + g(w_x)) sigma(dx) - 1/2 (g(v) + g(w)).
inline double weak_form_a(const ScalarField& g, const Vec3& v, const Vec3& w, const SphereRule& rule) {
    if (g.dim() != 3) throw std::invalid_argument("weak_form_a: field must live on R^3");
    const auto eval = [&](const Vec3& u) { return g.value(std::span<const double>(u.data(), 3)); };
    KahanAccumulator acc;
    for (size_t i = 0; i < rule.points.size(); ++i) {
        const CollisionPair c = post_collision(v, w, rule.points[i]);
        acc.add(rule.weights[i] * 0.5 * (eval(c.v_post) + eval(c.w_post)));
    }
    return acc.sum() - 0.5 * (eval(v) + eval(w));
}

/// <g, Q(f)/f>_f = E_{f x f}[A_B g] with the collision kernel inside the
/// average.  The right side as displayed without the kernel weight does not
/// balance; it is estimated alongside for reference.
struct WeakIdentityReport {
    McEstimate lhs;              // int g Q(F) dv
    McEstimate rhs;              // kernel-weighted A average
    McEstimate rhs_unweighted;   // plain A average, no kernel weight
    double combined_se() const { return std::sqrt(lhs.se * lhs.se + rhs.se * rhs.se); }
    bool agrees_within(double k) const {
        return std::abs(lhs.value - rhs.value) <= k * combined_se() + 1e-13;
    }
};

inline WeakIdentityReport weak_identity_check(const Density& f, const ScalarField& g,
                                              const GaussianSampler& sampler, std::size_t n) {
    if (f.dim() != 3 || g.dim() != 3)
        throw std::invalid_argument("weak_identity_check: inputs must live on R^3");
    detail::RunningMoments lhs, rhs, rhsu;
    const auto geval = [&](const Vec3& u) { return g.value(std::span<const double>(u.data(), 3)); };
    for (std::size_t j = 0; j < n; ++j) {
        const Vec3 v = detail::gauss_point3(sampler, 2 * j);
        const Vec3 w = detail::gauss_point3(sampler, 2 * j + 1);
        const Vec3 x = sphere_point(sampler.uniform(2 * j), sampler.uniform(2 * j + 1));
        const CollisionPair c = post_collision(v, w, x);
        const double ratio =
            std::exp(-0.5 * ((norm2(c.v_post) + norm2(c.w_post)) - (norm2(v) + norm2(w))));
        const double pre = detail::density_at(f, v) * detail::density_at(f, w);
        const double post = detail::density_at(f, c.v_post) * detail::density_at(f, c.w_post) * ratio;
        const double k = c.relative_speed_along_x;
        const double abar = 0.5 * (geval(c.v_post) + geval(c.w_post)) - 0.5 * (geval(v) + geval(w));
        lhs.add((post - pre) * k * geval(v));
        rhs.add(pre * k * abar);
        rhsu.add(pre * abar);
    }
    WeakIdentityReport rep;
    rep.lhs = lhs.estimate(sampler.seed());
    rep.rhs = rhs.estimate(sampler.seed());
    rep.rhs_unweighted = rhsu.estimate(sampler.seed());
    return rep;
}

}  // namespace boltzmann
}  // namespace statbundle
