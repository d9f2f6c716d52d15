#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace statbundle {

using Point = std::vector<double>;

/// Growth class of a random variable u, used to gate exponential tilts
/// e^u * gamma.  Bounded fields are always admissible; quadratics are
/// admissible while the quadratic form stays below the Gaussian
/// integrability threshold 1/2.
struct Certificate {
    enum class Kind { Bounded, Quadratic, Unbounded };

    Kind kind = Kind::Unbounded;
    double sup_bound = 0.0;    // valid for Bounded
    int dim = 0;               // valid for Quadratic
    std::vector<double> quad;  // dim x dim symmetric matrix Q, u = x'Qx + linear + const

    static Certificate bounded(double b) {
        Certificate c;
        c.kind = Kind::Bounded;
        c.sup_bound = b;
        return c;
    }
    static Certificate quadratic(int n, std::vector<double> q) {
        Certificate c;
        c.kind = Kind::Quadratic;
        c.dim = n;
        c.quad = std::move(q);
        return c;
    }
    static Certificate unbounded() { return Certificate{}; }

    /// Coefficients of x_i^2 (diagonal of the quadratic form).
    std::vector<double> axis_coefficients() const {
        std::vector<double> d(static_cast<size_t>(dim), 0.0);
        for (int i = 0; i < dim; ++i) d[static_cast<size_t>(i)] = quad[static_cast<size_t>(i * dim + i)];
        return d;
    }

    double max_eigenvalue() const {
        if (kind != Kind::Quadratic || dim == 0) return 0.0;
        Eigen::MatrixXd m(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) m(i, j) = quad[static_cast<size_t>(i * dim + j)];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
        return es.eigenvalues().maxCoeff();
    }

    /// e^u * gamma stays integrable (with margin eps) for bounded u and for
    /// quadratics whose largest eigenvalue is below 1/2 - eps.
    bool admissible_tilt(double eps = 0.01) const {
        if (kind == Kind::Bounded) return true;
        if (kind == Kind::Quadratic) return max_eigenvalue() < 0.5 - eps;
        return false;
    }

    Certificate scaled(double c) const {
        switch (kind) {
            case Kind::Bounded: return bounded(std::abs(c) * sup_bound);
            case Kind::Quadratic: {
                auto q = quad;
                for (auto& v : q) v *= c;
                return quadratic(dim, std::move(q));
            }
            default: return unbounded();
        }
    }

    static Certificate sum(const Certificate& a, const Certificate& b) {
        if (a.kind == Kind::Unbounded || b.kind == Kind::Unbounded) return unbounded();
        if (a.kind == Kind::Bounded && b.kind == Kind::Bounded)
            return bounded(a.sup_bound + b.sup_bound);
        // bounded + quadratic: integrability is governed by the quadratic part
        if (a.kind == Kind::Bounded) return b;
        if (b.kind == Kind::Bounded) return a;
        if (a.dim != b.dim) return unbounded();
        auto q = a.quad;
        for (size_t i = 0; i < q.size(); ++i) q[i] += b.quad[i];
        return quadratic(a.dim, std::move(q));
    }
};

/// Real function on R^n with gradient and Hessian.  Derivatives fall back to
/// central finite differences unless an implementation overrides them.
class ScalarField {
public:
    virtual ~ScalarField() = default;

    virtual int dim() const = 0;
    virtual double value(std::span<const double> x) const = 0;

    // step h = 1e-4, O(h^2) truncation
    virtual void gradient(std::span<const double> x, std::span<double> out) const {
        const double h = 1e-4;
        Point p(x.begin(), x.end());
        for (int i = 0; i < dim(); ++i) {
            const double xi = p[static_cast<size_t>(i)];
            p[static_cast<size_t>(i)] = xi + h;
            const double fp = value(p);
            p[static_cast<size_t>(i)] = xi - h;
            const double fm = value(p);
            p[static_cast<size_t>(i)] = xi;
            out[static_cast<size_t>(i)] = (fp - fm) / (2.0 * h);
        }
    }

    // row-major dim x dim, step h = 1e-3
    virtual void hessian(std::span<const double> x, std::span<double> out) const {
        const double h = 1e-3;
        const int n = dim();
        Point p(x.begin(), x.end());
        const double f0 = value(p);
        for (int i = 0; i < n; ++i) {
            const size_t si = static_cast<size_t>(i);
            const double xi = p[si];
            p[si] = xi + h;
            const double fp = value(p);
            p[si] = xi - h;
            const double fm = value(p);
            p[si] = xi;
            out[static_cast<size_t>(i * n + i)] = (fp - 2.0 * f0 + fm) / (h * h);
            for (int j = i + 1; j < n; ++j) {
                const size_t sj = static_cast<size_t>(j);
                const double xj = p[sj];
                p[si] = xi + h; p[sj] = xj + h;
                const double fpp = value(p);
                p[sj] = xj - h;
                const double fpm = value(p);
                p[si] = xi - h; p[sj] = xj + h;
                const double fmp = value(p);
                p[sj] = xj - h;
                const double fmm = value(p);
                p[si] = xi; p[sj] = xj;
                const double v = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
                out[static_cast<size_t>(i * n + j)] = v;
                out[static_cast<size_t>(j * n + i)] = v;
            }
        }
    }

    virtual bool has_exact_gradient() const { return false; }
    virtual Certificate certificate() const { return Certificate::unbounded(); }
    /// Textual form in the field grammar, when one exists.
    virtual std::optional<std::string> fieldspec() const { return std::nullopt; }

    Point gradient_at(std::span<const double> x) const {
        Point g(static_cast<size_t>(dim()));
        gradient(x, g);
        return g;
    }
    Point hessian_at(std::span<const double> x) const {
        Point h(static_cast<size_t>(dim() * dim()));
        hessian(x, h);
        return h;
    }
    double laplacian(std::span<const double> x) const {
        Point h = hessian_at(x);
        double s = 0.0;
        for (int i = 0; i < dim(); ++i) s += h[static_cast<size_t>(i * dim() + i)];
        return s;
    }
};

using FieldPtr = std::shared_ptr<const ScalarField>;

/// Field defined by callables; used for combinators and density ratios.
class LambdaField final : public ScalarField {
public:
    using Eval = std::function<double(std::span<const double>)>;
    using Grad = std::function<void(std::span<const double>, std::span<double>)>;

    LambdaField(int n, Eval eval) : dim_(n), eval_(std::move(eval)) {}
    LambdaField(int n, Eval eval, Grad grad)
        : dim_(n), eval_(std::move(eval)), grad_(std::move(grad)) {}

    int dim() const override { return dim_; }
    double value(std::span<const double> x) const override { return eval_(x); }
    void gradient(std::span<const double> x, std::span<double> out) const override {
        if (grad_) grad_(x, out);
        else ScalarField::gradient(x, out);
    }
    bool has_exact_gradient() const override { return static_cast<bool>(grad_); }
    Certificate certificate() const override { return cert_; }

    LambdaField& with_certificate(Certificate c) {
        cert_ = std::move(c);
        return *this;
    }

private:
    int dim_;
    Eval eval_;
    Grad grad_;
    Certificate cert_ = Certificate::unbounded();
};

inline FieldPtr constant_field(int n, double c) {
    auto f = std::make_shared<LambdaField>(
        n, [c](std::span<const double>) { return c; },
        [](std::span<const double>, std::span<double> g) { std::fill(g.begin(), g.end(), 0.0); });
    f->with_certificate(Certificate::bounded(std::abs(c)));
    return f;
}

inline FieldPtr lambda_sum(FieldPtr a, FieldPtr b, double ca = 1.0, double cb = 1.0) {
    if (a->dim() != b->dim()) throw std::invalid_argument("field dimension mismatch");
    const int n = a->dim();
    auto f = std::make_shared<LambdaField>(
        n,
        [a, b, ca, cb](std::span<const double> x) { return ca * a->value(x) + cb * b->value(x); },
        [a, b, ca, cb, n](std::span<const double> x, std::span<double> g) {
            Point gb(static_cast<size_t>(n));
            a->gradient(x, g);
            b->gradient(x, gb);
            for (int i = 0; i < n; ++i)
                g[static_cast<size_t>(i)] = ca * g[static_cast<size_t>(i)] + cb * gb[static_cast<size_t>(i)];
        });
    f->with_certificate(Certificate::sum(a->certificate().scaled(ca), b->certificate().scaled(cb)));
    return f;
}

inline FieldPtr lambda_scale(FieldPtr a, double c) {
    const int n = a->dim();
    auto f = std::make_shared<LambdaField>(
        n, [a, c](std::span<const double> x) { return c * a->value(x); },
        [a, c, n](std::span<const double> x, std::span<double> g) {
            a->gradient(x, g);
            for (int i = 0; i < n; ++i) g[static_cast<size_t>(i)] *= c;
        });
    f->with_certificate(a->certificate().scaled(c));
    return f;
}

inline FieldPtr lambda_shift(FieldPtr a, double c) {
    const int n = a->dim();
    auto f = std::make_shared<LambdaField>(
        n, [a, c](std::span<const double> x) { return a->value(x) + c; },
        [a, n](std::span<const double> x, std::span<double> g) { a->gradient(x, g); });
    f->with_certificate(Certificate::sum(a->certificate(), Certificate::bounded(std::abs(c))));
    return f;
}

inline FieldPtr lambda_product(FieldPtr a, FieldPtr b) {
    if (a->dim() != b->dim()) throw std::invalid_argument("field dimension mismatch");
    const int n = a->dim();
    return std::make_shared<LambdaField>(
        n, [a, b](std::span<const double> x) { return a->value(x) * b->value(x); },
        [a, b, n](std::span<const double> x, std::span<double> g) {
            Point gb(static_cast<size_t>(n));
            a->gradient(x, g);
            b->gradient(x, gb);
            const double fa = a->value(x), fb = b->value(x);
            for (int i = 0; i < n; ++i)
                g[static_cast<size_t>(i)] = g[static_cast<size_t>(i)] * fb + fa * gb[static_cast<size_t>(i)];
        });
}

enum class VectorNorm { L2, L1, LInf };

inline double vector_norm(std::span<const double> v, VectorNorm which) {
    switch (which) {
        case VectorNorm::L2: {
            double s = 0.0;
            for (double t : v) s += t * t;
            return std::sqrt(s);
        }
        case VectorNorm::L1: {
            double s = 0.0;
            for (double t : v) s += std::abs(t);
            return s;
        }
        default: {
            double s = 0.0;
            for (double t : v) s = std::max(s, std::abs(t));
            return s;
        }
    }
}

/// x -> |grad f(x)| as a field.
inline FieldPtr gradient_norm_field(FieldPtr f, VectorNorm which = VectorNorm::L2) {
    const int n = f->dim();
    return std::make_shared<LambdaField>(n, [f, n, which](std::span<const double> x) {
        Point g(static_cast<size_t>(n));
        f->gradient(x, g);
        return vector_norm(g, which);
    });
}

/// x -> grad f(x) . grad g(x)
inline FieldPtr gradient_dot_field(FieldPtr f, FieldPtr g) {
    if (f->dim() != g->dim()) throw std::invalid_argument("field dimension mismatch");
    const int n = f->dim();
    return std::make_shared<LambdaField>(n, [f, g, n](std::span<const double> x) {
        Point gf(static_cast<size_t>(n)), gg(static_cast<size_t>(n));
        f->gradient(x, gf);
        g->gradient(x, gg);
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += gf[static_cast<size_t>(i)] * gg[static_cast<size_t>(i)];
        return s;
    });
}

}  // namespace statbundle
