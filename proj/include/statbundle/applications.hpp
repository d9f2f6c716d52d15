#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "statbundle/bundle.hpp"

namespace statbundle {

/// KH(p|q) = 1/2 int |grad(u_p - u_q)|^2 p dgamma; zero exactly on the
/// diagonal of the family.
inline double hyvarinen(const ExpDensity& p, const ExpDensity& q, const QuadratureGrid& grid) {
    if (p.dim() != q.dim() || p.dim() != grid.dim())
        throw std::invalid_argument("hyvarinen: dimension mismatch");
    const int n = p.dim();
    Point gu(static_cast<size_t>(n)), gv(static_cast<size_t>(n));
    return integrate_fn(grid, [&](std::span<const double> x) {
        p.tilt()->gradient(x, gu);
        q.tilt()->gradient(x, gv);
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            const double d = gu[static_cast<size_t>(i)] - gv[static_cast<size_t>(i)];
            s += d * d;
        }
        return 0.5 * s * p.density(x);
    });
}

/// Local score S(q, x) = 1/2 |grad u|^2 - (x . grad u - laplacian u); its
/// p-expectation differs from KH(p|q) by a q-independent constant.
inline FieldPtr local_score(const ExpDensity& q) {
    const int n = q.dim();
    FieldPtr u = q.tilt();
    return std::make_shared<LambdaField>(n, [u, n](std::span<const double> x) {
        Point g(static_cast<size_t>(n));
        u->gradient(x, g);
        double g2 = 0.0, xg = 0.0;
        for (int i = 0; i < n; ++i) {
            g2 += g[static_cast<size_t>(i)] * g[static_cast<size_t>(i)];
            xg += x[static_cast<size_t>(i)] * g[static_cast<size_t>(i)];
        }
        return 0.5 * g2 - (xg - u->laplacian(x));
    });
}

/// Self-energy c(p) = 1/2 int |grad u_p|^2 p dgamma.
inline double score_self_energy(const ExpDensity& p, const QuadratureGrid& grid) {
    const int n = p.dim();
    Point g(static_cast<size_t>(n));
    return integrate_fn(grid, [&](std::span<const double> x) {
        p.tilt()->gradient(x, g);
        double g2 = 0.0;
        for (double gi : g) g2 += gi * gi;
        return 0.5 * g2 * p.density(x);
    });
}

/// KH(p|q) = c(p) + E_p[S(q, .)], via Gaussian integration by parts.
struct ScoreIdentityReport {
    double kh = 0.0;
    double self_energy = 0.0;
    double expected_score = 0.0;
    double discrepancy = 0.0;
};

inline ScoreIdentityReport score_identity_check(const ExpDensity& p, const ExpDensity& q,
                                                const QuadratureGrid& grid) {
    ScoreIdentityReport rep;
    rep.kh = hyvarinen(p, q, grid);
    rep.self_energy = score_self_energy(p, grid);
    rep.expected_score = expect(p, *local_score(q), grid);
    rep.discrepancy = std::abs(rep.kh - rep.self_energy - rep.expected_score);
    return rep;
}

/// Otto inner product <<f, g>>_p = int grad f . grad g p dgamma on p-centered
/// fields.
inline double otto_inner(const Density& p, const ScalarField& f, const ScalarField& g,
                         const QuadratureGrid& grid) {
    if (std::abs(expect(p, f, grid)) > 1e-8 || std::abs(expect(p, g, grid)) > 1e-8)
        throw std::invalid_argument("otto_inner: fields must be centered under the base density");
    const int n = f.dim();
    Point gf(static_cast<size_t>(n)), gg(static_cast<size_t>(n));
    return integrate_fn(grid, [&](std::span<const double> x) {
        f.gradient(x, gf);
        g.gradient(x, gg);
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += gf[static_cast<size_t>(i)] * gg[static_cast<size_t>(i)];
        return s * p.density(x);
    });
}

/// Compares <<f, g>>_p with the adjoint form int f (x . (p grad g) - div(p grad g)) dgamma.
/// The gamma pairing balances the identity; the p-weighted reading is reported
/// alongside for reference.
struct OttoAdjointReport {
    double inner = 0.0;           // << f, g >>_p
    double adjoint = 0.0;         // gamma-pairing right side
    double p_weighted = 0.0;      // same integrand with an extra density factor
    double gap() const { return std::abs(inner - adjoint); }
};

inline OttoAdjointReport otto_adjoint_check(const ExpDensity& p, const ScalarField& f,
                                            const ScalarField& g, const QuadratureGrid& grid) {
    OttoAdjointReport rep;
    rep.inner = otto_inner(p, f, g, grid);
    const int n = f.dim();
    Point gu(static_cast<size_t>(n)), gg(static_cast<size_t>(n));
    const auto stein_term = [&](std::span<const double> x) {
        // delta . (p grad g) = p (x . grad g - grad u_p . grad g - laplacian g)
        p.tilt()->gradient(x, gu);
        g.gradient(x, gg);
        double xg = 0.0, ug = 0.0;
        for (int i = 0; i < n; ++i) {
            xg += x[static_cast<size_t>(i)] * gg[static_cast<size_t>(i)];
            ug += gu[static_cast<size_t>(i)] * gg[static_cast<size_t>(i)];
        }
        return p.density(x) * (xg - ug - g.laplacian(x));
    };
    rep.adjoint = integrate_fn(grid, [&](std::span<const double> x) { return f.value(x) * stein_term(x); });
    rep.p_weighted = integrate_fn(
        grid, [&](std::span<const double> x) { return f.value(x) * stein_term(x) * p.density(x); });
    return rep;
}

/// Gram matrix of Otto's inner product over a finite basis of p-centered
/// fields.
struct OttoGram {
    std::shared_ptr<const ExpDensity> base;
    std::vector<FieldPtr> basis;
    Eigen::MatrixXd matrix;

    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(matrix, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }
};

inline OttoGram otto_gram(std::shared_ptr<const ExpDensity> base, std::vector<FieldPtr> basis,
                          const QuadratureGrid& grid) {
    OttoGram gram;
    gram.base = std::move(base);
    gram.basis = std::move(basis);
    const int k = static_cast<int>(gram.basis.size());
    gram.matrix.resize(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j) {
            const double v = otto_inner(*gram.base, *gram.basis[static_cast<size_t>(i)],
                                        *gram.basis[static_cast<size_t>(j)], grid);
            gram.matrix(i, j) = v;
            gram.matrix(j, i) = v;
        }
    return gram;
}

/// Centered Hermite fields of total degree 1..d, the default Galerkin basis.
inline std::vector<FieldPtr> centered_hermite_basis(const ExpDensity& p, int max_degree,
                                                    const QuadratureGrid& grid) {
    std::vector<FieldPtr> basis;
    for (const auto& alpha : multi_indices_up_to(p.dim(), max_degree)) {
        if (alpha.is_zero()) continue;
        auto b = std::make_shared<HermiteField>(HermiteField::basis(p.dim(), alpha));
        const double m = expect(p, *b, grid);
        basis.push_back(field_shift(b, -m));
    }
    return basis;
}

class SingularGram : public std::runtime_error {
public:
    SingularGram(const std::string& msg, std::vector<double> direction)
        : std::runtime_error(msg), null_direction(std::move(direction)) {}
    std::vector<double> null_direction;
};

struct NaturalGradient {
    std::vector<double> coefficients;
    FieldPtr field;          // sum_i c_i b_i
    double residual = 0.0;   // ||A c - r||_inf
};

/// Galerkin natural gradient: solves <<g, b_i>>_p = <target, b_i>_p by
/// Cholesky on the Otto Gram matrix.
inline NaturalGradient natural_gradient(const OttoGram& gram, const FiberVector& target,
                                        const QuadratureGrid& grid) {
    const int k = static_cast<int>(gram.basis.size());
    Eigen::VectorXd r(k);
    for (int i = 0; i < k; ++i)
        r(i) = integrate_fn(grid, [&](std::span<const double> x) {
            return target.v->value(x) * gram.basis[static_cast<size_t>(i)]->value(x) *
                   gram.base->density(x);
        });
    Eigen::LLT<Eigen::MatrixXd> llt(gram.matrix);
    if (llt.info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram.matrix);
        const Eigen::VectorXd v = es.eigenvectors().col(0);
        throw SingularGram("natural_gradient: Gram matrix is numerically singular",
                           std::vector<double>(v.data(), v.data() + v.size()));
    }
    const Eigen::VectorXd c = llt.solve(r);
    NaturalGradient out;
    out.coefficients.assign(c.data(), c.data() + c.size());
    out.residual = (gram.matrix * c - r).cwiseAbs().maxCoeff();
    FieldPtr acc = field_scale(gram.basis[0], c(0));
    for (int i = 1; i < k; ++i) acc = field_sum(acc, field_scale(gram.basis[static_cast<size_t>(i)], c(i)));
    out.field = acc;
    return out;
}

}  // namespace statbundle
