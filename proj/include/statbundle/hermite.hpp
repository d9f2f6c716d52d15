#pragma once

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "statbundle/multi_index.hpp"
#include "statbundle/scalar_field.hpp"

namespace statbundle {

/// Probabilists' Hermite H_k(t): H_0 = 1, H_1 = t, H_{k+1} = t H_k - k H_{k-1}.
/// Orthogonal against the standard Gaussian with <H_j, H_k> = k! [j = k].
inline double hermite_value(int k, double t) {
    if (k < 0) throw std::invalid_argument("hermite degree must be non-negative");
    if (k == 0) return 1.0;
    double hm = 1.0, h = t;
    for (int j = 1; j < k; ++j) {
        const double hp = t * h - j * hm;
        hm = h;
        h = hp;
    }
    return h;
}

/// Fills out[0..max_k] with H_0(t)..H_max_k(t).
inline void hermite_table(int max_k, double t, std::span<double> out) {
    out[0] = 1.0;
    if (max_k >= 1) out[1] = t;
    for (int j = 1; j < max_k; ++j)
        out[static_cast<size_t>(j + 1)] = t * out[static_cast<size_t>(j)] - j * out[static_cast<size_t>(j - 1)];
}

/// H_alpha(x) = prod_i H_{alpha_i}(x_i).
inline double hermite_eval(const MultiIndex& alpha, std::span<const double> x) {
    if (alpha.length() != static_cast<int>(x.size()))
        throw std::invalid_argument("hermite_eval: index/point dimension mismatch");
    double v = 1.0;
    for (int i = 0; i < alpha.length(); ++i) v *= hermite_value(alpha[i], x[static_cast<size_t>(i)]);
    return v;
}

/// Finite Hermite expansion f = sum_alpha c_alpha H_alpha.  Coefficients are
/// kept in canonical form (exact zeros dropped), so equality of fields is
/// equality of maps.  Gradient and Hessian use the lowering rule and are exact.
class HermiteField final : public ScalarField {
public:
    using CoeffMap = std::map<MultiIndex, double>;

    explicit HermiteField(int n) : dim_(n) {
        if (n <= 0) throw std::invalid_argument("dimension must be positive");
    }
    HermiteField(int n, CoeffMap coeffs) : dim_(n) {
        for (auto& [alpha, c] : coeffs) set(alpha, c);
    }

    /// c * H_alpha as a field.
    static HermiteField basis(int n, const MultiIndex& alpha, double c = 1.0) {
        HermiteField f(n);
        f.set(alpha, c);
        return f;
    }
    /// c * H_k on axis i (1-based), n-dimensional.
    static HermiteField axis_basis(int n, int i, int k, double c = 1.0) {
        return basis(n, MultiIndex::axis(n, i, k), c);
    }
    static HermiteField constant(int n, double c) { return basis(n, MultiIndex::zero(n), c); }

    int dim() const override { return dim_; }
    const CoeffMap& coeffs() const { return coeffs_; }

    double coeff(const MultiIndex& alpha) const {
        auto it = coeffs_.find(alpha);
        return it == coeffs_.end() ? 0.0 : it->second;
    }

    void set(const MultiIndex& alpha, double c) {
        if (alpha.length() != dim_) throw std::invalid_argument("multi-index length != field dimension");
        if (c == 0.0) coeffs_.erase(alpha);
        else coeffs_[alpha] = c;
    }
    void add(const MultiIndex& alpha, double c) { set(alpha, coeff(alpha) + c); }

    int degree() const {
        int d = 0;
        for (const auto& [alpha, c] : coeffs_) d = std::max(d, alpha.order());
        return d;
    }

    bool operator==(const HermiteField& o) const { return dim_ == o.dim_ && coeffs_ == o.coeffs_; }

    HermiteField operator+(const HermiteField& o) const {
        require_same_dim(o);
        HermiteField r = *this;
        for (const auto& [alpha, c] : o.coeffs_) r.add(alpha, c);
        return r;
    }
    HermiteField operator-(const HermiteField& o) const {
        require_same_dim(o);
        HermiteField r = *this;
        for (const auto& [alpha, c] : o.coeffs_) r.add(alpha, -c);
        return r;
    }
    HermiteField operator*(double c) const {
        HermiteField r(dim_);
        for (const auto& [alpha, v] : coeffs_) r.set(alpha, c * v);
        return r;
    }

    double value(std::span<const double> x) const override {
        if (static_cast<int>(x.size()) != dim_) throw std::invalid_argument("point dimension mismatch");
        const int maxdeg = per_axis_degree();
        std::vector<double> tab(static_cast<size_t>(dim_ * (maxdeg + 1)));
        for (int i = 0; i < dim_; ++i)
            hermite_table(maxdeg, x[static_cast<size_t>(i)],
                          std::span<double>(tab).subspan(static_cast<size_t>(i * (maxdeg + 1)),
                                                         static_cast<size_t>(maxdeg + 1)));
        double s = 0.0;
        for (const auto& [alpha, c] : coeffs_) {
            double term = c;
            for (int i = 0; i < dim_; ++i)
                term *= tab[static_cast<size_t>(i * (maxdeg + 1) + alpha[i])];
            s += term;
        }
        return s;
    }

    void gradient(std::span<const double> x, std::span<double> out) const override {
        for (int i = 0; i < dim_; ++i) out[static_cast<size_t>(i)] = partial(i + 1).value(x);
    }
    void hessian(std::span<const double> x, std::span<double> out) const override {
        for (int i = 0; i < dim_; ++i) {
            HermiteField di = partial(i + 1);
            for (int j = i; j < dim_; ++j) {
                const double v = di.partial(j + 1).value(x);
                out[static_cast<size_t>(i * dim_ + j)] = v;
                out[static_cast<size_t>(j * dim_ + i)] = v;
            }
        }
    }
    bool has_exact_gradient() const override { return true; }

    /// d/dx_i via the lowering rule  d_i H_alpha = alpha_i H_{alpha - e_i}; exact.
    HermiteField partial(int axis_1based) const {
        if (axis_1based < 1 || axis_1based > dim_) throw std::invalid_argument("axis out of range");
        const int i = axis_1based - 1;
        HermiteField r(dim_);
        for (const auto& [alpha, c] : coeffs_)
            if (alpha[i] > 0) r.add(alpha.lowered(i), c * alpha[i]);
        return r;
    }

    /// Stein raising  delta_i H_alpha = H_{alpha + e_i}; exact adjoint of partial.
    HermiteField stein(int axis_1based) const {
        if (axis_1based < 1 || axis_1based > dim_) throw std::invalid_argument("axis out of range");
        const int i = axis_1based - 1;
        HermiteField r(dim_);
        for (const auto& [alpha, c] : coeffs_) r.add(alpha.raised(i), c);
        return r;
    }

    /// Gaussian mean = coefficient of H_0.
    double mean() const { return coeff(MultiIndex::zero(dim_)); }

    /// Exact L2(gamma) pairing  sum_alpha alpha! f_alpha g_alpha.
    double l2_inner(const HermiteField& o) const {
        require_same_dim(o);
        double s = 0.0;
        for (const auto& [alpha, c] : coeffs_) {
            const double oc = o.coeff(alpha);
            if (oc != 0.0) s += alpha.factorial() * c * oc;
        }
        return s;
    }

    Certificate certificate() const override;

    std::optional<std::string> fieldspec() const override {
        if (coeffs_.empty()) return std::string("0");
        std::ostringstream os;
        os.precision(17);
        bool first = true;
        for (const auto& [alpha, c] : coeffs_) {
            double a = c;
            if (!first && a >= 0) os << "+";
            if (a < 0) {
                os << "-";
                a = -a;
            }
            os << a;
            for (int i = 0; i < dim_; ++i)
                if (alpha[i] > 0) os << "*H(" << alpha[i] << "," << (i + 1) << ")";
            first = false;
        }
        return os.str();
    }

private:
    void require_same_dim(const HermiteField& o) const {
        if (dim_ != o.dim_) throw std::invalid_argument("field dimension mismatch");
    }
    int per_axis_degree() const {
        int d = 0;
        for (const auto& [alpha, c] : coeffs_)
            for (int i = 0; i < dim_; ++i) d = std::max(d, alpha[i]);
        return d;
    }

    int dim_;
    CoeffMap coeffs_;
};

inline HermiteField operator*(double c, const HermiteField& f) { return f * c; }

/// Divergence sum_i delta_i F_i of a vector of fields (raising rule); exact.
inline HermiteField stein_div(std::span<const HermiteField> components) {
    if (components.empty()) throw std::invalid_argument("stein_div: empty vector field");
    const int n = components[0].dim();
    if (static_cast<int>(components.size()) != n)
        throw std::invalid_argument("stein_div: need one component per dimension");
    HermiteField r(n);
    for (int i = 0; i < n; ++i) {
        if (components[static_cast<size_t>(i)].dim() != n)
            throw std::invalid_argument("stein_div: component dimension mismatch");
        r = r + components[static_cast<size_t>(i)].stein(i + 1);
    }
    return r;
}

/// Number operator  delta . grad f = sum |alpha| c_alpha H_alpha; exact.
inline HermiteField number_operator(const HermiteField& f) {
    HermiteField r(f.dim());
    for (const auto& [alpha, c] : f.coeffs()) r.set(alpha, alpha.order() * c);
    return r;
}

/// OU semigroup on coefficients: c_alpha -> e^{-|alpha| t} c_alpha.
inline HermiteField ou_semigroup(const HermiteField& f, double t) {
    if (t < 0) throw std::domain_error("ou_semigroup: t must be >= 0");
    HermiteField r(f.dim());
    for (const auto& [alpha, c] : f.coeffs()) r.set(alpha, std::exp(-alpha.order() * t) * c);
    return r;
}

/// Monomial expansion of H_k as coefficients of t^0..t^k.
inline std::vector<double> hermite_monomial_coeffs(int k) {
    std::vector<double> hm{1.0};
    if (k == 0) return hm;
    std::vector<double> h{0.0, 1.0};
    for (int j = 1; j < k; ++j) {
        std::vector<double> hp(static_cast<size_t>(j + 2), 0.0);
        for (size_t d = 0; d < h.size(); ++d) hp[d + 1] += h[d];   // t * H_j
        for (size_t d = 0; d < hm.size(); ++d) hp[d] -= j * hm[d]; // - j H_{j-1}
        hm = std::move(h);
        h = std::move(hp);
    }
    return h;
}

/// Certificate of a polynomial given by monomial coefficients: constants are
/// bounded, total degree <= 2 is a quadratic tilt, anything else unbounded.
inline Certificate certificate_from_monomials(int dim, const std::map<MultiIndex, double>& mono) {
    int deg = 0;
    double c0 = 0.0;
    for (const auto& [m, v] : mono) {
        if (v == 0.0) continue;
        if (m.order() == 0) c0 = v;
        deg = std::max(deg, m.order());
    }
    if (deg == 0) return Certificate::bounded(std::abs(c0));
    if (deg > 2) return Certificate::unbounded();

    std::vector<double> q(static_cast<size_t>(dim * dim), 0.0);
    for (const auto& [m, v] : mono) {
        if (m.order() != 2) continue;
        int i = -1, j = -1;
        for (int d = 0; d < dim; ++d) {
            if (m[d] == 2) i = j = d;
            else if (m[d] == 1) (i < 0 ? i : j) = d;
        }
        if (i == j) q[static_cast<size_t>(i * dim + i)] += v;
        else {
            q[static_cast<size_t>(i * dim + j)] += v / 2.0;
            q[static_cast<size_t>(j * dim + i)] += v / 2.0;
        }
    }
    return Certificate::quadratic(dim, std::move(q));
}

inline Certificate HermiteField::certificate() const {
    // Expand into monomials; fields of total degree <= 2 are quadratic tilts.
    std::map<MultiIndex, double> mono;
    for (const auto& [alpha, c] : coeffs_) {
        if (alpha.order() > 2) return Certificate::unbounded();
        std::map<MultiIndex, double> term{{MultiIndex::zero(dim_), c}};
        for (int i = 0; i < dim_; ++i) {
            if (alpha[i] == 0) continue;
            const auto axis_coeffs = hermite_monomial_coeffs(alpha[i]);
            std::map<MultiIndex, double> next;
            for (const auto& [m, v] : term)
                for (size_t d = 0; d < axis_coeffs.size(); ++d) {
                    if (axis_coeffs[d] == 0.0) continue;
                    auto e = m.entries();
                    e[static_cast<size_t>(i)] += static_cast<int>(d);
                    next[MultiIndex(e)] += v * axis_coeffs[d];
                }
            term = std::move(next);
        }
        for (const auto& [m, v] : term) mono[m] += v;
    }
    return certificate_from_monomials(dim_, mono);
}

}  // namespace statbundle
