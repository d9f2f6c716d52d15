#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace statbundle {

/// Convex Young function with its derivative phi, the inverse derivative used
/// for conjugation, and an optional growth-control function C with
/// Phi(a x) <= C(a) Phi(x).
struct YoungFunction {
    std::string key;
    std::function<double(double)> phi;       // Phi(x), x >= 0
    std::function<double(double)> dphi;      // phi = Phi'
    std::function<double(double)> dphi_inv;  // phi^{-1}
    std::function<double(double)> growth;    // C(a), optional

    double operator()(double x) const { return phi(x); }
};

namespace detail {

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    // relative floor keeps large-magnitude integrals from recursing forever
    const double tol_eff = tol + 1e-13 * std::abs(left + right);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol_eff)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-10) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 30);
}

/// Inverse of an increasing function on [0, inf) by bracketing + bisection.
inline double monotone_inverse(const std::function<double(double)>& f, double y) {
    if (y <= 0.0) return 0.0;
    double hi = 1.0;
    int guard = 0;
    while (f(hi) < y) {
        hi *= 2.0;
        if (++guard > 2000) throw std::range_error("monotone_inverse: no bracket");
    }
    double lo = hi * 0.5 < 1.0 && hi == 1.0 ? 0.0 : hi * 0.5;
    if (f(lo) >= y) lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) < y) lo = mid;
        else hi = mid;
        if (hi - lo < 1e-16 * (1.0 + hi)) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

// -- named instances ---------------------------------------------------------

/// Phi(x) = x^p / p.  For p = 1 the derivative is constant, so conjugation is
/// unavailable, but the Luxemburg norm (the L^1 norm) still works.
inline YoungFunction young_power(double p) {
    if (p < 1.0) throw std::invalid_argument("young_power: p must be >= 1");
    YoungFunction y;
    y.key = "power:" + [p] {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%g", p);
        return std::string(buf);
    }();
    y.phi = [p](double x) { return std::pow(x, p) / p; };
    if (p > 1.0) {
        y.dphi = [p](double x) { return std::pow(x, p - 1.0); };
        y.dphi_inv = [p](double v) { return std::pow(v, 1.0 / (p - 1.0)); };
    }
    y.growth = [p](double a) { return std::pow(a, p); };
    return y;
}

/// exp2(x) = e^x - 1 - x
inline YoungFunction young_exp2() {
    YoungFunction y;
    y.key = "exp2";
    y.phi = [](double x) { return std::expm1(x) - x; };
    y.dphi = [](double x) { return std::expm1(x); };
    y.dphi_inv = [](double v) { return std::log1p(v); };
    return y;
}

/// cosh2(x) = cosh x - 1
inline YoungFunction young_cosh2() {
    YoungFunction y;
    y.key = "cosh2";
    y.phi = [](double x) { return std::cosh(x) - 1.0; };
    y.dphi = [](double x) { return std::sinh(x); };
    y.dphi_inv = [](double v) { return std::asinh(v); };
    return y;
}

/// gauss2(x) = e^{x^2/2} - 1
inline YoungFunction young_gauss2() {
    YoungFunction y;
    y.key = "gauss2";
    y.phi = [](double x) { return std::expm1(0.5 * x * x); };
    y.dphi = [](double x) { return x * std::exp(0.5 * x * x); };
    y.dphi_inv = [](double v) {
        return detail::monotone_inverse([](double x) { return x * std::exp(0.5 * x * x); }, v);
    };
    return y;
}

/// Conjugate by Psi(y) = int_0^y phi^{-1}; closed forms for the named pairs.
inline YoungFunction conjugate(const YoungFunction& y);

namespace detail {

inline YoungFunction conjugate_numeric(const YoungFunction& y) {
    if (!y.dphi_inv)
        throw std::invalid_argument("conjugate: Young function has no invertible derivative");
    YoungFunction c;
    c.key = "conj:" + y.key;
    auto inv = y.dphi_inv;
    c.phi = [inv](double v) { return adaptive_simpson(inv, 0.0, v, 1e-10); };
    c.dphi = inv;
    c.dphi_inv = y.dphi;
    return c;
}

inline YoungFunction conjugate_exp2() {
    YoungFunction c;
    c.key = "conj:exp2";
    c.phi = [](double v) { return (1.0 + v) * std::log1p(v) - v; };
    c.dphi = [](double v) { return std::log1p(v); };
    c.dphi_inv = [](double x) { return std::expm1(x); };
    c.growth = [](double a) { return std::max(a, a * a); };
    return c;
}

inline YoungFunction conjugate_cosh2() {
    YoungFunction c;
    c.key = "conj:cosh2";
    c.phi = [](double v) { return v * std::asinh(v) - (std::sqrt(1.0 + v * v) - 1.0); };
    c.dphi = [](double v) { return std::asinh(v); };
    c.dphi_inv = [](double x) { return std::sinh(x); };
    c.growth = [](double a) { return std::max(a, a * a); };
    return c;
}

}  // namespace detail

inline YoungFunction conjugate(const YoungFunction& y) {
    if (y.key.rfind("power:", 0) == 0) {
        const double p = std::stod(y.key.substr(6));
        if (p == 1.0) throw std::invalid_argument("conjugate: power:1 has a constant derivative");
        return young_power(p / (p - 1.0));
    }
    if (y.key == "exp2") return detail::conjugate_exp2();
    if (y.key == "cosh2") return detail::conjugate_cosh2();
    if (y.key == "conj:exp2") return young_exp2();
    if (y.key == "conj:cosh2") return young_cosh2();
    return detail::conjugate_numeric(y);
}

/// squared variant  Phi-bar(x) = Phi(x^2)
inline YoungFunction squared_young(const YoungFunction& y) {
    YoungFunction s;
    s.key = "sq:" + y.key;
    auto phi = y.phi;
    s.phi = [phi](double x) { return phi(x * x); };
    if (y.dphi) {
        auto dphi = y.dphi;
        s.dphi = [dphi](double x) { return 2.0 * x * dphi(x * x); };
        s.dphi_inv = [dphi](double v) {
            return detail::monotone_inverse([dphi](double x) { return 2.0 * x * dphi(x * x); }, v);
        };
    }
    if (y.growth) {
        auto g = y.growth;
        s.growth = [g](double a) { return g(a * a); };
    }
    return s;
}

/// Key grammar: power:p | exp2 | cosh2 | gauss2 | conj:<key> | sq:<key>
inline YoungFunction young_from_key(const std::string& key) {
    if (key.rfind("conj:", 0) == 0) return conjugate(young_from_key(key.substr(5)));
    if (key.rfind("sq:", 0) == 0) return squared_young(young_from_key(key.substr(3)));
    if (key.rfind("power:", 0) == 0) {
        try {
            return young_power(std::stod(key.substr(6)));
        } catch (const std::invalid_argument&) {
            throw std::invalid_argument("unknown Young function key '" + key + "'");
        }
    }
    if (key == "exp2") return young_exp2();
    if (key == "cosh2") return young_cosh2();
    if (key == "gauss2") return young_gauss2();
    throw std::invalid_argument("unknown Young function key '" + key + "'");
}

// -- eventual domination ------------------------------------------------------

/// Probe-based semi-decision of  Phi1(x) <= Phi2(kappa x) for x >= xbar.
/// Never claims "no": a missing witness yields `undetermined`.
struct DominationVerdict {
    bool dominated = false;  // false means undetermined
    double kappa = 0.0;
    double xbar = 0.0;
};

inline DominationVerdict eventually_dominates(const YoungFunction& phi1, const YoungFunction& phi2,
                                              int kappa_budget = 20) {
    const int probes = 160;
    for (double xbar : {1.0, 2.0, 4.0, 8.0}) {
        for (int j = 0; j <= kappa_budget; ++j) {
            const double kappa = std::pow(2.0, j);
            bool ok = true;
            for (int k = 0; k <= probes; ++k) {
                const double x =
                    xbar * std::pow(1e4 / xbar, static_cast<double>(k) / static_cast<double>(probes));
                const double lhs = phi1(x);
                const double rhs = phi2(kappa * x);
                if (std::isinf(rhs)) continue;  // overflow on the dominating side
                if (!(lhs <= rhs)) {
                    ok = false;
                    break;
                }
            }
            if (ok) return DominationVerdict{true, kappa, xbar};
        }
    }
    return DominationVerdict{};
}

/// Diagnostics backing the Young-function invariants (convexity on a probe
/// grid, Legendre equality Phi(x) + Psi(phi(x)) = x phi(x)).
struct YoungDiagnostics {
    double max_convexity_violation = 0.0;
    double max_legendre_residual = 0.0;
    bool zero_at_zero = false;
    bool increasing = false;
};

inline YoungDiagnostics young_validate(const YoungFunction& y, double xmax = 5.0, int probes = 50) {
    YoungDiagnostics d;
    d.zero_at_zero = y.phi(0.0) == 0.0;
    d.increasing = true;
    double prev = 0.0;
    YoungFunction conj = conjugate(y);
    for (int i = 1; i <= probes; ++i) {
        const double x = xmax * static_cast<double>(i) / probes;
        const double v = y(x);
        if (v <= prev) d.increasing = false;
        prev = v;
        const double xl = x * 0.5 + 0.25 * xmax / probes;
        const double mid = y(0.5 * (xl + x)) - 0.5 * (y(xl) + y(x));
        d.max_convexity_violation = std::max(d.max_convexity_violation, mid);
        if (y.dphi) {
            const double res = std::abs(y(x) + conj(y.dphi(x)) - x * y.dphi(x));
            d.max_legendre_residual = std::max(d.max_legendre_residual, res);
        }
    }
    return d;
}

}  // namespace statbundle
