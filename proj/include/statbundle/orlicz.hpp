#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "statbundle/quadrature.hpp"
#include "statbundle/sampler.hpp"
#include "statbundle/young.hpp"

namespace statbundle {

namespace detail {

inline std::vector<double> abs_node_values(const ScalarField& f, const QuadratureGrid& grid) {
    if (f.dim() != grid.dim()) throw std::invalid_argument("orlicz norm: dimension mismatch");
    std::vector<double> vals(grid.size());
    for (size_t k = 0; k < grid.size(); ++k) {
        const double v = f.value(grid.node(k));
        if (!std::isfinite(v)) throw std::range_error("orlicz norm: field not finite at a node");
        vals[k] = std::abs(v);
    }
    return vals;
}

/// G(alpha) = int Phi(|f| / alpha) dgamma; +inf on overflow.
inline double gauge_integral(const std::vector<double>& vals, const QuadratureGrid& grid,
                             const YoungFunction& phi, double alpha) {
    KahanAccumulator acc;
    for (size_t k = 0; k < vals.size(); ++k) {
        const double t = phi(vals[k] / alpha);
        if (std::isnan(t)) return std::numeric_limits<double>::infinity();
        acc.add(grid.weight(k) * t);
        if (std::isinf(acc.sum())) return std::numeric_limits<double>::infinity();
    }
    return acc.sum();
}

}  // namespace detail

/// Luxemburg norm: the unique alpha with  int Phi(|f|/alpha) dgamma = 1,
/// located by bracketing + bisection on the decreasing gauge integral.
inline double luxemburg_norm(const ScalarField& f, const YoungFunction& phi,
                             const QuadratureGrid& grid) {
    const auto vals = detail::abs_node_values(f, grid);
    const double maxv = *std::max_element(vals.begin(), vals.end());
    if (maxv == 0.0) return 0.0;

    const auto G = [&](double alpha) { return detail::gauge_integral(vals, grid, phi, alpha); };

    // brackets start at the max node value and move by factors of 2
    double alpha = maxv;
    int guard = 0;
    if (G(alpha) > 1.0) {
        while (G(alpha) > 1.0) {
            alpha *= 2.0;
            if (++guard > 200) throw std::range_error("luxemburg_norm: norm exceeds grid dynamic range");
        }
    } else {
        while (G(alpha * 0.5) <= 1.0) {
            alpha *= 0.5;
            if (++guard > 200) break;
        }
    }
    double hi = alpha;          // G(hi) <= 1
    double lo = alpha * 0.5;    // G(lo) > 1 (or negligibly small alpha)
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (G(mid) <= 1.0) hi = mid;
        else lo = mid;
        if (hi - lo <= 1e-15 * hi) break;
    }
    return hi;
}

/// Orlicz (dual) norm of the conjugate space via the Amemiya representation
///   inf_{k>0} (1 + int Phi*(k |f|) dgamma) / k,
/// minimized by golden-section search on the unimodal objective.
inline double dual_norm(const ScalarField& f, const YoungFunction& phi, const QuadratureGrid& grid) {
    const YoungFunction psi = conjugate(phi);
    const auto vals = detail::abs_node_values(f, grid);
    const double maxv = *std::max_element(vals.begin(), vals.end());
    if (maxv == 0.0) return 0.0;

    const auto objective = [&](double k) {
        const double r = detail::gauge_integral(vals, grid, psi, 1.0 / k);
        return (1.0 + r) / k;
    };

    // coarse scan over k = 2^j for the unimodal bracket
    int best_j = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int j = -80; j <= 80; ++j) {
        const double v = objective(std::pow(2.0, j));
        if (v < best) {
            best = v;
            best_j = j;
        }
    }
    if (std::isinf(best)) throw std::range_error("dual_norm: objective overflow for every scale");

    const double phi_ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = best_j - 1.0, b = best_j + 1.0;  // log2 space
    double c = b - phi_ratio * (b - a);
    double d = a + phi_ratio * (b - a);
    double fc = objective(std::pow(2.0, c));
    double fd = objective(std::pow(2.0, d));
    for (int it = 0; it < 200 && (b - a) > 1e-12; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi_ratio * (b - a);
            fc = objective(std::pow(2.0, c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi_ratio * (b - a);
            fd = objective(std::pow(2.0, d));
        }
    }
    return std::min(fc, fd);
}

/// Exponential tail bound fit:  P(|f| >= t) ~ C1 exp(-C2 t), least squares on
/// the log-survival over quantile-spaced thresholds.
struct TailFit {
    double c1 = 0.0;
    double c2 = 0.0;
    double r_squared = 0.0;
    bool bounded_support = false;  // survival hits zero just past the observed max
};

inline TailFit tail_fit(const ScalarField& f, const GaussianSampler& sampler, size_t n) {
    if (n < 10000) throw std::invalid_argument("tail_fit: need at least 1e4 samples");
    const int dim = f.dim();
    GaussianSampler s = sampler.with_dim(dim);
    std::vector<double> vals(n);
    Point x(static_cast<size_t>(dim));
    for (size_t j = 0; j < n; ++j) {
        for (int d = 0; d < dim; ++d)
            x[static_cast<size_t>(d)] = s.normal(static_cast<std::uint64_t>(j) * dim + static_cast<std::uint64_t>(d));
        vals[j] = std::abs(f.value(x));
    }
    std::sort(vals.begin(), vals.end());
    const double vmax = vals.back();
    const double vmedian = vals[n / 2];
    if (vmax - vals.front() < 1e-12 * std::max(1.0, vmax))
        throw std::domain_error("tail_fit: degenerate (constant) field");

    TailFit fit;
    const double q999 = vals[static_cast<size_t>(0.999 * static_cast<double>(n))];
    fit.bounded_support = (vmax - q999) < 0.01 * std::max(1e-12, vmax - vmedian);

    // linear tail: log-survival at quantiles 0.80 .. 0.995
    std::vector<double> ts, ls;
    for (int i = 0; i < 24; ++i) {
        const double q = 0.80 + (0.995 - 0.80) * i / 23.0;
        const size_t idx = static_cast<size_t>(q * static_cast<double>(n));
        const double t = vals[idx];
        const size_t greater = static_cast<size_t>(vals.end() - std::upper_bound(vals.begin(), vals.end(), t));
        if (greater == 0) continue;
        if (!ts.empty() && t <= ts.back()) continue;
        ts.push_back(t);
        ls.push_back(std::log(static_cast<double>(greater) / static_cast<double>(n)));
    }
    if (ts.size() < 5) {
        fit.bounded_support = true;
        return fit;
    }
    const size_t m = ts.size();
    double st = 0, sl = 0, stt = 0, stl = 0;
    for (size_t i = 0; i < m; ++i) {
        st += ts[i];
        sl += ls[i];
        stt += ts[i] * ts[i];
        stl += ts[i] * ls[i];
    }
    const double denom = static_cast<double>(m) * stt - st * st;
    const double slope = (static_cast<double>(m) * stl - st * sl) / denom;
    const double inter = (sl - slope * st) / static_cast<double>(m);
    fit.c2 = -slope;
    fit.c1 = std::exp(inter);
    double ss_res = 0, ss_tot = 0;
    const double lmean = sl / static_cast<double>(m);
    for (size_t i = 0; i < m; ++i) {
        const double pred = inter + slope * ts[i];
        ss_res += (ls[i] - pred) * (ls[i] - pred);
        ss_tot += (ls[i] - lmean) * (ls[i] - lmean);
    }
    fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

}  // namespace statbundle
