#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "statbundle/inequalities.hpp"

using namespace statbundle;

namespace {

const QuadratureGrid& grid1() {
    static QuadratureGrid g(1, 40);
    return g;
}

HermiteField h(int k) { return HermiteField::axis_basis(1, 1, k); }

}  // namespace

TEST_CASE("gauss_poincare: extremal, strict, and trivial cases") {
    auto r1 = gauss_poincare(h(1), grid1());
    CHECK(r1.lhs == Catch::Approx(1.0).margin(1e-12));
    CHECK(r1.rhs == Catch::Approx(1.0).margin(1e-12));
    CHECK(r1.pass);

    auto r2 = gauss_poincare(h(2), grid1());
    CHECK(r2.lhs == Catch::Approx(2.0).margin(1e-10));
    CHECK(r2.rhs == Catch::Approx(4.0).margin(1e-10));
    CHECK(r2.pass);

    auto rc = gauss_poincare(*constant_field(1, 3.0), grid1());
    CHECK(rc.lhs == Catch::Approx(0.0).margin(1e-14));
    CHECK(rc.rhs == Catch::Approx(0.0).margin(1e-14));
    CHECK(rc.pass);
}

TEST_CASE("tilde_phi closed forms") {
    // Phi(s) = e^s gives exp(pi^2 a^2 / 8)
    for (double a : {0.3, 0.7, 1.1}) {
        const double expected = std::exp(std::numbers::pi * std::numbers::pi * a * a / 8.0);
        CHECK(tilde_phi([](double s) { return std::exp(s); }, a) ==
              Catch::Approx(expected).epsilon(1e-12));
    }

    // raw powers s^{2p}: (pi/2)^{2p} m(2p) a^{2p}
    for (int p : {1, 2}) {
        const double a = 0.5;
        const double m2p = gaussian_abs_moment(2.0 * p);
        const double expected = std::pow(std::numbers::pi / 2.0, 2 * p) * m2p * std::pow(a, 2 * p);
        CHECK(tilde_phi([p](double s) { return std::pow(s, 2 * p); }, a) ==
              Catch::Approx(expected).epsilon(1e-12));
    }

    CHECK(tilde_phi(young_cosh2(), 0.0) == Catch::Approx(0.0).margin(1e-15));

    // gauss2 along the Gaussian overflows once the scale is too large
    CHECK_THROWS_AS(tilde_phi(young_gauss2(), 2.0), std::range_error);
}

TEST_CASE("gaussian_abs_moment matches double factorials") {
    CHECK(gaussian_abs_moment(2.0) == Catch::Approx(1.0).margin(1e-12));
    CHECK(gaussian_abs_moment(4.0) == Catch::Approx(3.0).margin(1e-11));
    CHECK(gaussian_abs_moment(6.0) == Catch::Approx(15.0).margin(1e-10));
}

TEST_CASE("lp_poincare with the explicit constant") {
    // f = H_1, p = 1: lhs = 1, rhs = pi/2
    auto r = lp_poincare(h(1), 1.0, grid1());
    CHECK(r.lhs == Catch::Approx(1.0).margin(1e-10));
    CHECK(r.rhs == Catch::Approx(std::numbers::pi / 2.0).margin(1e-10));
    CHECK(r.pass);

    // constant is honest: linear fields achieve lhs/rhs = 2/pi
    for (double p : {1.0, 2.0, 3.0}) {
        auto rs = lp_poincare(h(1), p, grid1());
        REQUIRE(rs.lhs / rs.rhs >= 2.0 / std::numbers::pi - 1e-8);
    }

    ExprField sine("sin(x1)", 1);
    CHECK(lp_poincare(sine, 2.0, grid1()).pass);
    CHECK(lp_poincare(*constant_field(1, 1.5), 2.0, grid1()).pass);

    CHECK_THROWS_AS(lp_poincare(h(1), 0.4, grid1()), std::invalid_argument);
}

TEST_CASE("lipschitz_mgf") {
    ExprField sine("sin(x1)", 1);
    CHECK(lipschitz_mgf(sine, 0.5, grid1()).pass);

    auto rc = lipschitz_mgf(*constant_field(1, 2.0), 0.7, grid1());
    CHECK(rc.lhs == Catch::Approx(1.0).margin(1e-12));
    CHECK(rc.rhs == Catch::Approx(1.0).margin(1e-12));

    ExprField th("tanh(2*x1)", 1);
    CHECK(lipschitz_mgf(th, 0.4, grid1()).pass);

    // right side overflows when kappa |grad f| is too large on the grid
    auto linear = std::make_shared<HermiteField>(h(1));
    CHECK_THROWS_AS(lipschitz_mgf(*lambda_scale(linear, 30.0), 30.0, grid1()), std::range_error);
}

TEST_CASE("cosh_poincare with C3 = pi/2") {
    auto rc = cosh_poincare(*constant_field(1, 1.0), grid1());
    CHECK(rc.lhs == Catch::Approx(0.0).margin(1e-14));
    CHECK(rc.pass);

    ExprField sine("sin(x1)", 1);
    auto rs = cosh_poincare(sine, grid1());
    CHECK(rs.constant == Catch::Approx(std::numbers::pi / 2.0));
    CHECK_FALSE(rs.skipped);
    CHECK(rs.pass);

    // |grad(0.3 H_2)| = 0.6 |x| has a finite gauss2 norm (scale < 1)
    auto rq = cosh_poincare(h(2) * 0.3, grid1());
    CHECK_FALSE(rq.skipped);
    CHECK(rq.pass);
}

TEST_CASE("llogl_poincare computes its constant by bisection") {
    const double kappa = llogl_kappa();
    CHECK(kappa > 0.5);
    CHECK(kappa < 0.7);
    // the defining equation holds at the computed kappa
    const GaussHermiteRule rule = gauss_hermite(80);
    double s = 0.0;
    for (size_t i = 0; i < rule.nodes.size(); ++i) {
        const double a = std::numbers::pi / 2.0 * kappa * std::abs(rule.nodes[i]);
        s += rule.weights[i] * std::max(a, a * a);
    }
    CHECK(s == Catch::Approx(1.0).margin(1e-8));

    auto rc = llogl_poincare(*constant_field(1, 1.0), grid1());
    CHECK(rc.lhs == Catch::Approx(0.0).margin(1e-14));
    CHECK(rc.pass);

    CHECK(llogl_poincare(h(2), grid1()).pass);
    ExprField mix("sin(x1)+0.2*H(2,1)", 1);
    CHECK(llogl_poincare(mix, grid1()).pass);
}

TEST_CASE("growth control of (exp2)* holds on a probe grid") {
    auto psi = conjugate(young_exp2());
    REQUIRE(psi.growth);
    for (int i = 1; i <= 20; ++i)
        for (int j = 1; j <= 20; ++j) {
            const double a = 0.25 * i;
            const double x = 0.4 * j;
            REQUIRE(psi(a * x) <= psi.growth(a) * psi(x) + 1e-12);
        }
}

TEST_CASE("covariance_ou: exact and time-integral routes agree") {
    auto r22 = covariance_ou(h(2), h(2));
    CHECK(r22.exact == Catch::Approx(2.0));
    CHECK(r22.integral == Catch::Approx(2.0));

    auto r12 = covariance_ou(h(1), h(2));
    CHECK(r12.exact == 0.0);
    CHECK(r12.integral == 0.0);

    auto r33 = covariance_ou(h(3), h(3));
    CHECK(r33.exact == Catch::Approx(6.0));
    CHECK(r33.integral == Catch::Approx(6.0));

    // all Hermite pairs of degree <= 6, dims 1 and 2
    for (int dim : {1, 2}) {
        const auto idx = multi_indices_up_to(dim, 6);
        for (const auto& a : idx)
            for (const auto& b : idx) {
                auto r = covariance_ou(HermiteField::basis(dim, a), HermiteField::basis(dim, b));
                REQUIRE(std::abs(r.exact - r.integral) < 1e-10);
            }
    }
}

TEST_CASE("covariance_bound") {
    // f = g = H_1 with power:2 and euclidean norms: both sides equal 1
    auto r = covariance_bound(h(1), h(1), young_power(2.0), VectorNorm::L2, VectorNorm::L2, grid1());
    CHECK(r.lhs == Catch::Approx(1.0).margin(1e-10));
    CHECK(r.rhs == Catch::Approx(1.0).margin(1e-8));
    CHECK(r.pass);

    // disjoint variables: zero covariance
    QuadratureGrid g2(2, 24);
    ExprField f2("sin(x1)", 2), gf2("sin(x2)", 2);
    auto rd = covariance_bound(f2, gf2, young_cosh2(), VectorNorm::L2, VectorNorm::L2, g2);
    CHECK(rd.lhs == Catch::Approx(0.0).margin(1e-12));
    CHECK(rd.pass);

    // l1/linf pairing
    ExprField fa("sin(x1)+0.5*cos(x2)", 2), fb("tanh(x1)", 2);
    CHECK(covariance_bound(fa, fb, young_cosh2(), VectorNorm::L1, VectorNorm::LInf, g2).pass);

    CHECK_THROWS_AS(covariance_bound(fa, fb, young_cosh2(), VectorNorm::L2, VectorNorm::L1, g2),
                    std::invalid_argument);
}

TEST_CASE("chi2_bound") {
    auto rc = chi2_bound(*constant_field(1, 1.0), grid1());
    CHECK(rc.lhs == Catch::Approx(0.0).margin(1e-14));
    CHECK(rc.rhs == Catch::Approx(0.0).margin(1e-14));

    // p = 1 + 0.1 H_2: lhs = 0.02, rhs = 0.08 by coefficient algebra
    auto p = HermiteField::constant(1, 1.0) + h(2) * 0.1;
    auto r = chi2_bound(p, grid1());
    CHECK(r.lhs == Catch::Approx(0.02).margin(1e-10));
    CHECK(r.rhs == Catch::Approx(0.08).margin(1e-10));
    CHECK(r.pass);

    // evaluable (non-Hermite) path agrees with the exact one
    FieldPtr pf = std::make_shared<HermiteField>(p);
    LambdaField generic(1, [pf](std::span<const double> x) { return pf->value(x); });
    auto rg = chi2_bound(generic, grid1());
    CHECK(rg.lhs == Catch::Approx(r.lhs).margin(1e-8));
    CHECK(rg.rhs == Catch::Approx(r.rhs).margin(1e-4));

    // node positivity is enforced
    auto bad = HermiteField::constant(1, 1.0) + h(1) * 0.1;
    CHECK_THROWS_AS(chi2_bound(bad, grid1()), std::invalid_argument);
}

TEST_CASE("lln_demo: rate, tail, and trivial cases") {
    GaussianSampler sampler(1, 424242);
    auto gamma = ExpDensity::standard(1, grid1());
    ExprField sine("sin(x1)", 1);

    auto rep = lln_demo(sine, gamma, sampler, grid1(), {1000, 4000}, 200);
    CHECK(rep.exact == Catch::Approx(0.0).margin(1e-12));
    // quadrupling N halves the RMS error within 20%
    const double ratio = rep.rms_error[1] / rep.rms_error[0];
    CHECK(ratio > 0.4);
    CHECK(ratio < 0.6);
    CHECK(rep.tail_c2 > 0.0);
    CHECK(rep.tail_r2 >= 0.9);

    // constant f under the standard density: zero error at N = 1
    auto rc = lln_demo(*constant_field(1, 2.5), gamma, sampler, grid1(), {1}, 10);
    CHECK(rc.rms_error[0] == Catch::Approx(0.0).margin(1e-14));

    // unbounded f is rejected up front
    CHECK_THROWS_AS(lln_demo(h(1), gamma, sampler, grid1(), {100}, 5), std::invalid_argument);
}
