#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "statbundle/expr.hpp"
#include "statbundle/orlicz.hpp"
#include "statbundle/young.hpp"

using namespace statbundle;

namespace {

std::vector<FieldPtr> norm_corpus(int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    std::vector<FieldPtr> out;
    for (int i = 0; i < count; ++i) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%.3f*sin(x1) + %.3f*cos(2*x1) + %.3f*tanh(x1) + %.3f",
                      c(rng), c(rng), c(rng), 0.3 * c(rng));
        out.push_back(parse_field(buf, 1));
    }
    return out;
}

}  // namespace

TEST_CASE("named Young functions validate: convexity, monotonicity, Legendre") {
    for (const char* key : {"power:2", "power:3", "exp2", "cosh2"}) {
        auto y = young_from_key(key);
        auto d = young_validate(y, 5.0);
        INFO(key);
        CHECK(d.zero_at_zero);
        CHECK(d.increasing);
        CHECK(d.max_convexity_violation <= 1e-12);
        CHECK(d.max_legendre_residual <= 1e-9);
    }
    // gauss2's conjugate is numeric; keep the probe range moderate
    auto g = young_validate(young_gauss2(), 3.0);
    CHECK(g.zero_at_zero);
    CHECK(g.increasing);
    CHECK(g.max_convexity_violation <= 1e-12);
    CHECK(g.max_legendre_residual <= 1e-9);
}

TEST_CASE("closed-form conjugates") {
    auto p2 = conjugate(young_power(2.0));
    CHECK(p2.key == "power:2");
    CHECK(p2(3.0) == Catch::Approx(4.5));

    auto e2 = conjugate(young_exp2());
    CHECK(e2(2.0) == Catch::Approx(3.0 * std::log(3.0) - 2.0));

    // Legendre equality at x = 1: Psi(sinh 1) = sinh(1) - (cosh(1) - 1)
    auto c2 = conjugate(young_cosh2());
    CHECK(c2(std::sinh(1.0)) == Catch::Approx(std::sinh(1.0) - (std::cosh(1.0) - 1.0)).margin(1e-12));

    CHECK_THROWS_AS(conjugate(young_power(1.0)), std::invalid_argument);
}

TEST_CASE("Young inequality on a 50x50 probe grid") {
    for (const char* key : {"power:2", "power:3", "exp2", "cosh2"}) {
        auto phi = young_from_key(key);
        auto psi = conjugate(phi);
        for (int i = 0; i <= 50; ++i)
            for (int j = 0; j <= 50; ++j) {
                const double x = 4.0 * i / 50.0;
                const double y = phi.dphi(4.0 * j / 50.0);
                REQUIRE(phi(x) + psi(y) >= x * y - 1e-12 * (1.0 + x * y));
            }
    }
}

TEST_CASE("conjugate involution within 1e-8") {
    // numeric double conjugation for cosh2 (white box) and gauss2 (public path)
    auto num2 = detail::conjugate_numeric(detail::conjugate_numeric(young_cosh2()));
    auto base = young_cosh2();
    for (int i = 0; i <= 20; ++i) {
        const double x = 10.0 * i / 20.0;
        REQUIRE(num2(x) == Catch::Approx(base(x)).margin(1e-8).epsilon(1e-9));
    }
    auto g2 = conjugate(conjugate(young_gauss2()));
    auto g = young_gauss2();
    for (int i = 0; i <= 10; ++i) {
        const double x = 3.0 * i / 10.0;
        REQUIRE(g2(x) == Catch::Approx(g(x)).margin(1e-8).epsilon(1e-9));
    }
}

TEST_CASE("luxemburg norm closed forms") {
    QuadratureGrid grid(1, 40);

    auto cst = constant_field(1, 2.0);
    const double acosh2 = std::acosh(2.0);
    CHECK(luxemburg_norm(*cst, young_cosh2(), grid) == Catch::Approx(2.0 / acosh2).margin(1e-9));

    CHECK(luxemburg_norm(*constant_field(1, 0.0), young_cosh2(), grid) == 0.0);

    auto h1 = std::make_shared<HermiteField>(HermiteField::axis_basis(1, 1, 1));
    CHECK(luxemburg_norm(*h1, young_power(2.0), grid) == Catch::Approx(1.0 / std::sqrt(2.0)).margin(1e-10));
}

TEST_CASE("luxemburg norm: homogeneity and unit ball") {
    QuadratureGrid grid(1, 40);
    auto phi = young_cosh2();
    for (const auto& f : norm_corpus(6, 21)) {
        const double base = luxemburg_norm(*f, phi, grid);
        if (base == 0.0) continue;
        for (double c : {-2.0, 0.5, 3.0}) {
            const double scaled = luxemburg_norm(*lambda_scale(f, c), phi, grid);
            REQUIRE(scaled == Catch::Approx(std::abs(c) * base).margin(1e-8).epsilon(1e-9));
        }
        // unit-ball characterization
        const double g = detail::gauge_integral(detail::abs_node_values(*f, grid), grid, phi, base);
        REQUIRE(g == Catch::Approx(1.0).margin(1e-8));
    }
}

TEST_CASE("luxemburg norm rejects non-finite fields") {
    QuadratureGrid grid(1, 30);
    LambdaField bad(1, [](std::span<const double> x) { return std::exp(std::pow(x[0], 4)); });
    CHECK_THROWS_AS(luxemburg_norm(bad, young_cosh2(), grid), std::range_error);
}

TEST_CASE("dual norm: zero, sandwich, pairing") {
    QuadratureGrid grid(1, 40);
    CHECK(dual_norm(*constant_field(1, 0.0), young_power(2.0), grid) == 0.0);

    auto h1 = std::make_shared<HermiteField>(HermiteField::axis_basis(1, 1, 1));
    const double d = dual_norm(*h1, young_power(2.0), grid);
    const double l = luxemburg_norm(*h1, conjugate(young_power(2.0)), grid);
    CHECK(d >= l * (1.0 - 1e-9));
    CHECK(d <= 2.0 * l * (1.0 + 1e-9));

    // sandwich across a corpus and two Young functions
    for (const char* key : {"power:2", "cosh2"}) {
        auto phi = young_from_key(key);
        auto psi = conjugate(phi);
        for (const auto& f : norm_corpus(10, 33)) {
            const double dn = dual_norm(*f, phi, grid);
            const double ln = luxemburg_norm(*f, psi, grid);
            if (ln == 0.0) continue;
            REQUIRE(dn >= ln * (1.0 - 1e-8));
            REQUIRE(dn <= 2.0 * ln * (1.0 + 1e-8));
        }
    }

    // duality pairing |int f g| <= 2 lux(f, Phi) lux(g, Phi*)
    auto phi = young_cosh2();
    auto psi = conjugate(phi);
    auto fs = norm_corpus(20, 44);
    auto gs = norm_corpus(20, 45);
    for (size_t i = 0; i < fs.size(); ++i) {
        const double pairing = std::abs(inner(*fs[i], *gs[i], grid));
        const double bound = 2.0 * luxemburg_norm(*fs[i], phi, grid) * luxemburg_norm(*gs[i], psi, grid);
        REQUIRE(pairing <= bound + 1e-12);
    }
}

TEST_CASE("eventual domination probes") {
    auto v1 = eventually_dominates(young_power(2.0), young_cosh2());
    CHECK(v1.dominated);

    auto v2 = eventually_dominates(young_cosh2(), young_gauss2());
    CHECK(v2.dominated);

    auto v3 = eventually_dominates(young_cosh2(), young_cosh2());
    CHECK(v3.dominated);
    CHECK(v3.kappa == 1.0);

    // gauss2 and sq:cosh2 dominate each other
    auto s = squared_young(young_cosh2());
    CHECK(eventually_dominates(s, young_gauss2()).dominated);
    CHECK(eventually_dominates(young_gauss2(), s).dominated);
}

TEST_CASE("norm-domination monotonicity probe") {
    QuadratureGrid grid(1, 40);
    auto phi1 = young_power(2.0);
    auto phi2 = young_cosh2();
    const auto verdict = eventually_dominates(phi1, phi2);
    REQUIRE(verdict.dominated);
    for (const auto& f : norm_corpus(10, 77)) {
        const double n1 = luxemburg_norm(*f, phi1, grid);
        const double n2 = luxemburg_norm(*f, phi2, grid);
        REQUIRE(n1 <= verdict.kappa * std::max(1.0, n2) + 1e-9);
    }
}

TEST_CASE("squared Young functions") {
    auto s = squared_young(young_cosh2());
    CHECK(s(0.0) == 0.0);
    CHECK(s(1.3) == Catch::Approx(std::cosh(1.69) - 1.0));

    // norm relation lux(f, sq(Phi)) = sqrt(lux(f^2, Phi))
    QuadratureGrid grid(1, 40);
    auto h1 = std::make_shared<HermiteField>(HermiteField::axis_basis(1, 1, 1));
    FieldPtr h1p(h1);
    auto h1sq = lambda_product(h1p, h1p);
    const double lhs = luxemburg_norm(*h1, s, grid);
    const double rhs = std::sqrt(luxemburg_norm(*h1sq, young_cosh2(), grid));
    CHECK(lhs == Catch::Approx(rhs).margin(1e-6));

    // lux(H1, sq(power:1))^2 = lux(H1^2, power:1), both by direct bisection
    auto sp1 = squared_young(young_power(1.0));
    const double a = luxemburg_norm(*h1, sp1, grid);
    const double b = luxemburg_norm(*h1sq, young_power(1.0), grid);
    CHECK(a * a == Catch::Approx(b).margin(1e-8));
}

TEST_CASE("young_from_key registry") {
    CHECK(young_from_key("power:2.5")(1.0) == Catch::Approx(0.4));
    CHECK(young_from_key("conj:exp2")(1.0) == Catch::Approx(2.0 * std::log(2.0) - 1.0));
    CHECK(young_from_key("sq:cosh2")(1.0) == Catch::Approx(std::cosh(1.0) - 1.0));
    CHECK_THROWS_AS(young_from_key("nope"), std::invalid_argument);
    CHECK_THROWS_AS(young_from_key("power:x"), std::invalid_argument);
}

TEST_CASE("tail_fit classifies Gaussian and bounded fields") {
    GaussianSampler sampler(1, 2025);
    auto h1 = std::make_shared<HermiteField>(HermiteField::axis_basis(1, 1, 1));
    auto fit = tail_fit(*h1, sampler, 20000);
    CHECK(fit.c2 > 0.0);
    CHECK_FALSE(fit.bounded_support);
    CHECK(fit.r_squared > 0.8);

    ExprField sine("sin(x1)", 1);
    auto bf = tail_fit(sine, sampler, 20000);
    CHECK(bf.bounded_support);

    CHECK_THROWS_AS(tail_fit(*constant_field(1, 1.0), sampler, 20000), std::domain_error);
    CHECK_THROWS_AS(tail_fit(*h1, sampler, 100), std::invalid_argument);
}
