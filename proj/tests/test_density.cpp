#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "statbundle/density.hpp"

using namespace statbundle;

namespace {

const QuadratureGrid& grid1() {
    static QuadratureGrid g(1, 40);
    return g;
}

std::vector<Point> probes() {
    return {{-2.1}, {-0.7}, {0.0}, {0.4}, {1.3}, {2.6}};
}

}  // namespace

TEST_CASE("standard density and normalization") {
    auto p = ExpDensity::standard(1, grid1());
    CHECK(p.log_normalizer() == Catch::Approx(0.0).margin(1e-14));
    CHECK(p.density(Point{1.7}) == Catch::Approx(1.0));

    for (const char* spec : {"0.4*sin(x1)", "0.25*H(2,1)", "tanh(x1)-0.2", "0.5*x1"}) {
        ExpDensity q(parse_field(spec, 1), grid1());
        const double mass = integrate_fn(grid1(), [&](std::span<const double> x) { return q.density(x); });
        INFO(spec);
        CHECK(mass == Catch::Approx(1.0).margin(1e-8));
        CHECK(integrate(*q.tilt(), grid1()) == Catch::Approx(0.0).margin(1e-12));
        for (const auto& x : probes()) REQUIRE(q.density(x) > 0.0);
    }
}

TEST_CASE("inadmissible tilts are rejected") {
    CHECK_THROWS_AS(ExpDensity(parse_field("x1^3", 1), grid1()), std::invalid_argument);
    CHECK_THROWS_AS(ExpDensity(parse_field("0.6*H(2,1)", 1), grid1()), std::invalid_argument);
    CHECK_THROWS_AS(ExpDensity(parse_field("exp(x1)", 1), grid1()), std::invalid_argument);
    // 0.45 < 1/2 - 0.01 admissible, 0.495 not
    CHECK_NOTHROW(ExpDensity(parse_field("0.45*x1^2", 1), QuadratureGrid(1, 80)));
    CHECK_THROWS_AS(ExpDensity(parse_field("0.495*x1^2", 1), QuadratureGrid(1, 80)),
                    std::invalid_argument);
}

TEST_CASE("cumulant closed forms") {
    auto p = ExpDensity::standard(1, grid1());

    // Gaussian MGF: log E e^{x} = 1/2
    ExprField lin("x1", 1);
    CHECK(cumulant(p, lin, grid1()) == Catch::Approx(0.5).margin(1e-12));

    CHECK(cumulant(p, *constant_field(1, 0.0), grid1()) == Catch::Approx(0.0).margin(1e-14));

    // log E exp(a (x^2 - 1)) = -log(1 - 2a)/2 - a at a = 0.2
    ExprField q2("0.2*H(2,1)", 1);
    const double expected = -0.5 * std::log(1.0 - 0.4) - 0.2;
    CHECK(cumulant(p, q2, grid1()) == Catch::Approx(expected).margin(1e-10));

    // overflow reporting
    LambdaField big(1, [](std::span<const double> x) { return std::pow(x[0], 4); });
    CHECK_THROWS_AS(cumulant(p, big, grid1()), std::range_error);
}

TEST_CASE("cumulant is midpoint-convex along random directions") {
    auto p = ExpDensity(parse_field("0.3*sin(x1)", 1), grid1());
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> c(-0.8, 0.8);
    for (int rep = 0; rep < 10; ++rep) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%.3f*sin(x1)+%.3f*cos(x1)", c(rng), c(rng));
        auto v = parse_field(buf, 1);
        const double k0 = cumulant(p, *field_scale(v, 0.4), grid1());
        const double k1 = cumulant(p, *field_scale(v, 1.2), grid1());
        const double km = cumulant(p, *field_scale(v, 0.8), grid1());
        REQUIRE(km <= 0.5 * (k0 + k1) + 1e-12);
    }
}

TEST_CASE("exponential chart and its inverse") {
    auto p = ExpDensity::standard(1, grid1());

    // s_p(p) = 0
    auto zero = exp_chart(p, p, grid1());
    for (const auto& x : probes()) CHECK(zero->value(x) == Catch::Approx(0.0).margin(1e-12));

    // q = e^{x - 1/2} gamma: chart at gamma is H_1
    ExpDensity q(parse_field("x1", 1), grid1());
    CHECK(q.log_normalizer() == Catch::Approx(0.5).margin(1e-12));
    auto chart = exp_chart(p, q, grid1());
    for (const auto& x : probes()) CHECK(chart->value(x) == Catch::Approx(x[0]).margin(1e-10));

    // v = 0 reproduces the base
    auto same = exp_chart_inverse(p, constant_field(1, 0.0), grid1());
    for (const auto& x : probes()) CHECK(same.density(x) == Catch::Approx(p.density(x)).margin(1e-14));

    // chart round trip on the density values
    ExpDensity r(parse_field("0.4*sin(x1)+0.1*H(2,1)", 1), grid1());
    auto v = exp_chart(p, r, grid1());
    auto back = exp_chart_inverse(p, v, grid1());
    for (size_t k = 0; k < grid1().size(); k += 7)
        REQUIRE(back.density(grid1().node(k)) ==
                Catch::Approx(r.density(grid1().node(k))).epsilon(1e-9));

    // centering precondition
    CHECK_THROWS_AS(exp_chart_inverse(p, constant_field(1, 0.7), grid1()), std::invalid_argument);
    CHECK_THROWS_AS(exp_chart_inverse(p, parse_field("x1^3", 1), grid1()), std::invalid_argument);
}

TEST_CASE("Gaussian location tilt has cumulant 1/2 and matching density") {
    auto p = ExpDensity::standard(1, grid1());
    auto q = exp_chart_inverse(p, parse_field("x1", 1), grid1());
    CHECK(q.log_normalizer() == Catch::Approx(0.5).margin(1e-12));
    for (const auto& x : probes())
        CHECK(q.density(x) == Catch::Approx(std::exp(x[0] - 0.5)).epsilon(1e-12));
}

TEST_CASE("mixture densities and the mixture chart") {
    auto p = std::make_shared<ExpDensity>(parse_field("0.3*sin(x1)", 1), grid1());
    auto q = std::make_shared<ExpDensity>(parse_field("0.2*H(2,1)", 1), grid1());
    auto r = std::make_shared<ExpDensity>(parse_field("tanh(x1)", 1), grid1());

    CHECK_THROWS_AS(MixtureDensity({{0.5, p}, {0.6, q}}), std::invalid_argument);
    CHECK_THROWS_AS(MixtureDensity({{-0.1, p}, {1.1, q}}), std::invalid_argument);

    MixtureDensity mix({{0.5, p}, {0.5, r}});
    const double mass = integrate_fn(grid1(), [&](std::span<const double> x) { return mix.density(x); });
    CHECK(mass == Catch::Approx(1.0).margin(1e-8));

    // s_p(p) = 0
    auto zero = mix_chart(p, p);
    for (const auto& x : probes()) CHECK(zero->value(x) == Catch::Approx(0.0).margin(1e-14));

    // centering: E_p[q/p - 1] = 0
    auto ch = mix_chart(p, q);
    CHECK(expect(*p, *ch, grid1()) == Catch::Approx(0.0).margin(1e-8));

    // mixing is linear in the chart
    auto half = std::make_shared<MixtureDensity>(
        std::vector<MixtureDensity::Component>{{0.5, p}, {0.5, r}});
    auto lhs = mix_chart(p, half);
    auto rhs = mix_chart(p, r);
    for (const auto& x : probes())
        CHECK(lhs->value(x) == Catch::Approx(0.5 * rhs->value(x)).margin(1e-12));

    // parallelogram: q/p - 1 + (q/p)(r/q - 1) = r/p - 1 pointwise
    auto pq = mix_chart(p, q);
    auto qr = mix_chart(q, r);
    auto pr = mix_chart(p, r);
    for (const auto& x : probes()) {
        const double ratio = q->density(x) / p->density(x);
        REQUIRE(pq->value(x) + ratio * qr->value(x) == Catch::Approx(pr->value(x)).margin(1e-9));
    }
}

TEST_CASE("membership check: pass, fail, inconclusive protocol") {
    QuadratureGrid g(1, 40);
    auto gamma = std::make_shared<ExpDensity>(ExpDensity::standard(1, g));
    auto rep = membership_check(*gamma);
    CHECK(rep.verdict == MembershipReport::Verdict::Pass);
    CHECK(rep.second_moment.front() == Catch::Approx(1.0).margin(1e-10));
    CHECK(rep.inverse_moment.front() == Catch::Approx(1.0).margin(1e-10));

    // p^2 ~ e^{0.8 x^2} is not gamma-integrable: refinement blows up
    ExpDensity spiky(parse_field("0.4*H(2,1)", 1), QuadratureGrid(1, 80));
    CHECK(membership_check(spiky).verdict == MembershipReport::Verdict::Fail);

    // bounded tilts keep both integrands bounded
    ExpDensity nice(parse_field("0.8*tanh(x1)", 1), g);
    CHECK(membership_check(nice).verdict == MembershipReport::Verdict::Pass);
}

TEST_CASE("JSON round trip for exponential densities") {
    ExpDensity p(parse_field("0.3*sin(x1)+0.1*H(2,1)", 1), grid1());
    const std::string doc = to_json(p);
    auto q = exp_density_from_json(doc, grid1());
    for (const auto& x : probes()) REQUIRE(q.density(x) == Catch::Approx(p.density(x)).epsilon(1e-12));

    // tampered normalizer is rejected
    auto j = nlohmann::json::parse(doc);
    j["K"] = j["K"].get<double>() + 0.01;
    CHECK_THROWS_AS(exp_density_from_json(j.dump(), grid1()), std::invalid_argument);

    // lambda-backed tilts have no textual form
    auto lam = std::make_shared<LambdaField>(1, [](std::span<const double> x) { return std::sin(x[0]); });
    lam->with_certificate(Certificate::bounded(1.0));
    ExpDensity lp(lam, grid1());
    CHECK_THROWS_AS(to_json(lp), std::invalid_argument);
}

TEST_CASE("cumulant derivative at zero vanishes for centered directions") {
    auto p = ExpDensity(parse_field("0.25*H(2,1)", 1), grid1());
    // center v under p
    auto raw = parse_field("sin(x1)+0.3*cos(2*x1)", 1);
    auto v = field_shift(raw, -expect(p, *raw, grid1()));
    const double h = 1e-4;
    const double kp = cumulant(p, *field_scale(v, h), grid1());
    const double km = cumulant(p, *field_scale(v, -h), grid1());
    CHECK((kp - km) / (2 * h) == Catch::Approx(0.0).margin(1e-6));
}
