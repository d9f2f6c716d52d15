#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "statbundle/quadrature.hpp"
#include "statbundle/sampler.hpp"

using namespace statbundle;

namespace {

// odd Gaussian moments vanish; even are (2k-1)!!
double gaussian_moment(int p) {
    if (p % 2 == 1) return 0.0;
    double m = 1.0;
    for (int k = p - 1; k >= 1; k -= 2) m *= k;
    return m;
}

}  // namespace

TEST_CASE("gauss_hermite rule: weights sum to one, moments exact to degree 2m-1") {
    for (int m : {2, 5, 8, 20, 40}) {
        auto rule = gauss_hermite(m);
        double wsum = std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0);
        REQUIRE(wsum == Catch::Approx(1.0).margin(1e-12));
        for (int p = 0; p <= 2 * m - 1 && p <= 16; ++p) {
            KahanAccumulator acc;
            for (size_t i = 0; i < rule.nodes.size(); ++i)
                acc.add(rule.weights[i] * std::pow(rule.nodes[i], p));
            REQUIRE(acc.sum() == Catch::Approx(gaussian_moment(p)).margin(1e-10));
        }
    }
}

TEST_CASE("tensor grid: weight normalization and mixed moments") {
    QuadratureGrid grid(2, 10);
    KahanAccumulator ws;
    for (size_t k = 0; k < grid.size(); ++k) ws.add(grid.weight(k));
    CHECK(ws.sum() == Catch::Approx(1.0).margin(1e-12));

    // E[x^2 y^4] = 1 * 3
    const double v = integrate_fn(grid, [](std::span<const double> x) {
        return x[0] * x[0] * x[1] * x[1] * x[1] * x[1];
    });
    CHECK(v == Catch::Approx(3.0).margin(1e-10));

    CHECK_THROWS_AS(QuadratureGrid(5, 4), std::invalid_argument);
}

TEST_CASE("integrate flags non-finite values") {
    QuadratureGrid grid(1, 20);
    LambdaField bad(1, [](std::span<const double> x) { return std::exp(std::pow(x[0], 4)); });
    CHECK_THROWS_AS(integrate(bad, grid), std::range_error);
}

TEST_CASE("sampler determinism and moments") {
    GaussianSampler s(1, 42, 3);
    auto a = s.sample(1000);
    auto b = GaussianSampler(1, 42, 3).sample(1000);
    REQUIRE(a == b);  // bit-exact

    auto other = s.with_stream(4).sample(1000);
    CHECK(a != other);

    const std::uint64_t n = 1000000;
    auto big = GaussianSampler(1, 7, 0).sample(n);
    double mean = 0.0;
    for (double v : big) mean += v;
    mean /= static_cast<double>(n);
    CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));

    double var = 0.0;
    for (double v : big) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n - 1);
    CHECK(var == Catch::Approx(1.0).margin(0.01));
}

TEST_CASE("sampler uniforms live in (0,1)") {
    GaussianSampler s(1, 99);
    for (std::uint64_t i = 0; i < 10000; ++i) {
        const double u = s.uniform(i);
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
    }
}
