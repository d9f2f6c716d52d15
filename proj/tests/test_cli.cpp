#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "statbundle/cli.hpp"

using namespace statbundle;

namespace {

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(std::move(args), out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("norm command matches the constant-field closed form") {
    auto r = run({"norm", "--young", "cosh2", "--field", "2.0", "--dim", "1"});
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["command"] == "norm");
    CHECK(j["results"][0]["name"] == "luxemburg_norm");
    CHECK(j["results"][0]["value"].get<double>() ==
          Catch::Approx(2.0 / std::acosh(2.0)).margin(1e-9));
}

TEST_CASE("divergence command: Gaussian shift") {
    auto r = run({"divergence", "--kind", "hyvarinen", "--p", "H(1,1)", "--q", "0"});
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["results"][0]["value"].get<double>() == Catch::Approx(0.5).margin(1e-10));
}

TEST_CASE("cumulant command") {
    auto r = run({"cumulant", "--field", "x1"});
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["results"][0]["value"].get<double>() == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("identical invocations produce byte-identical JSON") {
    const std::vector<std::string> args{"verify", "--suite", "transports", "--dim", "1", "--seed", "7"};
    auto a = run(args);
    auto b = run(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);

    auto c = run({"boltzmann", "--f", "0.2*tanh(x1)", "--check", "conservation", "--samples", "2000"});
    auto d = run({"boltzmann", "--f", "0.2*tanh(x1)", "--check", "conservation", "--samples", "2000"});
    REQUIRE(c.code == 0);
    CHECK(c.out == d.out);
}

TEST_CASE("exit codes: usage and field errors give 2") {
    CHECK(run({"nonsense"}).code == 2);
    CHECK(run({"verify", "--suite", "bogus"}).code == 2);
    CHECK(run({"norm", "--young", "cosh2", "--field", "x7", "--dim", "1"}).code == 2);
    CHECK(run({"norm", "--young", "nope", "--field", "x1", "--dim", "1"}).code == 2);
    // inadmissible density tilt reports the certificate verdict
    auto r = run({"divergence", "--kind", "hyvarinen", "--p", "x1^3", "--q", "0"});
    CHECK(r.code == 2);
    CHECK(r.err.find("unbounded") != std::string::npos);
    // boltzmann is pinned to R^3
    CHECK(run({"boltzmann", "--f", "0", "--check", "maxwellian", "--dim", "2"}).code == 2);
}

TEST_CASE("verify transports suite passes and reports both sides on checks") {
    auto r = run({"verify", "--suite", "transports", "--seed", "7"});
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    REQUIRE(j["results"].size() >= 6);
    for (const auto& res : j["results"]) {
        INFO(res.dump());
        CHECK(res["pass"].get<bool>());
        CHECK(res.contains("value"));
    }
}

TEST_CASE("csv output flattens one row per check") {
    auto r = run({"verify", "--suite", "covariance", "--format", "csv"});
    REQUIRE(r.code == 0);
    std::istringstream lines(r.out);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "name,value,rhs,tolerance,se,pass");
    int rows = 0;
    for (std::string line; std::getline(lines, line);)
        if (!line.empty()) ++rows;
    CHECK(rows >= 3);
}

TEST_CASE("transport command reports centering and prints the result field") {
    auto r = run({"transport", "--kind", "e", "--from", "0", "--to", "0.3*sin(x1)", "--vector",
                  "H(2,1)"});
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["params"].contains("result_field"));
    CHECK(std::abs(j["results"][0]["value"].get<double>()) < 1e-9);
}

TEST_CASE("otto-grad recovers the diagonal system") {
    auto r = run({"otto-grad", "--p", "0", "--target", "H(2,1)", "--degree", "2"});
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    double c1 = 0, c2 = 0;
    for (const auto& res : j["results"]) {
        if (res["name"] == "coef:H(1,1)") c1 = res["value"].get<double>();
        if (res["name"] == "coef:H(2,1)") c2 = res["value"].get<double>();
    }
    CHECK(c1 == Catch::Approx(0.0).margin(1e-10));
    CHECK(c2 == Catch::Approx(0.5).margin(1e-10));
}

TEST_CASE("density specs may be serialized JSON documents") {
    QuadratureGrid grid(1, 40);
    ExpDensity p(parse_field("0.3*sin(x1)", 1), grid);
    const std::string doc = to_json(p);
    auto r = run({"divergence", "--kind", "hyvarinen", "--p", doc, "--q", "0"});
    REQUIRE(r.code == 0);
    auto direct = run({"divergence", "--kind", "hyvarinen", "--p", "0.3*sin(x1)", "--q", "0"});
    auto jv = nlohmann::json::parse(r.out)["results"][0]["value"].get<double>();
    auto dv = nlohmann::json::parse(direct.out)["results"][0]["value"].get<double>();
    CHECK(jv == Catch::Approx(dv).epsilon(1e-14));
}

TEST_CASE("timing flag adds elapsed_ms and is off by default") {
    auto plain = run({"cumulant", "--field", "x1"});
    CHECK(plain.out.find("elapsed_ms") == std::string::npos);
    auto timed = run({"cumulant", "--field", "x1", "--timing"});
    CHECK(timed.out.find("elapsed_ms") != std::string::npos);
}

TEST_CASE("tolerance scale is echoed and applied") {
    auto r = run({"verify", "--suite", "covariance", "--tolerance-scale", "10"});
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["params"]["tolerance_scale"] == "10");
}
