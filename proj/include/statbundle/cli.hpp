#pragma once

#include <algorithm>
#include <chrono>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "statbundle/report.hpp"
#include "statbundle/verify.hpp"

namespace statbundle {

namespace cli_detail {

struct GlobalOptions {
    int dim = 1;
    int quad_order = 40;
    std::uint64_t seed = 7;
    std::string format = "json";
    double tolerance_scale = 1.0;
    bool timing = false;
};

inline void emit(Report& rep, const GlobalOptions& g, double elapsed_ms, std::ostream& out) {
    if (g.timing) rep.elapsed_ms = elapsed_ms;
    out << (g.format == "csv" ? to_csv(rep) : to_json(rep));
    if (g.format != "csv") out << "\n";
}

/// Accepts either a field expression for the tilt or a serialized density
/// document {"dim": .., "u": .., "K": ..}.
inline std::shared_ptr<const ExpDensity> density_from_spec(const std::string& spec, int dim,
                                                           const QuadratureGrid& grid) {
    if (!spec.empty() && spec.front() == '{')
        return std::make_shared<ExpDensity>(exp_density_from_json(spec, grid));
    return std::make_shared<ExpDensity>(parse_field(spec, dim), grid);
}

}  // namespace cli_detail

/// Command-line front end.  Exit codes: 0 when every check passes, 1 when a
/// check fails or a computation overflows, 2 on usage, parse, or admissibility
/// errors.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    using cli_detail::GlobalOptions;
    GlobalOptions g;

    CLI::App app{"desk-scale information geometry on the Gaussian space"};
    app.name("statbundle");
    app.require_subcommand(1);
    app.add_option("--dim", g.dim, "ambient dimension")->check(CLI::PositiveNumber);
    app.add_option("--quad-order", g.quad_order, "Gauss-Hermite order per axis")
        ->check(CLI::Range(2, 128));
    app.add_option("--seed", g.seed, "PRNG seed");
    app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--tolerance-scale", g.tolerance_scale, "multiplies all default tolerances")
        ->check(CLI::PositiveNumber);
    app.add_flag("--timing", g.timing, "include wall time in the report");

    auto* verify = app.add_subcommand("verify", "run a named verification suite");
    verify->fallthrough();
    std::string suite = "all";
    {
        auto names = verify_suite_names();
        names.push_back("all");
        verify->add_option("--suite", suite, "suite name")->check(CLI::IsMember(names));
    }

    auto* norm = app.add_subcommand("norm", "Orlicz norm of a field");
    norm->fallthrough();
    std::string young_key, norm_field;
    bool dual = false;
    norm->add_option("--young", young_key, "Young function key")->required();
    norm->add_option("--field", norm_field, "field expression")->required();
    norm->add_flag("--dual", dual, "Orlicz (Amemiya) norm of the conjugate space");

    auto* cum = app.add_subcommand("cumulant", "cumulant of a tilt");
    cum->fallthrough();
    std::string cum_field, cum_base;
    cum->add_option("--field", cum_field, "direction expression")->required();
    cum->add_option("--base", cum_base, "base density tilt (default: standard Gaussian)");

    auto* trans = app.add_subcommand("transport", "transport a fiber vector");
    trans->fallthrough();
    std::string tr_kind, tr_from, tr_to, tr_vec;
    trans->add_option("--kind", tr_kind, "e or m")->required()->check(CLI::IsMember({"e", "m"}));
    trans->add_option("--from", tr_from, "source density tilt")->required();
    trans->add_option("--to", tr_to, "target density tilt")->required();
    trans->add_option("--vector", tr_vec, "fiber vector expression")->required();

    auto* div = app.add_subcommand("divergence", "divergence between densities");
    div->fallthrough();
    std::string div_kind = "hyvarinen", div_p, div_q;
    div->add_option("--kind", div_kind, "divergence kind")->check(CLI::IsMember({"hyvarinen"}));
    div->add_option("--p", div_p, "first density tilt")->required();
    div->add_option("--q", div_q, "second density tilt")->required();

    auto* og = app.add_subcommand("otto-grad", "natural gradient in a Hermite basis");
    og->fallthrough();
    std::string og_p, og_target;
    int og_degree = 4;
    og->add_option("--p", og_p, "base density tilt")->required();
    og->add_option("--target", og_target, "target fiber vector")->required();
    og->add_option("--degree", og_degree, "basis degree")->check(CLI::Range(1, 8));

    auto* bz = app.add_subcommand("boltzmann", "collision operator diagnostics");
    bz->fallthrough();
    std::string bz_f, bz_check;
    std::size_t bz_samples = 100000;
    bz->add_option("--f", bz_f, "gamma-relative density tilt on R^3")->required();
    bz->add_option("--check", bz_check, "diagnostic")
        ->required()
        ->check(CLI::IsMember({"conservation", "maxwellian", "weak"}));
    bz->add_option("--samples", bz_samples, "Monte Carlo sample count")->check(CLI::PositiveNumber);

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return 2;
    }

    const auto t0 = std::chrono::steady_clock::now();
    Report rep;
    rep.seed = g.seed;

    try {
        if (app.got_subcommand(verify)) {
            rep.command = "verify";
            rep.params = {{"suite", suite},
                          {"dim", std::to_string(g.dim)},
                          {"quad_order", std::to_string(g.quad_order)},
                          {"tolerance_scale", format_g17(g.tolerance_scale)}};
            VerifyOptions vo;
            vo.dim = g.dim;
            vo.quad_order = g.quad_order;
            vo.seed = g.seed;
            vo.tolerance_scale = g.tolerance_scale;
            rep.results = verify_suite(suite, vo);
        } else if (app.got_subcommand(norm)) {
            rep.command = "norm";
            rep.params = {{"young", young_key},
                          {"field", norm_field},
                          {"dim", std::to_string(g.dim)},
                          {"quad_order", std::to_string(g.quad_order)},
                          {"dual", dual ? "true" : "false"}};
            QuadratureGrid grid(g.dim, g.quad_order);
            auto f = parse_field(norm_field, g.dim);
            auto phi = young_from_key(young_key);
            CheckResult r;
            r.name = dual ? "dual_norm" : "luxemburg_norm";
            r.value = dual ? dual_norm(*f, phi, grid) : luxemburg_norm(*f, phi, grid);
            rep.results.push_back(r);
        } else if (app.got_subcommand(cum)) {
            rep.command = "cumulant";
            rep.params = {{"field", cum_field},
                          {"base", cum_base.empty() ? "0" : cum_base},
                          {"dim", std::to_string(g.dim)},
                          {"quad_order", std::to_string(g.quad_order)}};
            QuadratureGrid grid(g.dim, g.quad_order);
            auto base = cum_base.empty()
                            ? std::make_shared<ExpDensity>(ExpDensity::standard(g.dim, grid))
                            : cli_detail::density_from_spec(cum_base, g.dim, grid);
            auto v = parse_field(cum_field, g.dim);
            CheckResult r;
            r.name = "cumulant";
            r.value = cumulant(*base, *v, grid);
            rep.results.push_back(r);
        } else if (app.got_subcommand(trans)) {
            rep.command = "transport";
            rep.params = {{"kind", tr_kind}, {"from", tr_from},
                          {"to", tr_to},     {"vector", tr_vec},
                          {"dim", std::to_string(g.dim)}, {"quad_order", std::to_string(g.quad_order)}};
            QuadratureGrid grid(g.dim, g.quad_order);
            auto from = cli_detail::density_from_spec(tr_from, g.dim, grid);
            auto to = cli_detail::density_from_spec(tr_to, g.dim, grid);
            FiberVector w = make_fiber(from, parse_field(tr_vec, g.dim), grid);
            FiberVector moved =
                tr_kind == "e" ? e_transport(w, to, grid) : m_transport(w, to, grid);
            if (auto spec = moved.v->fieldspec()) rep.params.emplace_back("result_field", *spec);
            CheckResult centering;
            centering.name = "centering_at_target";
            centering.value = expect(*to, *moved.v, grid);
            centering.tolerance = 1e-9 * g.tolerance_scale;
            centering.pass = std::abs(centering.value) <= *centering.tolerance;
            rep.results.push_back(centering);
            CheckResult l2;
            l2.name = "l2_norm_at_target";
            l2.value = std::sqrt(integrate_fn(grid, [&](std::span<const double> x) {
                const double v = moved.v->value(x);
                return v * v * to->density(x);
            }));
            rep.results.push_back(l2);
        } else if (app.got_subcommand(div)) {
            rep.command = "divergence";
            rep.params = {{"kind", div_kind}, {"p", div_p}, {"q", div_q},
                          {"dim", std::to_string(g.dim)}, {"quad_order", std::to_string(g.quad_order)}};
            QuadratureGrid grid(g.dim, g.quad_order);
            auto p = cli_detail::density_from_spec(div_p, g.dim, grid);
            auto q = cli_detail::density_from_spec(div_q, g.dim, grid);
            CheckResult r;
            r.name = "hyvarinen";
            r.value = hyvarinen(*p, *q, grid);
            rep.results.push_back(r);
        } else if (app.got_subcommand(og)) {
            rep.command = "otto-grad";
            rep.params = {{"p", og_p},
                          {"target", og_target},
                          {"degree", std::to_string(og_degree)},
                          {"dim", std::to_string(g.dim)},
                          {"quad_order", std::to_string(g.quad_order)}};
            QuadratureGrid grid(g.dim, g.quad_order);
            auto p = cli_detail::density_from_spec(og_p, g.dim, grid);
            FiberVector target = make_fiber(p, parse_field(og_target, g.dim), grid);
            auto basis = centered_hermite_basis(*p, og_degree, grid);
            auto gram = otto_gram(p, basis, grid);
            auto ng = natural_gradient(gram, target, grid);
            const auto alphas = multi_indices_up_to(g.dim, og_degree);
            size_t ci = 0;
            for (const auto& alpha : alphas) {
                if (alpha.is_zero()) continue;
                std::string name = "coef:";
                for (int d = 0; d < g.dim; ++d)
                    if (alpha[d] > 0)
                        name += "H(" + std::to_string(alpha[d]) + "," + std::to_string(d + 1) + ")";
                CheckResult r;
                r.name = name;
                r.value = ng.coefficients[ci++];
                rep.results.push_back(r);
            }
            CheckResult res;
            res.name = "residual_inf";
            res.value = ng.residual;
            res.tolerance = 1e-10 * g.tolerance_scale;
            res.pass = ng.residual <= *res.tolerance;
            rep.results.push_back(res);
        } else if (app.got_subcommand(bz)) {
            rep.command = "boltzmann";
            if (bz->count("--samples") == 0) bz_samples = 100000;
            if (app.count("--dim") != 0 && g.dim != 3) {
                err << "boltzmann: the collision operator lives on R^3 (--dim 3)\n";
                return 2;
            }
            rep.params = {{"f", bz_f},
                          {"check", bz_check},
                          {"samples", std::to_string(bz_samples)}};
            QuadratureGrid grid(3, 16);
            auto f = cli_detail::density_from_spec(bz_f, 3, grid);
            GaussianSampler sampler(3, g.seed, 0);
            if (bz_check == "conservation") {
                auto cr = boltzmann::conservation_check(*f, sampler, bz_samples);
                for (size_t i = 0; i < cr.functionals.size(); ++i) {
                    CheckResult r;
                    r.name = cr.names[i];
                    r.value = cr.functionals[i].value;
                    r.se = cr.functionals[i].se;
                    r.pass = cr.functionals[i].within_se(3.0);
                    rep.results.push_back(r);
                }
                CheckResult h;
                h.name = "entropy_production";
                h.value = cr.entropy_production.value;
                h.se = cr.entropy_production.se;
                h.pass = cr.entropy_production.value <= 3.0 * cr.entropy_production.se + 1e-13;
                rep.results.push_back(h);
            } else if (bz_check == "maxwellian") {
                GaussianSampler probe(3, 555, 9);
                for (int k = 0; k < 10; ++k) {
                    const auto pv = probe.point(static_cast<std::uint64_t>(k));
                    auto est = boltzmann::collision_q(
                        *f, boltzmann::Vec3{pv[0], pv[1], pv[2]},
                        sampler.with_stream(10 + static_cast<std::uint64_t>(k)), bz_samples);
                    CheckResult r;
                    r.name = "q_at_probe_" + std::to_string(k);
                    r.value = est.value;
                    r.se = est.se;
                    r.pass = est.within_se(3.0);
                    rep.results.push_back(r);
                }
            } else {
                const char* gs[] = {"x1", "x1^2+x2^2+x3^2", "sin(x1)+0.3*x2"};
                int idx = 0;
                for (const char* gspec : gs) {
                    ExprField gfield(gspec, 3);
                    auto wr = boltzmann::weak_identity_check(
                        *f, gfield, sampler.with_stream(20 + static_cast<std::uint64_t>(idx)), bz_samples);
                    CheckResult r;
                    r.name = std::string("weak_identity[") + gspec + "]";
                    r.value = wr.lhs.value - wr.rhs.value;
                    r.se = wr.combined_se();
                    r.pass = wr.agrees_within(3.0);
                    rep.results.push_back(r);
                    ++idx;
                }
            }
        }
    } catch (const ParseError& e) {
        err << "field parse error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const std::range_error& e) {
        err << "computation failed: " << e.what() << "\n";
        return 1;
    }

    const auto t1 = std::chrono::steady_clock::now();
    const double elapsed =
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(t1 - t0).count();
    cli_detail::emit(rep, g, elapsed, out);
    return rep.all_pass() ? 0 : 1;
}

}  // namespace statbundle
