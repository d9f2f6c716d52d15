#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace statbundle {

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct CheckResult {
    std::string name;
    double value = 0.0;
    std::optional<double> rhs;
    std::optional<double> tolerance;
    std::optional<double> se;
    std::optional<bool> pass;
};

/// Machine-readable command report.  Serialization is deterministic for a
/// fixed invocation and seed: insertion-ordered keys, 17-significant-digit
/// floats, and no wall-clock fields unless timing is requested.
struct Report {
    std::string command;
    std::vector<std::pair<std::string, std::string>> params;
    std::uint64_t seed = 0;
    std::vector<CheckResult> results;
    std::optional<double> elapsed_ms;

    bool all_pass() const {
        for (const auto& r : results)
            if (r.pass.has_value() && !*r.pass) return false;
        return true;
    }
};

namespace detail {

inline void json_escape(const std::string& s, std::string& out) {
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
}

}  // namespace detail

inline std::string to_json(const Report& rep) {
    std::string out = "{\"command\":\"";
    detail::json_escape(rep.command, out);
    out += "\",\"params\":{";
    for (size_t i = 0; i < rep.params.size(); ++i) {
        if (i) out += ',';
        out += '"';
        detail::json_escape(rep.params[i].first, out);
        out += "\":\"";
        detail::json_escape(rep.params[i].second, out);
        out += '"';
    }
    out += "},\"seed\":" + std::to_string(rep.seed) + ",\"results\":[";
    for (size_t i = 0; i < rep.results.size(); ++i) {
        const auto& r = rep.results[i];
        if (i) out += ',';
        out += "{\"name\":\"";
        detail::json_escape(r.name, out);
        out += "\",\"value\":" + format_g17(r.value);
        if (r.rhs) out += ",\"rhs\":" + format_g17(*r.rhs);
        if (r.tolerance) out += ",\"tolerance\":" + format_g17(*r.tolerance);
        if (r.se) out += ",\"se\":" + format_g17(*r.se);
        if (r.pass) out += std::string(",\"pass\":") + (*r.pass ? "true" : "false");
        out += '}';
    }
    out += "]";
    if (rep.elapsed_ms) out += ",\"elapsed_ms\":" + format_g17(*rep.elapsed_ms);
    out += "}";
    return out;
}

inline std::string to_csv(const Report& rep) {
    std::string out = "name,value,rhs,tolerance,se,pass\n";
    for (const auto& r : rep.results) {
        out += r.name + ',' + format_g17(r.value) + ',';
        if (r.rhs) out += format_g17(*r.rhs);
        out += ',';
        if (r.tolerance) out += format_g17(*r.tolerance);
        out += ',';
        if (r.se) out += format_g17(*r.se);
        out += ',';
        if (r.pass) out += *r.pass ? "true" : "false";
        out += '\n';
    }
    return out;
}

}  // namespace statbundle
