#pragma once

// File formats: JSON instances and reports, CSV exponent tables.

#include <leeisd/errors.hpp>
#include <leeisd/estimator.hpp>
#include <leeisd/field.hpp>
#include <leeisd/isd.hpp>
#include <leeisd/weight.hpp>

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace leeisd {

using Json = nlohmann::json;

/// Accepts an integer, a decimal number or a string "a/b" / "a".
inline Rational parse_rational(const Json& v) {
    if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
    if (v.is_number()) return rationalize(v.get<double>());
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        const auto slash = s.find('/');
        try {
            std::size_t used = 0;
            if (slash == std::string::npos) {
                if (s.find_first_of(".eE") != std::string::npos) return rationalize(std::stod(s));
                const std::int64_t a = std::stoll(s, &used);
                if (used != s.size()) throw FormatError("");
                return Rational(a);
            }
            const std::int64_t a = std::stoll(s.substr(0, slash), &used);
            if (used != slash) throw FormatError("");
            const std::string rest = s.substr(slash + 1);
            const std::int64_t b = std::stoll(rest, &used);
            if (used != rest.size() || b == 0) throw FormatError("");
            return Rational(a, b);
        } catch (const std::logic_error&) {
        } catch (const FormatError&) {
        }
        throw FormatError("cannot read '" + s + "' as a rational number");
    }
    throw FormatError("expected a number");
}

inline Json rational_to_json(const Rational& r) {
    if (r.denominator() == 1) return r.numerator();
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

inline WeightFunction weight_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("q") || !j.contains("table")) throw FormatError("weight table needs \"q\" and \"table\"");
    const auto q = j.at("q").get<std::uint32_t>();
    if (!j.at("table").is_array()) throw FormatError("\"table\" must be an array");
    std::vector<Rational> table;
    for (const Json& v : j.at("table")) table.push_back(parse_rational(v));
    return WeightFunction::custom(q, table);
}

inline Json weight_to_json(const WeightFunction& wf) {
    // lee and hamming coincide for q <= 3, so prefer the name the caller chose
    if (wf.name() == "hamming" && wf == WeightFunction::hamming(wf.q())) return "hamming";
    if (wf == WeightFunction::lee(wf.q())) return "lee";
    if (wf == WeightFunction::hamming(wf.q())) return "hamming";
    Json table = Json::array();
    for (std::uint32_t x = 0; x < wf.q(); ++x) table.push_back(rational_to_json(wf.symbol_weight(static_cast<Symbol>(x))));
    return Json{{"q", wf.q()}, {"table", table}};
}

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
}

/// "lee", "hamming", or a path to a JSON table {"q": 7, "table": [...]}.
inline WeightFunction weight_from_spec(const std::string& spec, std::uint32_t q) {
    if (spec == "lee") return WeightFunction::lee(q);
    if (spec == "hamming") return WeightFunction::hamming(q);
    WeightFunction wf = weight_from_json(read_json_file(spec));
    if (wf.q() != q) throw FormatError("weight table is for q = " + std::to_string(wf.q()) + ", not " + std::to_string(q));
    return wf;
}

inline Json instance_to_json(const SdInstance& inst) {
    Json h = Json::array();
    for (std::size_t r = 0; r < inst.h.rows(); ++r) {
        auto row = inst.h.row(r);
        h.push_back(std::vector<Symbol>(row.begin(), row.end()));
    }
    Json j{{"q", inst.q},
           {"n", inst.n},
           {"k", inst.k},
           {"w", rational_to_json(inst.weight())},
           {"weight", weight_to_json(inst.wf)},
           {"H", h},
           {"s", std::vector<Symbol>(inst.s.entries().begin(), inst.s.entries().end())}};
    if (inst.planted) j["e"] = std::vector<Symbol>(inst.planted->entries().begin(), inst.planted->entries().end());
    return j;
}

namespace detail {

inline std::vector<Symbol> read_symbols(const Json& arr, std::uint32_t q, const char* what) {
    if (!arr.is_array()) throw FormatError(std::string(what) + " must be an array");
    std::vector<Symbol> out;
    for (const Json& v : arr) {
        if (!v.is_number_integer()) throw FormatError(std::string(what) + " entries must be integers");
        const auto x = v.get<std::int64_t>();
        if (x < 0 || x >= static_cast<std::int64_t>(q)) throw FormatError(std::string(what) + " entry out of range for F_q");
        out.push_back(static_cast<Symbol>(x));
    }
    return out;
}

}  // namespace detail

/// Parses and validates an instance; a weight given by name resolves against q.
inline SdInstance instance_from_json(const Json& j) {
    try {
        SdInstance inst;
        inst.q = j.at("q").get<std::uint32_t>();
        inst.n = j.at("n").get<std::size_t>();
        inst.k = j.at("k").get<std::size_t>();
        const Json& weight = j.contains("weight") ? j.at("weight") : Json("lee");
        if (weight.is_string())
            inst.wf = weight_from_spec(weight.get<std::string>(), inst.q);
        else
            inst.wf = weight_from_json(weight);
        if (inst.wf.q() != inst.q) throw FormatError("weight table does not match q");
        const auto w = inst.wf.to_units(parse_rational(j.at("w")));
        if (!w) throw FormatError("w is not a multiple of the weight table's unit");
        inst.w_units = *w;

        const Json& h = j.at("H");
        if (!h.is_array()) throw FormatError("H must be an array of rows");
        if (inst.k >= inst.n) throw FormatError("need k < n");
        if (h.size() != inst.n - inst.k) throw FormatError("H must have n-k rows");
        std::vector<Symbol> flat;
        for (const Json& row : h) {
            auto r = detail::read_symbols(row, inst.q, "H");
            if (r.size() != inst.n) throw FormatError("every row of H must have n entries");
            flat.insert(flat.end(), r.begin(), r.end());
        }
        inst.h = FqMatrix(inst.q, inst.n - inst.k, inst.n, std::move(flat));
        inst.s = FqVector(inst.q, detail::read_symbols(j.at("s"), inst.q, "s"));
        if (j.contains("e") && !j.at("e").is_null()) {
            FqVector e(inst.q, detail::read_symbols(j.at("e"), inst.q, "e"));
            if (e.size() != inst.n) throw FormatError("e must have n entries");
            inst.planted = std::move(e);
        }
        validate_instance(inst);
        return inst;
    } catch (const Json::exception& e) {
        throw FormatError(std::string("instance: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("instance: ") + e.what());
    }
}

inline Json report_to_json(const SdInstance& inst, const IsdParams& params, const SolveReport& rep) {
    Json j{{"found", rep.solution.has_value()},
           {"algorithm", to_string(params.variant)},
           {"ell", params.ell},
           {"p", rational_to_json(Rational(params.p_units, inst.wf.denominator()))},
           {"a", params.a},
           {"seed", params.rng_seed},
           {"outer_loops", rep.outer_loops},
           {"loop_budget", rep.loop_budget},
           {"cmsd_calls", rep.cmsd_calls},
           {"tested_candidates", rep.tested_candidates},
           {"singular_retries", rep.singular_retries},
           {"expected_success_per_loop", rep.expected_success_per_loop}};
    if (rep.solution) {
        j["solution"] = std::vector<Symbol>(rep.solution->entries().begin(), rep.solution->entries().end());
        j["winning_loop"] = rep.winning_loop;
        j["verified"] = verify_solution(inst, *rep.solution);
    } else {
        j["solution"] = nullptr;
    }
    return j;
}

inline Json factors_to_json(const WorkFactors& f) {
    return Json{{"model", to_string(f.model)},
                {"algorithm", to_string(f.algorithm)},
                {"L", f.point.L},
                {"P", f.point.P},
                {"a", f.point.a},
                {"pi1", f.pi1},
                {"zeta", f.zeta},
                {"tau", f.tau},
                {"y", f.y},
                {"u", f.u},
                {"x", f.x},
                {"s_omega0", f.s_omega0},
                {"alpha_q", f.total_q},
                {"alpha_bin", f.total_bin}};
}

// ---- CSV -------------------------------------------------------------------

struct EstimateRow {
    std::uint32_t q = 0;
    std::string weight;
    double R = 0.0;
    double omega = 0.0;
    double omega_normalized = 0.0;
    std::string model;
    std::string algorithm;
    int a = 1;
    double L = 0.0;
    double P = 0.0;
    double alpha_q = 0.0;
    double alpha_bin = 0.0;

    friend bool operator==(const EstimateRow&, const EstimateRow&) = default;
};

inline const char* kCsvHeader = "q,weight,R,omega,omega_normalized,model,algorithm,a,L,P,alpha_q,alpha_bin";

inline EstimateRow make_row(const WeightFunction& wf, double R, double omega, const WorkFactors& f) {
    return EstimateRow{wf.q(), wf.name(), R, omega, omega / wf.max_weight(), to_string(f.model), to_string(f.algorithm),
                       f.point.a, f.point.L, f.point.P, f.total_q, f.total_bin};
}

namespace detail {

// Shortest text that parses back to the same double.
inline std::string format_double(double x) {
    char buf[32];
    for (int prec = 6; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace detail

inline void write_csv(std::ostream& out, const std::vector<EstimateRow>& rows) {
    out << kCsvHeader << '\n';
    for (const auto& r : rows) {
        using detail::format_double;
        out << r.q << ',' << r.weight << ',' << format_double(r.R) << ',' << format_double(r.omega) << ','
            << format_double(r.omega_normalized) << ',' << r.model << ',' << r.algorithm << ',' << r.a << ','
            << format_double(r.L) << ',' << format_double(r.P) << ',' << format_double(r.alpha_q) << ','
            << format_double(r.alpha_bin) << '\n';
    }
}

inline std::vector<EstimateRow> read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) throw FormatError("unexpected CSV header");
    std::vector<EstimateRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != 12) throw FormatError("CSV line " + std::to_string(lineno) + ": expected 12 fields");
        try {
            EstimateRow r;
            r.q = static_cast<std::uint32_t>(std::stoul(f[0]));
            r.weight = f[1];
            r.R = std::stod(f[2]);
            r.omega = std::stod(f[3]);
            r.omega_normalized = std::stod(f[4]);
            r.model = f[5];
            r.algorithm = f[6];
            r.a = std::stoi(f[7]);
            r.L = std::stod(f[8]);
            r.P = std::stod(f[9]);
            r.alpha_q = std::stod(f[10]);
            r.alpha_bin = std::stod(f[11]);
            rows.push_back(std::move(r));
        } catch (const std::logic_error&) {
            throw FormatError("CSV line " + std::to_string(lineno) + ": bad number");
        }
    }
    return rows;
}

}  // namespace leeisd
