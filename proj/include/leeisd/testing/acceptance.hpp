#pragma once

// Desk-scale acceptance suite shared by the acceptance test binary and `leeisd selftest`.

#include <leeisd/cmsd.hpp>
#include <leeisd/estimator.hpp>
#include <leeisd/isd.hpp>
#include <leeisd/merge.hpp>
#include <leeisd/sphere.hpp>
#include <leeisd/testing/oracles.hpp>
#include <leeisd/weight.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace leeisd::acceptance {

struct Options {
    bool extended = false;  // adds q = 43, 163, 331 to the Table 1 checks
    std::uint64_t seed = 20240601;
};

struct Result {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct Table1Row {
    std::uint32_t q;
    double R_classical, alpha_classical, alpha_hat_classical;
    double R_quantum, alpha_quantum, alpha_hat_quantum;
};

// Published hardest-instance exponents for the Lee metric.
inline const std::vector<Table1Row>& table1() {
    static const std::vector<Table1Row> rows{
        {3, 0.370, 0.269, 0.170, 0.369, 0.148, 0.093},   {5, 0.572, 0.357, 0.154, 0.569, 0.206, 0.089},
        {13, 0.480, 0.522, 0.141, 0.501, 0.283, 0.076}, {43, 0.454, 0.794, 0.146, 0.472, 0.429, 0.079},
        {163, 0.442, 1.117, 0.152, 0.464, 0.607, 0.083}, {331, 0.438, 1.291, 0.154, 0.464, 0.703, 0.084},
    };
    return rows;
}

namespace detail {

inline std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

}  // namespace detail

class Suite {
public:
    explicit Suite(Options opt) : opt_(opt) {}

    std::vector<std::uint32_t> table1_qs() const {
        std::vector<std::uint32_t> qs{3, 5, 13};
        if (opt_.extended) qs.insert(qs.end(), {43, 163, 331});
        return qs;
    }

    const HardestResult& hardest(std::uint32_t q, Model model, bool lee = true) {
        const auto key = std::tuple{q, model, lee};
        auto it = cache_.find(key);
        if (it == cache_.end()) {
            const WeightFunction wf = lee ? WeightFunction::lee(q) : WeightFunction::hamming(q);
            it = cache_.emplace(key, hardest_instance(wf, model)).first;
        }
        return it->second;
    }

    Result table1_classical() {
        Result r;
        r.name = "Table 1 reproduction (classical)";
        r.passed = true;
        std::ostringstream d;
        for (std::uint32_t q : table1_qs()) {
            const auto& ref = row(q);
            const auto& h = hardest(q, Model::classical);
            const bool ok = std::abs(h.factors.total_q - ref.alpha_hat_classical) <= 0.005 &&
                            std::abs(h.R - ref.R_classical) <= 0.02;
            r.passed = r.passed && ok;
            d << "q=" << q << " R=" << detail::fmt("%.3f", h.R) << " (" << ref.R_classical << ") alpha_q="
              << detail::fmt("%.4f", h.factors.total_q) << " (" << ref.alpha_hat_classical << ")" << (ok ? "" : " MISS") << "; ";
        }
        r.detail = d.str();
        return r;
    }

    Result table1_quantum() {
        Result r;
        r.name = "Table 1 reproduction (quantum)";
        r.passed = true;
        std::ostringstream d;
        for (std::uint32_t q : table1_qs()) {
            const auto& ref = row(q);
            const auto& h = hardest(q, Model::quantum);
            const bool ok = std::abs(h.factors.total_q - ref.alpha_hat_quantum) <= 0.005;
            r.passed = r.passed && ok;
            d << "q=" << q << " alpha_q=" << detail::fmt("%.4f", h.factors.total_q) << " (" << ref.alpha_hat_quantum
              << ") at R=" << detail::fmt("%.3f", h.R) << (ok ? "" : " MISS") << "; ";
        }
        r.detail = d.str();
        return r;
    }

    Result scaling_identity() {
        Result r;
        r.name = "Scaling identity alpha = alpha_q * log2 q";
        r.passed = true;
        int checked = 0;
        for (std::uint32_t q : table1_qs())
            for (Model m : {Model::classical, Model::quantum}) {
                const auto& f = hardest(q, m).factors;
                const double lhs = std::round(f.total_bin * 1000), rhs = std::round(f.total_q * std::log2(q) * 1000);
                r.passed = r.passed && lhs == rhs;
                ++checked;
            }
        // the published pairs agree up to their own 3-decimal rounding
        double worst = 0;
        for (const auto& t : table1()) {
            const double l2 = std::log2(t.q);
            const double tol = 0.0005 + 0.0005 * l2 + 1e-12;
            for (auto [a, ah] : {std::pair{t.alpha_classical, t.alpha_hat_classical}, std::pair{t.alpha_quantum, t.alpha_hat_quantum}}) {
                const double gap = std::abs(a - ah * l2);
                worst = std::max(worst, gap - tol);
                r.passed = r.passed && gap <= tol;
            }
        }
        r.detail = std::to_string(checked) + " computed rows exact to 3 decimals; published pairs within rounding (q=3: 0.170 * " +
                   detail::fmt("%.3f", std::log2(3.0)) + " = " + detail::fmt("%.4f", 0.170 * std::log2(3.0)) + " vs 0.269)";
        return r;
    }

    Result sphere_convergence() {
        Result r;
        r.name = "Sphere-exponent convergence at n = 500";
        r.passed = true;
        double worst = 0;
        const std::size_t n = 500;
        for (std::uint32_t q : {3u, 5u, 7u})
            for (bool lee : {true, false}) {
                const WeightFunction wf = lee ? WeightFunction::lee(q) : WeightFunction::hamming(q);
                const auto counts = sphere_counts_all(wf, n);
                const SphereExponent s(wf);
                for (int i = 1; i <= 9; ++i) {
                    const double omega = 0.1 * i * wf.max_weight();
                    const auto w = static_cast<std::size_t>(std::floor(omega * n + 1e-9));
                    const double finite = log_q(counts[w], q) / static_cast<double>(n);
                    const double gap = std::abs(finite - s(omega));
                    worst = std::max(worst, gap);
                    r.passed = r.passed && gap <= 0.02;
                }
            }
        r.detail = "54 points, max |(1/n) log_q S - s| = " + detail::fmt("%.5f", worst);
        return r;
    }

    Result exact_count_oracle() {
        Result r;
        r.name = "Exact sphere counts vs enumeration";
        int mismatches = 0, checked = 0;
        for (std::uint32_t q : {2u, 3u, 5u})
            for (bool lee : {true, false}) {
                const WeightFunction wf = lee ? WeightFunction::lee(q) : WeightFunction::hamming(q);
                for (std::size_t n = 1; n <= 6; ++n) {
                    const auto brute = oracle::sphere_counts(wf, n);
                    for (std::int64_t w = 0; w <= static_cast<std::int64_t>(n) * wf.max_units(); ++w) {
                        const auto it = brute.find(w);
                        const std::uint64_t want = it == brute.end() ? 0 : it->second;
                        ++checked;
                        if (sphere_count_exact(wf, n, w) != want) ++mismatches;
                    }
                }
            }
        r.passed = mismatches == 0;
        r.detail = std::to_string(checked) + " (q, metric, n, w) cells, " + std::to_string(mismatches) + " mismatches";
        return r;
    }

    Result decoder_soundness() {
        Result r;
        r.name = "Decoder soundness on planted instances";
        struct Config {
            const char* name;
            std::uint32_t q;
            std::size_t n, k;
            std::int64_t w;
            IsdParams params;
        };
        IsdParams prange;
        IsdParams dumer;
        dumer.variant = CmsdVariant::dumer;
        dumer.ell = 2;
        dumer.p_units = 2;
        IsdParams wagner;
        wagner.variant = CmsdVariant::wagner1;
        wagner.a = 2;
        wagner.ell = 4;
        wagner.p_units = 2;
        const std::vector<Config> configs{{"prange", 3, 16, 8, 4, prange}, {"dumer", 3, 20, 8, 4, dumer}, {"wagner1", 3, 24, 8, 6, wagner}};
        r.passed = true;
        std::ostringstream d;
        for (const auto& c : configs)
            for (bool lee : {false, true}) {
                const WeightFunction wf = lee ? WeightFunction::lee(c.q) : WeightFunction::hamming(c.q);
                int found = 0, verified = 0;
                for (int t = 0; t < 50; ++t) {
                    Rng rng(opt_.seed + 1000 * t + (lee ? 7 : 0));
                    const SdInstance inst = generate_instance(c.q, c.n, c.k, c.w, wf, rng);
                    IsdParams p = c.params;
                    p.rng_seed = opt_.seed + static_cast<std::uint64_t>(t);
                    const SolveReport rep = isd_solve(inst, p);
                    if (rep.solution) {
                        ++found;
                        verified += verify_solution(inst, *rep.solution);
                    }
                }
                const bool ok = verified == found && found >= 45;
                r.passed = r.passed && ok;
                d << c.name << "/" << wf.name() << " " << found << "/50 found, " << verified << " verified; ";
            }
        r.detail = d.str();
        return r;
    }

    Result cmsd_oracle_equivalence() {
        Result r;
        r.name = "CMSD back ends vs exhaustive solution sets";
        struct Config {
            std::uint32_t q;
            std::size_t big_n, ell;
            std::int64_t p;
            bool lee;
        };
        const std::vector<Config> configs{{3, 8, 2, 2, false}, {3, 10, 3, 3, true}, {5, 6, 2, 3, true}, {5, 7, 2, 2, false}};
        int instances = 0, failures = 0, v2_found = 0;
        std::ostringstream d;
        for (const auto& c : configs) {
            const WeightFunction wf = c.lee ? WeightFunction::lee(c.q) : WeightFunction::hamming(c.q);
            for (int t = 0; t < 5; ++t) {
                Rng rng(opt_.seed + 31 * static_cast<std::uint64_t>(t) + c.big_n);
                FqMatrix h(c.q, c.ell, c.big_n);
                std::uniform_int_distribution<std::uint32_t> sym(0, c.q - 1);
                for (std::size_t i = 0; i < c.ell; ++i)
                    for (std::size_t j = 0; j < c.big_n; ++j) h(i, j) = static_cast<Symbol>(sym(rng));
                const FqVector s = mat_vec_mul(h, sample_uniform_weight_w(wf, c.big_n, c.p, rng));
                const auto truth = oracle::cmsd_solutions(h, s, wf, c.p);
                ++instances;
                bool ok = true;

                auto multiset = [](const CmsdDescription& f) {
                    auto sols = enumerate_f(f).solutions;
                    std::sort(sols.begin(), sols.end());
                    return sols;
                };
                ok = ok && multiset(cmsd_dumer(h, s, wf, c.p, CmsdOptions{}, rng)) == truth;
                ok = ok && multiset(cmsd_wagner_v1(h, s, wf, c.p, 1, CmsdOptions{}, rng)) == truth;

                // variant 2 with one level: every tail of the fixed weight profile that completes is found once
                const auto v2 = cmsd_wagner_v2_build(h, s, wf, c.p, 1, CmsdOptions{}, rng);
                const auto got = enumerate_f(v2);
                const auto blocks = leeisd::detail::split_blocks(c.big_n, 3);
                const auto weights = leeisd::detail::split_weight(c.p, wf.granularity(), 3);
                std::set<std::vector<Symbol>> tails;
                for (const auto& e : truth) {
                    std::int64_t w0 = 0;
                    for (std::size_t i = 0; i < blocks[0].length; ++i) w0 += wf.units(e[i]);
                    if (w0 != weights[0]) continue;
                    tails.insert(std::vector<Symbol>(e.entries().begin() + static_cast<std::ptrdiff_t>(blocks[1].offset), e.entries().end()));
                }
                for (const auto& e : got.solutions) ok = ok && std::binary_search(truth.begin(), truth.end(), e);
                ok = ok && got.solutions.size() == tails.size();
                ok = ok && (tails.empty() || !got.solutions.empty());
                v2_found += !got.solutions.empty();

                if (c.big_n >= 5) {
                    const auto v2b = cmsd_wagner_v2_build(h, s, wf, c.p, 2, CmsdOptions{}, rng);
                    for (const auto& e : enumerate_f(v2b).solutions) ok = ok && std::binary_search(truth.begin(), truth.end(), e);
                }
                failures += !ok;
            }
        }
        r.passed = failures == 0;
        r.detail = std::to_string(instances) + " instances, " + std::to_string(failures) +
                   " disagreements (dumer and wagner1 a=1 equal the oracle multiset; wagner2 outputs a subset, nonempty in " +
                   std::to_string(v2_found) + ")";
        return r;
    }

    Result merge_size_law() {
        Result r;
        r.name = "Merge size law";
        const std::uint32_t q = 3;
        const std::size_t m = 8, size = 200;
        const std::vector<std::size_t> coords{0, 1, 2, 3, 4, 5};
        const double expected = static_cast<double>(size * size) / std::pow(q, coords.size());
        int within = 0;
        Rng rng(opt_.seed);
        std::uniform_int_distribution<std::uint32_t> sym(0, q - 1);
        auto random_vec = [&] {
            FqVector v(q, m);
            for (std::size_t i = 0; i < m; ++i) v[i] = static_cast<Symbol>(sym(rng));
            return v;
        };
        std::ostringstream sizes;
        for (int t = 0; t < 20; ++t) {
            IndexedList a(q, m), b(q, m);
            for (std::size_t i = 0; i < size; ++i) {
                a.push_back(random_vec());
                b.push_back(random_vec());
            }
            const double got = static_cast<double>(merge(a, b, coords, random_vec()).size());
            within += got >= expected / 4 && got <= expected * 4;
            sizes << got << (t + 1 < 20 ? " " : "");
        }
        r.passed = within >= 18;
        r.detail = std::to_string(within) + "/20 within factor 4 of " + detail::fmt("%.1f", expected) + " (sizes " + sizes.str() + ")";
        return r;
    }

    Result maxima_law() {
        Result r;
        r.name = "Local maxima at s = 1 - R";
        r.passed = true;
        std::ostringstream d;
        for (std::uint32_t q : {3u, 5u, 13u})
            for (double R : {0.3, 0.5}) {
                const WeightFunction wf = WeightFunction::lee(q);
                const auto grid = omega_grid(wf, 1000);
                const auto rows = sweep(wf, R, {{Model::classical, Algorithm::wagner}}, grid);
                std::vector<double> values;
                for (const auto& row : rows) values.push_back(row.results[0].total_q);
                const auto peaks = local_maxima(values);
                const MaximaWeights mw = local_maxima_weights(wf, R);
                const double residual = std::abs(SphereExponent(wf)(mw.omega_minus) - (1 - R));
                const double step = grid[1] - grid[0];
                auto near = [&](double omega) {
                    for (std::size_t i : peaks)
                        if (std::abs(grid[i] - omega) <= 2 * step + 1e-12) return true;
                    return false;
                };
                bool ok = residual <= 1e-6 && near(mw.omega_minus) && near(mw.omega_plus);
                for (std::size_t i : peaks)
                    ok = ok && (std::abs(grid[i] - mw.omega_minus) <= 2 * step + 1e-12 ||
                                std::abs(grid[i] - mw.omega_plus) <= 2 * step + 1e-12);
                r.passed = r.passed && ok;
                d << "q=" << q << " R=" << R << ": " << peaks.size() << " peaks";
                for (std::size_t i : peaks) d << " " << detail::fmt("%.3f", grid[i]);
                d << " vs " << detail::fmt("%.3f", mw.omega_minus) << "/" << detail::fmt("%.3f", mw.omega_plus) << (ok ? "" : " MISS")
                  << "; ";
            }
        r.detail = d.str();
        return r;
    }

    Result lee_harder_than_hamming() {
        Result r;
        r.name = "Lee harder than Hamming";
        r.passed = true;
        std::ostringstream d;
        for (std::uint32_t q : {5u, 13u}) {
            const double lee = hardest(q, Model::classical, true).factors.total_q;
            const double ham = hardest(q, Model::classical, false).factors.total_q;
            r.passed = r.passed && lee > ham;
            d << "q=" << q << " lee " << detail::fmt("%.4f", lee) << " > hamming " << detail::fmt("%.4f", ham) << "; ";
        }
        r.detail = d.str();
        return r;
    }

    std::vector<std::pair<std::string, std::function<Result()>>> criteria() {
        return {
            {"table1_classical", [this] { return table1_classical(); }},
            {"table1_quantum", [this] { return table1_quantum(); }},
            {"scaling_identity", [this] { return scaling_identity(); }},
            {"sphere_convergence", [this] { return sphere_convergence(); }},
            {"exact_count_oracle", [this] { return exact_count_oracle(); }},
            {"decoder_soundness", [this] { return decoder_soundness(); }},
            {"cmsd_oracle_equivalence", [this] { return cmsd_oracle_equivalence(); }},
            {"merge_size_law", [this] { return merge_size_law(); }},
            {"maxima_law", [this] { return maxima_law(); }},
            {"lee_harder_than_hamming", [this] { return lee_harder_than_hamming(); }},
        };
    }

private:
    static const Table1Row& row(std::uint32_t q) {
        for (const auto& t : table1())
            if (t.q == q) return t;
        throw std::out_of_range("no Table 1 row for q");
    }

    Options opt_;
    std::map<std::tuple<std::uint32_t, Model, bool>, HardestResult> cache_;
};

/// Runs every criterion, printing one PASS/FAIL line each; returns true iff all pass.
inline bool run_all(const Options& opt, std::FILE* out = stdout) {
    Suite suite(opt);
    bool all = true;
    for (auto& [key, run] : suite.criteria()) {
        const auto start = std::chrono::steady_clock::now();
        Result res;
        try {
            res = run();
        } catch (const std::exception& e) {
            res.name = key;
            res.passed = false;
            res.detail = std::string("threw: ") + e.what();
        }
        res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        all = all && res.passed;
        std::fprintf(out, "[%s] %s (%.1fs): %s\n", res.passed ? "PASS" : "FAIL", res.name.c_str(), res.seconds, res.detail.c_str());
        std::fflush(out);
    }
    return all;
}

}  // namespace leeisd::acceptance
