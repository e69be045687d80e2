#pragma once

// Information set decoding: random permutation, partial elimination to
// [[I, H'], [0, H'']], a CMSD call on (H'', s''), and the test e' = s' - H'e''.

#include <leeisd/cmsd.hpp>
#include <leeisd/errors.hpp>
#include <leeisd/field.hpp>
#include <leeisd/sphere.hpp>
#include <leeisd/weight.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <thread>
#include <vector>

namespace leeisd {

struct SdInstance {
    std::uint32_t q = 2;
    std::size_t n = 0;
    std::size_t k = 0;
    std::int64_t w_units = 0;  // target weight in units of wf.denominator()
    WeightFunction wf = WeightFunction::hamming(2);
    FqMatrix h;
    FqVector s;
    std::optional<FqVector> planted;

    Rational weight() const { return Rational(w_units, wf.denominator()); }
};

using Rng = std::mt19937_64;

template <class R>
SdInstance generate_instance(std::uint32_t q, std::size_t n, std::size_t k, std::int64_t w_units,
                             const WeightFunction& wf, R& rng) {
    require_same_modulus(q, wf.q());
    if (k == 0 || k >= n) throw DimensionError("need 0 < k < n");
    if (sphere_count_exact(wf, n, w_units).is_zero())
        throw InfeasibleParameters("no vector of length " + std::to_string(n) + " has the requested weight");
    SdInstance inst;
    inst.q = q;
    inst.n = n;
    inst.k = k;
    inst.w_units = w_units;
    inst.wf = wf;
    inst.h = random_full_rank_matrix(q, n - k, n, rng);
    FqVector e = sample_uniform_weight_w(wf, n, w_units, rng);
    inst.s = mat_vec_mul(inst.h, e);
    inst.planted = std::move(e);
    return inst;
}

inline bool verify_solution(const SdInstance& inst, const FqVector& e) {
    if (e.size() != inst.n) throw DimensionError("candidate length differs from n");
    require_same_modulus(inst.q, e.modulus());
    return vector_weight_units(e, inst.wf) == inst.w_units && mat_vec_mul(inst.h, e) == inst.s;
}

/// Structural checks: shapes, moduli, rank n-k and, when present, the planted solution.
inline void validate_instance(const SdInstance& inst) {
    require_same_modulus(inst.q, inst.wf.q());
    if (inst.k == 0 || inst.k >= inst.n) throw DimensionError("need 0 < k < n");
    if (inst.h.rows() != inst.n - inst.k || inst.h.cols() != inst.n) throw DimensionError("H must be (n-k) x n");
    if (inst.s.size() != inst.n - inst.k) throw DimensionError("s must have length n-k");
    require_same_modulus(inst.q, inst.h.modulus());
    require_same_modulus(inst.q, inst.s.modulus());
    if (rank(inst.h) != inst.n - inst.k) throw DimensionError("H does not have rank n-k");
    if (inst.planted && !verify_solution(inst, *inst.planted))
        throw InfeasibleParameters("recorded solution does not solve the instance");
}

struct IsdParams {
    std::size_t ell = 0;
    std::int64_t p_units = 0;  // weight budget on e''
    std::size_t a = 1;
    CmsdVariant variant = CmsdVariant::prange;
    std::size_t base_list_size = 0;
    std::size_t list_cap = kDefaultListCap;
    SplitPolicy split = SplitPolicy::all_compositions;
    std::uint64_t max_outer_loops = 100000;
    bool auto_budget = true;  // stop after 10 / (expected per-loop success), clamped to max_outer_loops
    std::uint64_t rng_seed = 1;
    unsigned threads = 1;

    CmsdOptions cmsd_options() const {
        CmsdOptions o;
        o.base_list_size = base_list_size;
        o.list_cap = list_cap;
        o.split = split;
        return o;
    }
};

struct SolveReport {
    std::optional<FqVector> solution;
    std::uint64_t outer_loops = 0;
    std::uint64_t cmsd_calls = 0;
    std::uint64_t tested_candidates = 0;
    std::uint64_t singular_retries = 0;
    std::uint64_t loop_budget = 0;
    std::uint64_t winning_loop = 0;
    double expected_success_per_loop = 0.0;
    double wall_seconds = 0.0;
};

inline void check_params(const SdInstance& inst, const IsdParams& p) {
    const std::size_t r = inst.n - inst.k;
    if (p.ell > r) throw InfeasibleParameters("ell must lie in [0, n-k]");
    if (p.p_units < 0 || p.p_units > inst.w_units) throw InfeasibleParameters("p must lie in [0, w]");
    if (p.p_units % inst.wf.granularity() != 0) throw InfeasibleParameters("p is not a multiple of the weight granularity");
    if (p.threads == 0) throw InfeasibleParameters("threads must be positive");
    const std::size_t big_n = inst.k + p.ell;
    switch (p.variant) {
        case CmsdVariant::prange:
            if (p.ell != 0 || p.p_units != 0) throw InfeasibleParameters("Prange needs ell = 0 and p = 0");
            break;
        case CmsdVariant::dumer:
            if (big_n < 2) throw InfeasibleParameters("Dumer needs k + ell >= 2");
            break;
        case CmsdVariant::wagner1:
            if (p.a < 1 || p.a > 16 || big_n < (std::size_t{1} << p.a))
                throw InfeasibleParameters("Wagner needs 1 <= a and 2^a <= k + ell");
            break;
        case CmsdVariant::wagner2:
            if (p.a < 1 || p.a > 16 || big_n < (std::size_t{1} << p.a) + 1)
                throw InfeasibleParameters("Wagner variant 2 needs 2^a + 1 <= k + ell");
            break;
    }
    if (sphere_count_exact(inst.wf, r - p.ell, inst.w_units - p.p_units).is_zero() ||
        sphere_count_exact(inst.wf, big_n, p.p_units).is_zero())
        throw InfeasibleParameters("the weight split (w - p, p) is not achievable on (n-k-ell, k+ell) coordinates");
}

template <class R>
CmsdDescription build_cmsd(const PartialElimination& pe, const WeightFunction& wf, const IsdParams& p, R& rng) {
    const CmsdOptions opts = p.cmsd_options();
    switch (p.variant) {
        case CmsdVariant::prange: return cmsd_prange(pe.h_second, pe.s_second, wf, p.p_units);
        case CmsdVariant::dumer: return cmsd_dumer(pe.h_second, pe.s_second, wf, p.p_units, opts, rng);
        case CmsdVariant::wagner1: return cmsd_wagner_v1(pe.h_second, pe.s_second, wf, p.p_units, p.a, opts, rng);
        case CmsdVariant::wagner2: return cmsd_wagner_v2_build(pe.h_second, pe.s_second, wf, p.p_units, p.a, opts, rng);
    }
    throw InfeasibleParameters("unknown variant");
}

/// Probability that one loop succeeds: the planted weight splits as (w - p, p) under a random
/// permutation, times the share of CMSD solutions the back end is expected to emit.
inline double loop_success_probability(const SdInstance& inst, const IsdParams& p, double expected_emitted) {
    const std::size_t r = inst.n - inst.k;
    const std::size_t big_n = inst.k + p.ell;
    const BigInt top = sphere_count_exact(inst.wf, r - p.ell, inst.w_units - p.p_units) *
                       sphere_count_exact(inst.wf, big_n, p.p_units);
    const double split = std::exp2(std::log2(top.convert_to<double>()) -
                                   std::log2(sphere_count_exact(inst.wf, inst.n, inst.w_units).convert_to<double>()));
    const double cmsd_solutions =
        std::max(1.0, sphere_count_exact(inst.wf, big_n, p.p_units).convert_to<double>() /
                          std::pow(static_cast<double>(inst.q), static_cast<double>(p.ell)));
    return std::min(1.0, split * std::min(1.0, expected_emitted / cmsd_solutions));
}

namespace detail {

inline constexpr int kMaxSingularRetries = 1000;

inline Rng loop_rng(std::uint64_t seed, std::uint64_t loop) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(loop), static_cast<std::uint32_t>(loop >> 32)};
    return Rng(seq);
}

struct LoopResult {
    std::optional<FqVector> solution;
    bool singular = false;
    std::uint64_t singular_retries = 0;
    std::uint64_t tested = 0;
    double expected_emitted = 0.0;
};

inline LoopResult run_loop(const SdInstance& inst, const IsdParams& p, std::uint64_t loop) {
    LoopResult out;
    Rng rng = loop_rng(p.rng_seed, loop);
    // a singular top-left block means drawing another permutation inside the same loop
    Permutation perm = Permutation::random(inst.n, rng);
    auto pe = try_partial_gaussian_elim(apply_permutation(inst.h, perm), p.ell, inst.s);
    for (int retry = 0; !pe && retry < kMaxSingularRetries; ++retry) {
        ++out.singular_retries;
        perm = Permutation::random(inst.n, rng);
        pe = try_partial_gaussian_elim(apply_permutation(inst.h, perm), p.ell, inst.s);
    }
    if (!pe) {
        out.singular = true;
        return out;
    }
    const CmsdDescription f = build_cmsd(*pe, inst.wf, p, rng);
    out.expected_emitted = f.stats().expected_solutions;
    const std::size_t r = inst.n - inst.k - p.ell;
    const std::int64_t rest = inst.w_units - p.p_units;
    for (std::uint64_t i = 0; i < f.domain_size(); ++i) {
        FqVector e2 = f.evaluate(i);
        ++out.tested;
        if (!f.is_solution(e2)) continue;
        const FqVector e1 = sub(pe->s_prime, mat_vec_mul(pe->h_prime, e2));
        if (vector_weight_units(e1, inst.wf) != rest) continue;
        FqVector e_perm(inst.q, inst.n);
        for (std::size_t c = 0; c < r; ++c) e_perm[c] = e1[c];
        for (std::size_t c = 0; c < e2.size(); ++c) e_perm[r + c] = e2[c];
        out.solution = apply_permutation(e_perm, perm.inverse());
        return out;
    }
    return out;
}

}  // namespace detail

/// Runs outer loops until a solution is found or the loop budget is spent. Loop i uses an RNG
/// derived from (rng_seed, i); with several threads the lowest successful index wins, so the
/// report does not depend on the thread count.
inline SolveReport isd_solve(const SdInstance& inst, const IsdParams& params) {
    const auto start = std::chrono::steady_clock::now();
    check_params(inst, params);
    SolveReport rep;
    rep.loop_budget = params.max_outer_loops;

    std::uint64_t next = 0;
    bool budget_set = !params.auto_budget;
    while (next < rep.loop_budget && !rep.solution) {
        const std::uint64_t batch = std::min<std::uint64_t>(params.threads, rep.loop_budget - next);
        std::vector<detail::LoopResult> results(batch);
        std::vector<std::exception_ptr> errors(batch);
        if (batch == 1) {
            results[0] = detail::run_loop(inst, params, next);
        } else {
            std::vector<std::thread> pool;
            for (std::uint64_t t = 0; t < batch; ++t)
                pool.emplace_back([&, t] {
                    try {
                        results[t] = detail::run_loop(inst, params, next + t);
                    } catch (...) {
                        errors[t] = std::current_exception();
                    }
                });
            for (auto& th : pool) th.join();
        }
        for (std::uint64_t t = 0; t < batch; ++t) {
            if (errors[t]) std::rethrow_exception(errors[t]);
            const auto& res = results[t];
            ++rep.outer_loops;
            rep.singular_retries += res.singular_retries;
            if (res.singular) continue;
            ++rep.cmsd_calls;
            rep.tested_candidates += res.tested;
            if (!budget_set) {
                rep.expected_success_per_loop = loop_success_probability(inst, params, res.expected_emitted);
                const double loops = 10.0 * std::ceil(1.0 / std::max(rep.expected_success_per_loop, 1e-18));
                if (loops < static_cast<double>(rep.loop_budget)) rep.loop_budget = static_cast<std::uint64_t>(loops);
                rep.loop_budget = std::max(rep.loop_budget, next + batch);
                budget_set = true;
            }
            if (res.solution) {
                rep.solution = res.solution;
                rep.winning_loop = next + t;
                break;
            }
        }
        next += batch;
    }
    if (rep.solution && !verify_solution(inst, *rep.solution))
        throw std::logic_error("ISD returned a vector that does not solve the instance");
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

}  // namespace leeisd
