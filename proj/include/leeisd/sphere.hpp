#pragma once

// Sphere surface areas S^n_w = |{e in F_q^n : wt(e) = w}|, exactly and asymptotically.

#include <leeisd/errors.hpp>
#include <leeisd/field.hpp>
#include <leeisd/weight.hpp>

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace leeisd {

using BigInt = boost::multiprecision::cpp_int;

/// log_q of a nonnegative big integer; -inf for zero.
inline double log_q(const BigInt& x, std::uint32_t q) {
    if (x <= 0) return -std::numeric_limits<double>::infinity();
    const auto bits = static_cast<long>(boost::multiprecision::msb(x));
    double log2v;
    if (bits < 60) {
        log2v = std::log2(x.convert_to<double>());
    } else {
        const BigInt top = x >> static_cast<unsigned>(bits - 52);
        log2v = std::log2(top.convert_to<double>()) + static_cast<double>(bits - 52);
    }
    return log2v / std::log2(static_cast<double>(q));
}

/// Counts of every achievable weight in F_q^n, indexed by weight units.
/// Uses the generating polynomial (sum_x z^{wt'(x)})^n, one coordinate at a time.
inline std::vector<BigInt> sphere_counts_all(const WeightFunction& wf, std::size_t n) {
    const auto classes = wf.weight_classes();
    const std::int64_t top = static_cast<std::int64_t>(n) * wf.max_units();
    std::vector<BigInt> cur(static_cast<std::size_t>(top) + 1), next(cur.size());
    cur[0] = 1;
    std::int64_t reach = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::int64_t new_reach = reach + wf.max_units();
        for (std::int64_t w = 0; w <= new_reach; ++w) next[static_cast<std::size_t>(w)] = 0;
        for (std::int64_t w = 0; w <= reach; ++w) {
            const BigInt& c = cur[static_cast<std::size_t>(w)];
            if (c.is_zero()) continue;
            for (const auto& [u, mult] : classes) next[static_cast<std::size_t>(w + u)] += c * mult;
        }
        std::swap(cur, next);
        reach = new_reach;
    }
    return cur;
}

/// Exact S^n_w with w given in weight units; unreachable weights count 0.
inline BigInt sphere_count_exact(const WeightFunction& wf, std::size_t n, std::int64_t w_units) {
    if (w_units < 0 || w_units > static_cast<std::int64_t>(n) * wf.max_units()) return 0;
    return sphere_counts_all(wf, n)[static_cast<std::size_t>(w_units)];
}

inline BigInt sphere_count_exact(const WeightFunction& wf, std::size_t n, const Rational& w) {
    auto units = wf.to_units(w);
    if (!units) return 0;
    return sphere_count_exact(wf, n, *units);
}

/// Uniform integer in [0, bound), bound > 0.
template <class Rng>
BigInt uniform_below(const BigInt& bound, Rng& rng) {
    const auto bits = static_cast<unsigned>(boost::multiprecision::msb(bound)) + 1;
    std::uniform_int_distribution<std::uint64_t> word;
    for (;;) {
        BigInt r = 0;
        unsigned have = 0;
        while (have < bits) {
            r = (r << 64) | BigInt(word(rng));
            have += 64;
        }
        r >>= (have - bits);
        if (r < bound) return r;
    }
}

/// Suffix-count table for vectors of length <= n: count(len, w) = S^len_w.
/// Supports exact uniform sampling and lexicographic rank/unrank on a sphere.
class SphereTable {
public:
    SphereTable(const WeightFunction& wf, std::size_t n) : wf_(wf), n_(n) {
        const std::size_t width = n * static_cast<std::size_t>(wf.max_units()) + 1;
        width_ = width;
        counts_.assign((n + 1) * width, 0);
        counts_[0] = 1;
        for (std::size_t len = 1; len <= n; ++len) {
            for (std::size_t w = 0; w < width; ++w) {
                BigInt acc = 0;
                for (std::uint32_t x = 0; x < wf.q(); ++x) {
                    const auto u = static_cast<std::size_t>(wf.units(static_cast<Symbol>(x)));
                    if (u <= w) acc += counts_[(len - 1) * width + (w - u)];
                }
                counts_[len * width + w] = std::move(acc);
            }
        }
    }

    std::size_t length() const { return n_; }
    const WeightFunction& weight() const { return wf_; }

    const BigInt& count(std::size_t len, std::int64_t w_units) const {
        static const BigInt zero = 0;
        if (len > n_ || w_units < 0 || static_cast<std::size_t>(w_units) >= width_) return zero;
        return counts_[len * width_ + static_cast<std::size_t>(w_units)];
    }

    /// Uniform vector of length len and weight w, coordinate by coordinate on suffix counts.
    template <class Rng>
    FqVector sample(std::size_t len, std::int64_t w_units, Rng& rng) const {
        const BigInt& total = count(len, w_units);
        if (total.is_zero()) throw InfeasibleParameters("sphere is empty for the requested weight");
        return unrank(len, w_units, uniform_below(total, rng));
    }

    /// k-th vector (lexicographic order) of the sphere of length len and weight w.
    FqVector unrank(std::size_t len, std::int64_t w_units, BigInt k) const {
        if (k >= count(len, w_units)) throw std::out_of_range("sphere rank out of range");
        FqVector out(wf_.q(), len);
        std::int64_t budget = w_units;
        for (std::size_t i = 0; i < len; ++i) {
            const std::size_t rest = len - i - 1;
            for (std::uint32_t x = 0; x < wf_.q(); ++x) {
                const BigInt& c = count(rest, budget - wf_.units(static_cast<Symbol>(x)));
                if (k < c) {
                    out[i] = static_cast<Symbol>(x);
                    budget -= wf_.units(static_cast<Symbol>(x));
                    break;
                }
                k -= c;
            }
        }
        return out;
    }

    BigInt rank(const FqVector& v) const {
        std::int64_t budget = vector_weight_units(v, wf_);
        BigInt k = 0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const std::size_t rest = v.size() - i - 1;
            for (std::uint32_t x = 0; x < v[i]; ++x) k += count(rest, budget - wf_.units(static_cast<Symbol>(x)));
            budget -= wf_.units(v[i]);
        }
        return k;
    }

private:
    WeightFunction wf_;
    std::size_t n_;
    std::size_t width_ = 0;
    std::vector<BigInt> counts_;
};

/// Uniform e in F_q^n with wt(e) = w (units).
template <class Rng>
FqVector sample_uniform_weight_w(const WeightFunction& wf, std::size_t n, std::int64_t w_units, Rng& rng) {
    if (w_units < 0 || w_units > static_cast<std::int64_t>(n) * wf.max_units())
        throw InfeasibleParameters("sphere is empty for the requested weight");
    return SphereTable(wf, n).sample(n, w_units, rng);
}

/// Maximum-entropy symbol distribution at mean weight omega.
struct EntropyProfile {
    std::vector<double> lambda;  // per symbol, sums to 1
    double s = 0.0;              // q-ary entropy, the sphere exponent
    double beta = 0.0;           // lambda_x ∝ q^{-beta wt'(x)}; ±inf at the boundaries
};

/// Asymptotic sphere exponent s_omega = lim (1/n) log_q S^n_{omega n}.
///
/// The entropy maximizer under sum(lambda) = 1 and sum(lambda wt') = omega is a
/// Gibbs distribution lambda_x ∝ q^{-beta wt'(x)}; beta is the unique root of the
/// (monotone decreasing) mean-weight map, found by Newton steps kept inside a
/// bisection bracket.
class SphereExponent {
public:
    explicit SphereExponent(const WeightFunction& wf)
        : wf_(wf), ln_q_(std::log(static_cast<double>(wf.q()))), max_w_(wf.max_weight()) {
        for (const auto& [u, mult] : wf.weight_classes()) {
            weights_.push_back(wf.to_real(u));
            mults_.push_back(static_cast<double>(mult));
        }
    }

    const WeightFunction& weight() const { return wf_; }
    double max_weight() const { return max_w_; }

    /// s_omega only; clamps omega into [0, max] up to 1e-9 slack.
    double operator()(double omega) const {
        check_range(omega);
        if (omega <= 0.0) return 0.0;
        if (omega >= max_w_) return top_entropy();
        const double beta = solve_beta(omega);
        return entropy_at(beta);
    }

    EntropyProfile profile(double omega) const {
        check_range(omega);
        EntropyProfile out;
        out.lambda.assign(wf_.q(), 0.0);
        if (omega <= 0.0) {
            out.lambda[0] = 1.0;
            out.s = 0.0;
            out.beta = std::numeric_limits<double>::infinity();
            return out;
        }
        if (omega >= max_w_) {
            const double mult = static_cast<double>(top_multiplicity());
            for (std::uint32_t x = 0; x < wf_.q(); ++x)
                if (wf_.units(static_cast<Symbol>(x)) == wf_.max_units()) out.lambda[x] = 1.0 / mult;
            out.s = top_entropy();
            out.beta = -std::numeric_limits<double>::infinity();
            return out;
        }
        out.beta = solve_beta(omega);
        const auto probs = class_probabilities(out.beta);
        for (std::uint32_t x = 0; x < wf_.q(); ++x) {
            const double w = wf_.value(static_cast<Symbol>(x));
            for (std::size_t j = 0; j < weights_.size(); ++j)
                if (weights_[j] == w) out.lambda[x] = probs[j];
        }
        out.s = entropy_at(out.beta);
        return out;
    }

    /// Mean symbol weight of the Gibbs distribution at beta.
    double mean_weight(double beta) const {
        double z = 0, m = 0;
        const double shift = log_shift(beta);
        for (std::size_t j = 0; j < weights_.size(); ++j) {
            const double e = mults_[j] * std::exp(-beta * ln_q_ * weights_[j] - shift);
            z += e;
            m += e * weights_[j];
        }
        return m / z;
    }

private:
    void check_range(double& omega) const {
        if (!(omega >= -1e-9 && omega <= max_w_ + 1e-9))
            throw InfeasibleParameters("relative weight " + std::to_string(omega) + " outside [0, max wt']");
        omega = std::clamp(omega, 0.0, max_w_);
    }

    std::uint32_t top_multiplicity() const {
        std::uint32_t c = 0;
        for (std::uint32_t x = 0; x < wf_.q(); ++x)
            if (wf_.units(static_cast<Symbol>(x)) == wf_.max_units()) ++c;
        return c;
    }

    double top_entropy() const { return std::log(static_cast<double>(top_multiplicity())) / ln_q_; }

    double log_shift(double beta) const {
        double m = -std::numeric_limits<double>::infinity();
        for (double w : weights_) m = std::max(m, -beta * ln_q_ * w);
        return m;
    }

    // Per-symbol probability of each weight class (not multiplied by multiplicity).
    std::vector<double> class_probabilities(double beta) const {
        const double shift = log_shift(beta);
        std::vector<double> p(weights_.size());
        double z = 0;
        for (std::size_t j = 0; j < weights_.size(); ++j) {
            p[j] = std::exp(-beta * ln_q_ * weights_[j] - shift);
            z += mults_[j] * p[j];
        }
        for (double& x : p) x /= z;
        return p;
    }

    double entropy_at(double beta) const {
        // -sum lambda log lambda with log lambda_j = -beta ln q w_j - shift - log Z
        const double shift = log_shift(beta);
        double z = 0, weighted = 0;
        for (std::size_t j = 0; j < weights_.size(); ++j) {
            const double t = -beta * ln_q_ * weights_[j] - shift;
            const double e = mults_[j] * std::exp(t);
            z += e;
            weighted += e * t;
        }
        const double h = std::log(z) - weighted / z;
        return std::max(0.0, h / ln_q_);
    }

    struct Moments {
        double mean;
        double var;
    };

    Moments moments(double beta) const {
        const double shift = log_shift(beta);
        double z = 0, m = 0, m2 = 0;
        for (std::size_t j = 0; j < weights_.size(); ++j) {
            const double e = mults_[j] * std::exp(-beta * ln_q_ * weights_[j] - shift);
            z += e;
            m += e * weights_[j];
            m2 += e * weights_[j] * weights_[j];
        }
        m /= z;
        return {m, std::max(0.0, m2 / z - m * m)};
    }

    double solve_beta(double omega) const {
        // mean_weight is decreasing in beta
        double lo = -50.0, hi = 50.0;
        while (mean_weight(lo) < omega && lo > -1e12) lo *= 2;
        while (mean_weight(hi) > omega && hi < 1e12) hi *= 2;
        const double tol = 1e-12 * std::max(1.0, max_w_);
        double beta = 0.0;
        if (beta < lo || beta > hi) beta = 0.5 * (lo + hi);
        for (int iter = 0; iter < 200; ++iter) {
            const Moments mo = moments(beta);
            const double f = mo.mean - omega;
            if (std::abs(f) <= tol) break;
            if (f > 0)
                lo = beta;
            else
                hi = beta;
            const double slope = -ln_q_ * mo.var;
            double next = slope < 0 ? beta - f / slope : 0.5 * (lo + hi);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (hi - lo < 1e-15 * std::max(1.0, std::abs(beta))) break;
            beta = next;
        }
        return beta;
    }

    WeightFunction wf_;
    double ln_q_;
    double max_w_;
    std::vector<double> weights_;
    std::vector<double> mults_;
};

inline EntropyProfile sphere_exponent(const WeightFunction& wf, double omega) {
    return SphereExponent(wf).profile(omega);
}

/// Typical symbol frequencies (fractions of n) of weight-omega words.
inline std::vector<double> typical_pattern(const WeightFunction& wf, double omega) {
    return sphere_exponent(wf, omega).lambda;
}

}  // namespace leeisd
