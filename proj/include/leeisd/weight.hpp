#pragma once

// Additive weight functions wt(e) = sum_i wt'(e_i) with wt'(0) = 0.
//
// Per-symbol weights are nonnegative rationals. They are stored as integer
// "units" over one common denominator so sphere counting and weight budgets
// stay exact; Lee and Hamming tables have denominator 1.

#include <leeisd/errors.hpp>
#include <leeisd/field.hpp>

#include <boost/rational.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace leeisd {

using Rational = boost::rational<std::int64_t>;

class WeightFunction {
public:
    static WeightFunction lee(std::uint32_t q) {
        std::vector<Rational> t(q);
        for (std::uint32_t x = 0; x < q; ++x) t[x] = std::min(x, q - x);
        return WeightFunction(q, t, "lee");
    }

    static WeightFunction hamming(std::uint32_t q) {
        std::vector<Rational> t(q, Rational(1));
        if (q > 0) t[0] = 0;
        return WeightFunction(q, t, "hamming");
    }

    static WeightFunction custom(std::uint32_t q, const std::vector<Rational>& table) {
        return WeightFunction(q, table, "custom");
    }

    WeightFunction(std::uint32_t q, const std::vector<Rational>& table, std::string name)
        : q_(q), name_(std::move(name)) {
        (void)PrimeField{q};
        if (table.size() != q) throw InfeasibleParameters("weight table must have exactly q entries");
        if (table[0].numerator() != 0) throw InfeasibleParameters("weight table must satisfy wt'(0) = 0");
        denom_ = 1;
        for (const Rational& r : table) {
            if (r.numerator() < 0) throw InfeasibleParameters("weight table entries must be nonnegative");
            denom_ = std::lcm(denom_, r.denominator());
        }
        units_.reserve(q);
        for (const Rational& r : table) units_.push_back(r.numerator() * (denom_ / r.denominator()));
        max_units_ = *std::max_element(units_.begin(), units_.end());
        if (max_units_ == 0) throw InfeasibleParameters("weight table must have a nonzero entry");
        granularity_ = 0;
        for (std::int64_t u : units_) granularity_ = std::gcd(granularity_, u);
    }

    std::uint32_t q() const { return q_; }
    const std::string& name() const { return name_; }

    /// wt'(x) in integer units of 1/denominator().
    std::int64_t units(Symbol x) const { return units_[x]; }
    const std::vector<std::int64_t>& unit_table() const { return units_; }
    std::int64_t denominator() const { return denom_; }
    std::int64_t max_units() const { return max_units_; }
    /// gcd of all table entries; every achievable weight is a multiple of it.
    std::int64_t granularity() const { return granularity_; }

    Rational symbol_weight(Symbol x) const { return Rational(units_[x], denom_); }
    double value(Symbol x) const { return to_real(units_[x]); }
    double max_weight() const { return to_real(max_units_); }

    /// Average of wt' over all q symbols (mean weight of a uniform symbol).
    double mean_weight() const {
        const double total = static_cast<double>(std::accumulate(units_.begin(), units_.end(), std::int64_t{0}));
        return total / static_cast<double>(q_) / static_cast<double>(denom_);
    }

    double to_real(std::int64_t u) const { return static_cast<double>(u) / static_cast<double>(denom_); }

    std::optional<std::int64_t> to_units(const Rational& w) const {
        Rational scaled = w * Rational(denom_);
        if (scaled.denominator() != 1) return std::nullopt;
        return scaled.numerator();
    }

    /// Converts a real weight to units; fails unless it sits on the unit lattice.
    std::optional<std::int64_t> to_units(double w) const {
        const double scaled = w * static_cast<double>(denom_);
        const double r = std::round(scaled);
        if (std::abs(scaled - r) > 1e-9 * std::max(1.0, std::abs(scaled))) return std::nullopt;
        return static_cast<std::int64_t>(r);
    }

    /// Distinct nonzero-or-zero weight values with their symbol multiplicities.
    std::vector<std::pair<std::int64_t, std::uint32_t>> weight_classes() const {
        std::vector<std::int64_t> sorted = units_;
        std::sort(sorted.begin(), sorted.end());
        std::vector<std::pair<std::int64_t, std::uint32_t>> out;
        for (std::int64_t u : sorted) {
            if (out.empty() || out.back().first != u)
                out.emplace_back(u, 1u);
            else
                ++out.back().second;
        }
        return out;
    }

    friend bool operator==(const WeightFunction& a, const WeightFunction& b) {
        return a.q_ == b.q_ && a.units_ == b.units_ && a.denom_ == b.denom_;
    }

private:
    std::uint32_t q_;
    std::string name_;
    std::vector<std::int64_t> units_;
    std::int64_t denom_ = 1;
    std::int64_t max_units_ = 0;
    std::int64_t granularity_ = 1;
};

/// Weight of v in units of wf.denominator().
inline std::int64_t vector_weight_units(const FqVector& v, const WeightFunction& wf) {
    require_same_modulus(v.modulus(), wf.q());
    std::int64_t total = 0;
    for (Symbol x : v.entries()) total += wf.units(x);
    return total;
}

inline Rational vector_weight(const FqVector& v, const WeightFunction& wf) {
    return Rational(vector_weight_units(v, wf), wf.denominator());
}

/// omega / max_x wt'(x): 1 means every coordinate carries the largest symbol weight.
inline double normalized_weight(const WeightFunction& wf, double omega) { return omega / wf.max_weight(); }

/// Best rational approximation with bounded denominator; used for weights read as decimals.
inline Rational rationalize(double x, std::int64_t max_den = 1000000) {
    if (!std::isfinite(x)) throw FormatError("weight value is not finite");
    const bool negative = x < 0;
    double v = std::abs(x);
    std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    for (int iter = 0; iter < 64; ++iter) {
        const double a = std::floor(v);
        const auto ai = static_cast<std::int64_t>(a);
        const std::int64_t p2 = ai * p1 + p0, q2 = ai * q1 + q0;
        if (q2 > max_den) break;
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
        const double frac = v - a;
        if (frac < 1e-12) break;
        v = 1.0 / frac;
    }
    Rational r(p1, q1);
    if (std::abs(boost::rational_cast<double>(r) - std::abs(x)) > 1e-9 * std::max(1.0, std::abs(x)))
        throw FormatError("weight value " + std::to_string(x) + " has no small rational form");
    return negative ? -r : r;
}

}  // namespace leeisd
