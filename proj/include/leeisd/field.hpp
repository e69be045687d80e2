#pragma once

// Dense vectors and matrices over a prime field F_q, q < 2^16.

#include <leeisd/errors.hpp>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace leeisd {

using Symbol = std::uint16_t;

inline bool is_prime(std::uint32_t q) {
    if (q < 2) return false;
    for (std::uint32_t d = 2; d * d <= q; ++d)
        if (q % d == 0) return false;
    return true;
}

/// Arithmetic context for F_q. Construction rejects non-prime or oversized moduli.
class PrimeField {
public:
    explicit PrimeField(std::uint32_t q) : q_(q) {
        if (q >= (1u << 16)) throw InfeasibleParameters("field modulus must be below 2^16");
        if (!is_prime(q)) throw InfeasibleParameters("field modulus " + std::to_string(q) + " is not prime");
    }

    std::uint32_t modulus() const { return q_; }

    Symbol add(Symbol a, Symbol b) const { return static_cast<Symbol>((std::uint32_t{a} + b) % q_); }
    Symbol sub(Symbol a, Symbol b) const { return static_cast<Symbol>((std::uint32_t{a} + q_ - b) % q_); }
    Symbol mul(Symbol a, Symbol b) const { return static_cast<Symbol>((std::uint32_t{a} * b) % q_); }
    Symbol neg(Symbol a) const { return static_cast<Symbol>((q_ - a) % q_); }

    Symbol inv(Symbol a) const {
        if (a == 0) throw std::domain_error("inverse of zero");
        // extended Euclid on (a, q)
        std::int64_t r0 = q_, r1 = a, s0 = 0, s1 = 1;
        while (r1 != 0) {
            std::int64_t quot = r0 / r1;
            std::tie(r0, r1) = std::pair{r1, r0 - quot * r1};
            std::tie(s0, s1) = std::pair{s1, s0 - quot * s1};
        }
        std::int64_t r = s0 % static_cast<std::int64_t>(q_);
        if (r < 0) r += q_;
        return static_cast<Symbol>(r);
    }

private:
    std::uint32_t q_;
};

class FqVector {
public:
    FqVector() = default;
    FqVector(std::uint32_t q, std::size_t length) : q_(q), entries_(length, 0) {}
    FqVector(std::uint32_t q, std::vector<Symbol> entries) : q_(q), entries_(std::move(entries)) {
        for (Symbol x : entries_)
            if (x >= q_) throw DimensionError("vector entry out of range for modulus " + std::to_string(q_));
    }

    std::uint32_t modulus() const { return q_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    Symbol operator[](std::size_t i) const { return entries_[i]; }
    Symbol& operator[](std::size_t i) { return entries_[i]; }

    std::span<const Symbol> entries() const { return entries_; }
    std::span<Symbol> entries() { return entries_; }

    bool is_zero() const {
        return std::all_of(entries_.begin(), entries_.end(), [](Symbol x) { return x == 0; });
    }

    friend bool operator==(const FqVector&, const FqVector&) = default;
    friend auto operator<=>(const FqVector& a, const FqVector& b) {
        return a.entries_ <=> b.entries_;
    }

private:
    std::uint32_t q_ = 2;
    std::vector<Symbol> entries_;
};

/// Row-major dense matrix.
class FqMatrix {
public:
    FqMatrix() = default;
    FqMatrix(std::uint32_t q, std::size_t rows, std::size_t cols)
        : q_(q), rows_(rows), cols_(cols), entries_(rows * cols, 0) {}
    FqMatrix(std::uint32_t q, std::size_t rows, std::size_t cols, std::vector<Symbol> entries)
        : q_(q), rows_(rows), cols_(cols), entries_(std::move(entries)) {
        if (entries_.size() != rows_ * cols_) throw DimensionError("matrix entry count does not match its shape");
        for (Symbol x : entries_)
            if (x >= q_) throw DimensionError("matrix entry out of range for modulus " + std::to_string(q_));
    }

    static FqMatrix identity(std::uint32_t q, std::size_t n) {
        FqMatrix m(q, n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
        return m;
    }

    std::uint32_t modulus() const { return q_; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Symbol operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }
    Symbol& operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }

    std::span<const Symbol> row(std::size_t r) const { return {entries_.data() + r * cols_, cols_}; }
    std::span<Symbol> row(std::size_t r) { return {entries_.data() + r * cols_, cols_}; }

    /// Copy of the rectangular block [r0, r0+nr) x [c0, c0+nc).
    FqMatrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
        FqMatrix out(q_, nr, nc);
        for (std::size_t r = 0; r < nr; ++r)
            for (std::size_t c = 0; c < nc; ++c) out(r, c) = (*this)(r0 + r, c0 + c);
        return out;
    }

    friend bool operator==(const FqMatrix&, const FqMatrix&) = default;

private:
    std::uint32_t q_ = 2;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Symbol> entries_;
};

/// Bijection on {0, ..., n-1}; applying it gathers: out[i] = in[images[i]].
class Permutation {
public:
    Permutation() = default;
    explicit Permutation(std::vector<std::size_t> images) : images_(std::move(images)) {
        std::vector<bool> seen(images_.size(), false);
        for (std::size_t x : images_) {
            if (x >= images_.size() || seen[x]) throw DimensionError("not a permutation");
            seen[x] = true;
        }
    }

    static Permutation identity(std::size_t n) {
        std::vector<std::size_t> v(n);
        std::iota(v.begin(), v.end(), std::size_t{0});
        return Permutation(std::move(v));
    }

    template <class Rng>
    static Permutation random(std::size_t n, Rng& rng) {
        std::vector<std::size_t> v(n);
        std::iota(v.begin(), v.end(), std::size_t{0});
        std::shuffle(v.begin(), v.end(), rng);
        Permutation p;
        p.images_ = std::move(v);
        return p;
    }

    std::size_t size() const { return images_.size(); }
    std::size_t operator[](std::size_t i) const { return images_[i]; }

    Permutation inverse() const {
        std::vector<std::size_t> inv(images_.size());
        for (std::size_t i = 0; i < images_.size(); ++i) inv[images_[i]] = i;
        Permutation p;
        p.images_ = std::move(inv);
        return p;
    }

    /// (this ∘ other): applying the result equals applying `this` then `other`.
    Permutation then(const Permutation& other) const {
        if (other.size() != size()) throw DimensionError("permutation sizes differ");
        std::vector<std::size_t> out(size());
        for (std::size_t i = 0; i < size(); ++i) out[i] = images_[other.images_[i]];
        Permutation p;
        p.images_ = std::move(out);
        return p;
    }

    friend bool operator==(const Permutation&, const Permutation&) = default;

private:
    std::vector<std::size_t> images_;
};

inline void require_same_modulus(std::uint32_t a, std::uint32_t b) {
    if (a != b) throw DimensionError("operands live in different fields");
}

inline FqVector add(const FqVector& a, const FqVector& b) {
    require_same_modulus(a.modulus(), b.modulus());
    if (a.size() != b.size()) throw DimensionError("vector lengths differ");
    const PrimeField f(a.modulus());
    FqVector out(a.modulus(), a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = f.add(a[i], b[i]);
    return out;
}

inline FqVector sub(const FqVector& a, const FqVector& b) {
    require_same_modulus(a.modulus(), b.modulus());
    if (a.size() != b.size()) throw DimensionError("vector lengths differ");
    const PrimeField f(a.modulus());
    FqVector out(a.modulus(), a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = f.sub(a[i], b[i]);
    return out;
}

inline FqVector scale(Symbol c, const FqVector& v) {
    const PrimeField f(v.modulus());
    FqVector out(v.modulus(), v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = f.mul(c, v[i]);
    return out;
}

inline FqVector mat_vec_mul(const FqMatrix& m, const FqVector& v) {
    require_same_modulus(m.modulus(), v.modulus());
    if (m.cols() != v.size()) throw DimensionError("matrix columns do not match vector length");
    const std::uint32_t q = m.modulus();
    FqVector out(q, m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        std::uint64_t acc = 0;
        auto row = m.row(r);
        for (std::size_t c = 0; c < m.cols(); ++c) acc += std::uint64_t{row[c]} * v[c];
        out[r] = static_cast<Symbol>(acc % q);
    }
    return out;
}

namespace detail {

// In-place forward elimination; returns the pivot count over the first `ncols` columns.
inline std::size_t eliminate(FqMatrix& m, std::size_t ncols, FqVector* rhs, bool stop_on_missing_pivot) {
    const PrimeField f(m.modulus());
    std::size_t pivot_row = 0;
    for (std::size_t c = 0; c < ncols && pivot_row < m.rows(); ++c) {
        std::size_t r = pivot_row;
        while (r < m.rows() && m(r, c) == 0) ++r;
        if (r == m.rows()) {
            if (stop_on_missing_pivot) return pivot_row;
            continue;
        }
        if (r != pivot_row) {
            std::swap_ranges(m.row(r).begin(), m.row(r).end(), m.row(pivot_row).begin());
            if (rhs) std::swap((*rhs)[r], (*rhs)[pivot_row]);
        }
        const Symbol inv = f.inv(m(pivot_row, c));
        for (Symbol& x : m.row(pivot_row)) x = f.mul(x, inv);
        if (rhs) (*rhs)[pivot_row] = f.mul((*rhs)[pivot_row], inv);
        for (std::size_t rr = 0; rr < m.rows(); ++rr) {
            if (rr == pivot_row || m(rr, c) == 0) continue;
            const Symbol factor = m(rr, c);
            auto dst = m.row(rr);
            auto src = m.row(pivot_row);
            for (std::size_t k = 0; k < m.cols(); ++k) dst[k] = f.sub(dst[k], f.mul(factor, src[k]));
            if (rhs) (*rhs)[rr] = f.sub((*rhs)[rr], f.mul(factor, (*rhs)[pivot_row]));
        }
        ++pivot_row;
    }
    return pivot_row;
}

}  // namespace detail

inline std::size_t rank(const FqMatrix& m) {
    (void)PrimeField{m.modulus()};
    FqMatrix work = m;
    return detail::eliminate(work, work.cols(), nullptr, false);
}

/// Uniform matrix conditioned on full row rank, by rejection.
template <class Rng>
FqMatrix random_full_rank_matrix(std::uint32_t q, std::size_t rows, std::size_t cols, Rng& rng) {
    (void)PrimeField{q};
    if (rows > cols) throw DimensionError("full row rank needs rows <= cols");
    std::uniform_int_distribution<std::uint32_t> sym(0, q - 1);
    for (;;) {
        FqMatrix m(q, rows, cols);
        for (std::size_t r = 0; r < rows; ++r)
            for (Symbol& x : m.row(r)) x = static_cast<Symbol>(sym(rng));
        if (rank(m) == rows) return m;
    }
}

/// Blocks of S·H = [[I, H'], [0, H'']] and (s', s'') = S·s.
struct PartialElimination {
    FqMatrix h_prime;   // (n-k-ell) x (k+ell)
    FqMatrix h_second;  // ell x (k+ell)
    FqVector s_prime;   // n-k-ell
    FqVector s_second;  // ell
};

/// Returns nullopt when the leading n-k-ell columns do not have full rank.
inline std::optional<PartialElimination> try_partial_gaussian_elim(const FqMatrix& h, std::size_t ell,
                                                                   const FqVector& s) {
    require_same_modulus(h.modulus(), s.modulus());
    if (s.size() != h.rows()) throw DimensionError("syndrome length must equal the number of rows");
    if (ell > h.rows()) throw DimensionError("ell exceeds n-k");
    const std::size_t r = h.rows() - ell;
    FqMatrix work = h;
    FqVector rhs = s;
    if (detail::eliminate(work, r, &rhs, true) < r) return std::nullopt;

    const std::size_t tail = h.cols() - r;
    PartialElimination out;
    out.h_prime = work.block(0, r, r, tail);
    out.h_second = work.block(r, r, ell, tail);
    out.s_prime = FqVector(h.modulus(), std::vector<Symbol>(rhs.entries().begin(), rhs.entries().begin() + r));
    out.s_second = FqVector(h.modulus(), std::vector<Symbol>(rhs.entries().begin() + r, rhs.entries().end()));
    return out;
}

inline PartialElimination partial_gaussian_elim(const FqMatrix& h, std::size_t ell, const FqVector& s) {
    auto out = try_partial_gaussian_elim(h, ell, s);
    if (!out) throw SingularTopLeft();
    return std::move(*out);
}

inline FqVector apply_permutation(const FqVector& v, const Permutation& perm) {
    if (v.size() != perm.size()) throw DimensionError("permutation size does not match vector length");
    FqVector out(v.modulus(), v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[perm[i]];
    return out;
}

/// Column gather: column i of the result is column perm[i] of m.
inline FqMatrix apply_permutation(const FqMatrix& m, const Permutation& perm) {
    if (m.cols() != perm.size()) throw DimensionError("permutation size does not match column count");
    FqMatrix out(m.modulus(), m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(r, perm[c]);
    return out;
}

}  // namespace leeisd
