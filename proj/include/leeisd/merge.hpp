#pragma once

// Sort-and-match join of syndrome lists: L1 ⋈_J^t L2 = {x + y : x_J + y_J = t_J}.

#include <leeisd/errors.hpp>
#include <leeisd/field.hpp>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace leeisd {

/// Indices of the two entries (in the left and right input lists) a merged entry came from.
struct Backref {
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    friend bool operator==(const Backref&, const Backref&) = default;
};

inline constexpr std::size_t kDefaultListCap = std::size_t{1} << 26;

/// A list of syndrome-space vectors in F_q^m, stored flat, each with a backref payload.
class IndexedList {
public:
    IndexedList() = default;
    IndexedList(std::uint32_t q, std::size_t m) : q_(q), m_(m) {}

    std::uint32_t modulus() const { return q_; }
    std::size_t width() const { return m_; }
    std::size_t size() const { return m_ == 0 ? refs_.size() : data_.size() / m_; }
    bool empty() const { return size() == 0; }

    void push_back(std::span<const Symbol> syndrome, Backref ref = {}) {
        if (syndrome.size() != m_) throw DimensionError("syndrome length differs from list width");
        data_.insert(data_.end(), syndrome.begin(), syndrome.end());
        refs_.push_back(ref);
        sorted_on_.reset();
    }

    void push_back(const FqVector& syndrome, Backref ref = {}) {
        require_same_modulus(q_, syndrome.modulus());
        push_back(syndrome.entries(), ref);
    }

    std::span<const Symbol> syndrome(std::size_t i) const { return {data_.data() + i * m_, m_}; }
    FqVector vector(std::size_t i) const {
        auto s = syndrome(i);
        return FqVector(q_, std::vector<Symbol>(s.begin(), s.end()));
    }
    Backref backref(std::size_t i) const { return refs_[i]; }

    /// Coordinates the entries are currently ordered on, if any.
    const std::optional<std::vector<std::size_t>>& sorted_on() const { return sorted_on_; }

    /// Stable sort on the projection to coords (ascending coordinate order of J).
    void sort_on(const std::vector<std::size_t>& coords) {
        std::vector<std::size_t> order(size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            for (std::size_t c : coords) {
                const Symbol x = data_[a * m_ + c], y = data_[b * m_ + c];
                if (x != y) return x < y;
            }
            return false;
        });
        reorder(order);
        sorted_on_ = coords;
    }

    void reorder(const std::vector<std::size_t>& order) {
        std::vector<Symbol> data(data_.size());
        std::vector<Backref> refs(refs_.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(order[i] * m_), m_,
                        data.begin() + static_cast<std::ptrdiff_t>(i * m_));
            refs[i] = refs_[order[i]];
        }
        data_ = std::move(data);
        refs_ = std::move(refs);
        sorted_on_.reset();
    }

    void reserve(std::size_t n) {
        data_.reserve(n * m_);
        refs_.reserve(n);
    }

private:
    std::uint32_t q_ = 2;
    std::size_t m_ = 0;
    std::vector<Symbol> data_;
    std::vector<Backref> refs_;
    std::optional<std::vector<std::size_t>> sorted_on_;
};

namespace detail {

inline void check_coords(const std::vector<std::size_t>& coords, std::size_t m) {
    for (std::size_t i = 0; i < coords.size(); ++i) {
        if (coords[i] >= m) throw DimensionError("merge coordinate " + std::to_string(coords[i]) + " out of range");
        if (i > 0 && coords[i] <= coords[i - 1]) throw DimensionError("merge coordinates must be strictly ascending");
    }
}

// Lexicographic compare of an entry's J-projection against a key of length |J|.
inline int compare_projection(std::span<const Symbol> entry, const std::vector<std::size_t>& coords,
                              std::span<const Symbol> key) {
    for (std::size_t i = 0; i < coords.size(); ++i) {
        const Symbol x = entry[coords[i]];
        if (x != key[i]) return x < key[i] ? -1 : 1;
    }
    return 0;
}

}  // namespace detail

/// Half-open range of entries in `sorted` (already sorted on coords) whose projection equals key.
inline std::pair<std::size_t, std::size_t> equal_block(const IndexedList& sorted, const std::vector<std::size_t>& coords,
                                                       std::span<const Symbol> key) {
    std::size_t lo = 0, hi = sorted.size();
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (detail::compare_projection(sorted.syndrome(mid), coords, key) < 0)
            lo = mid + 1;
        else
            hi = mid;
    }
    std::size_t end = lo;
    while (end < sorted.size() && detail::compare_projection(sorted.syndrome(end), coords, key) == 0) ++end;
    return {lo, end};
}

/// L1 ⋈_J^t L2. `target` has full width m; only its J coordinates are read.
/// Backrefs of the output index into `left` and `right` as given (not as sorted).
inline IndexedList merge(const IndexedList& left, const IndexedList& right, const std::vector<std::size_t>& coords,
                         const FqVector& target, std::size_t cap = kDefaultListCap) {
    if (left.width() != right.width()) throw DimensionError("merged lists have different widths");
    require_same_modulus(left.modulus(), right.modulus());
    require_same_modulus(left.modulus(), target.modulus());
    if (target.size() != left.width()) throw DimensionError("merge target length differs from list width");
    detail::check_coords(coords, left.width());

    const std::uint32_t q = left.modulus();
    const std::size_t m = left.width();
    IndexedList out(q, m);
    if (left.empty() || right.empty()) return out;

    // sort an index over `left` on J
    std::vector<std::uint32_t> order(left.size());
    std::iota(order.begin(), order.end(), 0u);
    if (!(left.sorted_on() && *left.sorted_on() == coords)) {
        std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            auto x = left.syndrome(a), y = left.syndrome(b);
            for (std::size_t c : coords)
                if (x[c] != y[c]) return x[c] < y[c];
            return false;
        });
    }

    std::vector<Symbol> key(coords.size());
    std::vector<Symbol> sum(m);
    for (std::size_t j = 0; j < right.size(); ++j) {
        auto y = right.syndrome(j);
        for (std::size_t i = 0; i < coords.size(); ++i)
            key[i] = static_cast<Symbol>((target[coords[i]] + q - y[coords[i]]) % q);
        auto first = std::partition_point(order.begin(), order.end(), [&](std::uint32_t idx) {
            return detail::compare_projection(left.syndrome(idx), coords, key) < 0;
        });
        for (auto it = first; it != order.end(); ++it) {
            auto x = left.syndrome(*it);
            if (detail::compare_projection(x, coords, key) != 0) break;
            if (out.size() >= cap) throw CapExceeded("merged list exceeds cap of " + std::to_string(cap) + " entries");
            for (std::size_t c = 0; c < m; ++c) sum[c] = static_cast<Symbol>((x[c] + y[c]) % q);
            out.push_back(std::span<const Symbol>(sum), Backref{*it, static_cast<std::uint32_t>(j)});
        }
    }
    return out;
}

}  // namespace leeisd
