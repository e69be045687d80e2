#pragma once

// Checkable multiple syndrome decoding (CMSD) back ends.
//
// Each builder takes the reduced system (H'', s'') with H'' of shape ell x N and a
// weight budget p, and returns an evaluable function f : [Y] -> F_q^N whose
// nonzero values solve H'' e'' = s'' with wt(e'') = p. Index k is 0-based here.

#include <leeisd/errors.hpp>
#include <leeisd/field.hpp>
#include <leeisd/merge.hpp>
#include <leeisd/sphere.hpp>
#include <leeisd/weight.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace leeisd {

enum class CmsdVariant { prange, dumer, wagner1, wagner2 };

inline std::string to_string(CmsdVariant v) {
    switch (v) {
        case CmsdVariant::prange: return "prange";
        case CmsdVariant::dumer: return "dumer";
        case CmsdVariant::wagner1: return "wagner1";
        case CmsdVariant::wagner2: return "wagner2";
    }
    return "?";
}

inline CmsdVariant parse_variant(const std::string& s) {
    if (s == "prange") return CmsdVariant::prange;
    if (s == "dumer") return CmsdVariant::dumer;
    if (s == "wagner1") return CmsdVariant::wagner1;
    if (s == "wagner2") return CmsdVariant::wagner2;
    throw InfeasibleParameters("unknown algorithm '" + s + "' (expected prange, dumer, wagner1 or wagner2)");
}

/// How the weight budget p is distributed over the support blocks of the base lists.
enum class SplitPolicy {
    balanced,          // one profile, block weights within one granule of each other
    all_compositions,  // every per-block weight profile summing to p, one merge tree each
};

struct CmsdOptions {
    std::size_t base_list_size = 0;  // 0: whole base spheres; otherwise a uniform random subset of this size
    std::size_t list_cap = kDefaultListCap;
    SplitPolicy split = SplitPolicy::all_compositions;
    std::size_t max_compositions = 4096;
    std::vector<std::size_t> merge_widths;  // |J_1..J_a|; empty chooses them from the base list size
};

/// Sizes observed while building a description; used by tests and the solver's loop budget.
struct CmsdStats {
    std::vector<std::size_t> base_sizes;                 // first tree, left to right
    std::vector<std::vector<std::size_t>> level_sizes;   // first tree, level 1..a
    std::vector<std::size_t> merge_widths;               // |J_j|
    std::size_t trees = 0;
    double expected_solutions = 0.0;
};

class CmsdFunction {
public:
    virtual ~CmsdFunction() = default;
    virtual std::uint64_t domain_size() const = 0;
    virtual FqVector evaluate(std::uint64_t k) const = 0;
};

class CmsdDescription {
public:
    CmsdDescription(std::shared_ptr<const CmsdFunction> impl, FqMatrix h, FqVector s, WeightFunction wf,
                    std::int64_t p_units, CmsdStats stats)
        : impl_(std::move(impl)), h_(std::move(h)), s_(std::move(s)), wf_(std::move(wf)), p_(p_units),
          stats_(std::move(stats)) {}

    std::uint64_t domain_size() const { return impl_->domain_size(); }

    /// f(k); the zero vector when index k yields no candidate.
    FqVector evaluate(std::uint64_t k) const {
        if (k >= domain_size()) throw std::out_of_range("CMSD index out of range");
        return impl_->evaluate(k);
    }

    /// H'' e = s'' and wt(e) = p.
    bool is_solution(const FqVector& e) const {
        return e.size() == h_.cols() && vector_weight_units(e, wf_) == p_ && mat_vec_mul(h_, e) == s_;
    }

    std::size_t length() const { return h_.cols(); }
    std::int64_t weight_budget() const { return p_; }
    const CmsdStats& stats() const { return stats_; }

private:
    std::shared_ptr<const CmsdFunction> impl_;
    FqMatrix h_;
    FqVector s_;
    WeightFunction wf_;
    std::int64_t p_;
    CmsdStats stats_;
};

struct CmsdEnumeration {
    std::vector<FqVector> solutions;  // every f(k) passing the predicate, in index order
    std::size_t distinct = 0;         // observed Z
};

inline CmsdEnumeration enumerate_f(const CmsdDescription& desc) {
    CmsdEnumeration out;
    std::set<FqVector> seen;
    for (std::uint64_t k = 0; k < desc.domain_size(); ++k) {
        FqVector e = desc.evaluate(k);
        if (!desc.is_solution(e)) continue;
        seen.insert(e);
        out.solutions.push_back(std::move(e));
    }
    out.distinct = seen.size();
    return out;
}

namespace detail {

struct Block {
    std::size_t offset = 0;
    std::size_t length = 0;
};

// Lengths differ by at most one; the longer blocks come first.
inline std::vector<Block> split_blocks(std::size_t n, std::size_t parts) {
    std::vector<Block> out(parts);
    std::size_t off = 0;
    for (std::size_t i = 0; i < parts; ++i) {
        out[i].offset = off;
        out[i].length = n / parts + (i < n % parts ? 1 : 0);
        off += out[i].length;
    }
    return out;
}

// Balanced split of a weight budget in granules, extra granules to the left.
inline std::vector<std::int64_t> split_weight(std::int64_t p_units, std::int64_t granule, std::size_t parts) {
    const std::int64_t g = p_units / granule;
    std::vector<std::int64_t> out(parts);
    for (std::size_t i = 0; i < parts; ++i)
        out[i] = (g / static_cast<std::int64_t>(parts) + (static_cast<std::int64_t>(i) < g % static_cast<std::int64_t>(parts) ? 1 : 0)) * granule;
    return out;
}

// reach[len][w]: some vector of this length has weight w.
class Reachability {
public:
    Reachability(const WeightFunction& wf, std::size_t n)
        : width_(n * static_cast<std::size_t>(wf.max_units()) + 1), n_(n), table_((n + 1) * width_, false) {
        table_[0] = true;
        for (std::size_t len = 1; len <= n; ++len)
            for (std::size_t w = 0; w < width_; ++w)
                for (std::int64_t u : wf.unit_table())
                    if (static_cast<std::size_t>(u) <= w && table_[(len - 1) * width_ + w - static_cast<std::size_t>(u)]) {
                        table_[len * width_ + w] = true;
                        break;
                    }
    }
    bool operator()(std::size_t len, std::int64_t w) const {
        return len <= n_ && w >= 0 && static_cast<std::size_t>(w) < width_ && table_[len * width_ + static_cast<std::size_t>(w)];
    }

private:
    std::size_t width_;
    std::size_t n_;
    std::vector<bool> table_;
};

// Every vector of the sphere, in lexicographic order.
inline void enumerate_sphere(const WeightFunction& wf, const Reachability& reach, std::size_t len, std::int64_t w,
                             const std::function<void(const std::vector<Symbol>&)>& emit) {
    std::vector<Symbol> cur(len, 0);
    std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t i, std::int64_t budget) {
        if (i == len) {
            if (budget == 0) emit(cur);
            return;
        }
        for (std::uint32_t x = 0; x < wf.q(); ++x) {
            const std::int64_t u = wf.units(static_cast<Symbol>(x));
            if (!reach(len - i - 1, budget - u)) continue;
            cur[i] = static_cast<Symbol>(x);
            rec(i + 1, budget - u);
        }
        cur[i] = 0;
    };
    if (reach(len, w)) rec(0, w);
}

// Syndrome contribution H''[:, offset .. offset+len) · b.
inline void block_syndrome(const FqMatrix& h, std::size_t offset, std::span<const Symbol> b, std::vector<Symbol>& out) {
    const std::uint32_t q = h.modulus();
    out.assign(h.rows(), 0);
    for (std::size_t r = 0; r < h.rows(); ++r) {
        std::uint64_t acc = 0;
        auto row = h.row(r);
        for (std::size_t c = 0; c < b.size(); ++c) acc += std::uint64_t{row[offset + c]} * b[c];
        out[r] = static_cast<Symbol>(acc % q);
    }
}

// Base list: the chosen sphere preimages on one block and their syndromes.
struct BaseList {
    Block block;
    std::int64_t weight = 0;
    std::vector<Symbol> preimages;  // size() x block.length, flat
    IndexedList syndromes;

    std::size_t size() const { return syndromes.size(); }
    std::span<const Symbol> preimage(std::size_t i) const {
        return {preimages.data() + i * block.length, block.length};
    }
};

// Chooses `target` distinct sphere members uniformly (all of them when target >= count).
template <class Rng>
std::vector<std::vector<Symbol>> choose_sphere_members(const WeightFunction& wf, const Reachability& reach,
                                                       const SphereTable& table, std::size_t len, std::int64_t w,
                                                       std::size_t target, Rng& rng) {
    std::vector<std::vector<Symbol>> out;
    const BigInt& count = table.count(len, w);
    if (count.is_zero()) return out;
    const bool take_all = target == 0 || count <= target;
    if (take_all || count <= BigInt(4) * target) {
        enumerate_sphere(wf, reach, len, w, [&](const std::vector<Symbol>& v) { out.push_back(v); });
        if (!take_all) {
            // partial Fisher-Yates, then restore lexicographic order
            for (std::size_t i = 0; i < target; ++i) {
                std::uniform_int_distribution<std::size_t> pick(i, out.size() - 1);
                std::swap(out[i], out[pick(rng)]);
            }
            out.resize(target);
            std::sort(out.begin(), out.end());
        }
        return out;
    }
    std::set<BigInt> ranks;
    while (ranks.size() < target) ranks.insert(uniform_below(count, rng));
    for (const BigInt& r : ranks) {
        FqVector v = table.unrank(len, w, r);
        out.emplace_back(v.entries().begin(), v.entries().end());
    }
    return out;
}

template <class Rng>
std::shared_ptr<const BaseList> build_base_list(const FqMatrix& h, const WeightFunction& wf, const Reachability& reach,
                                                const SphereTable& table, Block block, std::int64_t w,
                                                const CmsdOptions& opts, Rng& rng) {
    auto members = choose_sphere_members(wf, reach, table, block.length, w, opts.base_list_size, rng);
    if (members.size() > opts.list_cap)
        throw CapExceeded("base list of " + std::to_string(members.size()) + " entries exceeds cap");
    auto out = std::make_shared<BaseList>();
    out->block = block;
    out->weight = w;
    out->syndromes = IndexedList(h.modulus(), h.rows());
    out->syndromes.reserve(members.size());
    out->preimages.reserve(members.size() * block.length);
    std::vector<Symbol> syn;
    for (std::size_t i = 0; i < members.size(); ++i) {
        block_syndrome(h, block.offset, members[i], syn);
        out->syndromes.push_back(std::span<const Symbol>(syn), Backref{static_cast<std::uint32_t>(i), 0});
        out->preimages.insert(out->preimages.end(), members[i].begin(), members[i].end());
    }
    return out;
}

// |J_1| .. |J_a| partitioning the ell syndrome coordinates.
inline std::vector<std::size_t> choose_merge_widths(std::size_t ell, std::size_t levels, double base_size, std::uint32_t q,
                                                    const std::vector<std::size_t>& requested) {
    if (!requested.empty()) {
        if (requested.size() != levels) throw InfeasibleParameters("need one merge width per level");
        std::size_t total = 0;
        for (std::size_t w : requested) total += w;
        if (total != ell) throw InfeasibleParameters("merge widths must sum to ell");
        return requested;
    }
    std::vector<std::size_t> out(levels, 0);
    const double log_size = base_size > 1 ? std::log(base_size) / std::log(static_cast<double>(q)) : 0.0;
    const auto per_level = std::min<std::size_t>(static_cast<std::size_t>(std::llround(log_size)), ell / levels);
    std::size_t used = 0;
    for (std::size_t j = 0; j + 1 < levels; ++j) {
        out[j] = per_level;
        used += per_level;
    }
    out[levels - 1] = ell - used;
    return out;
}

inline std::vector<std::vector<std::size_t>> coordinate_sets(const std::vector<std::size_t>& widths) {
    std::vector<std::vector<std::size_t>> out;
    std::size_t next = 0;
    for (std::size_t w : widths) {
        std::vector<std::size_t> j(w);
        std::iota(j.begin(), j.end(), next);
        next += w;
        out.push_back(std::move(j));
    }
    return out;
}

// Targets t_j^i for every internal node: uniform on J_j except the last node of each
// level, which absorbs the remainder so that sum_i t_j^i = s on J_j.
template <class Rng>
std::vector<std::vector<FqVector>> draw_targets(const FqVector& s, const std::vector<std::vector<std::size_t>>& coords,
                                                std::size_t levels, Rng& rng) {
    const std::uint32_t q = s.modulus();
    std::uniform_int_distribution<std::uint32_t> sym(0, q - 1);
    std::vector<std::vector<FqVector>> out(levels + 1);
    for (std::size_t j = 1; j <= levels; ++j) {
        const std::size_t nodes = std::size_t{1} << (levels - j);
        out[j].assign(nodes, FqVector(q, s.size()));
        for (std::size_t c : coords[j - 1]) {
            std::uint32_t acc = 0;
            for (std::size_t i = 0; i + 1 < nodes; ++i) {
                const auto v = static_cast<Symbol>(sym(rng));
                out[j][i][c] = v;
                acc = (acc + v) % q;
            }
            out[j][nodes - 1][c] = static_cast<Symbol>((s[c] + q - acc) % q);
        }
    }
    return out;
}

// All weight profiles (in granules) over the blocks with nonempty spheres.
inline std::vector<std::vector<std::int64_t>> weight_compositions(std::int64_t p_units, std::int64_t granule,
                                                                  const std::vector<Block>& blocks,
                                                                  const Reachability& reach, std::size_t limit) {
    std::vector<std::vector<std::int64_t>> out;
    std::vector<std::int64_t> cur(blocks.size());
    std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t i, std::int64_t left) {
        if (i + 1 == blocks.size()) {
            if (!reach(blocks[i].length, left)) return;
            cur[i] = left;
            out.push_back(cur);
            if (out.size() > limit)
                throw InfeasibleParameters("too many weight profiles; use the balanced split policy");
            return;
        }
        for (std::int64_t w = 0; w <= left; w += granule) {
            if (!reach(blocks[i].length, w)) continue;
            cur[i] = w;
            rec(i + 1, left - w);
        }
    };
    rec(0, p_units);
    return out;
}

inline std::int64_t checked_granule(const WeightFunction& wf, std::int64_t p_units) {
    if (p_units < 0) throw InfeasibleParameters("weight budget must be nonnegative");
    const std::int64_t g = wf.granularity();
    if (p_units % g != 0) throw InfeasibleParameters("weight budget is not a multiple of the table granularity");
    return g;
}

class PrangeFunction final : public CmsdFunction {
public:
    PrangeFunction(std::uint32_t q, std::size_t n) : zero_(q, n) {}
    std::uint64_t domain_size() const override { return 1; }
    FqVector evaluate(std::uint64_t) const override { return zero_; }

private:
    FqVector zero_;
};

// One merge tree over 2^a base lists.
struct MergeTree {
    std::vector<std::shared_ptr<const BaseList>> leaves;
    std::vector<std::vector<IndexedList>> levels;  // levels[j-1] holds the nodes of level j

    const IndexedList& node(std::size_t level, std::size_t index) const {
        return level == 0 ? leaves[index]->syndromes : levels[level - 1][index];
    }

    void place(std::size_t level, std::size_t index, std::size_t entry, FqVector& out) const {
        if (level == 0) {
            const BaseList& leaf = *leaves[index];
            auto b = leaf.preimage(entry);
            std::copy(b.begin(), b.end(), out.entries().begin() + static_cast<std::ptrdiff_t>(leaf.block.offset));
            return;
        }
        const Backref ref = levels[level - 1][index].backref(entry);
        place(level - 1, 2 * index, ref.left, out);
        place(level - 1, 2 * index + 1, ref.right, out);
    }
};

class WagnerV1Function final : public CmsdFunction {
public:
    WagnerV1Function(std::uint32_t q, std::size_t n, std::vector<MergeTree> trees)
        : q_(q), n_(n), trees_(std::move(trees)) {
        std::uint64_t acc = 0;
        for (const auto& t : trees_) {
            offsets_.push_back(acc);
            acc += t.levels.empty() ? t.leaves[0]->size() : t.levels.back()[0].size();
        }
        total_ = acc;
    }

    std::uint64_t domain_size() const override { return total_; }

    FqVector evaluate(std::uint64_t k) const override {
        const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), k);
        const std::size_t t = static_cast<std::size_t>(it - offsets_.begin()) - 1;
        FqVector out(q_, n_);
        const MergeTree& tree = trees_[t];
        tree.place(tree.levels.size(), 0, static_cast<std::size_t>(k - offsets_[t]), out);
        return out;
    }

private:
    std::uint32_t q_;
    std::size_t n_;
    std::vector<MergeTree> trees_;
    std::vector<std::uint64_t> offsets_;
    std::uint64_t total_ = 0;
};

}  // namespace detail

/// Prange: ell = 0 and p = 0, so f(1) = 0 trivially solves the empty system.
inline CmsdDescription cmsd_prange(const FqMatrix& h_second, const FqVector& s_second, const WeightFunction& wf,
                                   std::int64_t p_units) {
    if (h_second.rows() != 0 || p_units != 0) throw InfeasibleParameters("Prange back end needs ell = 0 and p = 0");
    CmsdStats stats;
    stats.expected_solutions = 1.0;
    stats.trees = 1;
    return CmsdDescription(std::make_shared<detail::PrangeFunction>(h_second.modulus(), h_second.cols()), h_second,
                           s_second, wf, p_units, std::move(stats));
}

/// Wagner's k-tree on a levels: 2^a base lists over disjoint support blocks, merged pairwise
/// on J_1, ..., J_a with random targets whose per-level sums equal s''.
template <class Rng>
CmsdDescription cmsd_wagner_v1(const FqMatrix& h_second, const FqVector& s_second, const WeightFunction& wf,
                               std::int64_t p_units, std::size_t a, const CmsdOptions& opts, Rng& rng) {
    require_same_modulus(h_second.modulus(), s_second.modulus());
    require_same_modulus(h_second.modulus(), wf.q());
    if (s_second.size() != h_second.rows()) throw DimensionError("s'' length must equal the rows of H''");
    if (a < 1 || a > 16) throw InfeasibleParameters("number of levels must be in [1, 16]");
    const std::size_t n = h_second.cols();
    const std::size_t ell = h_second.rows();
    const std::size_t leaves = std::size_t{1} << a;
    if (n < leaves) throw InfeasibleParameters("need at least 2^a support coordinates");
    const std::int64_t granule = detail::checked_granule(wf, p_units);

    const auto blocks = detail::split_blocks(n, leaves);
    const detail::Reachability reach(wf, blocks.front().length);
    const SphereTable table(wf, blocks.front().length);

    std::vector<std::vector<std::int64_t>> profiles;
    const auto balanced = detail::split_weight(p_units, granule, leaves);
    if (opts.split == SplitPolicy::balanced) {
        for (std::size_t i = 0; i < leaves; ++i)
            if (!reach(blocks[i].length, balanced[i]))
                throw InfeasibleParameters("per-block weight is not achievable on its block");
        profiles.push_back(balanced);
    } else {
        profiles = detail::weight_compositions(p_units, granule, blocks, reach, opts.max_compositions);
    }

    double typical = table.count(blocks.front().length, balanced.front()).convert_to<double>();
    if (opts.base_list_size > 0) typical = std::min(typical, static_cast<double>(opts.base_list_size));
    const auto widths = detail::choose_merge_widths(ell, a, typical, h_second.modulus(), opts.merge_widths);
    const auto coords = detail::coordinate_sets(widths);
    const double q = h_second.modulus();

    std::map<std::pair<std::size_t, std::int64_t>, std::shared_ptr<const detail::BaseList>> cache;
    std::vector<detail::MergeTree> trees;
    CmsdStats stats;
    stats.merge_widths = widths;
    for (const auto& profile : profiles) {
        detail::MergeTree tree;
        std::vector<double> expected;
        for (std::size_t i = 0; i < leaves; ++i) {
            auto key = std::pair{i, profile[i]};
            auto it = cache.find(key);
            if (it == cache.end())
                it = cache.emplace(key, detail::build_base_list(h_second, wf, reach, table, blocks[i], profile[i], opts, rng)).first;
            tree.leaves.push_back(it->second);
            expected.push_back(static_cast<double>(it->second->size()));
        }
        const auto targets = detail::draw_targets(s_second, coords, a, rng);
        for (std::size_t j = 1; j <= a; ++j) {
            const std::size_t nodes = leaves >> j;
            std::vector<IndexedList> level;
            std::vector<double> next_expected;
            for (std::size_t i = 0; i < nodes; ++i) {
                level.push_back(merge(tree.node(j - 1, 2 * i), tree.node(j - 1, 2 * i + 1), coords[j - 1],
                                      targets[j][i], opts.list_cap));
                next_expected.push_back(expected[2 * i] * expected[2 * i + 1] / std::pow(q, static_cast<double>(widths[j - 1])));
            }
            tree.levels.push_back(std::move(level));
            expected = std::move(next_expected);
        }
        stats.expected_solutions += expected[0];
        if (trees.empty()) {
            for (const auto& leaf : tree.leaves) stats.base_sizes.push_back(leaf->size());
            for (const auto& level : tree.levels) {
                std::vector<std::size_t> sizes;
                for (const auto& node : level) sizes.push_back(node.size());
                stats.level_sizes.push_back(std::move(sizes));
            }
        }
        trees.push_back(std::move(tree));
    }
    stats.trees = trees.size();
    return CmsdDescription(std::make_shared<detail::WagnerV1Function>(h_second.modulus(), n, std::move(trees)),
                           h_second, s_second, wf, p_units, std::move(stats));
}

/// Birthday (Stern/Dumer) back end: the one-level k-tree, merging two half-support lists on all of s''.
template <class Rng>
CmsdDescription cmsd_dumer(const FqMatrix& h_second, const FqVector& s_second, const WeightFunction& wf,
                           std::int64_t p_units, const CmsdOptions& opts, Rng& rng) {
    return cmsd_wagner_v1(h_second, s_second, wf, p_units, 1, opts, rng);
}

namespace detail {

// The unmaterialized rightmost list plus the sorted left siblings of its merge path.
class WagnerV2Function final : public CmsdFunction {
public:
    struct Sibling {
        IndexedList list;                 // sorted on `coords`, ties by preimage
        std::vector<Symbol> preimages;    // list.size() x n, flat
        std::vector<std::size_t> coords;  // J_j
        FqVector target;                  // target of the merged spine node on J_j
    };

    WagnerV2Function(FqMatrix h, std::size_t n, Block last_block, std::int64_t last_weight,
                     std::shared_ptr<const SphereTable> table, std::uint64_t domain, std::vector<BigInt> ranks,
                     std::vector<Sibling> siblings)
        : h_(std::move(h)), n_(n), last_block_(last_block), last_weight_(last_weight), table_(std::move(table)),
          domain_(domain), ranks_(std::move(ranks)), siblings_(std::move(siblings)) {}

    std::uint64_t domain_size() const override { return domain_; }

    FqVector evaluate(std::uint64_t k) const override {
        const std::uint32_t q = h_.modulus();
        FqVector out(q, n_);
        const BigInt rank = ranks_.empty() ? BigInt(k) : ranks_[static_cast<std::size_t>(k)];
        const FqVector tail = table_->unrank(last_block_.length, last_weight_, rank);
        std::vector<Symbol> acc;
        block_syndrome(h_, last_block_.offset, tail.entries(), acc);

        std::vector<std::size_t> chosen;
        std::vector<Symbol> key;
        for (const Sibling& sib : siblings_) {
            key.resize(sib.coords.size());
            for (std::size_t i = 0; i < sib.coords.size(); ++i) {
                const std::size_t c = sib.coords[i];
                key[i] = static_cast<Symbol>((sib.target[c] + q - acc[c]) % q);
            }
            const auto [lo, hi] = equal_block(sib.list, sib.coords, key);
            if (lo == hi) return FqVector(q, n_);
            auto x = sib.list.syndrome(lo);
            for (std::size_t c = 0; c < acc.size(); ++c) acc[c] = static_cast<Symbol>((acc[c] + x[c]) % q);
            chosen.push_back(lo);
        }
        std::copy(tail.entries().begin(), tail.entries().end(),
                  out.entries().begin() + static_cast<std::ptrdiff_t>(last_block_.offset));
        for (std::size_t j = 0; j < siblings_.size(); ++j) {
            const Symbol* pre = siblings_[j].preimages.data() + chosen[j] * n_;
            for (std::size_t c = 0; c < n_; ++c)
                if (pre[c] != 0) out[c] = pre[c];
        }
        return out;
    }

private:
    FqMatrix h_;
    std::size_t n_;
    Block last_block_;
    std::int64_t last_weight_;
    std::shared_ptr<const SphereTable> table_;
    std::uint64_t domain_;
    std::vector<BigInt> ranks_;
    std::vector<Sibling> siblings_;
};

}  // namespace detail

/// Second k-tree variant: 2^a - 1 base lists on single blocks and one rightmost list on a
/// double block that is never stored. f(k) generates the k-th member of that list and walks
/// the sorted left siblings level by level, taking the first match in lexicographic order.
template <class Rng>
CmsdDescription cmsd_wagner_v2_build(const FqMatrix& h_second, const FqVector& s_second, const WeightFunction& wf,
                                     std::int64_t p_units, std::size_t a, const CmsdOptions& opts, Rng& rng) {
    require_same_modulus(h_second.modulus(), s_second.modulus());
    require_same_modulus(h_second.modulus(), wf.q());
    if (s_second.size() != h_second.rows()) throw DimensionError("s'' length must equal the rows of H''");
    if (a < 1 || a > 16) throw InfeasibleParameters("number of levels must be in [1, 16]");
    const std::size_t n = h_second.cols();
    const std::size_t ell = h_second.rows();
    const std::size_t leaves = std::size_t{1} << a;
    const std::size_t unit_blocks = leaves + 1;
    if (n < unit_blocks) throw InfeasibleParameters("need at least 2^a + 1 support coordinates");
    const std::int64_t granule = detail::checked_granule(wf, p_units);

    const auto units = detail::split_blocks(n, unit_blocks);
    const auto unit_weights = detail::split_weight(p_units, granule, unit_blocks);
    std::vector<detail::Block> blocks(units.begin(), units.begin() + static_cast<std::ptrdiff_t>(leaves - 1));
    std::vector<std::int64_t> weights(unit_weights.begin(), unit_weights.begin() + static_cast<std::ptrdiff_t>(leaves - 1));
    const detail::Block last{units[leaves - 1].offset, units[leaves - 1].length + units[leaves].length};
    const std::int64_t last_weight = unit_weights[leaves - 1] + unit_weights[leaves];

    const detail::Reachability reach(wf, last.length);
    auto table = std::make_shared<const SphereTable>(wf, last.length);
    for (std::size_t i = 0; i + 1 < leaves; ++i)
        if (!reach(blocks[i].length, weights[i])) throw InfeasibleParameters("per-block weight is not achievable on its block");
    if (!reach(last.length, last_weight)) throw InfeasibleParameters("rightmost block weight is not achievable");

    double typical = table->count(blocks.front().length, weights.front()).convert_to<double>();
    if (opts.base_list_size > 0) typical = std::min(typical, static_cast<double>(opts.base_list_size));
    const auto widths = detail::choose_merge_widths(ell, a, typical, h_second.modulus(), opts.merge_widths);
    const auto coords = detail::coordinate_sets(widths);
    const auto targets = detail::draw_targets(s_second, coords, a, rng);
    const double q = h_second.modulus();

    // the rightmost list: quadratically larger than the others when subsampled
    const BigInt& full = table->count(last.length, last_weight);
    BigInt want = full;
    if (opts.base_list_size > 0) want = std::min(full, BigInt(opts.base_list_size) * opts.base_list_size);
    if (want > opts.list_cap) throw CapExceeded("rightmost list exceeds cap");
    const auto domain = want.convert_to<std::uint64_t>();
    std::vector<BigInt> ranks;
    if (want < full) {
        std::set<BigInt> picked;
        while (picked.size() < domain) picked.insert(uniform_below(full, rng));
        ranks.assign(picked.begin(), picked.end());
    }

    // all nodes off the rightmost path, level by level
    detail::MergeTree tree;
    CmsdStats stats;
    stats.merge_widths = widths;
    std::vector<double> expected;
    for (std::size_t i = 0; i + 1 < leaves; ++i) {
        tree.leaves.push_back(detail::build_base_list(h_second, wf, reach, *table, blocks[i], weights[i], opts, rng));
        stats.base_sizes.push_back(tree.leaves.back()->size());
        expected.push_back(static_cast<double>(tree.leaves.back()->size()));
    }
    stats.base_sizes.push_back(static_cast<std::size_t>(domain));
    for (std::size_t j = 1; j < a; ++j) {
        const std::size_t nodes = (leaves >> j) - 1;
        std::vector<IndexedList> level;
        std::vector<std::size_t> sizes;
        std::vector<double> next_expected;
        for (std::size_t i = 0; i < nodes; ++i) {
            level.push_back(merge(tree.node(j - 1, 2 * i), tree.node(j - 1, 2 * i + 1), coords[j - 1], targets[j][i], opts.list_cap));
            sizes.push_back(level.back().size());
            next_expected.push_back(expected[2 * i] * expected[2 * i + 1] / std::pow(q, static_cast<double>(widths[j - 1])));
        }
        tree.levels.push_back(std::move(level));
        stats.level_sizes.push_back(std::move(sizes));
        expected = std::move(next_expected);
    }

    std::vector<detail::WagnerV2Function::Sibling> siblings;
    double z = static_cast<double>(domain);
    for (std::size_t j = 1; j <= a; ++j) {
        const std::size_t level = j - 1;
        const std::size_t index = (leaves >> level) - 2;
        const IndexedList& node = tree.node(level, index);
        detail::WagnerV2Function::Sibling sib;
        sib.coords = coords[j - 1];
        sib.target = targets[j][(leaves >> j) - 1];

        std::vector<std::vector<Symbol>> pre(node.size());
        for (std::size_t e = 0; e < node.size(); ++e) {
            FqVector v(h_second.modulus(), n);
            tree.place(level, index, e, v);
            pre[e].assign(v.entries().begin(), v.entries().end());
        }
        std::vector<std::size_t> order(node.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
            auto sx = node.syndrome(x), sy = node.syndrome(y);
            for (std::size_t c : sib.coords)
                if (sx[c] != sy[c]) return sx[c] < sy[c];
            return pre[x] < pre[y];
        });
        sib.list = IndexedList(h_second.modulus(), ell);
        sib.list.reserve(node.size());
        sib.preimages.reserve(node.size() * n);
        for (std::size_t e : order) {
            sib.list.push_back(node.syndrome(e), node.backref(e));
            sib.preimages.insert(sib.preimages.end(), pre[e].begin(), pre[e].end());
        }
        const double level_size = level == 0 ? static_cast<double>(node.size()) : expected[index];
        z *= std::min(1.0, level_size / std::pow(q, static_cast<double>(widths[j - 1])));
        siblings.push_back(std::move(sib));
    }
    stats.expected_solutions = z;
    stats.trees = 1;
    return CmsdDescription(std::make_shared<detail::WagnerV2Function>(h_second, n, last, last_weight, table, domain,
                                                                      std::move(ranks), std::move(siblings)),
                           h_second, s_second, wf, p_units, std::move(stats));
}

}  // namespace leeisd
