#pragma once

// Asymptotic work-factor exponents of ISD with k-tree CMSD back ends.
//
// Every quantity is a per-n exponent in base q: T = q^{n (alpha_q + o(1))}.
// L = ell/n and P = p/n are the relative framework parameters.

#include <leeisd/errors.hpp>
#include <leeisd/sphere.hpp>
#include <leeisd/weight.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <string>
#include <thread>
#include <vector>

namespace leeisd {

enum class Model { classical, quantum };
enum class Algorithm { prange, dumer, wagner };

inline std::string to_string(Model m) { return m == Model::classical ? "classical" : "quantum"; }

inline std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::prange: return "prange";
        case Algorithm::dumer: return "dumer";
        case Algorithm::wagner: return "wagner";
    }
    return "?";
}

inline Model parse_model(const std::string& s) {
    if (s == "classical") return Model::classical;
    if (s == "quantum") return Model::quantum;
    throw InfeasibleParameters("unknown model '" + s + "' (expected classical or quantum)");
}

inline Algorithm parse_algorithm(const std::string& s) {
    if (s == "prange") return Algorithm::prange;
    if (s == "dumer") return Algorithm::dumer;
    if (s == "wagner") return Algorithm::wagner;
    throw InfeasibleParameters("unknown algorithm '" + s + "' (expected prange, dumer or wagner)");
}

class CodeParams {
public:
    CodeParams(const WeightFunction& wf, double rate, double omega) : sphere_(wf), R(rate), omega(omega) {
        if (!(rate > 0.0 && rate < 1.0)) throw InfeasibleParameters("rate must lie in (0, 1)");
        if (!(omega >= 0.0 && omega <= wf.max_weight() * (1 + 1e-12)))
            throw InfeasibleParameters("relative weight must lie in [0, max wt']");
        this->omega = std::min(omega, wf.max_weight());
    }

    const SphereExponent& sphere() const { return sphere_; }
    const WeightFunction& weight() const { return sphere_.weight(); }
    std::uint32_t q() const { return weight().q(); }
    double max_weight() const { return sphere_.max_weight(); }

    /// s at a relative weight, clamped into [0, max wt'] against rounding.
    double s(double omega_rel) const { return sphere_(std::clamp(omega_rel, 0.0, max_weight())); }

private:
    SphereExponent sphere_;

public:
    double R;
    double omega;
};

struct AlgoPoint {
    double L = 0.0;
    double P = 0.0;
    int a = 1;
};

struct WorkFactors {
    double pi1 = 0.0;
    double zeta = 0.0;
    double tau = 0.0;
    double y = 0.0;
    double u = 0.0;  // u for the first variant, u' for the second
    double x = 0.0;
    double s_omega0 = 0.0;
    double total_q = 0.0;
    double total_bin = 0.0;
    AlgoPoint point;
    Model model = Model::classical;
    Algorithm algorithm = Algorithm::wagner;
};

struct CmsdFactors {
    double u = 0.0;
    double x = 0.0;
    double zeta = 0.0;
    double tau = 0.0;
    double y = 0.0;
    double s_omega0 = 0.0;
};

/// Bounds on P for a given L: the outer part must fit on n-k-ell coordinates, the inner on k+ell.
inline std::pair<double, double> p_range(const CodeParams& cp, double L) {
    const double mx = cp.max_weight();
    const double lo = std::max(0.0, cp.omega - (1.0 - cp.R - L) * mx);
    const double hi = std::min(cp.omega, (cp.R + L) * mx);
    return {lo, hi};
}

inline bool feasible(const CodeParams& cp, double L, double P) {
    constexpr double eps = 1e-12;
    if (L < -eps || L > 1.0 - cp.R + eps) return false;
    const auto [lo, hi] = p_range(cp, L);
    return P >= lo - eps && P <= hi + eps;
}

inline void require_feasible(const CodeParams& cp, double L, double P) {
    if (!feasible(cp, L, P)) throw InfeasibleParameters("(L, P) outside the feasible region");
}

/// log_q of the success probability of one outer loop, per n.
inline double p1_exponent(const CodeParams& cp, double L, double P) {
    require_feasible(cp, L, P);
    const double rest = 1.0 - cp.R - L;
    const double outer = rest > 1e-15 ? rest * cp.s((cp.omega - P) / rest) : 0.0;
    const double solutions = std::max(0.0, std::min(cp.s(cp.omega) - L, rest));
    return std::min(0.0, outer - solutions);
}

namespace detail {

inline CmsdFactors wagner1_from(double big_n, double m0, double sw, int a) {
    CmsdFactors f;
    f.s_omega0 = sw;
    f.u = std::min(sw / std::exp2(a), m0 / a);
    f.x = m0 - (a - 1) * f.u;
    f.zeta = big_n * (2 * f.u - f.x);
    f.tau = big_n * f.u;
    f.y = f.tau;
    return f;
}

// x uses u' here; with u in its place |J_a| would not match the u'-sized lower levels.
inline CmsdFactors wagner2_from(double big_n, double m0, double sw, int a) {
    CmsdFactors f;
    f.s_omega0 = sw;
    f.u = std::min(sw / (std::exp2(a) + 1), m0 / a);
    f.x = m0 - (a - 1) * f.u;
    f.zeta = big_n * (3 * f.u - f.x);
    f.tau = big_n * f.u;
    f.y = 2 * big_n * f.u;
    return f;
}

inline double inner_exponent(const CodeParams& cp, double L, double P) {
    const double big_n = cp.R + L;
    return cp.s(P / big_n);
}

inline WorkFactors assemble(const CodeParams& cp, Model model, Algorithm alg, AlgoPoint pt, double pi1, double sw) {
    const double big_n = cp.R + pt.L;
    const double m0 = pt.L / big_n;
    const CmsdFactors f = model == Model::classical ? wagner1_from(big_n, m0, sw, pt.a) : wagner2_from(big_n, m0, sw, pt.a);
    WorkFactors w;
    w.pi1 = pi1;
    w.u = f.u;
    w.x = f.x;
    w.zeta = f.zeta;
    w.tau = f.tau;
    w.y = f.y;
    w.s_omega0 = sw;
    if (model == Model::classical)
        w.total_q = std::max(0.0, -pi1 - f.zeta) + std::max(f.tau, f.y);
    else
        w.total_q = 0.5 * std::max(0.0, -pi1 - f.zeta) + std::max(f.tau, f.y / 2);
    w.total_bin = w.total_q * std::log2(static_cast<double>(cp.q()));
    w.point = pt;
    w.model = model;
    w.algorithm = alg;
    return w;
}

}  // namespace detail

inline CmsdFactors wagner1_factors(const CodeParams& cp, const AlgoPoint& pt) {
    require_feasible(cp, pt.L, pt.P);
    if (pt.a < 1) throw InfeasibleParameters("a must be at least 1");
    const double big_n = cp.R + pt.L;
    return detail::wagner1_from(big_n, pt.L / big_n, detail::inner_exponent(cp, pt.L, pt.P), pt.a);
}

inline CmsdFactors wagner2_factors(const CodeParams& cp, const AlgoPoint& pt) {
    require_feasible(cp, pt.L, pt.P);
    if (pt.a < 1) throw InfeasibleParameters("a must be at least 1");
    const double big_n = cp.R + pt.L;
    return detail::wagner2_from(big_n, pt.L / big_n, detail::inner_exponent(cp, pt.L, pt.P), pt.a);
}

inline WorkFactors classical_exponent(const CodeParams& cp, const AlgoPoint& pt, Algorithm alg = Algorithm::wagner) {
    if (pt.a < 1) throw InfeasibleParameters("a must be at least 1");
    const double pi1 = p1_exponent(cp, pt.L, pt.P);
    return detail::assemble(cp, Model::classical, alg, pt, pi1, detail::inner_exponent(cp, pt.L, pt.P));
}

inline WorkFactors quantum_exponent(const CodeParams& cp, const AlgoPoint& pt, Algorithm alg = Algorithm::wagner) {
    if (pt.a < 1) throw InfeasibleParameters("a must be at least 1");
    const double pi1 = p1_exponent(cp, pt.L, pt.P);
    return detail::assemble(cp, Model::quantum, alg, pt, pi1, detail::inner_exponent(cp, pt.L, pt.P));
}

inline WorkFactors exponent(const CodeParams& cp, const AlgoPoint& pt, Model model, Algorithm alg = Algorithm::wagner) {
    return model == Model::classical ? classical_exponent(cp, pt, alg) : quantum_exponent(cp, pt, alg);
}

/// Prange: no CMSD levels, e'' fixed at the lightest weight the outer part allows.
inline AlgoPoint prange_point(const CodeParams& cp) { return {0.0, p_range(cp, 0.0).first, 1}; }

struct OptimizerOptions {
    int a_max = 10;
    int grid = 64;
    int starts = 10;
    double min_step = 1e-5;
};

/// Minimizes the exponent over a and (L, P). P is searched as P = lo + theta (hi - lo) inside
/// its feasible interval for each L, so weights at the boundary keep a two-dimensional search space.
inline WorkFactors optimize_point(const CodeParams& cp, Model model, Algorithm alg = Algorithm::wagner,
                                  const OptimizerOptions& opt = {}) {
    if (cp.omega <= 0.0) return detail::assemble(cp, model, alg, AlgoPoint{}, 0.0, 0.0);
    if (alg == Algorithm::prange) return exponent(cp, prange_point(cp), model, alg);
    if (opt.grid < 2 || opt.a_max < 1) throw InfeasibleParameters("optimizer needs grid >= 2 and a_max >= 1");

    const int a_max = alg == Algorithm::dumer ? 1 : opt.a_max;
    const double span = 1.0 - cp.R;
    const double mx = cp.max_weight();
    const double s_omega = cp.s(cp.omega);

    struct Cell {
        double pi1;
        double sw;
        AlgoPoint pt;
    };
    auto cell = [&](double l, double th) {
        const double L = l * span;
        const auto [lo, hi] = p_range(cp, L);
        const double P = std::clamp(lo + th * std::max(0.0, hi - lo), lo, std::max(lo, hi));
        const double rest = 1.0 - cp.R - L;
        const double outer = rest > 1e-15 ? rest * cp.s((cp.omega - P) / rest) : 0.0;
        const double pi1 = std::min(0.0, outer - std::max(0.0, std::min(s_omega - L, rest)));
        return Cell{pi1, cp.s(std::min(P / (cp.R + L), mx)), AlgoPoint{L, P, 1}};
    };
    auto total = [&](const Cell& c, int a) {
        AlgoPoint pt = c.pt;
        pt.a = a;
        return detail::assemble(cp, model, alg, pt, c.pi1, c.sw).total_q;
    };

    struct Start {
        double value;
        double l;
        double th;
        int a;
    };
    // best grid cell for every a, so each level count gets refined
    std::vector<Start> per_a(static_cast<std::size_t>(a_max), Start{std::numeric_limits<double>::infinity(), 0, 0, 1});
    const int g = opt.grid;
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            const double l = static_cast<double>(i) / (g - 1), th = static_cast<double>(j) / (g - 1);
            const Cell c = cell(l, th);
            for (int a = 1; a <= a_max; ++a) {
                const double v = total(c, a);
                if (v < per_a[static_cast<std::size_t>(a - 1)].value) per_a[static_cast<std::size_t>(a - 1)] = {v, l, th, a};
            }
        }
    std::stable_sort(per_a.begin(), per_a.end(), [](const Start& x, const Start& y) { return x.value < y.value; });
    per_a.resize(std::min<std::size_t>(per_a.size(), static_cast<std::size_t>(std::max(1, opt.starts))));

    // Zoom search: a (2m+1)^2 local grid around the incumbent, halving the window each round.
    // Unlike coordinate moves it follows the diagonal ridges the max/min terms create.
    constexpr int m = 3;
    Start best = per_a.front();
    for (Start cur : per_a) {
        for (double h = 1.0 / (g - 1); h >= opt.min_step; h /= 2) {
            const Start centre = cur;
            for (int di = -m; di <= m; ++di)
                for (int dj = -m; dj <= m; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    const double l = std::clamp(centre.l + h * di / m, 0.0, 1.0);
                    const double th = std::clamp(centre.th + h * dj / m, 0.0, 1.0);
                    const double v = total(cell(l, th), cur.a);
                    if (v < cur.value - 1e-15) cur = {v, l, th, cur.a};
                }
        }
        if (cur.value < best.value) best = cur;
    }
    const Cell c = cell(best.l, best.th);
    AlgoPoint pt = c.pt;
    pt.a = best.a;
    return detail::assemble(cp, model, alg, pt, c.pi1, c.sw);
}

struct MaximaWeights {
    double omega_minus = 0.0;
    double omega_plus = 0.0;
    bool plus_is_endpoint = false;  // no crossing above the mean; omega_plus = max wt'
};

/// The two relative weights where the exponent peaks for a fixed rate: s = 1 - R below the mean
/// weight and above it, or the maximum weight when s stays above 1 - R up to there.
inline MaximaWeights local_maxima_weights(const WeightFunction& wf, double R) {
    if (!(R > 0.0 && R < 1.0)) throw InfeasibleParameters("rate must lie in (0, 1)");
    const SphereExponent s(wf);
    const double target = 1.0 - R;
    const double mean = wf.mean_weight();
    const double mx = wf.max_weight();
    auto bisect = [&](double lo, double hi, bool increasing) {
        for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, mx); ++i) {
            const double mid = 0.5 * (lo + hi);
            if ((s(mid) < target) == increasing)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    };
    MaximaWeights out;
    out.omega_minus = bisect(0.0, mean, true);
    if (s(mx) >= target) {
        out.omega_plus = mx;
        out.plus_is_endpoint = true;
    } else {
        out.omega_plus = bisect(mean, mx, false);
    }
    return out;
}

struct HardestOptions {
    OptimizerOptions optimizer;
    double r_lo = 0.02;
    double r_hi = 0.98;
    double r_step = 0.02;
    double r_tol = 1e-4;
};

struct HardestResult {
    double R = 0.0;
    double omega = 0.0;
    double omega_normalized = 0.0;
    WorkFactors factors;
};

inline HardestResult hardest_at_rate(const WeightFunction& wf, double R, Model model, Algorithm alg,
                                     const OptimizerOptions& opt = {}) {
    const MaximaWeights m = local_maxima_weights(wf, R);
    HardestResult best;
    best.factors.total_q = -1.0;
    for (double omega : {m.omega_minus, m.omega_plus}) {
        const WorkFactors f = optimize_point(CodeParams(wf, R, omega), model, alg, opt);
        if (f.total_q > best.factors.total_q) {
            best.R = R;
            best.omega = omega;
            best.omega_normalized = omega / wf.max_weight();
            best.factors = f;
        }
    }
    return best;
}

/// Maximizes the optimized exponent over the rate: a coarse scan, then golden-section search
/// around the best scan point. Only the two candidate weights of each rate are evaluated.
inline HardestResult hardest_instance(const WeightFunction& wf, Model model, Algorithm alg = Algorithm::wagner,
                                      const HardestOptions& opt = {}) {
    HardestResult best;
    best.factors.total_q = -1.0;
    const int steps = static_cast<int>(std::floor((opt.r_hi - opt.r_lo) / opt.r_step + 1e-9));
    for (int i = 0; i <= steps; ++i) {
        const HardestResult r = hardest_at_rate(wf, opt.r_lo + i * opt.r_step, model, alg, opt.optimizer);
        if (r.factors.total_q > best.factors.total_q) best = r;
    }
    double lo = std::max(opt.r_lo / 2, best.R - opt.r_step);
    double hi = std::min((1.0 + opt.r_hi) / 2, best.R + opt.r_step);
    const double invphi = (std::sqrt(5.0) - 1) / 2;
    double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
    HardestResult f1 = hardest_at_rate(wf, x1, model, alg, opt.optimizer);
    HardestResult f2 = hardest_at_rate(wf, x2, model, alg, opt.optimizer);
    while (hi - lo > opt.r_tol) {
        if (f1.factors.total_q >= f2.factors.total_q) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = hardest_at_rate(wf, x1, model, alg, opt.optimizer);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = hardest_at_rate(wf, x2, model, alg, opt.optimizer);
        }
    }
    for (const HardestResult* r : {&f1, &f2})
        if (r->factors.total_q > best.factors.total_q) best = *r;
    return best;
}

struct Method {
    Model model = Model::classical;
    Algorithm algorithm = Algorithm::wagner;
};

/// Prange, Dumer and Wagner classically plus Wagner in the quantum model.
inline std::vector<Method> standard_methods() {
    return {{Model::classical, Algorithm::prange},
            {Model::classical, Algorithm::dumer},
            {Model::classical, Algorithm::wagner},
            {Model::quantum, Algorithm::wagner}};
}

struct SweepRow {
    double omega = 0.0;
    std::vector<WorkFactors> results;  // one per method, in order
};

inline std::vector<double> omega_grid(const WeightFunction& wf, std::size_t intervals) {
    std::vector<double> out(intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i)
        out[i] = wf.max_weight() * static_cast<double>(i) / static_cast<double>(intervals);
    return out;
}

/// One row per weight; with threads > 1 the weights are split across workers and the rows are
/// still returned in grid order, so the output does not depend on the thread count.
inline std::vector<SweepRow> sweep(const WeightFunction& wf, double R, const std::vector<Method>& methods,
                                   const std::vector<double>& omegas, const OptimizerOptions& opt = {},
                                   unsigned threads = 1) {
    for (double omega : omegas)
        if (!(omega >= 0.0 && omega <= wf.max_weight() * (1 + 1e-12)))
            throw InfeasibleParameters("sweep weights must lie in [0, max wt']");
    std::vector<SweepRow> rows(omegas.size());
    auto work = [&](std::size_t first, std::size_t stride) {
        for (std::size_t i = first; i < omegas.size(); i += stride) {
            const CodeParams cp(wf, R, omegas[i]);
            rows[i].omega = cp.omega;
            for (const Method& m : methods) rows[i].results.push_back(optimize_point(cp, m.model, m.algorithm, opt));
        }
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, omegas.size()))));
    if (threads == 1) {
        work(0, 1);
        return rows;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            try {
                work(t, threads);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return rows;
}

/// Indices of strict local maxima of a sampled curve. Runs of values equal within `tol` count as
/// one point; the last sample counts when it rises above its predecessor.
inline std::vector<std::size_t> local_maxima(const std::vector<double>& values, double tol = 1e-9) {
    std::vector<std::size_t> idx;  // representative index per plateau (its middle)
    std::vector<double> val;
    for (std::size_t i = 0; i < values.size();) {
        std::size_t j = i;
        while (j + 1 < values.size() && std::abs(values[j + 1] - values[i]) <= tol) ++j;
        idx.push_back((i + j) / 2);
        val.push_back(values[i]);
        i = j + 1;
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < val.size(); ++i) {
        const bool left = i == 0 ? false : val[i] > val[i - 1];
        const bool right = i + 1 == val.size() ? true : val[i] > val[i + 1];
        if (left && right) out.push_back(idx[i]);
    }
    return out;
}

}  // namespace leeisd
