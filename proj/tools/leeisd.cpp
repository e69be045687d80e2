// leeisd: sphere queries, instance generation and solving, exponent estimates.
//
// Exit codes: 0 success, 2 usage or input error, 3 search budget exhausted,
// 1 failed self-test.

#include <leeisd/leeisd.hpp>
#include <leeisd/testing/acceptance.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace leeisd;

namespace {

constexpr int kUsageError = 2;
constexpr int kBudgetExhausted = 3;

unsigned env_threads() {
    const char* v = std::getenv("ISD_THREADS");
    if (v == nullptr || *v == '\0') return 1;
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (*end != '\0' || n < 1) throw InfeasibleParameters("ISD_THREADS must be a positive integer");
    return static_cast<unsigned>(n);
}

// Writes to `path`, or stdout for "" or "-". Fails before any output on an unwritable path.
void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path);
    out << text;
    if (!out) throw FormatError("cannot write " + path);
}

void check_writable(const std::string& path) {
    if (path.empty() || path == "-") return;
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw FormatError("cannot write " + path);
}

std::string format_double(double x) {
    std::ostringstream s;
    s.precision(6);
    s << std::fixed << x;
    return s.str();
}

struct SphereArgs {
    std::uint32_t q = 5;
    std::string weight = "lee";
    std::optional<double> omega;
    std::optional<std::size_t> n;
    std::optional<std::string> w;
    bool exact = false;
    bool json = false;
};

int cmd_sphere(const SphereArgs& a) {
    const WeightFunction wf = weight_from_spec(a.weight, a.q);
    if (a.omega.has_value() == (a.n.has_value() || a.w.has_value()))
        throw CLI::ValidationError("give either --omega or both --n and --w");
    if (!a.omega && !(a.n && a.w)) throw CLI::ValidationError("--n and --w go together");
    if (a.exact && !a.n) throw CLI::ValidationError("--exact needs --n and --w");

    double omega = 0;
    std::int64_t w_units = 0;
    if (a.omega) {
        omega = *a.omega;
    } else {
        if (*a.n == 0) throw InfeasibleParameters("n must be positive");
        const auto units = wf.to_units(parse_rational(Json(*a.w)));
        if (!units) throw InfeasibleParameters("w is not a multiple of the weight table's unit");
        w_units = *units;
        omega = wf.to_real(w_units) / static_cast<double>(*a.n);
    }
    if (omega < 0 || omega > wf.max_weight()) throw InfeasibleParameters("relative weight outside [0, max wt']");
    const EntropyProfile prof = sphere_exponent(wf, omega);

    Json j{{"q", a.q}, {"weight", weight_to_json(wf)}, {"omega", omega}, {"s", prof.s}, {"beta", prof.beta},
           {"lambda", prof.lambda}};
    std::optional<BigInt> count;
    if (a.exact) {
        count = sphere_count_exact(wf, *a.n, w_units);
        j["n"] = *a.n;
        j["count"] = count->str();
        j["log_q_count_per_n"] = count->is_zero() ? Json(nullptr) : Json(log_q(*count, a.q) / static_cast<double>(*a.n));
    }
    if (a.json) {
        std::cout << j.dump(2) << '\n';
        return 0;
    }
    std::cout << "s=" << format_double(prof.s) << '\n';
    std::cout << "beta=" << (std::isfinite(prof.beta) ? format_double(prof.beta) : (prof.beta > 0 ? "inf" : "-inf")) << '\n';
    std::cout << "lambda=";
    for (std::size_t x = 0; x < prof.lambda.size(); ++x) std::cout << (x ? " " : "") << format_double(prof.lambda[x]);
    std::cout << '\n';
    if (count) {
        std::cout << "count=" << count->str() << '\n';
        if (!count->is_zero()) std::cout << "log_q(count)/n=" << format_double(log_q(*count, a.q) / static_cast<double>(*a.n)) << '\n';
    }
    return 0;
}

struct GenArgs {
    std::uint32_t q = 3;
    std::size_t n = 16, k = 8;
    std::string w = "4";
    std::string weight = "lee";
    std::uint64_t seed = 1;
    std::string out;
};

int cmd_gen(const GenArgs& a) {
    check_writable(a.out);
    const WeightFunction wf = weight_from_spec(a.weight, a.q);
    const auto w = wf.to_units(parse_rational(Json(a.w)));
    if (!w) throw InfeasibleParameters("w is not a multiple of the weight table's unit");
    Rng rng(a.seed);
    const SdInstance inst = generate_instance(a.q, a.n, a.k, *w, wf, rng);
    emit(a.out, instance_to_json(inst).dump() + "\n");
    return 0;
}

struct SolveArgs {
    std::string instance;
    std::string alg = "prange";
    std::size_t ell = 0;
    std::string p = "0";
    std::size_t a = 1;
    std::uint64_t seed = 1;
    std::uint64_t max_loops = 100000;
    bool no_auto_budget = false;
    std::size_t base_list_size = 0;
    std::size_t list_cap = kDefaultListCap;
    std::string split = "all";
    std::optional<unsigned> threads;
    std::string out;
};

int cmd_solve(const SolveArgs& a) {
    check_writable(a.out);
    const SdInstance inst = instance_from_json(read_json_file(a.instance));
    IsdParams p;
    p.variant = parse_variant(a.alg);
    p.ell = a.ell;
    const auto units = inst.wf.to_units(parse_rational(Json(a.p)));
    if (!units) throw InfeasibleParameters("p is not a multiple of the weight table's unit");
    p.p_units = *units;
    p.a = a.a;
    p.rng_seed = a.seed;
    p.max_outer_loops = a.max_loops;
    p.auto_budget = !a.no_auto_budget;
    p.base_list_size = a.base_list_size;
    p.list_cap = a.list_cap;
    p.split = a.split == "balanced" ? SplitPolicy::balanced : SplitPolicy::all_compositions;
    p.threads = a.threads ? *a.threads : env_threads();
    const SolveReport rep = isd_solve(inst, p);
    emit(a.out, report_to_json(inst, p, rep).dump(2) + "\n");
    return rep.solution ? 0 : kBudgetExhausted;
}

struct EstimateArgs {
    std::uint32_t q = 3;
    std::string weight = "lee";
    double R = 0.5;
    std::optional<double> omega;
    std::optional<double> omega_normalized;
    std::string model = "classical";
    std::string alg = "wagner";
    int a_max = 10;
    int grid = 64;
    std::optional<double> L, P;
    std::optional<int> a;
};

int cmd_estimate(const EstimateArgs& a) {
    const WeightFunction wf = weight_from_spec(a.weight, a.q);
    if (a.omega.has_value() == a.omega_normalized.has_value())
        throw CLI::ValidationError("give exactly one of --omega and --omega-normalized");
    const double omega = a.omega ? *a.omega : *a.omega_normalized * wf.max_weight();
    const CodeParams cp(wf, a.R, omega);
    const Model model = parse_model(a.model);
    const Algorithm alg = parse_algorithm(a.alg);
    WorkFactors f;
    if (a.L || a.P || a.a) {
        if (!(a.L && a.P)) throw CLI::ValidationError("a fixed point needs --L and --P");
        f = exponent(cp, AlgoPoint{*a.L, *a.P, a.a.value_or(1)}, model, alg);
    } else {
        OptimizerOptions opt;
        opt.a_max = a.a_max;
        opt.grid = a.grid;
        f = optimize_point(cp, model, alg, opt);
    }
    Json j = factors_to_json(f);
    j["q"] = a.q;
    j["weight"] = weight_to_json(wf);
    j["R"] = a.R;
    j["omega"] = cp.omega;
    j["omega_normalized"] = cp.omega / wf.max_weight();
    std::cout << j.dump(2) << '\n';
    return 0;
}

struct HardestArgs {
    std::vector<std::uint32_t> qs{3};
    std::string weight = "lee";
    std::string model = "classical";
    std::string alg = "wagner";
    std::string out;
};

int cmd_hardest(const HardestArgs& a) {
    check_writable(a.out);
    std::vector<Model> models;
    if (a.model == "both")
        models = {Model::classical, Model::quantum};
    else
        models = {parse_model(a.model)};
    const Algorithm alg = parse_algorithm(a.alg);
    std::vector<EstimateRow> rows;
    for (std::uint32_t q : a.qs) {
        const WeightFunction wf = weight_from_spec(a.weight, q);
        for (Model m : models) {
            const HardestResult h = hardest_instance(wf, m, alg);
            rows.push_back(make_row(wf, h.R, h.omega, h.factors));
        }
    }
    std::ostringstream csv;
    write_csv(csv, rows);
    emit(a.out, csv.str());
    return 0;
}

struct SweepArgs {
    std::uint32_t q = 5;
    std::string weight = "lee";
    double R = 0.5;
    std::optional<std::string> model;
    std::vector<std::string> algs;
    std::size_t points = 1000;
    int grid = 64;
    std::optional<unsigned> threads;
    std::string out;
};

int cmd_sweep(const SweepArgs& a) {
    check_writable(a.out);
    const WeightFunction wf = weight_from_spec(a.weight, a.q);
    std::vector<Method> methods;
    if (!a.model && a.algs.empty()) {
        methods = standard_methods();
    } else {
        const Model m = parse_model(a.model.value_or("classical"));
        const std::vector<std::string> algs = a.algs.empty() ? std::vector<std::string>{"prange", "dumer", "wagner"} : a.algs;
        for (const auto& s : algs) methods.push_back({m, parse_algorithm(s)});
    }
    if (a.points < 1) throw InfeasibleParameters("need at least one interval");
    OptimizerOptions opt;
    opt.grid = a.grid;
    const unsigned threads = a.threads ? *a.threads : env_threads();
    const auto table = sweep(wf, a.R, methods, omega_grid(wf, a.points), opt, threads);
    std::vector<EstimateRow> rows;
    for (const auto& row : table)
        for (const auto& f : row.results) rows.push_back(make_row(wf, a.R, row.omega, f));
    std::ostringstream csv;
    write_csv(csv, rows);
    emit(a.out, csv.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Information set decoding and hardness estimates for syndrome decoding under additive weights"};
    app.require_subcommand(1);

    SphereArgs sa;
    auto* sphere = app.add_subcommand("sphere", "Sphere exponent s_omega, typical pattern and exact counts");
    sphere->add_option("--q", sa.q, "Field size (prime)")->required();
    sphere->add_option("--weight", sa.weight, "lee, hamming, or a JSON weight table");
    sphere->add_option("--omega", sa.omega, "Relative weight w/n");
    sphere->add_option("--n", sa.n, "Length");
    sphere->add_option("--w", sa.w, "Weight (integer, a/b or decimal)");
    sphere->add_flag("--exact", sa.exact, "Print the exact count S^n_w");
    sphere->add_flag("--json", sa.json, "JSON output");

    GenArgs ga;
    auto* gen = app.add_subcommand("gen", "Generate a random instance with a planted solution");
    gen->add_option("--q", ga.q)->required();
    gen->add_option("--n", ga.n)->required();
    gen->add_option("--k", ga.k)->required();
    gen->add_option("--w", ga.w)->required();
    gen->add_option("--weight", ga.weight);
    gen->add_option("--seed", ga.seed);
    gen->add_option("--out", ga.out, "Output file (default stdout)");

    SolveArgs so;
    auto* solve = app.add_subcommand("solve", "Solve an instance with information set decoding");
    solve->add_option("instance", so.instance, "Instance JSON file")->required();
    solve->add_option("--alg", so.alg, "prange, dumer, wagner1 or wagner2")
        ->check(CLI::IsMember({"prange", "dumer", "wagner1", "wagner2"}));
    solve->add_option("--ell", so.ell);
    solve->add_option("--p", so.p, "Weight budget on the CMSD part");
    solve->add_option("--a", so.a, "Merge tree levels");
    solve->add_option("--seed", so.seed);
    solve->add_option("--max-loops", so.max_loops);
    solve->add_flag("--no-auto-budget", so.no_auto_budget, "Run until --max-loops");
    solve->add_option("--base-list-size", so.base_list_size, "Subsample base lists to this size (0: full)");
    solve->add_option("--list-cap", so.list_cap);
    solve->add_option("--split", so.split, "all or balanced block weights")->check(CLI::IsMember({"all", "balanced"}));
    solve->add_option("--threads", so.threads);
    solve->add_option("--out", so.out);

    EstimateArgs ea;
    auto* estimate = app.add_subcommand("estimate", "Optimized work-factor exponent at (R, omega)");
    estimate->add_option("--q", ea.q)->required();
    estimate->add_option("--weight", ea.weight);
    estimate->add_option("--R", ea.R)->required();
    estimate->add_option("--omega", ea.omega);
    estimate->add_option("--omega-normalized", ea.omega_normalized, "omega / max wt'");
    estimate->add_option("--model", ea.model)->check(CLI::IsMember({"classical", "quantum"}));
    estimate->add_option("--alg", ea.alg)->check(CLI::IsMember({"prange", "dumer", "wagner"}));
    estimate->add_option("--a-max", ea.a_max);
    estimate->add_option("--grid", ea.grid);
    estimate->add_option("--L", ea.L, "Evaluate at this L instead of optimizing");
    estimate->add_option("--P", ea.P);
    estimate->add_option("--a", ea.a);

    HardestArgs ha;
    auto* hardest = app.add_subcommand("hardest", "Hardest (R, omega) per q, as CSV");
    hardest->add_option("--q", ha.qs)->required();
    hardest->add_option("--weight", ha.weight);
    hardest->add_option("--model", ha.model)->check(CLI::IsMember({"classical", "quantum", "both"}));
    hardest->add_option("--alg", ha.alg)->check(CLI::IsMember({"prange", "dumer", "wagner"}));
    hardest->add_option("--out", ha.out);

    SweepArgs sw;
    auto* sweep_cmd = app.add_subcommand("sweep", "Exponents over a grid of weights, as CSV");
    sweep_cmd->add_option("--q", sw.q)->required();
    sweep_cmd->add_option("--weight", sw.weight);
    sweep_cmd->add_option("--R", sw.R);
    sweep_cmd->add_option("--model", sw.model)->check(CLI::IsMember({"classical", "quantum"}));
    sweep_cmd->add_option("--alg", sw.algs)->check(CLI::IsMember({"prange", "dumer", "wagner"}));
    sweep_cmd->add_option("--points", sw.points, "Number of grid intervals over [0, max wt']");
    sweep_cmd->add_option("--grid", sw.grid);
    sweep_cmd->add_option("--threads", sw.threads);
    sweep_cmd->add_option("--out", sw.out);

    bool extended = false;
    auto* selftest = app.add_subcommand("selftest", "Run the acceptance suite");
    selftest->add_flag("--extended", extended, "Include q = 43, 163, 331");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsageError;
    }

    try {
        if (*sphere) return cmd_sphere(sa);
        if (*gen) return cmd_gen(ga);
        if (*solve) return cmd_solve(so);
        if (*estimate) return cmd_estimate(ea);
        if (*hardest) return cmd_hardest(ha);
        if (*sweep_cmd) return cmd_sweep(sw);
        if (*selftest) {
            acceptance::Options opt;
            const char* env = std::getenv("LEEISD_EXTENDED");
            opt.extended = extended || (env != nullptr && *env != '\0' && std::string(env) != "0");
            return acceptance::run_all(opt) ? 0 : 1;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const CapExceeded& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    }
    return kUsageError;
}
