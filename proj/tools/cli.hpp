#pragma once

#include "s2ml/s2ml.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace s2ml::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Raised for bad flag values or malformed config files.
class UsageError : public Error {
public:
    using Error::Error;
};

/// Flag values shared by the subcommands; every field maps onto a library config.
struct CliConfig {
    std::string subcommand;
    std::string data;
    std::string test_data;
    std::string problem = "logistic";
    std::vector<std::string> solvers;
    std::optional<double> lambda;
    bool bias = false;
    double grad_tol = 1e-6;
    std::size_t max_iters = 500;
    std::size_t cg_max_iters = 25;
    double cg_rtol = 0.1;
    double tr_radius0 = 1.0;
    std::size_t lbfgs_memory = 10;
    double batch0_frac = 0.1;
    double batch_growth = 1.5;
    std::size_t reps = 1;
    std::uint64_t seed = 42;
    std::size_t threads = 1;
    bool deterministic = false;
    std::string out;
    std::string out_dir;
    std::string config;

    ProblemConfig problem_config() const {
        ProblemConfig pc;
        pc.kind = *parse_problem_kind(problem);
        pc.lambda = lambda;
        pc.add_bias = bias;
        return pc;
    }

    SolverConfig solver_config(const std::string& name) const {
        SolverConfig sc;
        sc.method = *parse_method(name);
        sc.max_iters = max_iters;
        sc.grad_tol = grad_tol;
        sc.cg_max_iters = cg_max_iters;
        sc.cg_rtol = cg_rtol;
        sc.tr_radius0 = tr_radius0;
        sc.lbfgs_memory = lbfgs_memory;
        sc.batch0_frac = batch0_frac;
        sc.batch_growth = batch_growth;
        sc.rng_seed = seed;
        return sc;
    }

    ExecutionPolicy policy() const { return {threads, deterministic}; }
    LoadOptions load_options() const {
        LoadOptions lo;
        lo.threads = threads;
        return lo;
    }
};

/// Reads `key = value` lines (blank lines and `#` comments ignored) and turns
/// them into `--key value` arguments. Boolean keys become bare flags when true.
inline std::vector<std::string> config_file_args(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw UsageError("--config: cannot open '" + path + "'");
    std::vector<std::string> args;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        std::string_view body = detail::trim(detail::strip_comment(line));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos)
            throw UsageError("--config: line " + std::to_string(line_no) + " is not 'key = value'");
        const std::string key(detail::trim(body.substr(0, eq)));
        const std::string value(detail::trim(body.substr(eq + 1)));
        if (key.empty() || key == "config")
            throw UsageError("--config: invalid key on line " + std::to_string(line_no));
        if (key == "bias" || key == "deterministic") {
            if (value == "true" || value == "1")
                args.push_back("--" + key);
            else if (value != "false" && value != "0")
                throw UsageError("--config: " + key + " expects true/false, got '" + value + "'");
            continue;
        }
        args.push_back("--" + key);
        args.push_back(value);
    }
    return args;
}

namespace detail {

inline void add_problem_solver_options(CLI::App& cmd, CliConfig& c, bool many_solvers) {
    using P = CLI::MultiOptionPolicy;
    cmd.add_option("--data", c.data, "Training data (LIBSVM, optionally gzipped)")->required()->multi_option_policy(P::TakeLast);
    cmd.add_option("--test-data", c.test_data, "Test data for accuracy")->multi_option_policy(P::TakeLast);
    cmd.add_option("--problem", c.problem, "logistic | svm-l2")
        ->check(CLI::IsMember({"logistic", "svm-l2"}))
        ->multi_option_policy(P::TakeLast);
    auto* solver = cmd.add_option("--solver", c.solvers, many_solvers ? "Solver (repeatable)" : "Solver")
                       ->check(CLI::IsMember({"tron", "stron", "newton-cg", "lbfgs"}));
    if (!many_solvers) solver->multi_option_policy(P::TakeLast)->expected(1);
    cmd.add_option("--lambda", c.lambda, "L2 weight (default 1/n)")->check(CLI::NonNegativeNumber)->multi_option_policy(P::TakeLast);
    cmd.add_flag("--bias", c.bias, "Append a constant-1 feature");
    cmd.add_option("--grad-tol", c.grad_tol, "Relative gradient-norm tolerance")
        ->check(CLI::PositiveNumber)->multi_option_policy(P::TakeLast);
    cmd.add_option("--max-iters", c.max_iters, "Iteration cap")->check(CLI::NonNegativeNumber)->multi_option_policy(P::TakeLast);
    cmd.add_option("--cg-max-iters", c.cg_max_iters, "Inner CG iteration cap")
        ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()))->multi_option_policy(P::TakeLast);
    cmd.add_option("--cg-rtol", c.cg_rtol, "Inner CG relative residual")
        ->check(CLI::Validator(
            [](std::string& s) -> std::string {
                double v = std::stod(s);
                return v > 0.0 && v < 1.0 ? "" : "must lie in (0, 1)";
            },
            "(0,1)"))
        ->multi_option_policy(P::TakeLast);
    cmd.add_option("--tr-radius0", c.tr_radius0, "Initial trust-region radius")
        ->check(CLI::PositiveNumber)->multi_option_policy(P::TakeLast);
    cmd.add_option("--lbfgs-memory", c.lbfgs_memory, "L-BFGS pairs kept")
        ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()))->multi_option_policy(P::TakeLast);
    cmd.add_option("--batch0-frac", c.batch0_frac, "STRON initial Hessian batch fraction")
        ->check(CLI::Validator(
            [](std::string& s) -> std::string {
                double v = std::stod(s);
                return v > 0.0 && v <= 1.0 ? "" : "must lie in (0, 1]";
            },
            "(0,1]"))
        ->multi_option_policy(P::TakeLast);
    cmd.add_option("--batch-growth", c.batch_growth, "STRON batch growth factor")
        ->check(CLI::Range(1.0, std::numeric_limits<double>::max()))->multi_option_policy(P::TakeLast);
    cmd.add_option("--seed", c.seed, "Random seed")->multi_option_policy(P::TakeLast);
    cmd.add_option("--threads", c.threads, "Worker threads")
        ->check(CLI::Range(std::size_t{1}, std::size_t{1024}))->multi_option_policy(P::TakeLast);
    cmd.add_flag("--deterministic", c.deterministic, "Fixed-shape reductions");
    cmd.add_option("--config", c.config, "key = value file with flag defaults");
}

inline std::optional<std::string> find_config_path(const std::vector<std::string>& args) {
    for (std::size_t k = 0; k < args.size(); ++k) {
        if (args[k] == "--config") {
            if (k + 1 >= args.size()) throw UsageError("--config requires a path");
            return args[k + 1];
        }
        if (args[k].rfind("--config=", 0) == 0) return args[k].substr(9);
    }
    return std::nullopt;
}

inline int train(const CliConfig& c, std::ostream& out, std::ostream& err) {
    const Dataset data = load_dataset(c.data, c.load_options());
    const ProblemConfig pc = c.problem_config();
    const auto problem = make_problem(pc, data, c.policy());
    const SolverConfig sc = c.solver_config(c.solvers.empty() ? "tron" : c.solvers.front());
    const SolverResult res = run_solver(*problem, sc);

    Model model{pc.kind, pc.resolved_lambda(data.n_rows()), pc.add_bias, res.w};
    if (c.out.empty())
        out << format_model(model);
    else
        write_model(model, c.out);

    err << to_string(sc.method) << ": " << to_string(res.termination) << " after " << res.iterations
        << " iterations, objective " << s2ml::detail::format_g17(res.objective) << ", |g| "
        << s2ml::detail::format_g17(res.grad_norm) << '\n';
    if (!c.test_data.empty()) {
        const Dataset test = load_dataset(c.test_data, c.load_options());
        if (test.n_cols() > data.n_cols())
            err << "warning: test features beyond column " << data.n_cols() << " are ignored\n";
        const Dataset trimmed = restrict_columns(test, data.n_cols());
        out << "test_accuracy " << s2ml::detail::format_g17(predict_accuracy(pc, trimmed, res.w)) << '\n';
    }
    if (res.termination != Termination::converged) {
        err << "error: solver did not converge (" << to_string(res.termination) << ")\n";
        return kExitRuntime;
    }
    return kExitOk;
}

inline int benchmark(const CliConfig& c, std::ostream& out, std::ostream& err) {
    if (c.out_dir.empty()) throw UsageError("--out-dir is required for benchmark");
    ExperimentSpec spec;
    spec.problem = c.problem_config();
    for (const auto& s : c.solvers.empty() ? std::vector<std::string>{"tron"} : c.solvers)
        spec.solvers.push_back(c.solver_config(s));
    spec.train_path = c.data;
    if (!c.test_data.empty()) spec.test_path = c.test_data;
    spec.repetitions = c.reps;
    spec.deterministic = c.deterministic;
    spec.threads = c.threads;

    LoadOptions lo = c.load_options();
    lo.on_warning = [&err](const std::string& msg) { err << "warning: " << msg << '\n'; };
    const ExperimentResult res = run_experiment(spec, nullptr, lo);

    std::filesystem::create_directories(c.out_dir);
    const std::filesystem::path dir(c.out_dir);
    write_trace_csv(res.traces, (dir / "traces.csv").string());
    render_convergence_svg(res.traces, PlotMetric::optimality_gap, (dir / "gap.svg").string());
    if (spec.test_path) render_convergence_svg(res.traces, PlotMetric::test_accuracy, (dir / "accuracy.svg").string());

    out << "f_star " << s2ml::detail::format_g17(res.f_star) << '\n';
    for (const auto& t : res.traces) {
        const TraceRecord& last = t.records.back();
        out << t.solver << " rep " << t.rep << ": iters " << last.iter << ", gap "
            << s2ml::detail::format_g17(last.optimality_gap) << ", time " << last.wall_time_s << " s";
        if (last.test_accuracy) out << ", accuracy " << *last.test_accuracy;
        out << '\n';
    }
    return kExitOk;
}

inline int fstar(const CliConfig& c, std::ostream& out, std::ostream&) {
    const Dataset data = load_dataset(c.data, c.load_options());
    const ProblemConfig pc = c.problem_config();
    const auto problem = make_problem(pc, data, c.policy());
    FStarCache cache;
    const double value =
        cache.get_or_compute(*problem, data, pc, std::filesystem::absolute(c.data).parent_path());
    out << s2ml::detail::format_g17(value) << '\n';
    if (!c.out.empty() && !FStarCache::write_file(c.out, value)) throw Error("cannot write '" + c.out + "'");
    return kExitOk;
}

inline int plot(const CliConfig& c, std::ostream& out, std::ostream&) {
    const auto traces = read_trace_csv(c.data);
    const std::filesystem::path dir =
        c.out_dir.empty() ? std::filesystem::absolute(c.data).parent_path() : std::filesystem::path(c.out_dir);
    std::filesystem::create_directories(dir);
    render_convergence_svg(traces, PlotMetric::optimality_gap, (dir / "gap.svg").string());
    out << (dir / "gap.svg").string() << '\n';
    const bool has_accuracy = std::any_of(traces.begin(), traces.end(), [](const SolverTrace& t) {
        return std::any_of(t.records.begin(), t.records.end(), [](const TraceRecord& r) { return r.test_accuracy.has_value(); });
    });
    if (has_accuracy) {
        render_convergence_svg(traces, PlotMetric::test_accuracy, (dir / "accuracy.svg").string());
        out << (dir / "accuracy.svg").string() << '\n';
    }
    return kExitOk;
}

}  // namespace detail

/// Entry point. `args` excludes the program name.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CliConfig c;
    CLI::App app{"Second-order solvers for L2-regularized linear classification", "s2ml"};
    app.require_subcommand(1, 1);
    app.set_help_all_flag("--help-all", "Show help for all subcommands");

    auto* train = app.add_subcommand("train", "Fit a model and write it to --out");
    detail::add_problem_solver_options(*train, c, false);
    train->add_option("--out", c.out, "Model output path (stdout when omitted)")->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    auto* bench = app.add_subcommand("benchmark", "Run solvers and write traces.csv, gap.svg, accuracy.svg");
    detail::add_problem_solver_options(*bench, c, true);
    bench->add_option("--reps", c.reps, "Repetitions per solver")
        ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()))
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    bench->add_option("--out-dir", c.out_dir, "Output directory")->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    auto* fs = app.add_subcommand("fstar", "Compute and cache the optimal objective value");
    detail::add_problem_solver_options(*fs, c, false);
    fs->add_option("--out", c.out, "Also write the value to this file")->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    auto* pl = app.add_subcommand("plot", "Render gap.svg / accuracy.svg from a traces.csv");
    pl->add_option("--data", c.data, "traces.csv written by benchmark")->required()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    pl->add_option("--out-dir", c.out_dir, "Output directory (default: beside the CSV)")->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    pl->add_option("--config", c.config, "key = value file with flag defaults");

    CLI::App* active = &app;
    try {
        if (!args.empty() && args.front() != "--help" && args.front() != "-h") {
            if (auto cfg = detail::find_config_path(args)) {
                auto extra = config_file_args(*cfg);
                args.insert(args.begin() + 1, extra.begin(), extra.end());
            }
        }
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
        for (auto* sub : {train, bench, fs, pl})
            if (sub->parsed()) {
                active = sub;
                c.subcommand = sub->get_name();
            }
    } catch (const CLI::CallForHelp&) {
        out << (active->get_subcommands().empty() ? app.help() : active->get_subcommands().front()->help());
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        if (c.subcommand == "train") return detail::train(c, out, err);
        if (c.subcommand == "benchmark") return detail::benchmark(c, out, err);
        if (c.subcommand == "fstar") return detail::fstar(c, out, err);
        return detail::plot(c, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n\n" << active->help();
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace s2ml::cli
