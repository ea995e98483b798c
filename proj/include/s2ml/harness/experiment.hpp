#pragma once

#include "s2ml/data/libsvm.hpp"
#include "s2ml/harness/fstar.hpp"
#include "s2ml/harness/trace.hpp"
#include "s2ml/problems/config.hpp"
#include "s2ml/solvers/run.hpp"

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace s2ml {

struct ExperimentSpec {
    ProblemConfig problem;
    std::vector<SolverConfig> solvers;
    std::string train_path;
    std::optional<std::string> test_path;
    /// Known optimum; computed (and cached beside the training file) when unset.
    std::optional<double> f_star;
    std::size_t repetitions = 1;
    bool deterministic = false;
    std::size_t threads = 1;

    void validate() const {
        if (repetitions < 1) throw Error("experiment: repetitions must be >= 1");
        if (solvers.empty()) throw Error("experiment: at least one solver is required");
        problem.validate();
        for (const auto& s : solvers) s.validate();
    }
};

struct ExperimentResult {
    double f_star = 0.0;
    std::vector<SolverTrace> traces;
};

/// Training time excluding paused intervals.
class Stopwatch {
public:
    using Clock = std::chrono::steady_clock;

    void start() {
        elapsed_ = Clock::duration::zero();
        resume();
    }
    void pause() {
        elapsed_ += Clock::now() - since_;
    }
    void resume() { since_ = Clock::now(); }
    double seconds() const { return std::chrono::duration<double>(elapsed_).count(); }

private:
    Clock::duration elapsed_{};
    Clock::time_point since_{};
};

/// Pads the narrower dataset's column count so train and test share one feature space.
inline void align_columns(Dataset& train, Dataset& test) {
    const std::size_t d = std::max(train.n_cols(), test.n_cols());
    train.features.n_cols = d;
    test.features.n_cols = d;
}

/// Runs every (solver, repetition) sequentially on in-memory data. `test`
/// may be null. Test accuracy and bookkeeping happen with the clock paused.
inline ExperimentResult run_experiment(const Dataset& train, const Dataset* test, const ExperimentSpec& spec,
                                       FStarCache* cache = nullptr,
                                       const std::optional<std::filesystem::path>& cache_dir = std::nullopt) {
    spec.validate();
    if (test && test->n_cols() > train.n_cols())
        throw Error("experiment: test data has " + std::to_string(test->n_cols()) +
                    " features but the training data has " + std::to_string(train.n_cols()));

    const ExecutionPolicy policy{spec.threads, spec.deterministic};
    const auto problem = make_problem(spec.problem, train, policy);

    ExperimentResult result;
    if (spec.f_star) {
        result.f_star = *spec.f_star;
    } else {
        FStarCache local;
        result.f_star = (cache ? *cache : local).get_or_compute(*problem, train, spec.problem, cache_dir);
    }

    for (const auto& base : spec.solvers) {
        for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
            SolverConfig cfg = base;
            cfg.rng_seed = base.rng_seed + rep;

            SolverTrace trace{std::string(to_string(cfg.method)), rep, {}};
            std::size_t rows = 0;
            Stopwatch clock;
            auto record = [&](const IterationSnapshot& snap) {
                clock.pause();
                rows += snap.rows_touched;
                TraceRecord r;
                r.iter = snap.iter;
                r.wall_time_s = clock.seconds();
                r.objective = snap.objective;
                r.optimality_gap = snap.objective - result.f_star;
                if (test) r.test_accuracy = predict_accuracy(spec.problem, *test, snap.w);
                r.grad_norm = snap.grad_norm;
                r.rows_touched = rows;
                trace.records.push_back(r);
                clock.resume();
            };
            clock.start();
            const SolverResult res = run_solver(*problem, cfg, record);
            if (res.termination == Termination::aborted)
                throw Error("experiment: run aborted: " + res.abort_reason);
            result.traces.push_back(std::move(trace));
        }
    }
    return result;
}

/// Loads the files named in `spec` and runs it. F* is cached as
/// `<digest>.fstar` next to the training file.
inline ExperimentResult run_experiment(const ExperimentSpec& spec, FStarCache* cache = nullptr,
                                       const LoadOptions& load = {}) {
    spec.validate();
    Dataset train = load_dataset(spec.train_path, load);
    std::optional<Dataset> test;
    if (spec.test_path) {
        test = load_dataset(*spec.test_path, load);
        align_columns(train, *test);
    }
    const auto dir = std::filesystem::absolute(spec.train_path).parent_path();
    return run_experiment(train, test ? &*test : nullptr, spec, cache, dir);
}

}  // namespace s2ml
