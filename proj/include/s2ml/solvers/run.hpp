#pragma once

#include "s2ml/solvers/lbfgs.hpp"
#include "s2ml/solvers/newton_cg.hpp"
#include "s2ml/solvers/tron.hpp"

#include <exception>
#include <functional>
#include <string>

namespace s2ml {

enum class Termination { converged, max_iters, stalled, aborted };

inline std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::converged: return "converged";
        case Termination::max_iters: return "max_iters";
        case Termination::stalled: return "stalled";
        case Termination::aborted: return "aborted";
    }
    return "?";
}

struct SolverResult {
    Vector w;
    Termination termination = Termination::max_iters;
    std::size_t iterations = 0;
    double objective = 0.0;
    double grad_norm = 0.0;
    /// Set when the callback threw and the run was aborted.
    std::string abort_reason;
};

using IterationCallback = std::function<void(const IterationSnapshot&)>;

inline IterationSnapshot solver_step(const Problem& problem, SolverState& st, const SolverConfig& cfg) {
    switch (cfg.method) {
        case Method::tron: return tron_step(problem, st, cfg);
        case Method::stron: return stron_step(problem, st, cfg);
        case Method::newton_cg: return newton_cg_step(problem, st, cfg);
        case Method::lbfgs: return lbfgs_step(problem, st, cfg);
    }
    throw Error("unknown method");
}

/// Runs the configured method from w₀ = 0. The callback sees every snapshot,
/// starting with iteration 0, before the stopping test is applied to it.
inline SolverResult run_solver(const Problem& problem, const SolverConfig& cfg,
                               const IterationCallback& callback = {}) {
    cfg.validate();
    SolverState st = initial_state(problem, cfg);
    SolverResult result;

    auto emit = [&](const IterationSnapshot& snap) {
        if (!callback) return true;
        try {
            callback(snap);
            return true;
        } catch (const std::exception& e) {
            result.abort_reason = e.what();
        } catch (...) {
            result.abort_reason = "unknown exception in callback";
        }
        result.termination = Termination::aborted;
        return false;
    };

    IterationSnapshot first = snapshot_of(st);
    first.tr_radius_or_step = cfg.method == Method::tron || cfg.method == Method::stron ? st.tr_radius : 0.0;
    if (emit(first)) {
        for (;;) {
            if (st.grad_norm <= cfg.grad_tol * st.grad_norm0) {
                result.termination = Termination::converged;
                break;
            }
            if (st.iter >= cfg.max_iters) {
                result.termination = Termination::max_iters;
                break;
            }
            if (st.consecutive_rejections >= cfg.max_rejections) {
                result.termination = Termination::stalled;
                break;
            }
            if (!emit(solver_step(problem, st, cfg))) break;
        }
    }

    result.iterations = st.iter;
    result.objective = st.objective;
    result.grad_norm = st.grad_norm;
    result.w = std::move(st.w);
    return result;
}

}  // namespace s2ml
