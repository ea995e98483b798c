#pragma once

#include "s2ml/solvers/config.hpp"

namespace s2ml::detail {

struct LineSearchResult {
    bool accepted = false;
    double step = 0.0;
    double change = 0.0;
};

// Backtracking Armijo along d: t = 1, 1/2, ..., 2^-50.
inline LineSearchResult armijo_backtrack(const Problem& problem, std::span<const double> w,
                                         std::span<const double> d, double slope) {
    constexpr double kSufficientDecrease = 1e-4;
    constexpr int kMaxHalvings = 50;
    Vector trial(d.size());
    double t = 1.0;
    for (int halving = 0; halving <= kMaxHalvings; ++halving, t *= 0.5) {
        for (std::size_t j = 0; j < d.size(); ++j) trial[j] = t * d[j];
        const double change = problem.objective_change(w, trial);
        if (std::isfinite(change) && change <= kSufficientDecrease * t * slope) return {true, t, change};
    }
    return {};
}

// Moves st to w + t·d (already line-searched) and refreshes the gradient.
inline void take_step(const Problem& problem, SolverState& st, std::span<const double> d,
                      const LineSearchResult& ls) {
    axpy(ls.step, d, st.w);
    st.objective += ls.change;
    problem.gradient(st.w, Batch::full(), st.grad);
    st.grad_norm = norm2(st.grad);
}

}  // namespace s2ml::detail
