#pragma once

#include "s2ml/problems/problem.hpp"

#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>

namespace s2ml {

enum class Method { tron, stron, newton_cg, lbfgs };

inline std::string_view to_string(Method m) {
    switch (m) {
        case Method::tron: return "tron";
        case Method::stron: return "stron";
        case Method::newton_cg: return "newton-cg";
        case Method::lbfgs: return "lbfgs";
    }
    return "?";
}

inline std::optional<Method> parse_method(std::string_view s) {
    if (s == "tron") return Method::tron;
    if (s == "stron") return Method::stron;
    if (s == "newton-cg") return Method::newton_cg;
    if (s == "lbfgs") return Method::lbfgs;
    return std::nullopt;
}

struct SolverConfig {
    Method method = Method::tron;
    std::size_t max_iters = 500;
    /// Converged when ‖∇F‖ ≤ grad_tol · ‖∇F(w₀)‖.
    double grad_tol = 1e-6;
    std::size_t cg_max_iters = 25;
    double cg_rtol = 0.1;
    double tr_radius0 = 1.0;
    // Acceptance thresholds η₀ < η₁ < η₂ on the actual/predicted reduction ratio.
    double eta0 = 1e-4, eta1 = 0.25, eta2 = 0.75;
    // Radius factors: shrink σ₁ ≤ σ₂ < 1 < σ₃ expand.
    double sigma1 = 0.25, sigma2 = 0.5, sigma3 = 4.0;
    std::size_t lbfgs_memory = 10;
    double batch0_frac = 0.1;
    double batch_growth = 1.5;
    std::uint64_t rng_seed = 42;
    /// Consecutive rejected steps before the run is declared stalled.
    std::size_t max_rejections = 20;

    void validate() const {
        auto fail = [](const std::string& msg) { throw Error("solver config: " + msg); };
        if (!(grad_tol > 0.0)) fail("grad_tol must be > 0");
        if (!(0.0 < eta0 && eta0 < eta1 && eta1 < eta2 && eta2 < 1.0)) fail("need 0 < eta0 < eta1 < eta2 < 1");
        if (!(0.0 < sigma1 && sigma1 <= sigma2 && sigma2 < 1.0 && 1.0 < sigma3))
            fail("need 0 < sigma1 <= sigma2 < 1 < sigma3");
        if (!(cg_rtol > 0.0 && cg_rtol < 1.0)) fail("cg_rtol must lie in (0, 1)");
        if (cg_max_iters == 0) fail("cg_max_iters must be >= 1");
        if (!(tr_radius0 > 0.0) || !std::isfinite(tr_radius0)) fail("tr_radius0 must be > 0");
        if (lbfgs_memory == 0) fail("lbfgs_memory must be >= 1");
        if (!(batch0_frac > 0.0 && batch0_frac <= 1.0)) fail("batch0_frac must lie in (0, 1]");
        if (!(batch_growth >= 1.0) || !std::isfinite(batch_growth)) fail("batch_growth must be >= 1");
    }
};

/// L-BFGS memory entry: s = w₊ − w, y = ∇F(w₊) − ∇F(w).
struct CurvaturePair {
    Vector s;
    Vector y;
};

struct SolverState {
    Vector w;
    Vector grad;
    double objective = 0.0;
    double grad_norm = 0.0;
    double grad_norm0 = 0.0;
    std::size_t iter = 0;
    double tr_radius = 1.0;
    std::deque<CurvaturePair> lbfgs_pairs;
    std::size_t batch_size = 0;
    std::mt19937_64 rng;
    std::size_t consecutive_rejections = 0;
};

/// What a solver reports after each iteration (and once for the starting point).
struct IterationSnapshot {
    std::size_t iter = 0;
    std::span<const double> w;
    double objective = 0.0;
    double grad_norm = 0.0;
    bool step_accepted = false;
    /// Trust-region radius after the update (tron, stron) or line-search step length.
    double tr_radius_or_step = 0.0;
    std::size_t cg_iters_used = 0;
    /// Data rows processed by Hessian-vector products during this iteration.
    std::size_t rows_touched = 0;
};

inline std::size_t initial_batch_size(std::size_t n, double frac) {
    const double want = std::ceil(frac * static_cast<double>(n) - 1e-9);
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(want, 1.0)), 1, n);
}

inline std::size_t grow_batch_size(std::size_t current, std::size_t n, double growth) {
    const double next = std::ceil(growth * static_cast<double>(current));
    return next >= static_cast<double>(n) ? n : static_cast<std::size_t>(next);
}

/// State at w₀ = 0.
inline SolverState initial_state(const Problem& problem, const SolverConfig& config) {
    SolverState st;
    st.w.assign(problem.dimension(), 0.0);
    st.grad = problem.gradient(st.w);
    st.objective = problem.objective(st.w);
    st.grad_norm = norm2(st.grad);
    st.grad_norm0 = st.grad_norm;
    st.tr_radius = config.tr_radius0;
    st.batch_size = initial_batch_size(problem.num_samples(), config.batch0_frac);
    st.rng.seed(config.rng_seed);
    return st;
}

inline IterationSnapshot snapshot_of(const SolverState& st) {
    IterationSnapshot snap;
    snap.iter = st.iter;
    snap.w = st.w;
    snap.objective = st.objective;
    snap.grad_norm = st.grad_norm;
    return snap;
}

}  // namespace s2ml
