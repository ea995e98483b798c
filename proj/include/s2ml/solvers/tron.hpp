#pragma once

#include "s2ml/solvers/config.hpp"
#include "s2ml/solvers/trust_region_cg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace s2ml {

namespace detail {

// One trust-region Newton iteration whose Hessian oracle runs on `hessian_batch`.
// The gradient, the reduction ratio and the acceptance test always use all rows.
inline IterationSnapshot trust_region_iteration(const Problem& problem, SolverState& st,
                                                const SolverConfig& cfg, const Batch& hessian_batch) {
    const HessianOperator hess = problem.hessian_at(st.w, hessian_batch);
    const TrustRegionStep sub = steihaug_cg(
        [&](std::span<const double> v, std::span<double> out) { hess.apply(v, out); }, st.grad,
        st.tr_radius, cfg.cg_rtol, cfg.cg_max_iters);

    const double predicted = -sub.model_value;
    const double step_norm = norm2(sub.step);
    bool accepted = false;

    if (!(predicted > 0.0) || !std::isfinite(predicted)) {
        st.tr_radius *= cfg.sigma2;
    } else {
        const double change = problem.objective_change(st.w, sub.step);
        const double rho = std::isfinite(change) ? -change / predicted : -1.0;
        if (rho > cfg.eta0) {
            accepted = true;
            axpy(1.0, sub.step, st.w);
            st.objective += change;
            problem.gradient(st.w, Batch::full(), st.grad);
            st.grad_norm = norm2(st.grad);
        }

        if (rho <= cfg.eta0)
            st.tr_radius = cfg.sigma2 * std::min(st.tr_radius, step_norm);
        else if (rho < cfg.eta1)
            st.tr_radius = std::max(cfg.sigma1 * st.tr_radius, cfg.sigma2 * step_norm);
        else if (rho > cfg.eta2 && sub.on_boundary)
            st.tr_radius = std::min(cfg.sigma3 * st.tr_radius, 1e10);
    }
    // A zero-length rejected step would otherwise collapse the radius to 0.
    if (!(st.tr_radius > 0.0)) st.tr_radius = std::numeric_limits<double>::min();

    st.consecutive_rejections = accepted ? 0 : st.consecutive_rejections + 1;
    ++st.iter;

    IterationSnapshot snap = snapshot_of(st);
    snap.step_accepted = accepted;
    snap.tr_radius_or_step = st.tr_radius;
    snap.cg_iters_used = sub.iterations;
    snap.rows_touched = hess.rows_touched();
    return snap;
}

}  // namespace detail

/// Trust-region Newton with an exact (all-rows) Hessian oracle.
inline IterationSnapshot tron_step(const Problem& problem, SolverState& st, const SolverConfig& cfg) {
    return detail::trust_region_iteration(problem, st, cfg, Batch::full());
}

/// Rows for the next subsampled Hessian: uniform without replacement, sorted.
/// Full batch once batch_size reaches n.
inline Batch sample_hessian_batch(SolverState& st, std::size_t n) {
    if (st.batch_size >= n) return Batch::full();
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::vector<std::size_t> picked;
    picked.reserve(st.batch_size);
    std::sample(all.begin(), all.end(), std::back_inserter(picked), st.batch_size, st.rng);
    return Batch::of(std::move(picked));
}

/// Stochastic trust-region Newton: as tron_step, but the Hessian oracle sees a
/// random subsample whose size grows geometrically after every iteration.
inline IterationSnapshot stron_step(const Problem& problem, SolverState& st, const SolverConfig& cfg) {
    const std::size_t n = problem.num_samples();
    const Batch batch = sample_hessian_batch(st, n);
    IterationSnapshot snap = detail::trust_region_iteration(problem, st, cfg, batch);
    st.batch_size = grow_batch_size(st.batch_size, n, cfg.batch_growth);
    return snap;
}

}  // namespace s2ml
