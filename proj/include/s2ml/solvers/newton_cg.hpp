#pragma once

#include "s2ml/solvers/config.hpp"
#include "s2ml/solvers/line_search.hpp"

namespace s2ml {

struct CgResult {
    Vector x;
    std::size_t iterations = 0;
};

/// Unpreconditioned CG on Hx = b from x = 0, to ‖b − Hx‖ ≤ rtol·‖b‖.
/// Curvature is not checked; callers validate the resulting direction.
template <class HessVec>
CgResult conjugate_gradient(HessVec&& hv, std::span<const double> b, double rtol, std::size_t max_iters) {
    const std::size_t n = b.size();
    CgResult out;
    out.x.assign(n, 0.0);
    Vector r(b.begin(), b.end());
    Vector p = r;
    Vector hp(n);
    double rr = dot(r, r);
    const double target = rtol * std::sqrt(rr);
    while (out.iterations < max_iters && std::sqrt(rr) > target) {
        hv(std::span<const double>(p), std::span<double>(hp));
        ++out.iterations;
        const double php = dot(p, hp);
        if (php == 0.0 || !std::isfinite(php)) break;
        const double step = rr / php;
        axpy(step, p, out.x);
        axpy(-step, hp, r);
        const double rr_next = dot(r, r);
        const double beta = rr_next / rr;
        rr = rr_next;
        for (std::size_t j = 0; j < n; ++j) p[j] = r[j] + beta * p[j];
    }
    return out;
}

/// Inexact Newton with Armijo backtracking. Falls back to −g when the CG
/// direction is not a descent direction.
inline IterationSnapshot newton_cg_step(const Problem& problem, SolverState& st, const SolverConfig& cfg) {
    const HessianOperator hess = problem.hessian_at(st.w, Batch::full());
    Vector neg_grad(st.grad.size());
    for (std::size_t j = 0; j < neg_grad.size(); ++j) neg_grad[j] = -st.grad[j];
    CgResult cg = conjugate_gradient(
        [&](std::span<const double> v, std::span<double> out) { hess.apply(v, out); }, neg_grad, cfg.cg_rtol,
        cfg.cg_max_iters);

    Vector& d = cg.x;
    double slope = dot(st.grad, d);
    if (!(slope < 0.0)) {
        d = neg_grad;
        slope = -st.grad_norm * st.grad_norm;
    }

    const detail::LineSearchResult ls = detail::armijo_backtrack(problem, st.w, d, slope);
    if (ls.accepted) detail::take_step(problem, st, d, ls);
    st.consecutive_rejections = ls.accepted ? 0 : st.consecutive_rejections + 1;
    ++st.iter;

    IterationSnapshot snap = snapshot_of(st);
    snap.step_accepted = ls.accepted;
    snap.tr_radius_or_step = ls.step;
    snap.cg_iters_used = cg.iterations;
    snap.rows_touched = hess.rows_touched();
    return snap;
}

}  // namespace s2ml
