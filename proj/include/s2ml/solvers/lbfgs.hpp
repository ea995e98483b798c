#pragma once

#include "s2ml/solvers/config.hpp"
#include "s2ml/solvers/line_search.hpp"

#include <deque>
#include <vector>

namespace s2ml {

/// Two-loop recursion: returns H·g where H is the L-BFGS inverse-Hessian
/// approximation built from `pairs` (oldest first) with initial matrix γI,
/// γ = sᵀy / yᵀy of the newest pair (γ = 1 with no pairs).
inline Vector lbfgs_two_loop(const std::deque<CurvaturePair>& pairs, std::span<const double> g) {
    Vector q(g.begin(), g.end());
    const std::size_t m = pairs.size();
    std::vector<double> rho(m), a(m);
    for (std::size_t k = m; k-- > 0;) {
        rho[k] = 1.0 / dot(pairs[k].y, pairs[k].s);
        a[k] = rho[k] * dot(pairs[k].s, q);
        axpy(-a[k], pairs[k].y, q);
    }
    if (m > 0) {
        const auto& last = pairs.back();
        const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
        for (double& x : q) x *= gamma;
    }
    for (std::size_t k = 0; k < m; ++k) {
        const double b = rho[k] * dot(pairs[k].y, q);
        axpy(a[k] - b, pairs[k].s, q);
    }
    return q;
}

/// True when sᵀy > 1e-10·‖s‖‖y‖.
inline bool curvature_ok(std::span<const double> s, std::span<const double> y) {
    return dot(s, y) > 1e-10 * norm2(s) * norm2(y);
}

inline IterationSnapshot lbfgs_step(const Problem& problem, SolverState& st, const SolverConfig& cfg) {
    Vector d = lbfgs_two_loop(st.lbfgs_pairs, st.grad);
    for (double& x : d) x = -x;
    double slope = dot(st.grad, d);
    if (!(slope < 0.0)) {
        for (std::size_t j = 0; j < d.size(); ++j) d[j] = -st.grad[j];
        slope = -st.grad_norm * st.grad_norm;
    }

    const detail::LineSearchResult ls = detail::armijo_backtrack(problem, st.w, d, slope);
    if (ls.accepted) {
        const Vector old_grad = st.grad;
        detail::take_step(problem, st, d, ls);
        CurvaturePair pair{Vector(d.size()), Vector(d.size())};
        for (std::size_t j = 0; j < d.size(); ++j) {
            pair.s[j] = ls.step * d[j];
            pair.y[j] = st.grad[j] - old_grad[j];
        }
        if (curvature_ok(pair.s, pair.y)) {
            st.lbfgs_pairs.push_back(std::move(pair));
            while (st.lbfgs_pairs.size() > cfg.lbfgs_memory) st.lbfgs_pairs.pop_front();
        }
    }
    st.consecutive_rejections = ls.accepted ? 0 : st.consecutive_rejections + 1;
    ++st.iter;

    IterationSnapshot snap = snapshot_of(st);
    snap.step_accepted = ls.accepted;
    snap.tr_radius_or_step = ls.step;
    return snap;
}

}  // namespace s2ml
