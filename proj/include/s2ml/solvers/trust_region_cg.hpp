#pragma once

#include "s2ml/problems/problem.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace s2ml {

enum class TrustRegionStatus { interior, boundary, neg_curvature, max_iters };

inline std::string_view to_string(TrustRegionStatus s) {
    switch (s) {
        case TrustRegionStatus::interior: return "interior";
        case TrustRegionStatus::boundary: return "boundary";
        case TrustRegionStatus::neg_curvature: return "neg_curvature";
        case TrustRegionStatus::max_iters: return "max_iters";
    }
    return "?";
}

struct TrustRegionStep {
    Vector step;
    TrustRegionStatus status = TrustRegionStatus::interior;
    /// m(s) = gᵀs + ½ sᵀHs
    double model_value = 0.0;
    std::size_t iterations = 0;
    bool on_boundary = false;
    /// Shift λ ≥ 0 with (H + λI)s ≈ −g on the Krylov subspace.
    double multiplier = 0.0;
};

namespace detail {

struct KrylovTrSolution {
    Eigen::VectorXd h;
    double model = 0.0;
    double multiplier = 0.0;
    bool on_boundary = false;
    bool indefinite = false;
};

// min γ e₁ᵀh + ½ hᵀTh  s.t. ‖h‖ ≤ radius, for symmetric tridiagonal T.
inline KrylovTrSolution solve_tridiagonal_tr(const std::vector<double>& diag, const std::vector<double>& offdiag,
                                             double gamma, double radius) {
    const auto k = static_cast<Eigen::Index>(diag.size());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(diag.data(), k);
    Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(offdiag.data(), k - 1);
    eig.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
    const Eigen::VectorXd& mu = eig.eigenvalues();  // ascending
    const Eigen::MatrixXd& V = eig.eigenvectors();
    const Eigen::VectorXd c = gamma * V.row(0).transpose();
    const double mu_min = mu(0);

    auto coords = [&](double lambda) {
        Eigen::VectorXd z(k);
        for (Eigen::Index j = 0; j < k; ++j) z(j) = -c(j) / (mu(j) + lambda);
        return z;
    };

    KrylovTrSolution out;
    out.indefinite = mu_min <= 0.0;
    Eigen::VectorXd z;
    double lambda = 0.0;

    bool interior = false;
    if (mu_min > 0.0) {
        z = coords(0.0);
        interior = z.norm() <= radius;
    }

    if (!interior) {
        const double scale = std::max(1.0, mu.cwiseAbs().maxCoeff());
        const double lo = std::max(0.0, -mu_min);
        double probe = lo + 4.0 * std::numeric_limits<double>::epsilon() * scale;
        if (mu_min + probe <= 0.0) probe = std::nextafter(-mu_min, std::numeric_limits<double>::infinity());
        z = coords(probe);
        if (z.norm() < radius) {
            // Hard case: the gradient has (numerically) no component along
            // the lowest eigenvector; move along it to reach the boundary.
            lambda = probe;
            const double rest = z.squaredNorm() - z(0) * z(0);
            const double along = std::sqrt(std::max(0.0, radius * radius - rest));
            z(0) = z(0) > 0.0 ? along : -along;
        } else {
            double left = probe;
            double right = lo + c.norm() / radius + scale;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (left + right);
                if (mid <= left || mid >= right) break;
                if (coords(mid).norm() > radius)
                    left = mid;
                else
                    right = mid;
            }
            lambda = right;
            z = coords(lambda);
        }
        z *= radius / z.norm();
        out.on_boundary = true;
    }

    out.multiplier = lambda;
    out.model = c.dot(z) + 0.5 * (mu.array() * z.array().square()).sum();
    out.h = V * z;
    return out;
}

}  // namespace detail

/// Approximately minimizes m(s) = gᵀs + ½ sᵀHs over ‖s‖ ≤ radius using only
/// products with H.
///
/// Starting from s = 0, this builds the Krylov space of (H, g) with Lanczos
/// (fully reorthogonalized, so at most max_iters + 1 basis vectors are kept)
/// and solves the subproblem restricted to it. While the restricted problem is
/// convex with an interior minimizer, iterates coincide with conjugate
/// gradients. Once CG would leave the region or meets negative curvature, the
/// iterate stays on the boundary and keeps improving as the space grows,
/// instead of stopping at the first crossing.
///
/// Stops when ‖(H + λI)s + g‖ ≤ rtol·‖g‖, when the Krylov space becomes
/// invariant, or after max_iters products.
///
/// `hv(v, out)` must write Hv into out.
template <class HessVec>
TrustRegionStep steihaug_cg(HessVec&& hv, std::span<const double> g, double radius, double rtol,
                            std::size_t max_iters) {
    const std::size_t n = g.size();
    TrustRegionStep result;
    result.step.assign(n, 0.0);
    const double gamma = norm2(g);
    if (gamma == 0.0 || max_iters == 0) {
        result.status = gamma == 0.0 ? TrustRegionStatus::interior : TrustRegionStatus::max_iters;
        return result;
    }

    std::vector<Vector> basis;
    basis.emplace_back(g.begin(), g.end());
    for (double& x : basis[0]) x /= gamma;

    std::vector<double> alpha, beta;
    Vector u(n);
    double scale = 0.0;
    bool saw_negative = false;
    detail::KrylovTrSolution sol;
    bool converged = false;

    for (std::size_t k = 0; k < max_iters; ++k) {
        const Vector& q = basis[k];
        hv(std::span<const double>(q), std::span<double>(u));
        const double a = dot(q, u);
        alpha.push_back(a);
        axpy(-a, q, u);
        if (k > 0) axpy(-beta[k - 1], basis[k - 1], u);
        for (int pass = 0; pass < 2; ++pass)
            for (const Vector& p : basis) axpy(-dot(p, u), p, u);
        const double b = norm2(u);
        scale = std::max({scale, std::abs(a), b});

        sol = detail::solve_tridiagonal_tr(alpha, beta, gamma, radius);
        saw_negative = saw_negative || sol.indefinite;
        result.iterations = k + 1;

        const bool invariant = b <= 1e-13 * scale;
        const double residual = invariant ? 0.0 : b * std::abs(sol.h(static_cast<Eigen::Index>(k)));
        if (invariant || residual <= rtol * gamma || !std::isfinite(b)) {
            converged = true;
            break;
        }
        if (k + 1 == max_iters) break;

        beta.push_back(b);
        basis.emplace_back(u.begin(), u.end());
        for (double& x : basis.back()) x /= b;
    }

    for (std::size_t j = 0; j < static_cast<std::size_t>(sol.h.size()); ++j)
        axpy(sol.h(static_cast<Eigen::Index>(j)), basis[j], result.step);
    if (sol.on_boundary) {
        const double len = norm2(result.step);
        if (len > 0.0)
            for (double& x : result.step) x *= radius / len;
    }

    result.model_value = sol.model;
    result.on_boundary = sol.on_boundary;
    result.multiplier = sol.multiplier;
    if (!converged)
        result.status = TrustRegionStatus::max_iters;
    else if (!sol.on_boundary)
        result.status = TrustRegionStatus::interior;
    else
        result.status = saw_negative ? TrustRegionStatus::neg_curvature : TrustRegionStatus::boundary;
    return result;
}

}  // namespace s2ml
