#pragma once

#include "s2ml/problems/linear_problem.hpp"

#include <cmath>

namespace s2ml {

/// log(1 + exp(−m))
struct LogisticLoss {
    static constexpr const char* name = "logistic";

    static double value(double m) noexcept {
        if (m < -30.0) return -m + std::log1p(std::exp(m));
        return std::log1p(std::exp(-m));
    }

    // σ(t) = 1 / (1 + e^{−t}) without overflow.
    static double sigmoid(double t) noexcept {
        if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
        const double e = std::exp(t);
        return e / (1.0 + e);
    }

    static double slope(double m) noexcept { return -sigmoid(-m); }
    static double curvature(double m) noexcept { return sigmoid(m) * sigmoid(-m); }

    // log((1 + e^{−m−δ}) / (1 + e^{−m})) = log1p(σ(−m) · expm1(−δ))
    static double change(double m, double delta) noexcept {
        if (std::abs(delta) <= 30.0) {
            const double r = std::log1p(sigmoid(-m) * std::expm1(-delta));
            if (std::isfinite(r)) return r;
        }
        return value(m + delta) - value(m);
    }
};

using LogisticRegression = LinearProblem<LogisticLoss>;

}  // namespace s2ml
