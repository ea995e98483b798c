#pragma once

#include "s2ml/problems/linear_problem.hpp"

namespace s2ml {

/// max(0, 1 − m)², the L2-loss SVM. Curvature is the generalized second
/// derivative with the active set {m < 1}.
struct SquaredHingeLoss {
    static constexpr const char* name = "svm-l2";

    static double value(double m) noexcept {
        const double slack = 1.0 - m;
        return slack > 0.0 ? slack * slack : 0.0;
    }
    static double slope(double m) noexcept { return m < 1.0 ? -2.0 * (1.0 - m) : 0.0; }
    static double curvature(double m) noexcept { return m < 1.0 ? 2.0 : 0.0; }

    static double change(double m, double delta) noexcept {
        const double before = 1.0 - m;
        const double after = before - delta;
        if (before > 0.0 && after > 0.0) return -delta * (before + after);
        return value(m + delta) - value(m);
    }
};

using SquaredHingeSvm = LinearProblem<SquaredHingeLoss>;

}  // namespace s2ml
