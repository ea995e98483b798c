#pragma once

#include "s2ml/problems/problem.hpp"

#include <memory>
#include <string>

namespace s2ml {

/// F(w) = ½ wᵀAw − bᵀw + c with dense symmetric A. Batches are ignored.
class QuadraticProblem final : public Problem {
public:
    using Problem::gradient;
    using Problem::objective;

    QuadraticProblem(std::vector<Vector> a, Vector b, double c = 0.0)
        : a_(std::move(a)), b_(std::move(b)), c_(c) {
        for (const auto& row : a_)
            if (row.size() != b_.size()) throw Error("quadratic: A is not square or does not match b");
        if (a_.size() != b_.size()) throw Error("quadratic: A is not square or does not match b");
    }

    /// ½‖w − center‖²
    static QuadraticProblem centered(const Vector& center) {
        const std::size_t d = center.size();
        std::vector<Vector> a(d, Vector(d, 0.0));
        for (std::size_t j = 0; j < d; ++j) a[j][j] = 1.0;
        return QuadraticProblem(std::move(a), center, 0.5 * dot(center, center));
    }

    /// ½ wᵀ diag(diag) w
    static QuadraticProblem diagonal(const Vector& diag) {
        const std::size_t d = diag.size();
        std::vector<Vector> a(d, Vector(d, 0.0));
        for (std::size_t j = 0; j < d; ++j) a[j][j] = diag[j];
        return QuadraticProblem(std::move(a), Vector(d, 0.0));
    }

    std::size_t dimension() const override { return b_.size(); }
    std::size_t num_samples() const override { return 1; }

    double objective(std::span<const double> w, const Batch&) const override {
        const Vector aw = multiply(w);
        return 0.5 * dot(w, aw) - dot(b_, w) + c_;
    }

    void gradient(std::span<const double> w, const Batch&, std::span<double> out) const override {
        const Vector aw = multiply(w);
        for (std::size_t j = 0; j < aw.size(); ++j) out[j] = aw[j] - b_[j];
    }

    HessianOperator hessian_at(std::span<const double>, const Batch&) const override {
        return HessianOperator(
            [this](std::span<const double> v, std::span<double> out) {
                const Vector av = multiply(v);
                std::copy(av.begin(), av.end(), out.begin());
            },
            1);
    }

    // (Aw − b)ᵀs + ½ sᵀAs
    double objective_change(std::span<const double> w, std::span<const double> s) const override {
        const Vector aw = multiply(w);
        const Vector as = multiply(s);
        double acc = 0.0;
        for (std::size_t j = 0; j < s.size(); ++j) acc += (aw[j] - b_[j]) * s[j] + 0.5 * s[j] * as[j];
        return acc;
    }

private:
    Vector multiply(std::span<const double> v) const {
        if (v.size() != b_.size()) throw Error("quadratic: dimension mismatch");
        Vector out(v.size(), 0.0);
        for (std::size_t r = 0; r < a_.size(); ++r) out[r] = dot(a_[r], v);
        return out;
    }

    std::vector<Vector> a_;
    Vector b_;
    double c_;
};

}  // namespace s2ml
