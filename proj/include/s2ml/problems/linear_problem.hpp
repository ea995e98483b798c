#pragma once

#include "s2ml/detail/reduce.hpp"
#include "s2ml/problems/problem.hpp"

#include <algorithm>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace s2ml {

/// L2-regularized linear model
///
///     F(w) = (1/|B|) Σ_{i∈B} loss(y_i · w·x̃_i) + (λ/2) ‖w‖²
///
/// where x̃_i is x_i with a trailing constant 1 when `add_bias` is set. The
/// bias coordinate is excluded from the regularizer.
///
/// `Loss` supplies, as functions of the margin m (and a margin change δ):
///   value(m), slope(m) = d/dm value, curvature(m) = d²/dm² value
///   (generalized where value is only once differentiable), and
///   change(m, δ) = value(m + δ) − value(m) evaluated without cancellation.
///
/// The dataset is referenced, not copied, and must outlive the problem.
template <class Loss>
class LinearProblem final : public Problem {
public:
    using Problem::gradient;
    using Problem::objective;

    LinearProblem(const Dataset& data, double lambda, bool add_bias = false, ExecutionPolicy policy = {})
        : data_(&data), lambda_(lambda), add_bias_(add_bias), policy_(policy) {
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error("lambda must be finite and >= 0");
        if (data.n_rows() == 0) throw Error("problem: dataset has no rows");
    }
    LinearProblem(Dataset&&, double, bool = false, ExecutionPolicy = {}) = delete;

    std::size_t dimension() const override { return data_->n_cols() + (add_bias_ ? 1 : 0); }
    std::size_t num_samples() const override { return data_->n_rows(); }
    double lambda() const noexcept { return lambda_; }
    bool add_bias() const noexcept { return add_bias_; }
    const Dataset& data() const noexcept { return *data_; }

    double margin(std::size_t row, std::span<const double> w) const noexcept {
        double z = row_dot(data_->features, row, w);
        if (add_bias_) z += w[data_->n_cols()];
        return data_->labels[row] * z;
    }

    double objective(std::span<const double> w, const Batch& batch) const override {
        check(w, batch);
        const std::size_t m = batch.size(num_samples());
        const auto loss = detail::reduce_range<detail::CompensatedSum>(
            m, policy_, kScalarBlock, [] { return detail::CompensatedSum{}; },
            [&](detail::CompensatedSum& acc, std::size_t begin, std::size_t end) {
                for (std::size_t k = begin; k < end; ++k) acc.add(Loss::value(margin(batch.row(k), w)));
            },
            [](detail::CompensatedSum& a, const detail::CompensatedSum& b) { a.merge(b); });
        return loss.value() / static_cast<double>(m) + 0.5 * lambda_ * regularized_sq_norm(w);
    }

    void gradient(std::span<const double> w, const Batch& batch, std::span<double> out) const override {
        check(w, batch);
        const std::size_t m = batch.size(num_samples());
        const Vector acc = reduce_vectors(m, [&](Vector& g, std::size_t begin, std::size_t end) {
            for (std::size_t k = begin; k < end; ++k) {
                const std::size_t i = batch.row(k);
                const double coef = Loss::slope(margin(i, w)) * data_->labels[i];
                if (coef != 0.0) scatter(i, coef, g);
            }
        });
        finish(acc, m, w, out);
    }

    HessianOperator hessian_at(std::span<const double> w, const Batch& batch) const override {
        check(w, batch);
        const std::size_t m = batch.size(num_samples());
        struct Curvature {
            std::vector<std::size_t> rows;
            std::vector<double> weight;
        };
        auto cache = std::make_shared<Curvature>();
        for (std::size_t k = 0; k < m; ++k) {
            const std::size_t i = batch.row(k);
            const double c = Loss::curvature(margin(i, w));
            if (c != 0.0) {
                cache->rows.push_back(i);
                cache->weight.push_back(c);
            }
        }
        return HessianOperator(
            [this, cache, m](std::span<const double> v, std::span<double> out) {
                const Vector acc = reduce_vectors(cache->rows.size(), [&](Vector& hv, std::size_t begin, std::size_t end) {
                    for (std::size_t k = begin; k < end; ++k) {
                        const std::size_t i = cache->rows[k];
                        double xv = row_dot(data_->features, i, v);
                        if (add_bias_) xv += v[data_->n_cols()];
                        scatter(i, cache->weight[k] * xv, hv);
                    }
                });
                finish(acc, m, v, out);
            },
            m);
    }

    double objective_change(std::span<const double> w, std::span<const double> s) const override {
        check(w, Batch::full());
        const std::size_t n = num_samples();
        const auto loss = detail::reduce_range<detail::CompensatedSum>(
            n, policy_, kScalarBlock, [] { return detail::CompensatedSum{}; },
            [&](detail::CompensatedSum& acc, std::size_t begin, std::size_t end) {
                for (std::size_t i = begin; i < end; ++i) acc.add(Loss::change(margin(i, w), margin(i, s)));
            },
            [](detail::CompensatedSum& a, const detail::CompensatedSum& b) { a.merge(b); });
        // (λ/2)(‖w+s‖² − ‖w‖²) = λ (w·s + ½‖s‖²)
        const std::size_t d = data_->n_cols();
        double ws = 0.0, ss = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            ws += w[j] * s[j];
            ss += s[j] * s[j];
        }
        return loss.value() / static_cast<double>(n) + lambda_ * (ws + 0.5 * ss);
    }

private:
    static constexpr std::size_t kScalarBlock = 256;

    void check(std::span<const double> w, const Batch& batch) const {
        if (w.size() != dimension())
            throw Error("problem: vector of length " + std::to_string(w.size()) + ", expected " +
                        std::to_string(dimension()));
        batch.check_against(num_samples());
    }

    double regularized_sq_norm(std::span<const double> w) const noexcept {
        return dot(w.first(data_->n_cols()), w.first(data_->n_cols()));
    }

    void scatter(std::size_t row, double coef, Vector& out) const noexcept {
        row_axpy(data_->features, row, coef, out);
        if (add_bias_) out[data_->n_cols()] += coef;
    }

    template <class Body>
    Vector reduce_vectors(std::size_t count, Body body) const {
        const std::size_t dim = dimension();
        return detail::reduce_range<Vector>(
            count, policy_, std::max<std::size_t>(256, dim / 4), [dim] { return Vector(dim, 0.0); }, body,
            [](Vector& a, const Vector& b) {
                for (std::size_t j = 0; j < a.size(); ++j) a[j] += b[j];
            });
    }

    // out = acc / m + λ·(v without bias coordinate)
    void finish(const Vector& acc, std::size_t m, std::span<const double> v, std::span<double> out) const noexcept {
        const double inv = 1.0 / static_cast<double>(m);
        const std::size_t d = data_->n_cols();
        for (std::size_t j = 0; j < d; ++j) out[j] = acc[j] * inv + lambda_ * v[j];
        if (add_bias_) out[d] = acc[d] * inv;
    }

    const Dataset* data_;
    double lambda_;
    bool add_bias_;
    ExecutionPolicy policy_;
};

}  // namespace s2ml
