#pragma once

#include "s2ml/data/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace s2ml {

using Vector = std::vector<double>;

/// Rows an oracle evaluates over: every row, or a sorted set of distinct row indices.
class Batch {
public:
    static Batch full() { return Batch{}; }

    static Batch of(std::vector<std::size_t> rows) {
        if (rows.empty()) throw Error("batch: empty index set");
        for (std::size_t k = 1; k < rows.size(); ++k)
            if (rows[k] <= rows[k - 1]) throw Error("batch: indices must be sorted and distinct");
        Batch b;
        b.rows_ = std::move(rows);
        b.is_full_ = false;
        return b;
    }

    bool is_full() const noexcept { return is_full_; }
    std::span<const std::size_t> rows() const noexcept { return rows_; }
    std::size_t size(std::size_t n_total) const noexcept { return is_full_ ? n_total : rows_.size(); }
    std::size_t row(std::size_t k) const noexcept { return is_full_ ? k : rows_[k]; }

    void check_against(std::size_t n_total) const {
        if (!is_full_ && rows_.back() >= n_total)
            throw Error("batch: row index " + std::to_string(rows_.back()) + " out of range");
        if (is_full_ && n_total == 0) throw Error("batch: no rows");
    }

private:
    Batch() = default;
    std::vector<std::size_t> rows_;
    bool is_full_ = true;
};

/// v ↦ Hv for a Hessian fixed at some point. `rows_per_apply` is the number of
/// data rows each application touches (the cost proxy reported by solvers).
class HessianOperator {
public:
    using Apply = std::function<void(std::span<const double>, std::span<double>)>;

    HessianOperator(Apply apply, std::size_t rows_per_apply)
        : apply_(std::move(apply)), rows_per_apply_(rows_per_apply) {}

    void apply(std::span<const double> v, std::span<double> out) const {
        apply_(v, out);
        ++applications_;
    }
    Vector operator()(std::span<const double> v) const {
        Vector out(v.size());
        apply(v, out);
        return out;
    }

    std::size_t rows_per_apply() const noexcept { return rows_per_apply_; }
    std::size_t applications() const noexcept { return applications_; }
    std::size_t rows_touched() const noexcept { return rows_per_apply_ * applications_; }

private:
    Apply apply_;
    std::size_t rows_per_apply_;
    mutable std::size_t applications_ = 0;
};

/// Smooth objective F(w) = (1/|B|) Σ_{i∈B} f_i(w) + regularizer, queried by the solvers.
class Problem {
public:
    virtual ~Problem() = default;

    virtual std::size_t dimension() const = 0;
    /// Number of samples n that a Batch indexes into.
    virtual std::size_t num_samples() const = 0;

    virtual double objective(std::span<const double> w, const Batch& batch) const = 0;
    virtual void gradient(std::span<const double> w, const Batch& batch, std::span<double> out) const = 0;
    virtual HessianOperator hessian_at(std::span<const double> w, const Batch& batch) const = 0;

    /// F(w + s) − F(w) on all samples. Overrides avoid the cancellation of
    /// subtracting two nearly equal objective values.
    virtual double objective_change(std::span<const double> w, std::span<const double> s) const {
        Vector moved(w.begin(), w.end());
        for (std::size_t j = 0; j < moved.size(); ++j) moved[j] += s[j];
        return objective(moved, Batch::full()) - objective(w, Batch::full());
    }

    double objective(std::span<const double> w) const { return objective(w, Batch::full()); }

    Vector gradient(std::span<const double> w, const Batch& batch = Batch::full()) const {
        Vector g(dimension());
        gradient(w, batch, g);
        return g;
    }

    Vector hess_vec(std::span<const double> w, std::span<const double> v,
                    const Batch& batch = Batch::full()) const {
        return hessian_at(w, batch)(v);
    }
};

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) acc += a[j] * b[j];
    return acc;
}

inline double norm2(std::span<const double> a) noexcept { return std::sqrt(dot(a, a)); }

/// y += alpha · x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
    for (std::size_t j = 0; j < x.size(); ++j) y[j] += alpha * x[j];
}

}  // namespace s2ml
