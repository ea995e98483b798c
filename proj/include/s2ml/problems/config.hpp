#pragma once

#include "s2ml/problems/logistic.hpp"
#include "s2ml/problems/squared_hinge.hpp"

#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace s2ml {

enum class ProblemKind { logistic, svm_l2 };

inline std::string_view to_string(ProblemKind kind) {
    return kind == ProblemKind::logistic ? "logistic" : "svm-l2";
}

inline std::optional<ProblemKind> parse_problem_kind(std::string_view s) {
    if (s == "logistic") return ProblemKind::logistic;
    if (s == "svm-l2") return ProblemKind::svm_l2;
    return std::nullopt;
}

struct ProblemConfig {
    ProblemKind kind = ProblemKind::logistic;
    /// L2 weight; 1/n when unset.
    std::optional<double> lambda;
    bool add_bias = false;

    double resolved_lambda(std::size_t n_rows) const {
        return lambda.value_or(1.0 / static_cast<double>(n_rows));
    }

    void validate() const {
        if (lambda && !(*lambda >= 0.0 && std::isfinite(*lambda)))
            throw Error("lambda must be finite and >= 0");
    }
};

/// The problem refers to `data`, which must outlive it.
inline std::unique_ptr<Problem> make_problem(const ProblemConfig& config, const Dataset& data,
                                             ExecutionPolicy policy = {}) {
    config.validate();
    const double lambda = config.resolved_lambda(data.n_rows());
    switch (config.kind) {
        case ProblemKind::logistic:
            return std::make_unique<LogisticRegression>(data, lambda, config.add_bias, policy);
        case ProblemKind::svm_l2:
            return std::make_unique<SquaredHingeSvm>(data, lambda, config.add_bias, policy);
    }
    throw Error("unknown problem kind");
}
std::unique_ptr<Problem> make_problem(const ProblemConfig&, Dataset&&, ExecutionPolicy = {}) = delete;

/// Fraction of rows with sign(w·x̃_i) == y_i, where sign(0) = +1.
inline double predict_accuracy(const ProblemConfig& config, const Dataset& data, std::span<const double> w) {
    if (config.add_bias && w.empty()) throw Error("accuracy: empty model with bias");
    const std::size_t feature_dim = w.size() - (config.add_bias ? 1 : 0);
    if (data.n_cols() > feature_dim)
        throw Error("accuracy: data has " + std::to_string(data.n_cols()) + " features, model has " +
                    std::to_string(feature_dim));
    if (data.n_rows() == 0) throw Error("accuracy: dataset has no rows");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
        double z = row_dot(data.features, i, w);
        if (config.add_bias) z += w[feature_dim];
        const int predicted = z >= 0.0 ? 1 : -1;
        if (predicted == data.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.n_rows());
}

}  // namespace s2ml
