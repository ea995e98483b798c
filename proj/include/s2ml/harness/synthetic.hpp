#pragma once

#include "s2ml/data/libsvm.hpp"

#include <cstdint>
#include <random>

namespace s2ml {

struct SyntheticSpec {
    std::size_t n_rows = 1000;
    std::size_t n_cols = 20;
    /// Probability that a feature is present in a row.
    double density = 1.0;
    /// Probability that a label is flipped after thresholding.
    double label_noise = 0.05;
    std::uint64_t seed = 1;
};

/// Gaussian features, labels from the sign of a planted Gaussian weight vector.
inline Dataset make_synthetic_dataset(const SyntheticSpec& spec) {
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<double> planted(spec.n_cols);
    for (double& v : planted) v = normal(rng);

    DatasetBuilder builder;
    for (std::size_t i = 0; i < spec.n_rows; ++i) {
        LibsvmRow row{};
        double score = 0.0;
        for (std::size_t j = 0; j < spec.n_cols; ++j) {
            if (spec.density < 1.0 && unit(rng) >= spec.density) continue;
            const double v = normal(rng);
            row.entries.push_back({j + 1, v});
            score += v * planted[j];
        }
        row.label = score >= 0.0 ? 1 : -1;
        if (unit(rng) < spec.label_noise) row.label = static_cast<signed char>(-row.label);
        builder.add_row(std::move(row));
    }
    return std::move(builder).finish(spec.n_cols);
}

}  // namespace s2ml
