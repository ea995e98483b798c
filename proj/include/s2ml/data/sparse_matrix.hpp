#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace s2ml {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Compressed sparse row matrix. Column indices are 0-based.
struct SparseMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<std::size_t> row_offsets{0};
    std::vector<std::uint32_t> col_indices;
    std::vector<double> values;

    std::size_t nnz() const noexcept { return values.size(); }

    std::span<const std::uint32_t> row_indices(std::size_t row) const noexcept {
        return {col_indices.data() + row_offsets[row], row_offsets[row + 1] - row_offsets[row]};
    }
    std::span<const double> row_values(std::size_t row) const noexcept {
        return {values.data() + row_offsets[row], row_offsets[row + 1] - row_offsets[row]};
    }

    /// Throws Error describing the first violated CSR invariant.
    void validate() const {
        if (row_offsets.size() != n_rows + 1)
            throw Error("csr: row_offsets has " + std::to_string(row_offsets.size()) +
                        " entries, expected " + std::to_string(n_rows + 1));
        if (row_offsets.front() != 0) throw Error("csr: row_offsets[0] != 0");
        if (col_indices.size() != values.size())
            throw Error("csr: col_indices and values differ in length");
        if (row_offsets.back() != values.size())
            throw Error("csr: row_offsets[n_rows] != nnz");
        for (std::size_t r = 0; r < n_rows; ++r) {
            if (row_offsets[r + 1] < row_offsets[r])
                throw Error("csr: row_offsets decreases at row " + std::to_string(r));
            for (std::size_t k = row_offsets[r]; k < row_offsets[r + 1]; ++k) {
                if (col_indices[k] >= n_cols)
                    throw Error("csr: column index out of range in row " + std::to_string(r));
                if (k > row_offsets[r] && col_indices[k] <= col_indices[k - 1])
                    throw Error("csr: column indices not strictly increasing in row " +
                                std::to_string(r));
            }
        }
    }

    friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;
};

/// Σ_k values[k] · v[col_indices[k]] over one row. `v` must hold at least n_cols entries.
inline double row_dot(const SparseMatrix& m, std::size_t row, std::span<const double> v) noexcept {
    assert(row < m.n_rows);
    assert(v.size() >= m.n_cols);
    double acc = 0.0;
    const std::size_t end = m.row_offsets[row + 1];
    for (std::size_t k = m.row_offsets[row]; k < end; ++k) acc += m.values[k] * v[m.col_indices[k]];
    return acc;
}

/// out += scale · x_row
inline void row_axpy(const SparseMatrix& m, std::size_t row, double scale, std::span<double> out) noexcept {
    const std::size_t end = m.row_offsets[row + 1];
    for (std::size_t k = m.row_offsets[row]; k < end; ++k) out[m.col_indices[k]] += scale * m.values[k];
}

/// Binary-labelled examples. Labels are exactly -1 or +1.
struct Dataset {
    SparseMatrix features;
    std::vector<signed char> labels;

    std::size_t n_rows() const noexcept { return features.n_rows; }
    std::size_t n_cols() const noexcept { return features.n_cols; }

    void validate() const {
        features.validate();
        if (labels.size() != features.n_rows)
            throw Error("dataset: " + std::to_string(labels.size()) + " labels for " +
                        std::to_string(features.n_rows) + " rows");
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] != 1 && labels[i] != -1)
                throw Error("dataset: label of row " + std::to_string(i) + " is not +1/-1");
    }

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Copy of `ds` keeping only features with index < n_cols.
inline Dataset restrict_columns(const Dataset& ds, std::size_t n_cols) {
    Dataset out;
    out.labels = ds.labels;
    const SparseMatrix& m = ds.features;
    out.features.n_rows = m.n_rows;
    out.features.n_cols = n_cols;
    out.features.row_offsets.reserve(m.n_rows + 1);
    for (std::size_t i = 0; i < m.n_rows; ++i) {
        for (std::size_t k = m.row_offsets[i]; k < m.row_offsets[i + 1]; ++k)
            if (m.col_indices[k] < n_cols) {
                out.features.col_indices.push_back(m.col_indices[k]);
                out.features.values.push_back(m.values[k]);
            }
        out.features.row_offsets.push_back(out.features.values.size());
    }
    return out;
}

}  // namespace s2ml
