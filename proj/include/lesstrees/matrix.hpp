#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lesstrees {

/// Dense n x d real matrix. Rows are samples, columns are features.
///
/// Storage is column-major so that per-feature scans (column norms, split
/// search, Gram products) walk contiguous memory. Every entry is finite; the
/// constructors reject NaN/Inf. There is no mutable element access, so a
/// constructed matrix can be shared freely between threads.
class DataMatrix {
public:
    /// Takes ownership of `column_major` (size rows * cols).
    DataMatrix(std::size_t rows, std::size_t cols, std::vector<double> column_major);

    static DataMatrix from_rows(const std::vector<std::vector<double>>& rows);
    static DataMatrix zeros(std::size_t rows, std::size_t cols);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[j * rows_ + i]; }
    double at(std::size_t i, std::size_t j) const;

    std::span<const double> column(std::size_t j) const noexcept {
        return {data_.data() + j * rows_, rows_};
    }
    std::vector<double> row(std::size_t i) const;
    void copy_row(std::size_t i, std::span<double> out) const;

    std::span<const double> values() const noexcept { return data_; }

    DataMatrix select_columns(std::span<const std::size_t> columns) const;
    DataMatrix select_rows(std::span<const std::size_t> rows) const;
    DataMatrix scaled(double factor) const;

    friend bool operator==(const DataMatrix&, const DataMatrix&) = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

/// Top singular triplets of a matrix, right side only.
struct SvdFactors {
    std::size_t rank = 0;              // effective truncation rank r
    std::size_t n_features = 0;        // length of each right vector (d)
    std::vector<double> singular_values;  // non-increasing, length r
    std::vector<double> right_vectors;    // d x r, column-major; column i is v_i

    std::span<const double> right_vector(std::size_t i) const noexcept {
        return {right_vectors.data() + i * n_features, n_features};
    }
};

struct SvdOptions {
    std::uint64_t seed = 0x5eedULL;
    std::size_t max_iterations = 300;
    double residual_tol = 1e-12;  // relative to the largest Ritz value
    std::size_t oversample = 10;
    bool parallel = true;
};

/// Entry j is the sum of squares of column j.
std::vector<double> column_squared_norms(const DataMatrix& a);

/// Top min(max_rank, numerical rank) right singular triplets of `a`, by
/// subspace iteration with Rayleigh-Ritz acceleration and a one-sided Jacobi
/// finish. Iteration stops once the wanted Ritz residuals fall below
/// residual_tol. Numerical rank counts singular values above rank_tol * sigma_max.
/// Throws DegenerateInput for an all-zero matrix.
SvdFactors truncated_svd(const DataMatrix& a, std::size_t max_rank, double rank_tol = 1e-10,
                         const SvdOptions& options = {});

}  // namespace lesstrees
