#include "lesstrees/matrix.hpp"

#include <cmath>
#include <string>

#include "lesstrees/error.hpp"
#include "lesstrees/kernels.hpp"

namespace lesstrees {

DataMatrix::DataMatrix(std::size_t rows, std::size_t cols, std::vector<double> column_major)
    : rows_(rows), cols_(cols), data_(std::move(column_major)) {
    if (rows_ == 0 || cols_ == 0) throw InvalidArgument("DataMatrix: empty shape");
    if (data_.size() != rows_ * cols_)
        throw InvalidArgument("DataMatrix: expected " + std::to_string(rows_ * cols_) + " values, got " +
                              std::to_string(data_.size()));
    for (std::size_t k = 0; k < data_.size(); ++k) {
        if (!std::isfinite(data_[k]))
            throw InvalidArgument("DataMatrix: non-finite value at (" + std::to_string(k % rows_) + ", " +
                                  std::to_string(k / rows_) + ")");
    }
}

DataMatrix DataMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty() || rows.front().empty()) throw InvalidArgument("DataMatrix: empty shape");
    const std::size_t n = rows.size();
    const std::size_t d = rows.front().size();
    std::vector<double> values(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != d)
            throw InvalidArgument("DataMatrix: row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                                  " values, expected " + std::to_string(d));
        for (std::size_t j = 0; j < d; ++j) values[j * n + i] = rows[i][j];
    }
    return DataMatrix(n, d, std::move(values));
}

DataMatrix DataMatrix::zeros(std::size_t rows, std::size_t cols) {
    return DataMatrix(rows, cols, std::vector<double>(rows * cols, 0.0));
}

double DataMatrix::at(std::size_t i, std::size_t j) const {
    if (i >= rows_ || j >= cols_)
        throw InvalidArgument("DataMatrix: index (" + std::to_string(i) + ", " + std::to_string(j) +
                              ") out of range");
    return (*this)(i, j);
}

std::vector<double> DataMatrix::row(std::size_t i) const {
    std::vector<double> out(cols_);
    copy_row(i, out);
    return out;
}

void DataMatrix::copy_row(std::size_t i, std::span<double> out) const {
    for (std::size_t j = 0; j < cols_; ++j) out[j] = data_[j * rows_ + i];
}

DataMatrix DataMatrix::select_columns(std::span<const std::size_t> columns) const {
    std::vector<double> values;
    values.reserve(rows_ * columns.size());
    for (std::size_t j : columns) {
        if (j >= cols_) throw InvalidArgument("DataMatrix: column " + std::to_string(j) + " out of range");
        const auto c = column(j);
        values.insert(values.end(), c.begin(), c.end());
    }
    return DataMatrix(rows_, columns.size(), std::move(values));
}

DataMatrix DataMatrix::select_rows(std::span<const std::size_t> rows) const {
    std::vector<double> values(rows.size() * cols_);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r] >= rows_) throw InvalidArgument("DataMatrix: row " + std::to_string(rows[r]) + " out of range");
    }
    for (std::size_t j = 0; j < cols_; ++j)
        for (std::size_t r = 0; r < rows.size(); ++r) values[j * rows.size() + r] = data_[j * rows_ + rows[r]];
    return DataMatrix(rows.size(), cols_, std::move(values));
}

DataMatrix DataMatrix::scaled(double factor) const {
    std::vector<double> values(data_);
    for (double& v : values) v *= factor;
    return DataMatrix(rows_, cols_, std::move(values));
}

std::vector<double> column_squared_norms(const DataMatrix& a) {
    std::vector<double> out(a.cols());
    kernels::parallel::column_squared_norms(a, out);
    return out;
}

}  // namespace lesstrees
