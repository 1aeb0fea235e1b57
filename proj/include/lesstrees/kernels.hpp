#pragma once

// Data-parallel inner loops used by the scoring and ensemble code. Each
// kernel has a serial reference and an OpenMP version. Parallel versions
// split work over output entries only (no cross-thread reductions), so they
// are bitwise identical to the serial ones for any thread count.

#include <cstddef>
#include <span>
#include <vector>

#include "lesstrees/matrix.hpp"

namespace lesstrees::kernels {

/// Column-major rows x cols block of doubles.
struct Block {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Block() = default;
    Block(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) noexcept { return data[j * rows + i]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data[j * rows + i]; }
    std::span<double> column(std::size_t j) noexcept { return {data.data() + j * rows, rows}; }
    std::span<const double> column(std::size_t j) const noexcept {
        return {data.data() + j * rows, rows};
    }
};

namespace serial {
void column_squared_norms(const DataMatrix& a, std::span<double> out);
/// out (n x p) = A (n x d) * x (d x p)
void multiply(const DataMatrix& a, const Block& x, Block& out);
/// out (d x p) = A^T (d x n) * y (n x p)
void multiply_transpose(const DataMatrix& a, const Block& y, Block& out);
/// out (d x d) = A^T A
void gram(const DataMatrix& a, Block& out);
/// out (m x p) = s (m x m, symmetric) * x (m x p)
void symmetric_multiply(const Block& s, const Block& x, Block& out);
}  // namespace serial

namespace parallel {
void column_squared_norms(const DataMatrix& a, std::span<double> out);
void multiply(const DataMatrix& a, const Block& x, Block& out);
void multiply_transpose(const DataMatrix& a, const Block& y, Block& out);
void gram(const DataMatrix& a, Block& out);
void symmetric_multiply(const Block& s, const Block& x, Block& out);
}  // namespace parallel

/// Number of OpenMP worker threads available (1 without OpenMP).
int max_threads();

}  // namespace lesstrees::kernels
