#include "lesstrees/kernels.hpp"

#include <cassert>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lesstrees::kernels {

namespace {

double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

// Single output column of A * x.
void multiply_column(const DataMatrix& a, const Block& x, std::size_t c, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t j = 0; j < a.cols(); ++j) {
        const double w = x(j, c);
        if (w == 0.0) continue;
        const auto col = a.column(j);
        for (std::size_t i = 0; i < a.rows(); ++i) out[i] += w * col[i];
    }
}

void symmetric_multiply_column(const Block& s, const Block& x, std::size_t c, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t j = 0; j < s.cols; ++j) {
        const double w = x(j, c);
        if (w == 0.0) continue;
        const auto col = s.column(j);
        for (std::size_t i = 0; i < s.rows; ++i) out[i] += w * col[i];
    }
}

void gram_column(const DataMatrix& a, std::size_t j, Block& out) {
    const auto cj = a.column(j);
    for (std::size_t l = 0; l <= j; ++l) {
        const double v = dot(a.column(l), cj);
        out(l, j) = v;
        out(j, l) = v;
    }
}

}  // namespace

namespace serial {

void column_squared_norms(const DataMatrix& a, std::span<double> out) {
    assert(out.size() == a.cols());
    for (std::size_t j = 0; j < a.cols(); ++j) {
        const auto c = a.column(j);
        out[j] = dot(c, c);
    }
}

void multiply(const DataMatrix& a, const Block& x, Block& out) {
    assert(x.rows == a.cols());
    out = Block(a.rows(), x.cols);
    for (std::size_t c = 0; c < x.cols; ++c) multiply_column(a, x, c, out.column(c));
}

void multiply_transpose(const DataMatrix& a, const Block& y, Block& out) {
    assert(y.rows == a.rows());
    out = Block(a.cols(), y.cols);
    for (std::size_t c = 0; c < y.cols; ++c)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, c) = dot(a.column(j), y.column(c));
}

void gram(const DataMatrix& a, Block& out) {
    out = Block(a.cols(), a.cols());
    for (std::size_t j = 0; j < a.cols(); ++j) gram_column(a, j, out);
}

void symmetric_multiply(const Block& s, const Block& x, Block& out) {
    assert(s.rows == s.cols && x.rows == s.cols);
    out = Block(s.rows, x.cols);
    for (std::size_t c = 0; c < x.cols; ++c) symmetric_multiply_column(s, x, c, out.column(c));
}

}  // namespace serial

namespace parallel {

void column_squared_norms(const DataMatrix& a, std::span<double> out) {
    assert(out.size() == a.cols());
    const auto d = static_cast<std::ptrdiff_t>(a.cols());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < d; ++j) {
        const auto c = a.column(static_cast<std::size_t>(j));
        out[static_cast<std::size_t>(j)] = dot(c, c);
    }
}

void multiply(const DataMatrix& a, const Block& x, Block& out) {
    assert(x.rows == a.cols());
    out = Block(a.rows(), x.cols);
    const auto p = static_cast<std::ptrdiff_t>(x.cols);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < p; ++c)
        multiply_column(a, x, static_cast<std::size_t>(c), out.column(static_cast<std::size_t>(c)));
}

void multiply_transpose(const DataMatrix& a, const Block& y, Block& out) {
    assert(y.rows == a.rows());
    out = Block(a.cols(), y.cols);
    const auto d = static_cast<std::ptrdiff_t>(a.cols());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < d; ++j) {
        const auto col = a.column(static_cast<std::size_t>(j));
        for (std::size_t c = 0; c < y.cols; ++c) out(static_cast<std::size_t>(j), c) = dot(col, y.column(c));
    }
}

void gram(const DataMatrix& a, Block& out) {
    out = Block(a.cols(), a.cols());
    const auto d = static_cast<std::ptrdiff_t>(a.cols());
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t j = 0; j < d; ++j) gram_column(a, static_cast<std::size_t>(j), out);
}

void symmetric_multiply(const Block& s, const Block& x, Block& out) {
    assert(s.rows == s.cols && x.rows == s.cols);
    out = Block(s.rows, x.cols);
    const auto p = static_cast<std::ptrdiff_t>(x.cols);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < p; ++c)
        symmetric_multiply_column(s, x, static_cast<std::size_t>(c), out.column(static_cast<std::size_t>(c)));
}

}  // namespace parallel

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace lesstrees::kernels
