#include <algorithm>
#include <cmath>
#include <numeric>

#include "lesstrees/error.hpp"
#include "lesstrees/kernels.hpp"
#include "lesstrees/matrix.hpp"
#include "lesstrees/rng.hpp"

namespace lesstrees {

namespace {

using kernels::Block;

double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double norm(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void fill_normal(std::span<double> x, SeededRng& rng) {
    for (double& v : x) v = rng.normal();
}

// Modified Gram-Schmidt with one reorthogonalization pass. A column that is
// numerically dependent on its predecessors is replaced by a random vector
// orthogonal to them, so the block always stays orthonormal.
void orthonormalize(Block& q, SeededRng& rng) {
    for (std::size_t c = 0; c < q.cols; ++c) {
        auto col = q.column(c);
        for (int attempt = 0;; ++attempt) {
            const double before = norm(col);
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t prev = 0; prev < c; ++prev) {
                    const auto pc = q.column(prev);
                    const double proj = dot(pc, col);
                    for (std::size_t i = 0; i < q.rows; ++i) col[i] -= proj * pc[i];
                }
            }
            const double after = norm(col);
            if (before > 0.0 && after > 1e-10 * before) {
                for (double& v : col) v /= after;
                break;
            }
            if (attempt > 8) throw Error("truncated_svd: failed to complete an orthonormal basis");
            fill_normal(col, rng);
        }
    }
}

// Applies the rotation [c s; -s c] to columns p and q of `m`.
void rotate_columns(Block& m, std::size_t p, std::size_t q, double c, double s) {
    auto cp = m.column(p);
    auto cq = m.column(q);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double a = cp[i];
        const double b = cq[i];
        cp[i] = c * a - s * b;
        cq[i] = s * a + c * b;
    }
}

// tan of the Jacobi angle that zeroes the off-diagonal of [[a, g], [g, b]].
double jacobi_tangent(double a, double b, double g) {
    const double theta = (b - a) / (2.0 * g);
    const double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
    return theta >= 0.0 ? t : -t;
}

// Cyclic Jacobi eigensolver for a small symmetric matrix. Eigenvalues are
// returned in non-increasing order with matching eigenvector columns.
void symmetric_eigen(Block h, std::vector<double>& values, Block& vectors) {
    const std::size_t m = h.rows;
    vectors = Block(m, m);
    for (std::size_t i = 0; i < m; ++i) vectors(i, i) = 1.0;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        double diag = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            diag += h(j, j) * h(j, j);
            for (std::size_t i = 0; i < j; ++i) off += h(i, j) * h(i, j);
        }
        if (off <= 1e-32 * diag || off == 0.0) break;

        for (std::size_t p = 0; p + 1 < m; ++p) {
            for (std::size_t q = p + 1; q < m; ++q) {
                const double g = h(p, q);
                if (g == 0.0) continue;
                const double t = jacobi_tangent(h(p, p), h(q, q), g);
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                rotate_columns(h, p, q, c, s);
                for (std::size_t k = 0; k < m; ++k) {
                    const double a = h(p, k);
                    const double b = h(q, k);
                    h(p, k) = c * a - s * b;
                    h(q, k) = s * a + c * b;
                }
                h(p, q) = 0.0;
                h(q, p) = 0.0;
                rotate_columns(vectors, p, q, c, s);
            }
        }
    }

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return h(a, a) > h(b, b); });
    values.resize(m);
    Block sorted(m, m);
    for (std::size_t k = 0; k < m; ++k) {
        values[k] = h(order[k], order[k]);
        std::copy_n(vectors.column(order[k]).begin(), m, sorted.column(k).begin());
    }
    vectors = std::move(sorted);
}

// One-sided (Hestenes) Jacobi: rotates the columns of w until they are
// mutually orthogonal, accumulating the rotations in z.
void one_sided_jacobi(Block& w, Block& z) {
    const std::size_t p = w.cols;
    z = Block(p, p);
    for (std::size_t i = 0; i < p; ++i) z(i, i) = 1.0;

    for (int sweep = 0; sweep < 80; ++sweep) {
        bool rotated = false;
        for (std::size_t i = 0; i + 1 < p; ++i) {
            for (std::size_t j = i + 1; j < p; ++j) {
                const double alpha = dot(w.column(i), w.column(i));
                const double beta = dot(w.column(j), w.column(j));
                const double gamma = dot(w.column(i), w.column(j));
                if (alpha == 0.0 || beta == 0.0) continue;
                if (std::abs(gamma) <= 1e-15 * std::sqrt(alpha * beta)) continue;
                const double t = jacobi_tangent(alpha, beta, gamma);
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                rotate_columns(w, i, j, c, s);
                rotate_columns(z, i, j, c, s);
                rotated = true;
            }
        }
        if (!rotated) break;
    }
}

}  // namespace

SvdFactors truncated_svd(const DataMatrix& a, std::size_t max_rank, double rank_tol, const SvdOptions& options) {
    if (max_rank == 0) throw InvalidArgument("truncated_svd: max_rank must be positive");
    if (!(rank_tol > 0.0)) throw InvalidArgument("truncated_svd: rank_tol must be positive");

    const auto values = a.values();
    if (std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; }))
        throw DegenerateInput("truncated_svd: matrix is all zeros");

    const std::size_t n = a.rows();
    const std::size_t d = a.cols();
    const std::size_t width = std::min(std::min(n, d), max_rank + options.oversample);
    const std::size_t target = std::min(max_rank, width);

    auto multiply = options.parallel ? kernels::parallel::multiply : kernels::serial::multiply;
    auto multiply_t = options.parallel ? kernels::parallel::multiply_transpose : kernels::serial::multiply_transpose;
    auto sym_multiply = options.parallel ? kernels::parallel::symmetric_multiply : kernels::serial::symmetric_multiply;

    // With n >= d it is cheaper to iterate on the d x d Gram matrix.
    const bool use_gram = d <= n;
    Block gram;
    if (use_gram) (options.parallel ? kernels::parallel::gram : kernels::serial::gram)(a, gram);

    Block scratch;
    auto apply = [&](const Block& x, Block& out) {
        if (use_gram) {
            sym_multiply(gram, x, out);
        } else {
            multiply(a, x, scratch);
            multiply_t(a, scratch, out);
        }
    };

    SeededRng rng(options.seed);
    Block q(d, width);
    fill_normal(q.data, rng);
    orthonormalize(q, rng);

    std::vector<double> ritz;
    Block y;
    Block h(width, width);
    Block rotation;
    for (std::size_t iteration = 0; iteration < options.max_iterations; ++iteration) {
        apply(q, y);
        for (std::size_t j = 0; j < width; ++j)
            for (std::size_t i = 0; i <= j; ++i) {
                const double v = 0.5 * (dot(q.column(i), y.column(j)) + dot(q.column(j), y.column(i)));
                h(i, j) = v;
                h(j, i) = v;
            }
        symmetric_eigen(h, ritz, rotation);

        // Ritz vectors x_c = q z_c with images y z_c. Stop once every wanted
        // pair has a small residual |y z_c - theta_c x_c|.
        Block next(d, width);
        Block ritz_vectors(d, width);
        for (std::size_t c = 0; c < width; ++c) {
            auto out = next.column(c);
            auto x = ritz_vectors.column(c);
            for (std::size_t k = 0; k < width; ++k) {
                const double w = rotation(k, c);
                const auto yk = y.column(k);
                const auto qk = q.column(k);
                for (std::size_t i = 0; i < d; ++i) {
                    out[i] += w * yk[i];
                    x[i] += w * qk[i];
                }
            }
        }
        const double top = std::max(ritz.front(), 0.0);
        const double floor = rank_tol * rank_tol * top;
        bool converged = true;
        for (std::size_t c = 0; c < target && converged; ++c) {
            if (ritz[c] <= floor) break;
            double residual = 0.0;
            const auto x = ritz_vectors.column(c);
            const auto gx = next.column(c);
            for (std::size_t i = 0; i < d; ++i) {
                const double e = gx[i] - ritz[c] * x[i];
                residual += e * e;
            }
            if (std::sqrt(residual) > options.residual_tol * top) converged = false;
        }
        if (converged) {
            q = std::move(ritz_vectors);
            orthonormalize(q, rng);
            break;
        }
        // One power step from the Ritz basis.
        q = std::move(next);
        orthonormalize(q, rng);
    }

    // Accurate singular values from the converged basis: A q = U S Z^T.
    Block w;
    multiply(a, q, w);
    Block z;
    one_sided_jacobi(w, z);

    std::vector<double> sigma(width);
    for (std::size_t c = 0; c < width; ++c) sigma[c] = norm(w.column(c));
    std::vector<std::size_t> order(width);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y2) { return sigma[x] > sigma[y2]; });

    const double sigma_max = sigma[order.front()];
    std::size_t numerical_rank = 0;
    while (numerical_rank < width && sigma[order[numerical_rank]] > rank_tol * sigma_max) ++numerical_rank;
    if (numerical_rank == 0) throw DegenerateInput("truncated_svd: no positive singular values");

    SvdFactors out;
    out.rank = std::min(target, numerical_rank);
    out.n_features = d;
    out.singular_values.resize(out.rank);
    out.right_vectors.assign(d * out.rank, 0.0);
    for (std::size_t r = 0; r < out.rank; ++r) {
        const std::size_t c = order[r];
        out.singular_values[r] = sigma[c];
        std::span<double> v(out.right_vectors.data() + r * d, d);
        for (std::size_t k = 0; k < width; ++k) {
            const double coef = z(k, c);
            const auto qk = q.column(k);
            for (std::size_t i = 0; i < d; ++i) v[i] += coef * qk[i];
        }
        // Sign convention: largest-magnitude entry positive.
        std::size_t lead = 0;
        for (std::size_t i = 1; i < d; ++i)
            if (std::abs(v[i]) > std::abs(v[lead])) lead = i;
        if (v[lead] < 0.0)
            for (double& x : v) x = -x;
    }
    return out;
}

}  // namespace lesstrees
