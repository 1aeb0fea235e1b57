#include <omp.h>

#include <cmath>
#include <limits>

#include "doctest.h"
#include "lesstrees/error.hpp"
#include "lesstrees/kernels.hpp"
#include "lesstrees/matrix.hpp"
#include "oracles.hpp"

using namespace lesstrees;

TEST_CASE("DataMatrix construction and access") {
    const auto a = DataMatrix::from_rows({{1, 2, 3}, {4, 5, 6}});
    CHECK(a.rows() == 2);
    CHECK(a.cols() == 3);
    CHECK(a(1, 2) == 6);
    CHECK(a.at(0, 1) == 2);
    CHECK_THROWS_AS((void)a.at(2, 0), InvalidArgument);
    CHECK_THROWS_AS((void)a.at(0, 3), InvalidArgument);
    CHECK(a.row(1) == std::vector<double>{4, 5, 6});
    CHECK(a.column(1)[1] == 5);

    const auto cols = a.select_columns(std::vector<std::size_t>{2, 0});
    CHECK(cols == DataMatrix::from_rows({{3, 1}, {6, 4}}));
    const auto rows = a.select_rows(std::vector<std::size_t>{1});
    CHECK(rows == DataMatrix::from_rows({{4, 5, 6}}));
    CHECK(a.scaled(-2.0)(0, 0) == -2.0);
}

TEST_CASE("DataMatrix rejects bad input") {
    CHECK_THROWS_AS(DataMatrix(2, 2, {1, 2, 3}), InvalidArgument);
    CHECK_THROWS_AS(DataMatrix(0, 2, {}), InvalidArgument);
    CHECK_THROWS_AS(DataMatrix(1, 1, {std::numeric_limits<double>::quiet_NaN()}), InvalidArgument);
    CHECK_THROWS_AS(DataMatrix(1, 1, {std::numeric_limits<double>::infinity()}), InvalidArgument);
    CHECK_THROWS_AS(DataMatrix::from_rows({{1, 2}, {3}}), InvalidArgument);
}

TEST_CASE("column_squared_norms") {
    CHECK(column_squared_norms(DataMatrix::from_rows({{3, 0}, {0, 4}})) == std::vector<double>{9, 16});
    CHECK(column_squared_norms(DataMatrix::zeros(2, 2)) == std::vector<double>{0, 0});
    const auto a = oracle::random_matrix(5, 7, 11);
    const auto got = column_squared_norms(a);
    const auto want = oracle::squared_norms(a);
    for (std::size_t j = 0; j < 7; ++j) CHECK(got[j] == doctest::Approx(want[j]).epsilon(1e-14));
}

TEST_CASE("kernels match a naive oracle and serial equals parallel bitwise") {
    for (auto [n, d, p] : {std::tuple{1, 1, 1}, {7, 3, 2}, {40, 90, 13}, {129, 17, 5}}) {
        const auto a = oracle::random_matrix(n, d, 100 + n);
        const auto ea = oracle::to_eigen(a);
        kernels::Block x(d, p), y(n, p);
        SeededRng rng(5);
        for (auto& v : x.data) v = rng.normal();
        for (auto& v : y.data) v = rng.normal();

        for (int threads : {1, 4}) {
            omp_set_num_threads(threads);
            kernels::Block s_out(n, p), p_out(n, p);
            kernels::serial::multiply(a, x, s_out);
            kernels::parallel::multiply(a, x, p_out);
            CHECK(s_out.data == p_out.data);

            kernels::Block st_out(d, p), pt_out(d, p);
            kernels::serial::multiply_transpose(a, y, st_out);
            kernels::parallel::multiply_transpose(a, y, pt_out);
            CHECK(st_out.data == pt_out.data);

            kernels::Block sg(d, d), pg(d, d);
            kernels::serial::gram(a, sg);
            kernels::parallel::gram(a, pg);
            CHECK(sg.data == pg.data);

            kernels::Block sy(d, p), py(d, p);
            kernels::serial::symmetric_multiply(sg, x, sy);
            kernels::parallel::symmetric_multiply(sg, x, py);
            CHECK(sy.data == py.data);

            std::vector<double> sn(d), pn(d);
            kernels::serial::column_squared_norms(a, sn);
            kernels::parallel::column_squared_norms(a, pn);
            CHECK(sn == pn);

            Eigen::Map<const Eigen::MatrixXd> ex(x.data.data(), d, p), ey(y.data.data(), n, p);
            Eigen::Map<const Eigen::MatrixXd> got_ax(s_out.data.data(), n, p), got_aty(st_out.data.data(), d, p),
                got_g(sg.data.data(), d, d);
            CHECK((got_ax - ea * ex).cwiseAbs().maxCoeff() < 1e-10);
            CHECK((got_aty - ea.transpose() * ey).cwiseAbs().maxCoeff() < 1e-10);
            CHECK((got_g - ea.transpose() * ea).cwiseAbs().maxCoeff() < 1e-9);
        }
    }
    omp_set_num_threads(kernels::max_threads());
}

namespace {

void check_orthonormal(const SvdFactors& f) {
    for (std::size_t a = 0; a < f.rank; ++a)
        for (std::size_t b = 0; b <= a; ++b) {
            double dot = 0;
            for (std::size_t j = 0; j < f.n_features; ++j) dot += f.right_vector(a)[j] * f.right_vector(b)[j];
            CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) < 1e-8);
        }
}

// Sine of the largest principal angle between span(V_got) and the oracle's
// top-r span.
double max_principal_angle(const SvdFactors& f, const Eigen::MatrixXd& v_oracle) {
    const auto r = static_cast<Eigen::Index>(f.rank);
    Eigen::Map<const Eigen::MatrixXd> v(f.right_vectors.data(), static_cast<Eigen::Index>(f.n_features), r);
    const Eigen::MatrixXd ref = v_oracle.leftCols(r);
    const Eigen::MatrixXd outside = ref - v * (v.transpose() * ref);
    return Eigen::JacobiSVD<Eigen::MatrixXd>(outside).singularValues()(0);
}

}  // namespace

TEST_CASE("truncated_svd of the identity") {
    const auto f = truncated_svd(DataMatrix::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}), 3);
    CHECK(f.rank == 3);
    for (double s : f.singular_values) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    check_orthonormal(f);
}

TEST_CASE("truncated_svd of an embedded diagonal") {
    const auto f = truncated_svd(DataMatrix::from_rows({{2, 0, 0}, {0, 1, 0}}), 2);
    REQUIRE(f.rank == 2);
    CHECK(f.singular_values[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(f.singular_values[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(f.right_vector(0)[0]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(f.right_vector(1)[1]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(f.right_vector(0)[2]) < 1e-12);
    CHECK(std::abs(f.right_vector(1)[2]) < 1e-12);
}

TEST_CASE("truncated_svd matches a dense SVD on random matrices") {
    for (auto [n, d, r] : {std::tuple{50, 200, 50}, {200, 50, 10}, {30, 100, 30}, {60, 60, 5}}) {
        const auto a = oracle::random_matrix(n, d, 1000 + n + d);
        const auto f = truncated_svd(a, r);
        const auto ref = oracle::dense_svd(a);
        REQUIRE(f.rank == static_cast<std::size_t>(r));
        for (std::size_t i = 0; i < f.rank; ++i)
            CHECK(f.singular_values[i] == doctest::Approx(ref.singular_values(static_cast<Eigen::Index>(i))).epsilon(1e-10));
        for (std::size_t i = 1; i < f.rank; ++i) CHECK(f.singular_values[i] <= f.singular_values[i - 1]);
        check_orthonormal(f);
        CHECK(max_principal_angle(f, ref.v) < 1e-6);
    }
}

TEST_CASE("truncated_svd detects numerical rank") {
    // Product of 40x3 and 3x25 Gaussian factors: rank 3.
    const auto left = oracle::to_eigen(oracle::random_matrix(40, 3, 1));
    const auto right = oracle::to_eigen(oracle::random_matrix(3, 25, 2));
    const auto a = oracle::from_eigen(left * right);
    const auto f = truncated_svd(a, 10);
    CHECK(f.rank == 3);
    check_orthonormal(f);
    CHECK(max_principal_angle(f, oracle::dense_svd(a).v) < 1e-8);
}

TEST_CASE("truncated_svd serial and parallel paths agree") {
    const auto a = oracle::random_matrix(80, 120, 9);
    SvdOptions serial_options;
    serial_options.parallel = false;
    const auto s = truncated_svd(a, 20, 1e-10, serial_options);
    const auto p = truncated_svd(a, 20);
    CHECK(s.singular_values == p.singular_values);
    CHECK(s.right_vectors == p.right_vectors);
}

TEST_CASE("truncated_svd errors") {
    CHECK_THROWS_AS(truncated_svd(DataMatrix::zeros(3, 4), 2), DegenerateInput);
    CHECK_THROWS_AS(truncated_svd(oracle::random_matrix(3, 4, 1), 0), InvalidArgument);
    CHECK_THROWS_AS(truncated_svd(oracle::random_matrix(3, 4, 1), 2, 0.0), InvalidArgument);
}
