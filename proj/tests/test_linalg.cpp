#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "ivdag/errors.hpp"
#include "ivdag/linalg.hpp"
#include "ivdag/rng.hpp"

using namespace ivdag;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, RngStream& rng) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.next_gaussian();
    return m;
}

Eigen::VectorXd random_vector(int n, RngStream& rng) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.next_gaussian();
    return v;
}

// dense projection-matrix oracle P = Z (Z'Z)^{-1} Z'
Eigen::MatrixXd projector_oracle(const Eigen::MatrixXd& z) {
    if (z.cols() == 0) return Eigen::MatrixXd::Zero(z.rows(), z.rows());
    return z * (z.transpose() * z).inverse() * z.transpose();
}

}  // namespace

TEST_CASE("least_squares: intercept-only fit") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Ones(4, 1);
    Eigen::VectorXd y(4);
    y << 1, 2, 3, 4;
    const FitResult fit = least_squares(x, y);
    CHECK(fit.coefficients(0) == doctest::Approx(2.5));
    CHECK(fit.rss == doctest::Approx(5.0));
}

TEST_CASE("least_squares: exact interpolation") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Identity(2, 2);
    Eigen::VectorXd y(2);
    y << 3, 4;
    const FitResult fit = least_squares(x, y);
    CHECK(fit.coefficients(0) == doctest::Approx(3.0));
    CHECK(fit.coefficients(1) == doctest::Approx(4.0));
    CHECK(fit.rss == doctest::Approx(0.0));
    CHECK(fit.support == std::vector<int>{0, 1});
}

TEST_CASE("least_squares matches the normal-equation oracle") {
    RngStream rng(11, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::MatrixXd x = random_matrix(6, 3, rng);
        const Eigen::VectorXd y = random_vector(6, rng);
        const Eigen::VectorXd oracle = (x.transpose() * x).inverse() * x.transpose() * y;
        const FitResult fit = least_squares(x, y);
        CHECK((fit.coefficients - oracle).lpNorm<Eigen::Infinity>() < 1e-8);
        CHECK(fit.rss == doctest::Approx((y - x * oracle).squaredNorm()).epsilon(1e-8));
    }
}

TEST_CASE("least_squares flags collinear designs and short designs") {
    Eigen::MatrixXd x(4, 2);
    x.col(0) << 1, 2, 3, 4;
    x.col(1) = 2.0 * x.col(0);
    CHECK_THROWS_AS(least_squares(x, Eigen::VectorXd::Zero(4)), RankDeficient);
    CHECK_THROWS_AS(least_squares(Eigen::MatrixXd::Ones(1, 2), Eigen::VectorXd::Zero(1)),
                    RankDeficient);
}

TEST_CASE("least_squares with zero predictors returns the null model") {
    Eigen::VectorXd y(3);
    y << 1, -1, 2;
    const FitResult fit = least_squares(Eigen::MatrixXd(3, 0), y);
    CHECK(fit.rss == doctest::Approx(6.0));
    CHECK(fit.support.empty());
}

TEST_CASE("weighted_lasso: soft-threshold closed form on a single column") {
    // x'x = n = 4, x'y/n = 1.5
    const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(4, 1);
    Eigen::VectorXd y = 1.5 * Eigen::VectorXd::Ones(4);
    const std::vector<std::uint8_t> penalized{1};
    const std::vector<std::uint8_t> free{0};
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);

    SUBCASE("penalized coordinate is soft-thresholded") {
        const auto v = weighted_lasso({x, y, 0.5, penalized}, zero, 1e-10);
        CHECK(v(0) == doctest::Approx(1.0));
    }
    SUBCASE("weight zero leaves the coordinate unpenalized") {
        const auto v = weighted_lasso({x, y, 0.5, free}, zero, 1e-10);
        CHECK(v(0) == doctest::Approx(1.5));
    }
    SUBCASE("penalty at or above the correlation shrinks to zero") {
        const auto v = weighted_lasso({x, y, 1.5, penalized}, zero, 1e-10);
        CHECK(v(0) == doctest::Approx(0.0));
        const auto v2 = weighted_lasso({x, y, 2.0, penalized}, zero, 1e-10);
        CHECK(v2(0) == doctest::Approx(0.0));
    }
}

TEST_CASE("property: weighted_lasso satisfies the subgradient conditions") {
    RngStream rng(23, 0);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 40;
        const int m = 6;
        const Eigen::MatrixXd x = random_matrix(n, m, rng);
        const Eigen::VectorXd y = random_vector(n, rng);
        std::vector<std::uint8_t> weights(m);
        for (int l = 0; l < m; ++l) weights[static_cast<std::size_t>(l)] = rng.next_bernoulli(0.7);
        const double penalty = 0.05 + 0.3 * rng.next_double();
        const auto v = weighted_lasso({x, y, penalty, weights}, Eigen::VectorXd::Zero(m), 1e-10);
        const Eigen::VectorXd grad = x.transpose() * (y - x * v) / n;
        for (int l = 0; l < m; ++l) {
            if (!weights[static_cast<std::size_t>(l)]) {
                CHECK(std::abs(grad(l)) < 1e-6);
            } else if (v(l) != 0.0) {
                CHECK(std::abs(std::abs(grad(l)) - penalty) < 1e-6);
                CHECK(grad(l) * v(l) > 0.0);
            } else {
                CHECK(std::abs(grad(l)) < penalty + 1e-6);
            }
        }
    }
}

TEST_CASE("projection_quadratic_form: simple and nested cases") {
    Eigen::MatrixXd z(2, 1);
    z << 1, 0;
    Eigen::VectorXd v(2);
    v << 1, 0;
    CHECK(projection_quadratic_form(z, {0}, {}, v) == doctest::Approx(1.0));

    RngStream rng(3, 0);
    const Eigen::MatrixXd z2 = random_matrix(6, 3, rng);
    const Eigen::VectorXd v2 = random_vector(6, rng);
    CHECK(projection_quadratic_form(z2, {0, 1, 2}, {0, 1, 2}, v2) == doctest::Approx(0.0));
}

TEST_CASE("projection_quadratic_form matches the dense projector oracle") {
    RngStream rng(17, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::MatrixXd z = random_matrix(8, 3, rng);
        const Eigen::VectorXd v = random_vector(8, rng);
        const double oracle =
            (v.transpose() * (projector_oracle(z) - projector_oracle(z.col(0))) * v)(0);
        CHECK(projection_quadratic_form(z, {0, 1, 2}, {0}, v) == doctest::Approx(oracle).epsilon(1e-8));
    }
}

TEST_CASE("projection_quadratic_form rejects non-nested sets") {
    RngStream rng(29, 0);
    const Eigen::MatrixXd z = random_matrix(5, 3, rng);
    CHECK_THROWS_AS(projection_quadratic_form(z, {0, 1}, {2}, random_vector(5, rng)), NotNested);
}

TEST_CASE("property: additivity of nested projections") {
    RngStream rng(31, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::MatrixXd z = random_matrix(10, 4, rng);
        const Eigen::VectorXd v = random_vector(10, rng);
        const std::vector<int> full{0, 1, 2, 3};
        const std::vector<int> a{0, 1, 2};
        const std::vector<int> b{0};
        const double lhs =
            projection_quadratic_form(z, a, b, v) + projection_quadratic_form(z, full, a, v);
        const double rhs = projection_quadratic_form(z, full, b, v);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
    }
}

TEST_CASE("property: least_squares rss complements the projection of the response") {
    RngStream rng(37, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::MatrixXd z = random_matrix(9, 3, rng);
        const Eigen::VectorXd y = random_vector(9, rng);
        const FitResult fit = least_squares(z, y);
        const double qf = projection_quadratic_form(z, {0, 1, 2}, {}, y);
        CHECK(fit.rss == doctest::Approx(y.squaredNorm() - qf).epsilon(1e-8));
    }
}
