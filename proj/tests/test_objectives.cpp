#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>

#include "ron/checks.hpp"
#include "ron/eot.hpp"
#include "ron/errors.hpp"
#include "ron/generators.hpp"
#include "ron/least_squares.hpp"
#include "ron/rng.hpp"

using ron::EotDual;
using ron::LeastSquares;
using ron::SplitMix64;

namespace {

EotDual single_cell() {
    Eigen::VectorXd one(1);
    one << 1.0;
    return EotDual(one, one, Eigen::MatrixXd::Zero(1, 1), 1.0);
}

EotDual uniform_2x2() {
    Eigen::VectorXd half = Eigen::VectorXd::Constant(2, 0.5);
    return EotDual(half, half, Eigen::MatrixXd::Zero(2, 2), 1.0);
}

EotDual random_instance(Eigen::Index a, Eigen::Index b, double epsilon, std::uint64_t seed) {
    return EotDual(ron::gaussian_marginal(a, 0.3, 0.08), ron::gaussian_marginal(b, 0.7, 0.08),
                   ron::random_cost(a, b, SplitMix64(seed)), epsilon);
}

}  // namespace

TEST_CASE("single-cell dual value and optimum") {
    const EotDual p = single_cell();
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(2);
    CHECK(p.value(theta) == doctest::Approx(1.0));
    CHECK(p.gradient(theta).norm() == doctest::Approx(0.0));
    // Translation along (1, -1) leaves the value unchanged.
    for (double t : {-1.0, 0.25, 1.0}) {
        theta << t, -t;
        CHECK(p.value(theta) == doctest::Approx(1.0).epsilon(1e-12));
    }
    // Hessian is the rank-one all-ones matrix.
    theta.setZero();
    const Eigen::MatrixXd h = p.hessian_dense(theta);
    CHECK((h - Eigen::MatrixXd::Ones(2, 2)).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("uniform 2x2 instance at zero potentials") {
    const EotDual p = uniform_2x2();
    const Eigen::VectorXd theta = Eigen::VectorXd::Zero(4);
    CHECK(p.value(theta) == doctest::Approx(1.0));
    CHECK(p.gradient(theta).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("gradient and hessian pass finite differences") {
    const EotDual p = random_instance(9, 7, 0.2, 42);
    SplitMix64 rng(7);
    for (int trial = 0; trial < 3; ++trial) {
        Eigen::VectorXd theta(p.dim());
        for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = 0.4 * rng.next_gaussian();
        const Eigen::VectorXd grad = p.gradient(theta);
        CHECK((grad - ron::fd_gradient(p, theta)).norm() <= 1e-5 * grad.norm());
        const Eigen::MatrixXd h = p.hessian_oracle(theta)->materialize();
        CHECK((h - ron::fd_hessian(p, theta)).norm() <= 1e-4 * h.norm());
    }
}

TEST_CASE("hessian oracle structure") {
    const EotDual p = random_instance(8, 6, 0.3, 11);
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(p.dim());
    theta[2] = 0.15;
    theta[10] = -0.2;

    const auto oracle = p.hessian_oracle(theta);
    const Eigen::MatrixXd dense = p.hessian_dense(theta);
    const Eigen::MatrixXd from_columns = oracle->materialize();
    CHECK((dense - from_columns).cwiseAbs().maxCoeff() <= 1e-14);

    // diag()[j] == column(j)[j], symmetry, PSD.
    const Eigen::VectorXd diag = oracle->diagonal();
    for (Eigen::Index j = 0; j < p.dim(); ++j) {
        CHECK(diag[j] == doctest::Approx(from_columns(j, j)).epsilon(1e-12));
    }
    CHECK((dense - dense.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * dense.norm());
    const double min_eig =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(dense).eigenvalues().minCoeff();
    CHECK(min_eig >= -1e-10 * dense.operatorNorm());
    CHECK(oracle->column_cost() == 2 * p.dim());
    CHECK_THROWS_AS(oracle->column(p.dim()), std::out_of_range);
}

TEST_CASE("hessian rank is at most a + b") {
    const EotDual p = random_instance(10, 9, 0.5, 13);
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(p.dim());
    const Eigen::MatrixXd h = p.hessian_dense(theta);
    const Eigen::VectorXd eigs =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h).eigenvalues();
    const double threshold = 1e-10 * eigs.cwiseAbs().maxCoeff();
    Eigen::Index numerical_rank = 0;
    for (Eigen::Index i = 0; i < eigs.size(); ++i) {
        if (eigs[i] > threshold) ++numerical_rank;
    }
    CHECK(numerical_rank <= p.dim());
    // The translation direction is always in the kernel, so strictly below.
    CHECK(numerical_rank < p.dim());
}

TEST_CASE("gradient balance identity") {
    const EotDual p = random_instance(12, 5, 0.1, 17);
    SplitMix64 rng(3);
    Eigen::VectorXd theta(p.dim());
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = 0.3 * rng.next_gaussian();
    const Eigen::VectorXd grad = p.gradient(theta);
    CHECK(std::abs(grad.head(12).sum() - grad.tail(5).sum()) <= 1e-12);
}

TEST_CASE("exponent guard rejects diverged potentials") {
    const EotDual p = single_cell();
    Eigen::VectorXd theta(2);
    theta << 400.0, 400.0;
    CHECK_THROWS_AS(p.value(theta), ron::OverflowError);
    CHECK_THROWS_AS(p.gradient(theta), ron::OverflowError);
}

TEST_CASE("marginal validation") {
    Eigen::VectorXd bad(2);
    bad << 0.7, 0.7;
    Eigen::VectorXd good = Eigen::VectorXd::Constant(2, 0.5);
    CHECK_THROWS_AS(EotDual(bad, good, Eigen::MatrixXd::Zero(2, 2), 1.0), std::invalid_argument);
    bad << -0.1, 1.1;
    CHECK_THROWS_AS(EotDual(bad, good, Eigen::MatrixXd::Zero(2, 2), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(EotDual(good, good, Eigen::MatrixXd::Zero(3, 2), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(EotDual(good, good, Eigen::MatrixXd::Zero(2, 2), 0.0), std::invalid_argument);
}

TEST_CASE("least squares on a diagonal system") {
    Eigen::MatrixXd a(2, 2);
    a << 1.0, 0.0, 0.0, 2.0;
    const LeastSquares p(a, Eigen::VectorXd::Zero(2));
    Eigen::VectorXd x = Eigen::VectorXd::Ones(2);
    CHECK(p.value(x) == doctest::Approx(2.5));
    CHECK(p.gradient(x)[0] == doctest::Approx(1.0));
    CHECK(p.gradient(x)[1] == doctest::Approx(4.0));
    const auto oracle = p.hessian_oracle(x);
    CHECK(oracle->diagonal()[0] == doctest::Approx(1.0));
    CHECK(oracle->diagonal()[1] == doctest::Approx(4.0));
    const Eigen::VectorXd col0 = oracle->column(0);
    CHECK(col0[0] == doctest::Approx(1.0));
    CHECK(col0[1] == doctest::Approx(0.0));
}

TEST_CASE("least squares hessian oracle equals dense A^T A and is point independent") {
    SplitMix64 rng(23);
    Eigen::MatrixXd a(30, 10);
    Eigen::VectorXd b(30);
    for (Eigen::Index i = 0; i < 30; ++i) {
        b[i] = rng.next_gaussian();
        for (Eigen::Index j = 0; j < 10; ++j) a(i, j) = rng.next_gaussian();
    }
    const LeastSquares p(a, b);
    const Eigen::MatrixXd dense = a.transpose() * a;
    const Eigen::MatrixXd at_zero = p.hessian_oracle(Eigen::VectorXd::Zero(10))->materialize();
    const Eigen::MatrixXd at_ones = p.hessian_oracle(Eigen::VectorXd::Ones(10))->materialize();
    CHECK((at_zero - dense).cwiseAbs().maxCoeff() <= 1e-12 * dense.norm());
    CHECK(at_zero == at_ones);

    const Eigen::VectorXd grad = p.gradient(Eigen::VectorXd::Zero(10));
    CHECK((grad - ron::fd_gradient(p, Eigen::VectorXd::Zero(10))).norm() <= 1e-5 * grad.norm());
}

TEST_CASE("zero design matrix is stationary everywhere") {
    const LeastSquares p(Eigen::MatrixXd::Zero(4, 3), Eigen::VectorXd::Ones(4));
    CHECK(p.gradient(Eigen::VectorXd::Ones(3)).norm() == 0.0);
}
