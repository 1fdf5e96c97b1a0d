#include "ron/least_squares.hpp"

#include <Eigen/QR>

#include <stdexcept>
#include <utility>

namespace ron {

namespace {

class LeastSquaresHessianOracle final : public HessianOracle {
  public:
    LeastSquaresHessianOracle(const Eigen::MatrixXd& a, const Eigen::VectorXd& column_norms_sq)
        : a_(a), column_norms_sq_(column_norms_sq) {}

    Eigen::Index dim() const override { return a_.cols(); }
    Eigen::VectorXd diagonal() const override { return column_norms_sq_; }

    void column(Eigen::Index j, Eigen::Ref<Eigen::VectorXd> out) const override {
        if (j < 0 || j >= a_.cols()) {
            throw std::out_of_range("LeastSquaresHessianOracle: column index");
        }
        out = a_.transpose() * a_.col(j);
    }

    std::int64_t column_cost() const override { return 4 * a_.rows() + 2 * a_.rows() * a_.cols(); }

  private:
    const Eigen::MatrixXd& a_;
    const Eigen::VectorXd& column_norms_sq_;
};

}  // namespace

LeastSquares::LeastSquares(Eigen::MatrixXd a, Eigen::VectorXd b)
    : a_(std::move(a)), b_(std::move(b)) {
    if (a_.rows() != b_.size()) {
        throw std::invalid_argument("LeastSquares: rhs length does not match matrix rows");
    }
    if (a_.cols() < 1) throw std::invalid_argument("LeastSquares: matrix has no columns");
    column_norms_sq_ = a_.colwise().squaredNorm();
}

double LeastSquares::value(const Eigen::VectorXd& x) const {
    if (x.size() != dim()) throw std::invalid_argument("LeastSquares: parameter length mismatch");
    return 0.5 * (a_ * x - b_).squaredNorm();
}

Eigen::VectorXd LeastSquares::gradient(const Eigen::VectorXd& x) const {
    if (x.size() != dim()) throw std::invalid_argument("LeastSquares: parameter length mismatch");
    return a_.transpose() * (a_ * x - b_);
}

std::unique_ptr<HessianOracle> LeastSquares::hessian_oracle(const Eigen::VectorXd& x) const {
    if (x.size() != dim()) throw std::invalid_argument("LeastSquares: parameter length mismatch");
    return std::make_unique<LeastSquaresHessianOracle>(a_, column_norms_sq_);
}

Eigen::MatrixXd LeastSquares::hessian_dense(const Eigen::VectorXd&) const {
    return a_.transpose() * a_;
}

double LeastSquares::optimal_value() const {
    const Eigen::VectorXd x_star = a_.colPivHouseholderQr().solve(b_);
    return 0.5 * (a_ * x_star - b_).squaredNorm();
}

}  // namespace ron
