#pragma once

#include <Eigen/Core>

#include "ron/objective.hpp"

namespace ron {

/// f(x) = 1/2 ||A x - b||^2 with the constant Hessian A^T A accessed through
/// a column oracle that never forms A^T A.
class LeastSquares final : public SmoothObjective {
  public:
    LeastSquares(Eigen::MatrixXd a, Eigen::VectorXd b);

    Eigen::Index rows() const { return a_.rows(); }
    Eigen::Index dim() const override { return a_.cols(); }

    const Eigen::MatrixXd& matrix() const { return a_; }
    const Eigen::VectorXd& rhs() const { return b_; }

    double value(const Eigen::VectorXd& x) const override;
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override;
    std::unique_ptr<HessianOracle> hessian_oracle(const Eigen::VectorXd& x) const override;
    Eigen::MatrixXd hessian_dense(const Eigen::VectorXd& x) const override;

    double suggested_lipschitz_hessian() const override { return 0.0; }

    std::int64_t value_cost() const override { return 2 * rows() * dim(); }
    std::int64_t gradient_cost() const override { return 4 * rows() * dim(); }
    std::int64_t hessian_dense_cost() const override { return 2 * rows() * dim() * dim(); }

    // Minimum objective value, from a rank-revealing dense solve. Used as the
    // error-vs-flops reference; not part of the flop ledger.
    double optimal_value() const;

  private:
    Eigen::MatrixXd a_;
    Eigen::VectorXd b_;
    Eigen::VectorXd column_norms_sq_;  // diag(A^T A), precomputed once
};

}  // namespace ron
