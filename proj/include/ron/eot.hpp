#pragma once

#include <Eigen/Core>

#include "ron/objective.hpp"

namespace ron {

/// Negated Kantorovich dual of entropic optimal transport, minimized over the
/// stacked potentials theta = (alpha; beta) with dim = a + b:
///
///   f(alpha, beta) = sum_ij W_ij exp(alpha_i + beta_j) - <r, alpha> - <c, beta>,
///   W_ij = exp(-cost(i, j) / epsilon) r_i c_j.
///
/// The problem is translation invariant along (1, -1), so its minimizers form
/// a line; the Hessian at any point is PSD with rank at most a + b.
class EotDual final : public SmoothObjective {
  public:
    EotDual(Eigen::VectorXd row_marginal, Eigen::VectorXd col_marginal,
            const Eigen::MatrixXd& cost, double epsilon);

    Eigen::Index rows() const { return r_.size(); }
    Eigen::Index cols() const { return c_.size(); }
    Eigen::Index dim() const override { return r_.size() + c_.size(); }

    const Eigen::VectorXd& row_marginal() const { return r_; }
    const Eigen::VectorXd& col_marginal() const { return c_; }
    const Eigen::MatrixXd& kernel() const { return w_; }
    double epsilon() const { return epsilon_; }

    // Transport plan Z with Z_ij = W_ij exp(alpha_i + beta_j).
    Eigen::MatrixXd plan(const Eigen::VectorXd& theta) const;

    double value(const Eigen::VectorXd& theta) const override;
    Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const override;
    std::unique_ptr<HessianOracle> hessian_oracle(const Eigen::VectorXd& theta) const override;
    Eigen::MatrixXd hessian_dense(const Eigen::VectorXd& theta) const override;

    // Crude level-set bound on the third derivative tensor:
    //   3 * max_ij W_ij * exp(|alpha0|_inf + |beta0|_inf + 2).
    // Heuristic; the lemma checker reports violations when it is too small.
    double suggested_lipschitz_hessian(const Eigen::VectorXd& theta0) const;
    double suggested_lipschitz_hessian() const override;

    std::int64_t value_cost() const override { return 2 * rows() * cols() + 2 * dim(); }
    std::int64_t gradient_cost() const override { return 4 * rows() * cols(); }
    std::int64_t hessian_oracle_cost() const override { return 2 * rows() * cols(); }
    std::int64_t hessian_dense_cost() const override {
        return 2 * rows() * cols() + dim() * dim();
    }

  private:
    // Throws OverflowError if exp(alpha_i + beta_j) W_ij can exceed the double
    // exponent range.
    void guard_exponents(const Eigen::VectorXd& theta) const;

    Eigen::VectorXd r_, c_;
    Eigen::MatrixXd w_;
    double epsilon_;
    double log_w_max_;
};

}  // namespace ron
