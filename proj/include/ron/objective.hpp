#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <memory>

#include "ron/hessian_oracle.hpp"

namespace ron {

/// Twice continuously differentiable convex objective with value, gradient,
/// and a Hessian column/diagonal oracle at any point. Instances are immutable
/// after construction and safely shareable across threads; per-point oracles
/// own any cached state privately.
///
/// Flop charges follow a fixed accounting model so error-vs-flops traces are
/// deterministic: value_cost/gradient_cost per evaluation and
/// hessian_oracle_cost once per oracle construction.
class SmoothObjective {
  public:
    virtual ~SmoothObjective() = default;

    virtual Eigen::Index dim() const = 0;
    virtual double value(const Eigen::VectorXd& theta) const = 0;
    virtual Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const = 0;
    virtual std::unique_ptr<HessianOracle> hessian_oracle(const Eigen::VectorXd& theta) const = 0;

    // Dense Hessian for small instances; default materializes oracle columns.
    virtual Eigen::MatrixXd hessian_dense(const Eigen::VectorXd& theta) const {
        return hessian_oracle(theta)->materialize();
    }

    // Upper bound on the Lipschitz constant of the Hessian; 0 for quadratics.
    virtual double suggested_lipschitz_hessian() const = 0;

    virtual std::int64_t value_cost() const = 0;
    virtual std::int64_t gradient_cost() const = 0;
    virtual std::int64_t hessian_oracle_cost() const { return 0; }
    virtual std::int64_t hessian_dense_cost() const = 0;
};

}  // namespace ron
