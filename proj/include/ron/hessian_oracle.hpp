#pragma once

#include <Eigen/Core>

#include <cstdint>

namespace ron {

/// Column/diagonal access to an implicit symmetric PSD matrix (typically a
/// Hessian evaluated at a fixed point). Implementations must be safe for
/// concurrent read-only use; column fetches carry a flop charge supplied by
/// the owning objective.
class HessianOracle {
  public:
    virtual ~HessianOracle() = default;

    virtual Eigen::Index dim() const = 0;
    virtual Eigen::VectorXd diagonal() const = 0;
    virtual void column(Eigen::Index j, Eigen::Ref<Eigen::VectorXd> out) const = 0;
    virtual std::int64_t column_cost() const = 0;

    Eigen::VectorXd column(Eigen::Index j) const {
        Eigen::VectorXd out(dim());
        column(j, out);
        return out;
    }

    // Dense materialization, intended for small instances and tests.
    Eigen::MatrixXd materialize() const;
};

// Oracle over an explicitly stored symmetric matrix.
class DenseHessianOracle final : public HessianOracle {
  public:
    explicit DenseHessianOracle(Eigen::MatrixXd matrix, std::int64_t column_cost = 0);

    Eigen::Index dim() const override { return matrix_.rows(); }
    Eigen::VectorXd diagonal() const override { return matrix_.diagonal(); }
    void column(Eigen::Index j, Eigen::Ref<Eigen::VectorXd> out) const override;
    std::int64_t column_cost() const override { return column_cost_; }

    const Eigen::MatrixXd& matrix() const { return matrix_; }

  private:
    Eigen::MatrixXd matrix_;
    std::int64_t column_cost_;
};

}  // namespace ron
