#include "ron/hessian_oracle.hpp"

#include <stdexcept>
#include <utility>

namespace ron {

Eigen::MatrixXd HessianOracle::materialize() const {
    const Eigen::Index d = dim();
    Eigen::MatrixXd out(d, d);
    Eigen::VectorXd col(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        column(j, col);
        out.col(j) = col;
    }
    return out;
}

DenseHessianOracle::DenseHessianOracle(Eigen::MatrixXd matrix, std::int64_t column_cost)
    : matrix_(std::move(matrix)), column_cost_(column_cost) {
    if (matrix_.rows() != matrix_.cols()) {
        throw std::invalid_argument("DenseHessianOracle: matrix must be square");
    }
}

void DenseHessianOracle::column(Eigen::Index j, Eigen::Ref<Eigen::VectorXd> out) const {
    if (j < 0 || j >= matrix_.cols()) {
        throw std::out_of_range("DenseHessianOracle: column index out of range");
    }
    out = matrix_.col(j);
}

}  // namespace ron
