#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <string>

namespace ron {

/// Reads a real-valued Matrix Market file in coordinate or array format,
/// general or symmetric storage (symmetric entries are expanded). Complex,
/// pattern, and skew storage are rejected; parse errors carry the offending
/// line number.
Eigen::SparseMatrix<double> read_matrix_market(const std::string& path);

Eigen::MatrixXd read_matrix_market_dense(const std::string& path);

/// Coordinate/general output with %.17g entries.
void write_matrix_market(const std::string& path, const Eigen::SparseMatrix<double>& matrix);
void write_matrix_market(const std::string& path, const Eigen::MatrixXd& matrix);

}  // namespace ron
