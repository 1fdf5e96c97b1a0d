#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "ron/hessian_oracle.hpp"
#include "ron/rng.hpp"

namespace ron {

/// Rank-m Nystrom factor H ~= F F^T of a PSD matrix, together with the
/// certified residual rho = tr(H - F F^T). The residual matrix is PSD, so rho
/// also upper-bounds ||H - F F^T||_2.
struct NystromFactor {
    Eigen::MatrixXd factor;            // d x m, m <= requested column budget
    double trace_residual = 0.0;       // rho >= 0, clamped
    std::vector<Eigen::Index> pivots;  // accepted pivot columns, in sample order
    std::uint64_t rng_seed = 0;        // generator state at entry
    std::int64_t flops = 0;            // charged: m column fetches + 2*d*n per pivot step n

    Eigen::Index rows() const { return factor.rows(); }
    Eigen::Index rank() const { return factor.cols(); }
};

/// Randomly pivoted partial Cholesky. Samples up to k columns with
/// probabilities proportional to the residual diagonal, which is clamped at
/// zero after each update. Terminates early when the residual diagonal's
/// 1-norm falls below 1e-14 of its initial value (exact factorization, rho set
/// to 0) or after two consecutive numerically degenerate pivots.
NystromFactor rpc_factorize(const HessianOracle& oracle, Eigen::Index k, SplitMix64 rng);

/// F (F^T v) via two skinny products; 4*d*m flops charged to *flops if given.
Eigen::VectorXd apply_factor(const NystromFactor& factor, const Eigen::VectorXd& v,
                             std::int64_t* flops = nullptr);

/// Smallest column budget k for which the expected trace residual of an RPC
/// factor is at most (1 + eps) times the best rank-r approximation error,
/// valid whenever the relative tail mass tr(H - [[H]]_r)/tr(H) is at least
/// eta:
///   k >= r/eps + min{ r log(1/(eps eta)), r + r log+(2^r/eps) }.
Eigen::Index rpc_sample_complexity(Eigen::Index r, double eps, double eta);

}  // namespace ron
