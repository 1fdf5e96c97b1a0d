#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "ron/eot.hpp"
#include "ron/least_squares.hpp"
#include "ron/rng.hpp"
#include "ron/trace_io.hpp"

namespace ron {

struct BaselineResult {
    std::string solver_name;
    std::vector<TraceRow> rows;
    Eigen::VectorXd solution;  // final iterate; for Sinkhorn the stacked potentials
    std::string termination;   // "tol" | "max_iters" | solver-specific
};

/// Half-steps of the alternating scaling iteration, exposed so the marginal
/// fixed-point property can be tested directly. Zero-marginal coordinates keep
/// scale 1 so the potentials stay finite.
Eigen::VectorXd sinkhorn_row_scaling(const EotDual& problem, const Eigen::VectorXd& v);
Eigen::VectorXd sinkhorn_col_scaling(const EotDual& problem, const Eigen::VectorXd& u);

/// Alternating row/column scaling of diag(u) W diag(v); reports the dual
/// gradient norm at (log u, log v) once per full iteration and stops when it
/// reaches tol. Charges 4ab flops per full iteration; metrics are free.
/// Throws InfeasibleError when a positive marginal meets zero kernel mass.
BaselineResult sinkhorn_run(const EotDual& problem, int max_iters, double tol);

enum class GdStepRule {
    Fixed,        // theta <- theta - grad / L
    RonIdentity,  // theta <- theta - grad / (L + lambda), lambda = max(sqrt(L_H |grad|), floor)
};

/// The RonIdentity rule reproduces the ScaledIdentity oracle of run_ron bit
/// for bit (same floor rule, same arithmetic). Aborts after 10 consecutive
/// objective increases.
BaselineResult gradient_descent_run(const SmoothObjective& objective, Eigen::VectorXd theta0,
                                    GdStepRule rule, double lipschitz_gradient,
                                    double lipschitz_hessian, int max_iters, double tol);

/// Row projections sampled with probability |a_i|^2 / |A|_F^2; 4d flops per
/// step. Reports once per epoch (d steps) and stops when the reported
/// gradient norm reaches tol. Zero rows are excluded from sampling.
BaselineResult randomized_kaczmarz_run(const LeastSquares& problem, Eigen::VectorXd x0,
                                       int max_epochs, double tol, SplitMix64 rng);

/// Conjugate gradient on the normal equations without forming A^T A;
/// 4pd + O(d) flops per iteration. A zero-curvature direction terminates with
/// the current iterate ("breakdown").
BaselineResult cgls_run(const LeastSquares& problem, Eigen::VectorXd x0, int max_iters,
                        double tol);

}  // namespace ron
