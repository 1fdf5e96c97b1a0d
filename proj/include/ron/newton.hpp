#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ron/objective.hpp"
#include "ron/rng.hpp"

namespace ron {

/// Hessian overestimation oracle used by the Newton-type update:
///  - Rpc: B = F F^T + rho I from a randomly pivoted Cholesky factor,
///  - ExactDense: B = dense Hessian (rho = 0),
///  - ScaledIdentity: B = L I, giving damped gradient steps -g / (L + lambda).
enum class OracleKind { Rpc, ExactDense, ScaledIdentity };

inline constexpr double kAutoLambdaFloor = -1.0;

struct RonConfig {
    OracleKind oracle_kind = OracleKind::Rpc;
    Eigen::Index rank = 10;            // RPC column budget k
    double identity_scale = 1.0;       // L for ScaledIdentity
    double lipschitz_hessian = 0.0;    // L_H; 0 is legal (quadratics)
    int max_iters = 100;
    double grad_tol = 1e-8;
    double lambda_floor = kAutoLambdaFloor;  // auto: 1e-12 * (1 + |grad(theta0)|)
    bool assert_lemmas = false;
    std::uint64_t seed = 0;
};

/// Per-iteration record. Row n describes the state at iterate n plus the step
/// leaving it; flops/wall_time are cumulative up to and including the
/// evaluation of f and the gradient at iterate n, so (flops, error) pairs plot
/// directly. A terminal row (zero step fields) closes every trace.
struct StepDiagnostics {
    int iter = 0;
    double f_value = 0.0;
    double grad_norm = 0.0;
    double lambda_sqrt = 0.0;  // sqrt(L_H |grad|)
    double rho = 0.0;          // trace residual of the sketch; 0 for exact oracle
    double step_norm = 0.0;    // r_n = |theta_{n+1} - theta_n|
    double descent_lhs = 0.0;  // f(theta_n) - f(theta_{n+1})
    double descent_rhs = 0.0;  // (lambda_sqrt + rho) r_n^2 / 2
    std::int64_t flops = 0;
    double wall_time = 0.0;
    bool descent_ok = true;
    bool stability_ok = true;
    bool step_bound_ok = true;
};

struct RonResult {
    std::vector<StepDiagnostics> steps;  // one row per step, plus the terminal state row
    Eigen::VectorXd theta;
    int iterations = 0;
    std::string termination;  // "grad_tol" | "max_iters" | "error: ..."
    bool lemma_violation = false;
    std::uint64_t seed = 0;
    double lambda_floor = 0.0;  // resolved value
};

/// lambda = max(rho + sqrt(L_H * grad_norm), floor).
double compute_lambda(double grad_norm, double lipschitz_hessian, double rho, double floor);

/// Solves (F F^T + lambda I) x = rhs through the m x m system
/// (lambda I + F^T F) y = F^T rhs; requires lambda > 0. Charges
/// 2dm^2 + 2dm + (2/3)m^3 + 2dm flops to *flops if given.
Eigen::VectorXd woodbury_solve(const Eigen::MatrixXd& factor, double lambda,
                               const Eigen::VectorXd& rhs, std::int64_t* flops = nullptr);

/// State threaded between steps so f and the gradient are evaluated once per
/// iterate.
struct StepState {
    double f = 0.0;
    Eigen::VectorXd grad;
    std::int64_t flops = 0;
    double wall_time = 0.0;
    double lambda_floor = 0.0;
};

/// One update theta <- theta - (B + lambda I)^{-1} grad. On return the state
/// holds f and the gradient at the new iterate. Throws NumericalError on
/// non-finite values or a failed factorization.
StepDiagnostics ron_step(const SmoothObjective& objective, Eigen::VectorXd& theta,
                         const RonConfig& config, SplitMix64& rng, StepState& state, int iter);

/// Convenience single-step form; evaluates f and the gradient internally.
std::pair<Eigen::VectorXd, StepDiagnostics> ron_step(const SmoothObjective& objective,
                                                     const Eigen::VectorXd& theta,
                                                     const RonConfig& config, SplitMix64& rng);

/// Full solve: iterates until grad_tol or max_iters. Step errors terminate the
/// run but the trace up to the failing iteration is returned.
RonResult run_ron(const SmoothObjective& objective, Eigen::VectorXd theta0,
                  const RonConfig& config);

}  // namespace ron
