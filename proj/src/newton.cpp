#include "ron/newton.hpp"

#include <Eigen/Cholesky>

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "ron/errors.hpp"
#include "ron/nystrom.hpp"

namespace ron {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kLemmaSlack = 1e-8;

double resolve_lambda_floor(const RonConfig& config, double grad_norm0) {
    if (config.lambda_floor >= 0.0) return config.lambda_floor;
    return 1e-12 * (1.0 + grad_norm0);
}

Eigen::VectorXd scaled_identity_direction(const Eigen::VectorXd& grad, double scale,
                                          double lambda) {
    return -(grad / (scale + lambda));
}

void check_finite(double f, const Eigen::VectorXd& grad) {
    if (!std::isfinite(f) || !grad.allFinite()) {
        throw NumericalError("ron_step: non-finite objective value or gradient");
    }
}

}  // namespace

double compute_lambda(double grad_norm, double lipschitz_hessian, double rho, double floor) {
    return std::max(rho + std::sqrt(lipschitz_hessian * grad_norm), floor);
}

Eigen::VectorXd woodbury_solve(const Eigen::MatrixXd& factor, double lambda,
                               const Eigen::VectorXd& rhs, std::int64_t* flops) {
    const Eigen::Index d = factor.rows();
    const Eigen::Index m = factor.cols();
    if (rhs.size() != d) throw std::invalid_argument("woodbury_solve: rhs length mismatch");
    if (!(lambda > 0.0)) throw std::invalid_argument("woodbury_solve: lambda must be positive");
    if (m == 0) {
        if (flops != nullptr) *flops += d;
        return rhs / lambda;
    }
    Eigen::MatrixXd small = factor.transpose() * factor;
    small.diagonal().array() += lambda;
    const Eigen::LLT<Eigen::MatrixXd> llt(small);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("woodbury_solve: Cholesky factorization of the small system failed");
    }
    const Eigen::VectorXd y = llt.solve(factor.transpose() * rhs);
    if (flops != nullptr) {
        *flops += 2 * d * m * m + 2 * d * m + (2 * m * m * m) / 3 + 2 * d * m;
    }
    return (rhs - factor * y) / lambda;
}

StepDiagnostics ron_step(const SmoothObjective& objective, Eigen::VectorXd& theta,
                         const RonConfig& config, SplitMix64& rng, StepState& state, int iter) {
    const Eigen::Index d = objective.dim();
    if (theta.size() != d) throw std::invalid_argument("ron_step: parameter length mismatch");

    const auto t0 = Clock::now();
    const double grad_norm = state.grad.norm();
    const double lambda_sqrt = std::sqrt(config.lipschitz_hessian * grad_norm);

    StepDiagnostics diag;
    diag.iter = iter;
    diag.f_value = state.f;
    diag.grad_norm = grad_norm;
    diag.lambda_sqrt = lambda_sqrt;
    diag.flops = state.flops;
    diag.wall_time = state.wall_time;

    double rho = 0.0;
    Eigen::VectorXd direction;
    std::int64_t work = 0;

    switch (config.oracle_kind) {
        case OracleKind::Rpc: {
            work += objective.hessian_oracle_cost();
            const auto oracle = objective.hessian_oracle(theta);
            SplitMix64 step_rng = rng.child(static_cast<std::uint64_t>(iter));
            const NystromFactor sketch = rpc_factorize(*oracle, config.rank, step_rng);
            work += sketch.flops;
            rho = sketch.trace_residual;
            const double lambda =
                compute_lambda(grad_norm, config.lipschitz_hessian, rho, state.lambda_floor);
            direction = -woodbury_solve(sketch.factor, lambda, state.grad, &work);
            break;
        }
        case OracleKind::ExactDense: {
            work += objective.hessian_dense_cost();
            Eigen::MatrixXd hessian = objective.hessian_dense(theta);
            const double lambda =
                compute_lambda(grad_norm, config.lipschitz_hessian, 0.0, state.lambda_floor);
            hessian.diagonal().array() += lambda;
            const Eigen::LLT<Eigen::MatrixXd> llt(hessian);
            if (llt.info() != Eigen::Success) {
                throw NumericalError("ron_step: dense factorization of B + lambda I failed");
            }
            direction = -llt.solve(state.grad);
            work += (2 * static_cast<std::int64_t>(d) * d * d) / 3 +
                    2 * static_cast<std::int64_t>(d) * d;
            break;
        }
        case OracleKind::ScaledIdentity: {
            const double lambda =
                compute_lambda(grad_norm, config.lipschitz_hessian, 0.0, state.lambda_floor);
            direction = scaled_identity_direction(state.grad, config.identity_scale, lambda);
            work += 2 * d;
            break;
        }
    }

    diag.rho = rho;
    diag.step_norm = direction.norm();
    theta += direction;

    const double f_next = objective.value(theta);
    work += objective.value_cost();
    const Eigen::VectorXd grad_next = objective.gradient(theta);
    work += objective.gradient_cost();
    check_finite(f_next, grad_next);

    diag.descent_lhs = state.f - f_next;
    diag.descent_rhs = 0.5 * (lambda_sqrt + rho) * diag.step_norm * diag.step_norm;

    if (config.assert_lemmas && config.oracle_kind != OracleKind::ScaledIdentity) {
        // Valid only when L_H upper-bounds the Hessian Lipschitz constant and
        // the oracle is an overestimate of the form PSD-underestimate + rho I
        // (Rpc) or the exact Hessian (ExactDense).
        diag.descent_ok = diag.descent_lhs >= diag.descent_rhs - kLemmaSlack * (1.0 + std::abs(state.f));
        diag.stability_ok = grad_next.norm() <=
                            1.5 * (lambda_sqrt + rho) * diag.step_norm * (1.0 + kLemmaSlack);
        if (lambda_sqrt > 0.0) {
            diag.step_bound_ok =
                config.lipschitz_hessian * diag.step_norm <=
                lambda_sqrt * lambda_sqrt / (lambda_sqrt + rho) * (1.0 + kLemmaSlack);
        }
    }

    state.f = f_next;
    state.grad = grad_next;
    state.flops += work;
    state.wall_time += std::chrono::duration<double>(Clock::now() - t0).count();
    return diag;
}

std::pair<Eigen::VectorXd, StepDiagnostics> ron_step(const SmoothObjective& objective,
                                                     const Eigen::VectorXd& theta,
                                                     const RonConfig& config, SplitMix64& rng) {
    StepState state;
    state.f = objective.value(theta);
    state.grad = objective.gradient(theta);
    state.flops = objective.value_cost() + objective.gradient_cost();
    check_finite(state.f, state.grad);
    state.lambda_floor = resolve_lambda_floor(config, state.grad.norm());
    Eigen::VectorXd next = theta;
    const StepDiagnostics diag = ron_step(objective, next, config, rng, state, 0);
    return {std::move(next), diag};
}

RonResult run_ron(const SmoothObjective& objective, Eigen::VectorXd theta0,
                  const RonConfig& config) {
    if (config.max_iters < 0) throw std::invalid_argument("run_ron: max_iters must be >= 0");
    if (config.oracle_kind == OracleKind::Rpc &&
        (config.rank < 1 || config.rank > objective.dim())) {
        throw std::invalid_argument("run_ron: RPC rank must satisfy 1 <= k <= dim");
    }

    RonResult result;
    result.seed = config.seed;
    result.theta = std::move(theta0);
    SplitMix64 rng(config.seed);

    const auto t0 = Clock::now();
    StepState state;
    state.f = objective.value(result.theta);
    state.grad = objective.gradient(result.theta);
    state.flops = objective.value_cost() + objective.gradient_cost();
    check_finite(state.f, state.grad);
    state.lambda_floor = resolve_lambda_floor(config, state.grad.norm());
    state.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
    result.lambda_floor = state.lambda_floor;

    auto terminal_row = [&](int iter) {
        StepDiagnostics row;
        row.iter = iter;
        row.f_value = state.f;
        row.grad_norm = state.grad.norm();
        row.lambda_sqrt = std::sqrt(config.lipschitz_hessian * row.grad_norm);
        row.flops = state.flops;
        row.wall_time = state.wall_time;
        return row;
    };

    int n = 0;
    for (; n < config.max_iters; ++n) {
        if (state.grad.norm() <= config.grad_tol) break;
        StepDiagnostics diag;
        try {
            diag = ron_step(objective, result.theta, config, rng, state, n);
        } catch (const std::exception& err) {
            result.steps.push_back(terminal_row(n));
            result.iterations = n;
            result.termination = std::string("error: ") + err.what();
            return result;
        }
        if (config.assert_lemmas &&
            (!diag.descent_ok || !diag.stability_ok || !diag.step_bound_ok)) {
            result.lemma_violation = true;
        }
        result.steps.push_back(diag);
    }

    result.iterations = n;
    result.termination = state.grad.norm() <= config.grad_tol ? "grad_tol" : "max_iters";
    result.steps.push_back(terminal_row(n));
    return result;
}

}  // namespace ron
