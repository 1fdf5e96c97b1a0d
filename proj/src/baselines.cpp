#include "ron/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "ron/errors.hpp"
#include "ron/newton.hpp"

namespace ron {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(const Clock::time_point& t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

Eigen::VectorXd sinkhorn_row_scaling(const EotDual& problem, const Eigen::VectorXd& v) {
    const Eigen::VectorXd& r = problem.row_marginal();
    const Eigen::VectorXd mass = problem.kernel() * v;
    Eigen::VectorXd u(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        if (r[i] == 0.0) {
            u[i] = 1.0;
        } else if (mass[i] == 0.0) {
            throw InfeasibleError("sinkhorn: zero kernel mass for positive row marginal");
        } else {
            u[i] = r[i] / mass[i];
        }
    }
    return u;
}

Eigen::VectorXd sinkhorn_col_scaling(const EotDual& problem, const Eigen::VectorXd& u) {
    const Eigen::VectorXd& c = problem.col_marginal();
    const Eigen::VectorXd mass = problem.kernel().transpose() * u;
    Eigen::VectorXd v(c.size());
    for (Eigen::Index j = 0; j < c.size(); ++j) {
        if (c[j] == 0.0) {
            v[j] = 1.0;
        } else if (mass[j] == 0.0) {
            throw InfeasibleError("sinkhorn: zero kernel mass for positive column marginal");
        } else {
            v[j] = c[j] / mass[j];
        }
    }
    return v;
}

BaselineResult sinkhorn_run(const EotDual& problem, int max_iters, double tol) {
    const auto t0 = Clock::now();
    const Eigen::Index a = problem.rows(), b = problem.cols();

    BaselineResult out;
    out.solver_name = "sinkhorn";

    Eigen::VectorXd u = Eigen::VectorXd::Ones(a);
    Eigen::VectorXd v = Eigen::VectorXd::Ones(b);
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(a + b);
    std::int64_t flops = 0;

    auto report = [&](int iter) {
        theta.head(a) = u.array().log();
        theta.tail(b) = v.array().log();
        TraceRow row;
        row.iter = iter;
        row.f = problem.value(theta);
        row.grad_norm = problem.gradient(theta).norm();
        row.flops = flops;
        row.wall_time = seconds_since(t0);
        out.rows.push_back(row);
        return row.grad_norm;
    };

    if (report(0) <= tol) {
        out.solution = theta;
        out.termination = "tol";
        return out;
    }
    for (int iter = 1; iter <= max_iters; ++iter) {
        u = sinkhorn_row_scaling(problem, v);
        v = sinkhorn_col_scaling(problem, u);
        flops += 4 * a * b;
        if (report(iter) <= tol) {
            out.solution = theta;
            out.termination = "tol";
            return out;
        }
    }
    out.solution = theta;
    out.termination = "max_iters";
    return out;
}

BaselineResult gradient_descent_run(const SmoothObjective& objective, Eigen::VectorXd theta0,
                                    GdStepRule rule, double lipschitz_gradient,
                                    double lipschitz_hessian, int max_iters, double tol) {
    if (!(lipschitz_gradient > 0.0)) {
        throw std::invalid_argument("gradient_descent_run: L must be positive");
    }
    const auto t0 = Clock::now();
    const Eigen::Index d = objective.dim();

    BaselineResult out;
    out.solver_name = rule == GdStepRule::Fixed ? "gd_fixed" : "gd_ron_identity";

    double f = objective.value(theta0);
    Eigen::VectorXd grad = objective.gradient(theta0);
    std::int64_t flops = objective.value_cost() + objective.gradient_cost();
    const double lambda_floor = 1e-12 * (1.0 + grad.norm());

    int consecutive_increases = 0;
    for (int iter = 0; iter <= max_iters; ++iter) {
        TraceRow row;
        row.iter = iter;
        row.f = f;
        row.grad_norm = grad.norm();
        row.flops = flops;
        row.wall_time = seconds_since(t0);

        if (row.grad_norm <= tol || iter == max_iters || consecutive_increases >= 10) {
            out.rows.push_back(row);
            out.termination = row.grad_norm <= tol          ? "tol"
                              : consecutive_increases >= 10 ? "diverged"
                                                            : "max_iters";
            break;
        }

        Eigen::VectorXd direction;
        if (rule == GdStepRule::Fixed) {
            direction = -(grad / lipschitz_gradient);
        } else {
            // Same arithmetic as run_ron's ScaledIdentity branch.
            const double lambda =
                compute_lambda(row.grad_norm, lipschitz_hessian, 0.0, lambda_floor);
            row.lambda_sqrt = std::sqrt(lipschitz_hessian * row.grad_norm);
            direction = -(grad / (lipschitz_gradient + lambda));
        }
        row.step_norm = direction.norm();
        theta0 += direction;

        const double f_next = objective.value(theta0);
        grad = objective.gradient(theta0);
        flops += 2 * d + objective.value_cost() + objective.gradient_cost();
        if (!std::isfinite(f_next) || !grad.allFinite()) {
            out.rows.push_back(row);
            out.termination = "error: non-finite objective value or gradient";
            break;
        }
        consecutive_increases = f_next > f ? consecutive_increases + 1 : 0;
        f = f_next;
        out.rows.push_back(row);
    }
    out.solution = std::move(theta0);
    return out;
}

BaselineResult randomized_kaczmarz_run(const LeastSquares& problem, Eigen::VectorXd x0,
                                       int max_epochs, double tol, SplitMix64 rng) {
    const auto t0 = Clock::now();
    const Eigen::MatrixXd& a = problem.matrix();
    const Eigen::VectorXd& b = problem.rhs();
    const Eigen::Index p = a.rows(), d = a.cols();
    if (x0.size() != d) throw std::invalid_argument("randomized_kaczmarz_run: x0 length mismatch");

    // Sampling distribution over nonzero rows, proportional to squared norms.
    Eigen::VectorXd row_norms_sq = a.rowwise().squaredNorm();
    std::vector<double> cumulative;
    std::vector<Eigen::Index> row_of;
    cumulative.reserve(p);
    row_of.reserve(p);
    double total = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) {
        if (row_norms_sq[i] > 0.0) {
            total += row_norms_sq[i];
            cumulative.push_back(total);
            row_of.push_back(i);
        }
    }
    if (cumulative.empty()) {
        throw std::invalid_argument("randomized_kaczmarz_run: matrix has no nonzero rows");
    }

    BaselineResult out;
    out.solver_name = "kaczmarz";
    std::int64_t flops = 0;
    Eigen::VectorXd x_prev = x0;

    auto report = [&](int epoch) {
        TraceRow row;
        row.iter = epoch;
        row.f = problem.value(x0);
        row.grad_norm = problem.gradient(x0).norm();
        row.step_norm = epoch == 0 ? 0.0 : (x0 - x_prev).norm();
        row.flops = flops;
        row.wall_time = seconds_since(t0);
        out.rows.push_back(row);
        return row.grad_norm;
    };

    if (report(0) <= tol) {
        out.solution = std::move(x0);
        out.termination = "tol";
        return out;
    }
    for (int epoch = 1; epoch <= max_epochs; ++epoch) {
        x_prev = x0;
        for (Eigen::Index step = 0; step < d; ++step) {
            const double target = rng.next_double() * total;
            const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
            const Eigen::Index i =
                row_of[std::min<std::size_t>(it - cumulative.begin(), row_of.size() - 1)];
            const double residual = b[i] - a.row(i).dot(x0);
            x0 += (residual / row_norms_sq[i]) * a.row(i).transpose();
            flops += 4 * d;
        }
        if (report(epoch) <= tol) {
            out.solution = std::move(x0);
            out.termination = "tol";
            return out;
        }
    }
    out.solution = std::move(x0);
    out.termination = "max_epochs";
    return out;
}

BaselineResult cgls_run(const LeastSquares& problem, Eigen::VectorXd x0, int max_iters,
                        double tol) {
    const auto t0 = Clock::now();
    const Eigen::MatrixXd& a = problem.matrix();
    const Eigen::VectorXd& b = problem.rhs();
    const Eigen::Index p = a.rows(), d = a.cols();
    if (x0.size() != d) throw std::invalid_argument("cgls_run: x0 length mismatch");

    BaselineResult out;
    out.solver_name = "cgls";

    Eigen::VectorXd residual = b - a * x0;
    Eigen::VectorXd normal_residual = a.transpose() * residual;
    Eigen::VectorXd direction = normal_residual;
    double gamma = normal_residual.squaredNorm();
    std::int64_t flops = 4 * p * d;

    auto report = [&](int iter, double step_norm) {
        TraceRow row;
        row.iter = iter;
        row.f = 0.5 * residual.squaredNorm();
        row.grad_norm = std::sqrt(gamma);
        row.step_norm = step_norm;
        row.flops = flops;
        row.wall_time = seconds_since(t0);
        out.rows.push_back(row);
        return row.grad_norm;
    };

    if (report(0, 0.0) <= tol) {
        out.solution = std::move(x0);
        out.termination = "tol";
        return out;
    }
    for (int iter = 1; iter <= max_iters; ++iter) {
        const Eigen::VectorXd q = a * direction;
        const double curvature = q.squaredNorm();
        if (curvature == 0.0) {
            out.solution = std::move(x0);
            out.termination = "breakdown";
            return out;
        }
        const double alpha = gamma / curvature;
        const double step_norm = std::abs(alpha) * direction.norm();
        x0 += alpha * direction;
        residual -= alpha * q;
        normal_residual = a.transpose() * residual;
        const double gamma_next = normal_residual.squaredNorm();
        direction = normal_residual + (gamma_next / gamma) * direction;
        gamma = gamma_next;
        flops += 4 * p * d + 6 * d;
        if (report(iter, step_norm) <= tol) {
            out.solution = std::move(x0);
            out.termination = "tol";
            return out;
        }
    }
    out.solution = std::move(x0);
    out.termination = "max_iters";
    return out;
}

}  // namespace ron
