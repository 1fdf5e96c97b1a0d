#include "ron/checks.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "ron/baselines.hpp"
#include "ron/eot.hpp"
#include "ron/generators.hpp"
#include "ron/least_squares.hpp"
#include "ron/newton.hpp"
#include "ron/nystrom.hpp"
#include "ron/trace_io.hpp"

namespace ron {

namespace {

struct Recorder {
    std::string suite;
    std::vector<CheckResult>* out;

    void add(const std::string& name, bool passed, const std::string& detail = "") {
        out->push_back({suite, name, passed, detail});
    }

    template <typename L, typename R>
    void expect_le(const std::string& name, L lhs, R rhs, const std::string& inequality) {
        std::ostringstream detail;
        if (!(lhs <= rhs)) {
            detail << inequality << " violated: lhs=" << lhs << " rhs=" << rhs;
        }
        add(name, lhs <= rhs, detail.str());
    }
};

Eigen::MatrixXd random_psd(Eigen::Index d, Eigen::Index rank, SplitMix64& rng) {
    Eigen::MatrixXd factor(d, rank);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < rank; ++j) factor(i, j) = rng.next_gaussian();
    }
    return factor * factor.transpose();
}

EotDual demo_eot(Eigen::Index a, Eigen::Index b, double epsilon, std::uint64_t seed) {
    return EotDual(gaussian_marginal(a, 0.3, 0.05), gaussian_marginal(b, 0.7, 0.05),
                   random_cost(a, b, SplitMix64(seed)), epsilon);
}

LeastSquares demo_least_squares(Eigen::Index p, Eigen::Index d, const std::string& profile,
                                std::uint64_t seed) {
    SplitMix64 rng(seed);
    Eigen::MatrixXd a = sv_profile_matrix(p, d, sv_profile(profile, d), rng.child(1));
    Eigen::VectorXd b(p);
    SplitMix64 rhs = rng.child(2);
    for (Eigen::Index i = 0; i < p; ++i) b[i] = rhs.next_gaussian();
    return LeastSquares(std::move(a), std::move(b));
}

void check_psd_sketch(std::vector<CheckResult>& out) {
    Recorder rec{"psd_sketch", &out};
    SplitMix64 rng(7001);

    // Exact recovery at k >= rank.
    {
        const Eigen::MatrixXd h = random_psd(30, 6, rng);
        bool ok = true;
        std::ostringstream detail;
        for (std::uint64_t seed = 0; seed < 20 && ok; ++seed) {
            const auto f = rpc_factorize(DenseHessianOracle(h), 6, SplitMix64(seed));
            if (f.trace_residual > 1e-8 * h.trace()) {
                ok = false;
                detail << "trace_residual=" << f.trace_residual << " > 1e-8 tr(H)="
                       << 1e-8 * h.trace() << " at seed " << seed;
            }
        }
        rec.add("exact recovery at k >= rank", ok, detail.str());
    }

    // Underestimation: H - F F^T stays PSD.
    {
        const Eigen::MatrixXd h = random_psd(25, 25, rng);
        bool ok = true;
        std::ostringstream detail;
        for (std::uint64_t seed = 0; seed < 10 && ok; ++seed) {
            const auto f = rpc_factorize(DenseHessianOracle(h), 8, SplitMix64(seed));
            const Eigen::MatrixXd residual = h - f.factor * f.factor.transpose();
            const double min_eig =
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(residual).eigenvalues().minCoeff();
            const double norm = h.operatorNorm();
            if (min_eig < -1e-8 * norm) {
                ok = false;
                detail << "lambda_min(H - FF^T)=" << min_eig << " < -1e-8 ||H||=" << -1e-8 * norm;
            }
        }
        rec.add("residual PSD underestimation", ok, detail.str());
    }

    // Determinism of the factorization.
    {
        const Eigen::MatrixXd h = random_psd(20, 10, rng);
        const auto f1 = rpc_factorize(DenseHessianOracle(h), 5, SplitMix64(42));
        const auto f2 = rpc_factorize(DenseHessianOracle(h), 5, SplitMix64(42));
        rec.add("seeded determinism", f1.factor == f2.factor && f1.pivots == f2.pivots,
                "identical seeds produced different factors");
    }

    // Pinned sample-complexity values.
    {
        const bool ok = rpc_sample_complexity(1, 1.0, 1.0) == 1 &&
                        rpc_sample_complexity(5, 1.0, 0.01) == 28 &&
                        rpc_sample_complexity(2, 0.5, 1.0) == 6;
        rec.add("sample complexity formula", ok, "k(r, eps, eta) mismatch against pinned values");
    }

    // apply_factor against dense materialization.
    {
        SplitMix64 local(99);
        Eigen::MatrixXd f(40, 5);
        Eigen::VectorXd v(40);
        for (Eigen::Index i = 0; i < 40; ++i) {
            v[i] = local.next_gaussian();
            for (Eigen::Index j = 0; j < 5; ++j) f(i, j) = local.next_gaussian();
        }
        NystromFactor factor;
        factor.factor = f;
        const Eigen::VectorXd got = apply_factor(factor, v);
        const Eigen::VectorXd want = (f * f.transpose()) * v;
        rec.expect_le("apply_factor dense agreement", (got - want).norm(), 1e-12 * want.norm(),
                      "||F F^T v - dense|| <= 1e-12 ||dense||");
    }
}

void check_woodbury(std::vector<CheckResult>& out) {
    Recorder rec{"woodbury", &out};
    SplitMix64 rng(7002);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index d = 120, m = 10;
        Eigen::MatrixXd f(d, m);
        Eigen::VectorXd g(d);
        for (Eigen::Index i = 0; i < d; ++i) {
            g[i] = rng.next_gaussian();
            for (Eigen::Index j = 0; j < m; ++j) f(i, j) = rng.next_gaussian();
        }
        const double lambda = std::pow(10.0, -6.0 * rng.next_double());
        const Eigen::VectorXd got = woodbury_solve(f, lambda, g);
        Eigen::MatrixXd dense = f * f.transpose();
        dense.diagonal().array() += lambda;
        const Eigen::VectorXd want = dense.llt().solve(g);
        worst = std::max(worst, (got - want).norm() / want.norm());
    }
    rec.expect_le("low-rank solve equals dense solve", worst, 1e-10,
                  "relative error of (FF^T + lambda I)^{-1} g <= 1e-10");
}

void check_objectives(std::vector<CheckResult>& out) {
    Recorder rec{"objectives", &out};
    const EotDual eot = demo_eot(12, 10, 0.1, 11);
    SplitMix64 rng(7003);

    Eigen::VectorXd theta(eot.dim());
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = 0.3 * rng.next_gaussian();

    // Finite differences of the value against the gradient.
    {
        const Eigen::VectorXd grad = eot.gradient(theta);
        const Eigen::VectorXd fd = fd_gradient(eot, theta);
        rec.expect_le("eot gradient finite differences", (grad - fd).norm() / grad.norm(), 1e-5,
                      "relative FD gradient error <= 1e-5");
    }
    // Hessian oracle columns against finite differences of the gradient.
    {
        const Eigen::MatrixXd h = eot.hessian_oracle(theta)->materialize();
        const Eigen::MatrixXd fd = fd_hessian(eot, theta);
        rec.expect_le("eot hessian finite differences", (h - fd).norm() / h.norm(), 1e-4,
                      "relative FD Hessian error <= 1e-4");
    }
    // Translation invariance and the gradient balance identity.
    {
        Eigen::VectorXd shifted = theta;
        shifted.head(eot.rows()).array() += 0.7;
        shifted.tail(eot.cols()).array() -= 0.7;
        rec.expect_le("eot translation invariance",
                      std::abs(eot.value(shifted) - eot.value(theta)),
                      1e-10 * (1.0 + std::abs(eot.value(theta))),
                      "|f(alpha + t, beta - t) - f(alpha, beta)| <= 1e-10 (1 + |f|)");
        const Eigen::VectorXd grad = eot.gradient(theta);
        rec.expect_le("eot gradient balance",
                      std::abs(grad.head(eot.rows()).sum() - grad.tail(eot.cols()).sum()), 1e-12,
                      "|sum grad_alpha - sum grad_beta| <= 1e-12");
    }
    // Least squares oracle columns equal dense A^T A columns.
    {
        const LeastSquares ls = demo_least_squares(30, 10, "medium", 13);
        const Eigen::VectorXd x = Eigen::VectorXd::Zero(10);
        const Eigen::MatrixXd dense = ls.hessian_dense(x);
        const Eigen::MatrixXd from_oracle = ls.hessian_oracle(x)->materialize();
        rec.expect_le("least squares hessian oracle", (dense - from_oracle).norm(),
                      1e-12 * dense.norm(), "||oracle - A^T A|| <= 1e-12 ||A^T A||");
    }
}

void check_lemmas(std::vector<CheckResult>& out, const CheckOptions& options) {
    Recorder rec{"lemmas", &out};

    auto report = [&](const std::string& label, const RonResult& result) {
        bool descent = true, stability = true, step_bound = true;
        std::ostringstream detail;
        for (const StepDiagnostics& s : result.steps) {
            if (!s.descent_ok && descent) {
                descent = false;
                detail << "descent lemma violated at iter " << s.iter << ": f_n - f_{n+1}="
                       << s.descent_lhs << " < (lambda+rho) r^2/2 - slack=" << s.descent_rhs
                       << "; ";
            }
            if (!s.stability_ok && stability) {
                stability = false;
                detail << "stability lemma violated at iter " << s.iter
                       << ": ||g_{n+1}|| > 1.5 (lambda_sqrt+rho) r_n, lambda_sqrt="
                       << s.lambda_sqrt << " rho=" << s.rho << " r=" << s.step_norm << "; ";
            }
            if (!s.step_bound_ok && step_bound) {
                step_bound = false;
                detail << "step bound violated at iter " << s.iter
                       << ": L_H r_n > lambda^2/(lambda+rho); ";
            }
        }
        rec.add(label + ": descent lemma", descent, detail.str());
        rec.add(label + ": stability lemma", stability, detail.str());
        rec.add(label + ": step bound", step_bound, detail.str());
    };

    // Least squares, L_H = 0, under-rank sketch.
    {
        const LeastSquares ls = demo_least_squares(200, 50, "fast", 17);
        RonConfig config;
        config.oracle_kind = OracleKind::Rpc;
        config.rank = 20;
        config.lipschitz_hessian = 0.0;
        config.max_iters = 60;
        config.grad_tol = 1e-10;
        config.assert_lemmas = true;
        config.seed = 3;
        report("least squares rpc", run_ron(ls, Eigen::VectorXd::Zero(ls.dim()), config));
    }
    // EOT with the heuristic Hessian-Lipschitz bound (optionally rescaled).
    {
        const EotDual eot = demo_eot(50, 50, 0.05, 19);
        RonConfig config;
        config.oracle_kind = OracleKind::Rpc;
        config.rank = 20;
        config.lipschitz_hessian = options.eot_lh_scale * eot.suggested_lipschitz_hessian();
        config.max_iters = 80;
        config.grad_tol = 1e-10;
        config.assert_lemmas = true;
        config.seed = 5;
        report("eot rpc", run_ron(eot, Eigen::VectorXd::Zero(eot.dim()), config));

        config.oracle_kind = OracleKind::ExactDense;
        report("eot exact", run_ron(eot, Eigen::VectorXd::Zero(eot.dim()), config));
    }
}

void check_baselines(std::vector<CheckResult>& out) {
    Recorder rec{"baselines", &out};

    // Row scaling makes the plan's row sums match the marginal exactly.
    {
        const EotDual eot = demo_eot(15, 12, 0.2, 23);
        const Eigen::VectorXd v = Eigen::VectorXd::Ones(eot.cols());
        const Eigen::VectorXd u = sinkhorn_row_scaling(eot, v);
        const Eigen::VectorXd row_sums = u.cwiseProduct(eot.kernel() * v);
        rec.expect_le("sinkhorn row fixed point",
                      (row_sums - eot.row_marginal()).cwiseAbs().maxCoeff(), 1e-12,
                      "plan row sums equal r after the u-update");
    }
    // Kaczmarz annihilates the sampled row's residual: verified via a single
    // 1x1 projection.
    {
        Eigen::MatrixXd a(1, 1);
        a << 2.0;
        Eigen::VectorXd b(1);
        b << 4.0;
        const LeastSquares ls(a, b);
        const auto result =
            randomized_kaczmarz_run(ls, Eigen::VectorXd::Zero(1), 1, 1e-14, SplitMix64(0));
        rec.expect_le("kaczmarz row projection", std::abs(result.solution[0] - 2.0), 1e-15,
                      "1x1 consistent system solved in one projection");
    }
    // CGLS against the dense least-squares solution.
    {
        const LeastSquares ls = demo_least_squares(80, 20, "slow", 29);
        const auto result = cgls_run(ls, Eigen::VectorXd::Zero(20), 200, 1e-12);
        const double gap = ls.value(result.solution) - ls.optimal_value();
        rec.expect_le("cgls reaches the least-squares optimum", std::abs(gap),
                      1e-8 * (1.0 + ls.optimal_value()), "f(x_cgls) - f* <= 1e-8 (1 + f*)");
    }
}

void check_harness(std::vector<CheckResult>& out) {
    Recorder rec{"harness", &out};

    {
        const Eigen::VectorXd m = gaussian_marginal(101, 0.3, 0.05);
        rec.expect_le("marginal normalization", std::abs(m.sum() - 1.0), 1e-12,
                      "|sum - 1| <= 1e-12");
    }
    {
        const Eigen::MatrixXd cost = random_cost(50, 40, SplitMix64(31));
        rec.add("cost range", cost.minCoeff() >= 0.0 && cost.maxCoeff() < 1.0,
                "entries outside [0, 1)");
    }
    {
        const Eigen::VectorXd profile = sv_profile("fast", 30);
        const Eigen::MatrixXd a = sv_profile_matrix(60, 30, profile, SplitMix64(37));
        const Eigen::VectorXd sv = Eigen::BDCSVD<Eigen::MatrixXd>(a).singularValues();
        rec.expect_le("sv profile spectrum", (sv - profile).norm() / profile.norm(), 1e-10,
                      "relative spectrum error <= 1e-10");
    }
}

}  // namespace

std::vector<std::string> check_suite_names() {
    return {"psd_sketch", "woodbury", "objectives", "lemmas", "baselines", "harness"};
}

std::vector<CheckResult> run_checks(const std::string& suite, const CheckOptions& options) {
    static const std::map<std::string, std::function<void(std::vector<CheckResult>&,
                                                          const CheckOptions&)>>
        suites = {
            {"psd_sketch", [](auto& out, const auto&) { check_psd_sketch(out); }},
            {"woodbury", [](auto& out, const auto&) { check_woodbury(out); }},
            {"objectives", [](auto& out, const auto&) { check_objectives(out); }},
            {"lemmas", [](auto& out, const auto& opt) { check_lemmas(out, opt); }},
            {"baselines", [](auto& out, const auto&) { check_baselines(out); }},
            {"harness", [](auto& out, const auto&) { check_harness(out); }},
        };

    std::vector<CheckResult> out;
    if (suite == "all") {
        for (const auto& name : check_suite_names()) suites.at(name)(out, options);
        return out;
    }
    const auto it = suites.find(suite);
    if (it == suites.end()) {
        throw std::invalid_argument("unknown check suite '" + suite + "'");
    }
    it->second(out, options);
    return out;
}

Eigen::VectorXd fd_gradient(const SmoothObjective& objective, const Eigen::VectorXd& theta) {
    const double h = 1e-6 * (1.0 + theta.norm());
    Eigen::VectorXd grad(theta.size());
    Eigen::VectorXd probe = theta;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        probe[i] = theta[i] + h;
        const double fp = objective.value(probe);
        probe[i] = theta[i] - h;
        const double fm = objective.value(probe);
        probe[i] = theta[i];
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

Eigen::MatrixXd fd_hessian(const SmoothObjective& objective, const Eigen::VectorXd& theta) {
    const double h = 1e-6 * (1.0 + theta.norm());
    Eigen::MatrixXd hessian(theta.size(), theta.size());
    Eigen::VectorXd probe = theta;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        probe[i] = theta[i] + h;
        const Eigen::VectorXd gp = objective.gradient(probe);
        probe[i] = theta[i] - h;
        const Eigen::VectorXd gm = objective.gradient(probe);
        probe[i] = theta[i];
        hessian.col(i) = (gp - gm) / (2.0 * h);
    }
    return hessian;
}

}  // namespace ron
