#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ron/baselines.hpp"
#include "ron/eot.hpp"
#include "ron/generators.hpp"
#include "ron/hessian_oracle.hpp"
#include "ron/least_squares.hpp"
#include "ron/newton.hpp"
#include "ron/nystrom.hpp"
#include "ron/rng.hpp"
#include "ron/trace_io.hpp"
#include "ron/version.hpp"

namespace py = pybind11;

namespace {

py::dict rows_to_dict(const std::vector<ron::StepDiagnostics>& steps) {
    const auto rows = ron::to_trace_rows(steps);
    py::list iter, f, grad_norm, lambda_sqrt, rho, step_norm, flops, wall_time;
    for (const auto& r : rows) {
        iter.append(r.iter);
        f.append(r.f);
        grad_norm.append(r.grad_norm);
        lambda_sqrt.append(r.lambda_sqrt);
        rho.append(r.rho);
        step_norm.append(r.step_norm);
        flops.append(r.flops);
        wall_time.append(r.wall_time);
    }
    py::dict out;
    out["iter"] = iter;
    out["f"] = f;
    out["grad_norm"] = grad_norm;
    out["lambda_sqrt"] = lambda_sqrt;
    out["rho"] = rho;
    out["step_norm"] = step_norm;
    out["flops"] = flops;
    out["wall_time_s"] = wall_time;
    return out;
}

ron::RonConfig make_config(const std::string& oracle, Eigen::Index k, double identity_scale,
                           double lipschitz_hessian, int max_iters, double grad_tol,
                           double lambda_floor, bool assert_lemmas, std::uint64_t seed) {
    ron::RonConfig config;
    if (oracle == "rpc") {
        config.oracle_kind = ron::OracleKind::Rpc;
    } else if (oracle == "exact_dense") {
        config.oracle_kind = ron::OracleKind::ExactDense;
    } else if (oracle == "scaled_identity") {
        config.oracle_kind = ron::OracleKind::ScaledIdentity;
    } else {
        throw std::invalid_argument("oracle must be rpc, exact_dense, or scaled_identity");
    }
    config.rank = k;
    config.identity_scale = identity_scale;
    config.lipschitz_hessian = lipschitz_hessian;
    config.max_iters = max_iters;
    config.grad_tol = grad_tol;
    config.lambda_floor = lambda_floor;
    config.assert_lemmas = assert_lemmas;
    config.seed = seed;
    return config;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Regularized overestimated Newton with randomized low-rank Hessian sketching";
    m.attr("__version__") = ron::kVersion;

    py::class_<ron::NystromFactor>(m, "NystromFactor")
        .def_readonly("factor", &ron::NystromFactor::factor)
        .def_readonly("trace_residual", &ron::NystromFactor::trace_residual)
        .def_readonly("pivots", &ron::NystromFactor::pivots)
        .def_readonly("flops", &ron::NystromFactor::flops)
        .def("rank", &ron::NystromFactor::rank);

    m.def(
        "rpc_factorize",
        [](const Eigen::MatrixXd& matrix, Eigen::Index k, std::uint64_t seed) {
            return ron::rpc_factorize(ron::DenseHessianOracle(matrix), k, ron::SplitMix64(seed));
        },
        py::arg("matrix"), py::arg("k"), py::arg("seed") = 0,
        "Randomly pivoted Cholesky factorization of a dense PSD matrix");

    m.def("rpc_sample_complexity", &ron::rpc_sample_complexity, py::arg("r"), py::arg("eps"),
          py::arg("eta"));

    m.def(
        "woodbury_solve",
        [](const Eigen::MatrixXd& factor, double lambda, const Eigen::VectorXd& rhs) {
            return ron::woodbury_solve(factor, lambda, rhs);
        },
        py::arg("factor"), py::arg("lam"), py::arg("rhs"),
        "Solve (F F^T + lambda I) x = rhs through the small Woodbury system");

    py::class_<ron::SmoothObjective>(m, "SmoothObjective");

    py::class_<ron::EotDual, ron::SmoothObjective>(m, "EotDual")
        .def(py::init<Eigen::VectorXd, Eigen::VectorXd, const Eigen::MatrixXd&, double>(),
             py::arg("row_marginal"), py::arg("col_marginal"), py::arg("cost"),
             py::arg("epsilon"))
        .def_property_readonly("dim", &ron::EotDual::dim)
        .def("value", &ron::EotDual::value)
        .def("gradient", &ron::EotDual::gradient)
        .def("hessian_dense", &ron::EotDual::hessian_dense)
        .def("plan", &ron::EotDual::plan)
        .def("suggested_lipschitz_hessian",
             py::overload_cast<>(&ron::EotDual::suggested_lipschitz_hessian, py::const_));

    py::class_<ron::LeastSquares, ron::SmoothObjective>(m, "LeastSquares")
        .def(py::init<Eigen::MatrixXd, Eigen::VectorXd>(), py::arg("a"), py::arg("b"))
        .def_property_readonly("dim", &ron::LeastSquares::dim)
        .def("value", &ron::LeastSquares::value)
        .def("gradient", &ron::LeastSquares::gradient)
        .def("hessian_dense", &ron::LeastSquares::hessian_dense)
        .def("optimal_value", &ron::LeastSquares::optimal_value);

    const auto run_ron_impl = [](const ron::SmoothObjective& objective,
                                 const Eigen::VectorXd& theta0, const std::string& oracle,
                                 Eigen::Index k, double identity_scale, double lipschitz_hessian,
                                 int max_iters, double grad_tol, double lambda_floor,
                                 bool assert_lemmas, std::uint64_t seed) {
        const ron::RonConfig config =
            make_config(oracle, k, identity_scale, lipschitz_hessian, max_iters, grad_tol,
                        lambda_floor, assert_lemmas, seed);
        const ron::RonResult result = ron::run_ron(objective, theta0, config);
        py::dict out;
        out["theta"] = result.theta;
        out["iterations"] = result.iterations;
        out["termination"] = result.termination;
        out["lemma_violation"] = result.lemma_violation;
        out["trace"] = rows_to_dict(result.steps);
        return out;
    };
    m.def("run_ron", run_ron_impl, py::arg("objective"), py::arg("theta0"),
          py::arg("oracle") = "rpc", py::arg("k") = 10, py::arg("identity_scale") = 1.0,
          py::arg("lipschitz_hessian") = 0.0, py::arg("max_iters") = 100,
          py::arg("grad_tol") = 1e-8, py::arg("lambda_floor") = ron::kAutoLambdaFloor,
          py::arg("assert_lemmas") = false, py::arg("seed") = 0);

    m.def(
        "sinkhorn",
        [](const ron::EotDual& problem, int max_iters, double tol) {
            const ron::BaselineResult result = ron::sinkhorn_run(problem, max_iters, tol);
            py::dict out;
            out["potentials"] = result.solution;
            out["termination"] = result.termination;
            py::list grad_norm, iter;
            for (const auto& r : result.rows) {
                iter.append(r.iter);
                grad_norm.append(r.grad_norm);
            }
            out["iter"] = iter;
            out["grad_norm"] = grad_norm;
            return out;
        },
        py::arg("problem"), py::arg("max_iters") = 1000, py::arg("tol") = 1e-8);

    m.def("gaussian_marginal", &ron::gaussian_marginal, py::arg("d"), py::arg("mean"),
          py::arg("sigma"));
    m.def(
        "random_cost",
        [](Eigen::Index a, Eigen::Index b, std::uint64_t seed) {
            return ron::random_cost(a, b, ron::SplitMix64(seed));
        },
        py::arg("a"), py::arg("b"), py::arg("seed") = 0);
    m.def("grid_l1_cost", &ron::grid_l1_cost, py::arg("h"), py::arg("w"));
    m.def(
        "sv_profile_matrix",
        [](Eigen::Index p, Eigen::Index d, const Eigen::VectorXd& profile, std::uint64_t seed) {
            return ron::sv_profile_matrix(p, d, profile, ron::SplitMix64(seed));
        },
        py::arg("p"), py::arg("d"), py::arg("profile"), py::arg("seed") = 0);
    m.def("sv_profile", &ron::sv_profile, py::arg("name"), py::arg("d"));
}
