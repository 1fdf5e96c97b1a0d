#include "ron/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <map>
#include <set>
#include <utility>

#include <nlohmann/json.hpp>

#include "ron/baselines.hpp"
#include "ron/errors.hpp"
#include "ron/generators.hpp"
#include "ron/matrix_market.hpp"
#include "ron/newton.hpp"
#include "ron/trace_io.hpp"
#include "ron/version.hpp"

namespace fs = std::filesystem;

namespace ron {

namespace {

const std::set<std::string> kEotSolvers = {"ron_rpc",  "ron_exact",       "ron_identity",
                                           "sinkhorn", "gd_fixed",        "gd_ron_identity"};
const std::set<std::string> kLsSolvers = {"ron_rpc",  "ron_exact", "ron_identity",
                                          "kaczmarz", "cgls",      "gd_fixed",
                                          "gd_ron_identity"};

std::string resolve_path(const std::string& base_dir, const std::string& path) {
    if (path.empty() || fs::path(path).is_absolute() || base_dir.empty()) return path;
    return (fs::path(base_dir) / path).string();
}

void require_file(const std::string& path, const std::string& field) {
    if (!fs::exists(path)) {
        throw ConfigError("config field '" + field + "': file does not exist: " + path);
    }
}

// Gershgorin-style bound on the gradient Lipschitz constant at theta0, used
// when a solver needs L and the config leaves it automatic.
double estimate_lipschitz_gradient(const ProblemInstance& instance) {
    if (instance.eot) {
        const Eigen::MatrixXd& w = instance.eot->kernel();
        const double row = w.rowwise().sum().maxCoeff();
        const double col = w.colwise().sum().maxCoeff();
        return 2.0 * std::max(row, col);
    }
    // Power iteration on A^T A with a fixed start.
    const Eigen::MatrixXd& a = instance.least_squares->matrix();
    Eigen::VectorXd v = Eigen::VectorXd::Ones(a.cols()).normalized();
    double eig = 0.0;
    for (int i = 0; i < 50; ++i) {
        v = a.transpose() * (a * v);
        eig = v.norm();
        if (eig == 0.0) return 1.0;
        v /= eig;
    }
    return eig;
}

struct RunRequest {
    std::size_t solver_index = 0;
    std::size_t seed_index = 0;
    int repeat = 0;
};

struct RunOutput {
    std::string solver;
    std::uint64_t seed = 0;
    int repeat = 0;
    std::uint64_t run_seed = 0;
    std::string status = "ok";  // "ok" or "failed: ..."
    std::string termination;
    bool lemma_violation = false;
    std::vector<TraceRow> rows;
    double wall_time = 0.0;
    std::string trace_file;
};

std::vector<double> error_series(const std::vector<TraceRow>& rows, bool least_squares,
                                 double reference_value) {
    std::vector<double> err;
    err.reserve(rows.size());
    for (const TraceRow& r : rows) {
        err.push_back(least_squares ? r.f - reference_value : r.grad_norm);
    }
    return err;
}

double median(std::vector<double> values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

RunOutput execute_run(const ExperimentConfig& config, const SolverSpec& solver,
                      const ProblemInstance& instance, std::uint64_t seed, std::size_t solver_index,
                      int repeat) {
    RunOutput out;
    out.solver = solver.name;
    out.seed = seed;
    out.repeat = repeat;

    const std::uint64_t run_tag =
        2 + solver_index * static_cast<std::size_t>(config.repeats) + static_cast<std::size_t>(repeat);
    const SplitMix64 run_stream = SplitMix64(seed).child(run_tag);
    out.run_seed = run_stream.state();

    const SmoothObjective& objective = instance.objective();
    const Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(objective.dim());

    const double l_h = solver.lipschitz_hessian >= 0.0 ? solver.lipschitz_hessian
                                                       : objective.suggested_lipschitz_hessian();
    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (solver.name == "ron_rpc" || solver.name == "ron_exact" ||
            solver.name == "ron_identity") {
            RonConfig rc;
            rc.oracle_kind = solver.name == "ron_rpc"     ? OracleKind::Rpc
                             : solver.name == "ron_exact" ? OracleKind::ExactDense
                                                          : OracleKind::ScaledIdentity;
            rc.rank = solver.k;
            rc.lipschitz_hessian = l_h;
            rc.max_iters = solver.max_iters;
            rc.grad_tol = solver.tol;
            rc.assert_lemmas = true;
            rc.seed = out.run_seed;
            if (rc.oracle_kind == OracleKind::ScaledIdentity) {
                rc.identity_scale = solver.lipschitz_gradient > 0.0
                                        ? solver.lipschitz_gradient
                                        : estimate_lipschitz_gradient(instance);
            }
            const RonResult result = run_ron(objective, theta0, rc);
            out.rows = to_trace_rows(result.steps);
            out.termination = result.termination;
            out.lemma_violation = result.lemma_violation;
            if (result.termination.rfind("error", 0) == 0) out.status = "failed: " + result.termination;
        } else if (solver.name == "sinkhorn") {
            const BaselineResult result = sinkhorn_run(*instance.eot, solver.max_iters, solver.tol);
            out.rows = result.rows;
            out.termination = result.termination;
        } else if (solver.name == "gd_fixed" || solver.name == "gd_ron_identity") {
            const double l = solver.lipschitz_gradient > 0.0 ? solver.lipschitz_gradient
                                                             : estimate_lipschitz_gradient(instance);
            const BaselineResult result = gradient_descent_run(
                objective, theta0,
                solver.name == "gd_fixed" ? GdStepRule::Fixed : GdStepRule::RonIdentity, l, l_h,
                solver.max_iters, solver.tol);
            out.rows = result.rows;
            out.termination = result.termination;
            if (result.termination.rfind("error", 0) == 0) out.status = "failed: " + result.termination;
        } else if (solver.name == "kaczmarz") {
            const BaselineResult result = randomized_kaczmarz_run(
                *instance.least_squares, theta0, solver.max_iters, solver.tol, run_stream);
            out.rows = result.rows;
            out.termination = result.termination;
        } else if (solver.name == "cgls") {
            const BaselineResult result =
                cgls_run(*instance.least_squares, theta0, solver.max_iters, solver.tol);
            out.rows = result.rows;
            out.termination = result.termination;
        } else {
            throw ConfigError("unknown solver '" + solver.name + "'");
        }
    } catch (const std::exception& err) {
        out.status = std::string("failed: ") + err.what();
        out.termination = "exception";
    }
    out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace

ExperimentConfig parse_experiment_config(const nlohmann::json& j, const std::string& base_dir) {
    ExperimentConfig config;
    try {
        config.name = j.value("name", std::string("experiment"));
        config.output_dir = resolve_path(base_dir, j.value("output_dir", config.name + "_out"));
        config.timing = j.value("timing", false);
        config.repeats = j.value("repeats", 1);
        if (config.repeats < 1) throw ConfigError("repeats must be >= 1");

        if (!j.contains("seeds") || !j["seeds"].is_array() || j["seeds"].empty()) {
            throw ConfigError("seeds must be a non-empty array");
        }
        for (const auto& s : j["seeds"]) config.seeds.push_back(s.get<std::uint64_t>());
        if (std::set<std::uint64_t>(config.seeds.begin(), config.seeds.end()).size() !=
            config.seeds.size()) {
            throw ConfigError("seeds must be distinct");
        }

        const auto& p = j.at("problem");
        config.problem.kind = p.at("kind").get<std::string>();
        if (config.problem.kind == "eot") {
            EotSpec& eot = config.problem.eot;
            eot.a = p.at("a").get<Eigen::Index>();
            eot.b = p.at("b").get<Eigen::Index>();
            eot.epsilon = p.value("epsilon", 0.01);
            if (eot.a < 1 || eot.b < 1) throw ConfigError("eot dims must be >= 1");
            if (p.contains("marginal_source")) {
                const auto& m = p["marginal_source"];
                eot.marginals.kind = m.value("kind", std::string("gaussian"));
                eot.marginals.mean_row = m.value("mean_row", 0.3);
                eot.marginals.mean_col = m.value("mean_col", 0.7);
                eot.marginals.sigma = m.value("sigma", 0.02);
                eot.marginals.row_path = resolve_path(base_dir, m.value("row", std::string()));
                eot.marginals.col_path = resolve_path(base_dir, m.value("col", std::string()));
                if (eot.marginals.kind == "file") {
                    require_file(eot.marginals.row_path, "marginal_source.row");
                    require_file(eot.marginals.col_path, "marginal_source.col");
                } else if (eot.marginals.kind != "gaussian") {
                    throw ConfigError("marginal_source.kind must be gaussian or file");
                }
            }
            if (p.contains("cost_source")) {
                const auto& c = p["cost_source"];
                eot.cost.kind = c.value("kind", std::string("uniform"));
                eot.cost.grid_h = c.value("h", 0);
                eot.cost.grid_w = c.value("w", 0);
                eot.cost.path = resolve_path(base_dir, c.value("path", std::string()));
                if (eot.cost.kind == "file") {
                    require_file(eot.cost.path, "cost_source.path");
                } else if (eot.cost.kind == "grid_l1") {
                    if (eot.cost.grid_h * eot.cost.grid_w != eot.a ||
                        eot.cost.grid_h * eot.cost.grid_w != eot.b) {
                        throw ConfigError("grid_l1 cost requires h*w == a == b");
                    }
                } else if (eot.cost.kind != "uniform") {
                    throw ConfigError("cost_source.kind must be uniform, grid_l1, or file");
                }
            }
        } else if (config.problem.kind == "least_squares") {
            LeastSquaresSpec& ls = config.problem.least_squares;
            const auto& m = p.at("matrix_source");
            ls.matrix.kind = m.value("kind", std::string("sv_profile"));
            if (ls.matrix.kind == "sv_profile") {
                ls.matrix.p = m.at("p").get<Eigen::Index>();
                ls.matrix.d = m.at("d").get<Eigen::Index>();
                ls.matrix.profile = m.value("profile", std::string("fast"));
                if (ls.matrix.p < ls.matrix.d || ls.matrix.d < 1) {
                    throw ConfigError("sv_profile matrix requires p >= d >= 1");
                }
            } else if (ls.matrix.kind == "matrix_market" || ls.matrix.kind == "csv") {
                ls.matrix.path = resolve_path(base_dir, m.at("path").get<std::string>());
                require_file(ls.matrix.path, "matrix_source.path");
            } else {
                throw ConfigError("matrix_source.kind must be sv_profile, matrix_market, or csv");
            }
            if (p.contains("rhs_source")) {
                const auto& r = p["rhs_source"];
                ls.rhs.kind = r.value("kind", std::string("gaussian"));
                ls.rhs.path = resolve_path(base_dir, r.value("path", std::string()));
                if (ls.rhs.kind == "file") {
                    require_file(ls.rhs.path, "rhs_source.path");
                } else if (ls.rhs.kind != "gaussian" && ls.rhs.kind != "consistent") {
                    throw ConfigError("rhs_source.kind must be gaussian, consistent, or file");
                }
            }
        } else {
            throw ConfigError("problem.kind must be eot or least_squares");
        }

        if (!j.contains("solvers") || !j["solvers"].is_array()) {
            throw ConfigError("solvers must be an array");
        }
        const auto& allowed =
            config.problem.kind == "eot" ? kEotSolvers : kLsSolvers;
        for (const auto& s : j["solvers"]) {
            SolverSpec spec;
            spec.name = s.at("name").get<std::string>();
            if (allowed.find(spec.name) == allowed.end()) {
                throw ConfigError("solver '" + spec.name + "' is not available for problem kind '" +
                                  config.problem.kind + "'");
            }
            spec.k = s.value("k", 20);
            spec.lipschitz_hessian = s.value("l_h", -1.0);
            spec.lipschitz_gradient = s.value("l", -1.0);
            spec.tol = s.value("tol", 1e-8);
            spec.max_iters = s.value("max_iters", 1000);
            if (spec.max_iters < 0) throw ConfigError("max_iters must be >= 0");
            config.solvers.push_back(spec);
        }
    } catch (const nlohmann::json::exception& err) {
        throw ConfigError(std::string("config: ") + err.what());
    }
    return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    const nlohmann::json j = read_json_file(path);
    return parse_experiment_config(j, fs::path(path).parent_path().string());
}

ProblemInstance build_problem(const ProblemSpec& spec, std::uint64_t seed) {
    const SplitMix64 instance_stream = SplitMix64(seed).child(1);
    ProblemInstance instance;
    if (spec.kind == "eot") {
        const EotSpec& eot = spec.eot;
        Eigen::VectorXd r, c;
        if (eot.marginals.kind == "gaussian") {
            r = gaussian_marginal(eot.a, eot.marginals.mean_row, eot.marginals.sigma);
            c = gaussian_marginal(eot.b, eot.marginals.mean_col, eot.marginals.sigma);
        } else {
            r = read_vector_csv(eot.marginals.row_path);
            c = read_vector_csv(eot.marginals.col_path);
            if (r.minCoeff() < 0.0 || c.minCoeff() < 0.0) {
                throw ConfigError("file marginals must be entrywise nonnegative");
            }
            r /= r.sum();
            c /= c.sum();
            if (r.size() != eot.a || c.size() != eot.b) {
                throw ConfigError("file marginal lengths do not match the configured dims");
            }
        }
        Eigen::MatrixXd cost;
        if (eot.cost.kind == "uniform") {
            cost = random_cost(eot.a, eot.b, instance_stream.child(2));
        } else if (eot.cost.kind == "grid_l1") {
            cost = grid_l1_cost(eot.cost.grid_h, eot.cost.grid_w);
        } else {
            cost = read_matrix_csv(eot.cost.path);
            if (cost.rows() != eot.a || cost.cols() != eot.b) {
                throw ConfigError("file cost shape does not match the configured dims");
            }
        }
        instance.eot = std::make_unique<EotDual>(std::move(r), std::move(c), cost, eot.epsilon);
    } else if (spec.kind == "least_squares") {
        const LeastSquaresSpec& ls = spec.least_squares;
        Eigen::MatrixXd a;
        if (ls.matrix.kind == "sv_profile") {
            a = sv_profile_matrix(ls.matrix.p, ls.matrix.d, sv_profile(ls.matrix.profile, ls.matrix.d),
                                  instance_stream.child(2));
        } else if (ls.matrix.kind == "matrix_market") {
            a = read_matrix_market_dense(ls.matrix.path);
        } else {
            a = read_matrix_csv(ls.matrix.path);
        }
        Eigen::VectorXd b;
        if (ls.rhs.kind == "gaussian") {
            SplitMix64 rhs_stream = instance_stream.child(3);
            b.resize(a.rows());
            for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = rhs_stream.next_gaussian();
        } else if (ls.rhs.kind == "consistent") {
            SplitMix64 rhs_stream = instance_stream.child(3);
            Eigen::VectorXd x_true(a.cols());
            for (Eigen::Index i = 0; i < x_true.size(); ++i) x_true[i] = rhs_stream.next_gaussian();
            b = a * x_true;
        } else {
            b = read_vector_csv(ls.rhs.path);
            if (b.size() != a.rows()) throw ConfigError("rhs length does not match matrix rows");
        }
        instance.least_squares = std::make_unique<LeastSquares>(std::move(a), std::move(b));
        instance.reference_value = instance.least_squares->optimal_value();
    } else {
        throw ConfigError("unknown problem kind '" + spec.kind + "'");
    }
    return instance;
}

ExperimentOutcome run_experiment(const ExperimentConfig& config, int jobs) {
    if (jobs < 1) jobs = 1;
    fs::create_directories(config.output_dir);

    // Problem instances are seed-indexed and shared read-only across solvers.
    std::vector<ProblemInstance> instances;
    instances.reserve(config.seeds.size());
    for (const std::uint64_t seed : config.seeds) {
        instances.push_back(build_problem(config.problem, seed));
    }
    const bool is_ls = config.problem.kind == "least_squares";

    std::vector<RunRequest> requests;
    for (std::size_t si = 0; si < config.solvers.size(); ++si) {
        for (std::size_t di = 0; di < config.seeds.size(); ++di) {
            for (int rep = 0; rep < config.repeats; ++rep) requests.push_back({si, di, rep});
        }
    }

    std::vector<RunOutput> outputs(requests.size());
    auto worker = [&](std::size_t index) {
        const RunRequest& req = requests[index];
        outputs[index] = execute_run(config, config.solvers[req.solver_index],
                                     instances[req.seed_index], config.seeds[req.seed_index],
                                     req.solver_index, req.repeat);
    };
    if (jobs == 1) {
        for (std::size_t i = 0; i < requests.size(); ++i) worker(i);
    } else {
        std::size_t next = 0;
        while (next < requests.size()) {
            std::vector<std::future<void>> batch;
            for (int j = 0; j < jobs && next < requests.size(); ++j, ++next) {
                batch.push_back(std::async(std::launch::async, worker, next));
            }
            for (auto& f : batch) f.get();
        }
    }

    // Write traces + sidecars; assemble the summary single-threaded.
    nlohmann::json summary;
    summary["name"] = config.name;
    summary["problem_kind"] = config.problem.kind;
    summary["seeds"] = config.seeds;
    summary["repeats"] = config.repeats;
    summary["rng"] = kRngDescription;
    summary["build"] = {{"version", kVersion}};
    if (is_ls) {
        nlohmann::json refs = nlohmann::json::array();
        for (const auto& inst : instances) refs.push_back(inst.reference_value);
        summary["reference_values"] = refs;
    }

    int failed = 0;
    nlohmann::json runs = nlohmann::json::array();
    std::map<std::string, std::vector<double>> solver_iters, solver_flops;
    std::map<std::string, int> solver_unreached;

    for (std::size_t i = 0; i < outputs.size(); ++i) {
        RunOutput& out = outputs[i];
        const RunRequest& req = requests[i];
        const SolverSpec& solver = config.solvers[req.solver_index];
        const double reference = instances[req.seed_index].reference_value;

        nlohmann::json run;
        run["solver"] = out.solver;
        run["seed"] = out.seed;
        run["repeat"] = out.repeat;
        run["run_seed"] = out.run_seed;
        run["status"] = out.status;
        run["termination"] = out.termination;
        run["wall_time_s"] = out.wall_time;
        if (out.lemma_violation) run["lemma_violation"] = true;

        if (out.status != "ok") ++failed;

        if (!out.rows.empty()) {
            const std::string stem = config.name + "__" + out.solver + "__s" +
                                     std::to_string(out.seed) + "__r" + std::to_string(out.repeat);
            const fs::path trace_path = fs::path(config.output_dir) / (stem + ".csv");
            const fs::path tmp_path = fs::path(config.output_dir) / (stem + ".csv.tmp");
            write_trace_csv(tmp_path.string(), out.rows, config.timing);
            fs::rename(tmp_path, trace_path);
            out.trace_file = trace_path.string();
            run["trace"] = trace_path.filename().string();

            nlohmann::json sidecar;
            sidecar["solver"] = {{"name", solver.name},       {"k", solver.k},
                                 {"l_h", solver.lipschitz_hessian}, {"l", solver.lipschitz_gradient},
                                 {"tol", solver.tol},         {"max_iters", solver.max_iters}};
            sidecar["seed"] = out.seed;
            sidecar["repeat"] = out.repeat;
            sidecar["run_seed"] = out.run_seed;
            sidecar["rng"] = kRngDescription;
            sidecar["build"] = {{"version", kVersion}};
            sidecar["termination"] = out.termination;
            sidecar["problem_kind"] = config.problem.kind;
            write_json_file((fs::path(config.output_dir) / (stem + ".json")).string(), sidecar);

            const std::vector<double> err = error_series(out.rows, is_ls, reference);
            run["final_error"] = err.back();
            run["final_grad_norm"] = out.rows.back().grad_norm;
            run["iterations"] = out.rows.back().iter;
            run["flops"] = out.rows.back().flops;

            bool reached = false;
            for (std::size_t k = 0; k < err.size(); ++k) {
                if (err[k] <= solver.tol) {
                    run["iterations_to_tol"] = out.rows[k].iter;
                    run["flops_to_tol"] = out.rows[k].flops;
                    solver_iters[out.solver].push_back(out.rows[k].iter);
                    solver_flops[out.solver].push_back(static_cast<double>(out.rows[k].flops));
                    reached = true;
                    break;
                }
            }
            if (!reached) {
                run["iterations_to_tol"] = nullptr;
                run["flops_to_tol"] = nullptr;
                ++solver_unreached[out.solver];
            }
        }
        runs.push_back(run);
    }
    summary["runs"] = runs;

    nlohmann::json per_solver;
    for (const SolverSpec& solver : config.solvers) {
        nlohmann::json agg;
        const auto& iters = solver_iters[solver.name];
        const auto& flops = solver_flops[solver.name];
        agg["runs_reaching_tol"] = iters.size();
        agg["runs_missing_tol"] = solver_unreached[solver.name];
        if (!iters.empty()) {
            agg["iterations_to_tol"] = {
                {"min", *std::min_element(iters.begin(), iters.end())},
                {"median", median(iters)},
                {"max", *std::max_element(iters.begin(), iters.end())}};
            agg["flops_to_tol"] = {{"min", *std::min_element(flops.begin(), flops.end())},
                                   {"median", median(flops)},
                                   {"max", *std::max_element(flops.begin(), flops.end())}};
        }
        per_solver[solver.name] = agg;
    }
    summary["per_solver"] = per_solver;

    // Plot-ready long format: per solver and axis, the median error across
    // runs at each iteration index (x = index or median flops at it).
    {
        std::ofstream plot((fs::path(config.output_dir) / "plot.csv").string());
        plot << "solver,axis,x,y\n";
        for (const SolverSpec& solver : config.solvers) {
            std::vector<std::pair<const RunOutput*, double>> solver_runs;  // run, reference
            for (std::size_t i = 0; i < outputs.size(); ++i) {
                if (outputs[i].solver == solver.name && !outputs[i].rows.empty()) {
                    solver_runs.emplace_back(&outputs[i],
                                             instances[requests[i].seed_index].reference_value);
                }
            }
            if (solver_runs.empty()) continue;
            std::size_t max_rows = 0;
            for (const auto& [r, ref] : solver_runs) max_rows = std::max(max_rows, r->rows.size());
            for (std::size_t k = 0; k < max_rows; ++k) {
                std::vector<double> errs, flops;
                for (const auto& [r, ref] : solver_runs) {
                    if (k < r->rows.size()) {
                        errs.push_back(is_ls ? r->rows[k].f - ref : r->rows[k].grad_norm);
                        flops.push_back(static_cast<double>(r->rows[k].flops));
                    }
                }
                plot << solver.name << ",iter," << k << "," << format_double(median(errs)) << "\n";
                plot << solver.name << ",flops," << format_double(median(flops)) << ","
                     << format_double(median(errs)) << "\n";
            }
        }
    }

    write_json_file((fs::path(config.output_dir) / "summary.json").string(), summary);
    return {summary, failed};
}

}  // namespace ron
