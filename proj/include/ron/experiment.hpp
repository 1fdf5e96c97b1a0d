#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ron/eot.hpp"
#include "ron/least_squares.hpp"

namespace ron {

struct MarginalSource {
    std::string kind = "gaussian";  // gaussian | file
    double mean_row = 0.3;
    double mean_col = 0.7;
    double sigma = 0.02;
    std::string row_path, col_path;  // file kind; vectors are normalized to sum 1
};

struct CostSource {
    std::string kind = "uniform";  // uniform | grid_l1 | file
    Eigen::Index grid_h = 0, grid_w = 0;
    std::string path;
};

struct EotSpec {
    Eigen::Index a = 0, b = 0;
    double epsilon = 0.01;
    MarginalSource marginals;
    CostSource cost;
};

struct MatrixSource {
    std::string kind = "sv_profile";  // sv_profile | matrix_market | csv
    Eigen::Index p = 0, d = 0;
    std::string profile = "fast";
    std::string path;
};

struct RhsSource {
    std::string kind = "gaussian";  // gaussian | consistent | file
    std::string path;
};

struct LeastSquaresSpec {
    MatrixSource matrix;
    RhsSource rhs;
};

struct ProblemSpec {
    std::string kind;  // eot | least_squares
    EotSpec eot;
    LeastSquaresSpec least_squares;
};

struct SolverSpec {
    std::string name;  // ron_rpc | ron_exact | ron_identity | sinkhorn |
                       // gd_fixed | gd_ron_identity | kaczmarz | cgls
    Eigen::Index k = 20;
    double lipschitz_hessian = -1.0;   // < 0: use the objective's suggestion
    double lipschitz_gradient = -1.0;  // < 0: estimate at theta0
    double tol = 1e-8;
    int max_iters = 1000;
};

struct ExperimentConfig {
    std::string name = "experiment";
    ProblemSpec problem;
    std::vector<SolverSpec> solvers;
    std::vector<std::uint64_t> seeds;
    int repeats = 1;
    std::string output_dir;
    bool timing = false;  // false: wall_time_s column zeroed so CSVs are reproducible
};

/// Parses and validates; throws ConfigError with field context. Relative file
/// paths are resolved against base_dir.
ExperimentConfig parse_experiment_config(const nlohmann::json& j, const std::string& base_dir);
ExperimentConfig load_experiment_config(const std::string& path);

/// Problem data for one seed. Exactly one of eot/least_squares is set; both
/// solvers and the summary reference the shared objective.
struct ProblemInstance {
    std::unique_ptr<EotDual> eot;
    std::unique_ptr<LeastSquares> least_squares;
    double reference_value = 0.0;  // min f for least squares, 0 for EOT

    const SmoothObjective& objective() const {
        return eot ? static_cast<const SmoothObjective&>(*eot)
                   : static_cast<const SmoothObjective&>(*least_squares);
    }
};

/// Instance stream: SplitMix64(seed).child(1); run stream for (solver s,
/// repeat r): SplitMix64(seed).child(2 + s * repeats + r). Recorded in the
/// trace sidecars.
ProblemInstance build_problem(const ProblemSpec& spec, std::uint64_t seed);

struct ExperimentOutcome {
    nlohmann::json summary;
    int failed_runs = 0;
};

/// Runs every (solver, seed, repeat) combination, writing one trace CSV plus
/// JSON sidecar per run, a summary.json, and a long-format plot.csv. Per-run
/// failures are recorded in the summary without aborting the other runs.
ExperimentOutcome run_experiment(const ExperimentConfig& config, int jobs = 1);

}  // namespace ron
