#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ron/checks.hpp"
#include "ron/errors.hpp"
#include "ron/experiment.hpp"
#include "ron/generators.hpp"
#include "ron/matrix_market.hpp"
#include "ron/trace_io.hpp"
#include "ron/version.hpp"

namespace fs = std::filesystem;

namespace {

// Relative output paths resolve under RON_OUTPUT_ROOT when it is set.
std::string resolve_output(const std::string& path) {
    const char* root = std::getenv("RON_OUTPUT_ROOT");
    if (root == nullptr || path.empty() || fs::path(path).is_absolute()) return path;
    return (fs::path(root) / path).string();
}

int refuse_overwrite(const std::string& path, bool force) {
    if (!force && fs::exists(path)) {
        std::cerr << "refusing to overwrite " << path << " (pass --force)\n";
        return 1;
    }
    return 0;
}

void write_gen_metadata(const std::string& out, const nlohmann::json& params) {
    nlohmann::json meta = params;
    meta["version"] = ron::kVersion;
    meta["rng"] = ron::kRngDescription;
    ron::write_json_file(out + ".meta.json", meta);
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed_override,
            const std::string& out_override, int jobs, bool timing) {
    ron::ExperimentConfig config;
    try {
        config = ron::load_experiment_config(config_path);
    } catch (const std::exception& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 1;
    }
    if (seed_override) config.seeds = {*seed_override};
    if (!out_override.empty()) config.output_dir = out_override;
    config.output_dir = resolve_output(config.output_dir);
    if (timing) config.timing = true;

    try {
        const ron::ExperimentOutcome outcome = ron::run_experiment(config, jobs);
        std::cout << "summary: " << (fs::path(config.output_dir) / "summary.json").string()
                  << "\n";
        for (const auto& run : outcome.summary["runs"]) {
            std::cout << "  " << run["solver"].get<std::string>() << " seed "
                      << run["seed"].get<std::uint64_t>() << " repeat "
                      << run["repeat"].get<int>() << ": " << run["status"].get<std::string>()
                      << " (" << run["termination"].get<std::string>() << ")\n";
        }
        return outcome.failed_runs > 0 ? 2 : 0;
    } catch (const std::exception& err) {
        std::cerr << "run error: " << err.what() << "\n";
        return 1;
    }
}

int cmd_check(const std::string& suite, double lh_scale) {
    ron::CheckOptions options;
    options.eot_lh_scale = lh_scale;
    std::vector<ron::CheckResult> results;
    try {
        results = ron::run_checks(suite, options);
    } catch (const std::invalid_argument& err) {
        std::cerr << "usage error: " << err.what() << "\n";
        return 1;
    }
    int failed = 0;
    std::string current_suite;
    for (const ron::CheckResult& r : results) {
        if (r.suite != current_suite) {
            current_suite = r.suite;
            std::cout << "[" << current_suite << "]\n";
        }
        std::cout << "  " << (r.passed ? "PASS" : "FAIL") << "  " << r.name;
        if (!r.passed && !r.detail.empty()) std::cout << "  -- " << r.detail;
        std::cout << "\n";
        if (!r.passed) ++failed;
    }
    std::cout << (failed == 0 ? "all checks passed" : std::to_string(failed) + " check(s) failed")
              << "\n";
    return failed == 0 ? 0 : 3;
}

int cmd_gen_marginal(Eigen::Index dim, double mean, double sigma, const std::string& out,
                     bool force) {
    if (int rc = refuse_overwrite(out, force); rc != 0) return rc;
    try {
        ron::write_vector_csv(out, ron::gaussian_marginal(dim, mean, sigma));
        write_gen_metadata(out, {{"kind", "gaussian_marginal"},
                                 {"dim", dim},
                                 {"mean", mean},
                                 {"sigma", sigma}});
    } catch (const std::exception& err) {
        std::cerr << "gen error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}

int cmd_gen_cost(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, Eigen::Index grid_h,
                 Eigen::Index grid_w, const std::string& out, bool force) {
    if (int rc = refuse_overwrite(out, force); rc != 0) return rc;
    try {
        nlohmann::json meta;
        if (grid_h > 0 && grid_w > 0) {
            ron::write_matrix_csv(out, ron::grid_l1_cost(grid_h, grid_w));
            meta = {{"kind", "grid_l1_cost"}, {"h", grid_h}, {"w", grid_w}};
        } else {
            ron::write_matrix_csv(out, ron::random_cost(rows, cols, ron::SplitMix64(seed)));
            meta = {{"kind", "random_cost"}, {"rows", rows}, {"cols", cols}, {"seed", seed}};
        }
        write_gen_metadata(out, meta);
    } catch (const std::exception& err) {
        std::cerr << "gen error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}

int cmd_gen_matrix(Eigen::Index rows, Eigen::Index cols, const std::string& profile,
                   std::uint64_t seed, const std::string& out, bool force) {
    if (int rc = refuse_overwrite(out, force); rc != 0) return rc;
    try {
        const Eigen::MatrixXd a =
            ron::sv_profile_matrix(rows, cols, ron::sv_profile(profile, cols), ron::SplitMix64(seed));
        if (fs::path(out).extension() == ".mtx") {
            ron::write_matrix_market(out, a);
        } else {
            ron::write_matrix_csv(out, a);
        }
        write_gen_metadata(out, {{"kind", "sv_profile_matrix"},
                                 {"rows", rows},
                                 {"cols", cols},
                                 {"profile", profile},
                                 {"seed", seed}});
    } catch (const std::exception& err) {
        std::cerr << "gen error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}

int cmd_report(const std::string& dir, const std::string& plot_out) {
    if (!fs::is_directory(dir)) {
        std::cerr << "report error: not a directory: " << dir << "\n";
        return 1;
    }
    std::vector<fs::path> trace_files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() != ".csv") continue;
        const std::string name = entry.path().filename().string();
        if (name == "plot.csv" || name == fs::path(plot_out).filename().string()) continue;
        trace_files.push_back(entry.path());
    }
    std::sort(trace_files.begin(), trace_files.end());
    if (trace_files.empty()) {
        std::cerr << "report error: no trace CSVs in " << dir << "\n";
        return 1;
    }

    struct Trace {
        std::string solver;
        std::vector<ron::TraceRow> rows;
    };
    std::vector<Trace> traces;
    for (const fs::path& path : trace_files) {
        Trace t;
        try {
            t.rows = ron::read_trace_csv(path.string());
        } catch (const ron::ParseError& err) {
            std::cerr << "report error: " << err.what() << "\n";
            return 1;
        }
        const fs::path sidecar = fs::path(path).replace_extension(".json");
        t.solver = path.stem().string();
        if (fs::exists(sidecar)) {
            try {
                const auto meta = ron::read_json_file(sidecar.string());
                if (meta.contains("solver") && meta["solver"].contains("name")) {
                    t.solver = meta["solver"]["name"].get<std::string>();
                }
            } catch (const std::exception&) {
                // Sidecar is advisory; keep the filename-derived name.
            }
        }
        traces.push_back(std::move(t));
    }

    const std::vector<double> decades = {1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12};
    struct Row {
        std::string solver;
        std::vector<std::optional<std::pair<int, std::int64_t>>> to_decade;
        std::int64_t sort_key = std::numeric_limits<std::int64_t>::max();
    };
    std::map<std::string, std::vector<const Trace*>> by_solver;
    for (const Trace& t : traces) by_solver[t.solver].push_back(&t);

    std::vector<Row> rows;
    for (const auto& [solver, group] : by_solver) {
        Row row;
        row.solver = solver;
        for (const double tol : decades) {
            // Median across the solver's traces of (iter, flops) to tolerance.
            std::vector<int> iters;
            std::vector<std::int64_t> flops;
            for (const Trace* t : group) {
                for (const ron::TraceRow& r : t->rows) {
                    if (r.grad_norm <= tol) {
                        iters.push_back(r.iter);
                        flops.push_back(r.flops);
                        break;
                    }
                }
            }
            if (iters.empty()) {
                row.to_decade.emplace_back(std::nullopt);
            } else {
                std::sort(iters.begin(), iters.end());
                std::sort(flops.begin(), flops.end());
                row.to_decade.emplace_back(
                    std::make_pair(iters[iters.size() / 2], flops[flops.size() / 2]));
                row.sort_key = std::min(row.sort_key, flops[flops.size() / 2]);
            }
        }
        rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return a.sort_key != b.sort_key ? a.sort_key < b.sort_key : a.solver < b.solver;
    });

    std::cout << "solver";
    for (const double tol : decades) std::cout << ",iters@" << tol << ",flops@" << tol;
    std::cout << "\n";
    for (const Row& row : rows) {
        std::cout << row.solver;
        for (const auto& cell : row.to_decade) {
            if (cell) {
                std::cout << "," << cell->first << "," << cell->second;
            } else {
                std::cout << ",-,-";
            }
        }
        std::cout << "\n";
    }

    std::ofstream plot(plot_out);
    if (!plot) {
        std::cerr << "report error: cannot write " << plot_out << "\n";
        return 1;
    }
    plot << "solver,axis,x,y\n";
    for (const Trace& t : traces) {
        for (const ron::TraceRow& r : t.rows) {
            plot << t.solver << ",iter," << r.iter << "," << ron::format_double(r.grad_norm)
                 << "\n";
            plot << t.solver << ",flops," << r.flops << "," << ron::format_double(r.grad_norm)
                 << "\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RON: regularized overestimated Newton with randomized low-rank Hessian "
                 "sketching -- experiment runner, data generators, and invariant checker"};
    app.require_subcommand(1);
    app.set_version_flag("--version", ron::kVersion);
    app.footer("Environment: RON_OUTPUT_ROOT sets the root for relative output paths.");

    // run
    auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
    std::string config_path, out_override;
    std::optional<std::uint64_t> seed_override;
    int jobs = 1;
    bool timing = false;
    run->add_option("--config", config_path, "Experiment config (JSON)")->required();
    run->add_option("--seed", seed_override, "Replace the config's seed list with one seed");
    run->add_option("--out", out_override, "Override the output directory");
    run->add_option("--jobs", jobs, "Max concurrent runs")->default_val(1);
    run->add_flag("--timing", timing, "Record measured wall times in trace CSVs "
                                      "(makes outputs non-reproducible)");

    // check
    auto* check = app.add_subcommand("check", "Run the property/invariant checker");
    std::string suite = "all";
    double lh_scale = 1.0;
    check->add_option("--suite", suite, "Suite: all, psd_sketch, woodbury, objectives, lemmas, "
                                        "baselines, harness");
    check->add_option("--lh-scale", lh_scale,
                      "Scale the EOT Hessian-Lipschitz heuristic in the lemma suite "
                      "(< 1 exercises violation reporting)")
        ->default_val(1.0);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate marginals, cost matrices, or test matrices");
    gen->require_subcommand(1);
    bool force = false;
    gen->add_flag("--force", force, "Overwrite existing output files");

    auto* gen_marginal = gen->add_subcommand("marginal", "Discretized Gaussian marginal (CSV)");
    Eigen::Index g_dim = 100;
    double g_mean = 0.5, g_sigma = 0.05;
    std::string g_out;
    gen_marginal->add_option("--dim", g_dim)->required();
    gen_marginal->add_option("--mean", g_mean)->required();
    gen_marginal->add_option("--sigma", g_sigma)->required();
    gen_marginal->add_option("--out", g_out)->required();

    auto* gen_cost = gen->add_subcommand("cost", "Uniform or grid-l1 cost matrix (CSV)");
    Eigen::Index c_rows = 0, c_cols = 0, c_h = 0, c_w = 0;
    std::uint64_t c_seed = 0;
    std::string c_out;
    gen_cost->add_option("--rows", c_rows);
    gen_cost->add_option("--cols", c_cols);
    gen_cost->add_option("--seed", c_seed);
    gen_cost->add_option("--grid-h", c_h, "Grid height (pixelwise l1 cost)");
    gen_cost->add_option("--grid-w", c_w, "Grid width (pixelwise l1 cost)");
    gen_cost->add_option("--out", c_out)->required();

    auto* gen_matrix = gen->add_subcommand("matrix", "Matrix with a prescribed singular value "
                                                     "profile (CSV or MatrixMarket by extension)");
    Eigen::Index m_rows = 0, m_cols = 0;
    std::string m_profile = "fast", m_out;
    std::uint64_t m_seed = 0;
    gen_matrix->add_option("--rows", m_rows)->required();
    gen_matrix->add_option("--cols", m_cols)->required();
    gen_matrix->add_option("--profile", m_profile)
        ->check(CLI::IsMember({"fast", "medium", "slow"}));
    gen_matrix->add_option("--seed", m_seed);
    gen_matrix->add_option("--out", m_out)->required();

    // report
    auto* report = app.add_subcommand("report", "Summarize a directory of trace CSVs");
    std::string report_dir, plot_out;
    report->add_option("--dir", report_dir, "Directory of trace CSVs")->required();
    report->add_option("--out", plot_out, "Long-format plot CSV output path");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return cmd_run(config_path, seed_override, out_override, jobs, timing);
    if (check->parsed()) return cmd_check(suite, lh_scale);
    if (gen->parsed()) {
        if (gen_marginal->parsed()) {
            return cmd_gen_marginal(g_dim, g_mean, g_sigma, resolve_output(g_out), force);
        }
        if (gen_cost->parsed()) {
            if ((c_h > 0) != (c_w > 0)) {
                std::cerr << "gen error: --grid-h and --grid-w must be given together\n";
                return 1;
            }
            if (c_h == 0 && (c_rows < 1 || c_cols < 1)) {
                std::cerr << "gen error: need --rows/--cols or --grid-h/--grid-w\n";
                return 1;
            }
            return cmd_gen_cost(c_rows, c_cols, c_seed, c_h, c_w, resolve_output(c_out), force);
        }
        if (gen_matrix->parsed()) {
            if (m_rows < m_cols || m_cols < 1) {
                std::cerr << "gen error: need rows >= cols >= 1\n";
                return 1;
            }
            return cmd_gen_matrix(m_rows, m_cols, m_profile, m_seed, resolve_output(m_out), force);
        }
    }
    if (report->parsed()) {
        if (plot_out.empty()) plot_out = (fs::path(report_dir) / "report_plot.csv").string();
        return cmd_report(report_dir, plot_out);
    }
    return 0;
}
