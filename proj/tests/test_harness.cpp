#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "ron/errors.hpp"
#include "ron/experiment.hpp"
#include "ron/generators.hpp"
#include "ron/matrix_market.hpp"
#include "ron/rng.hpp"
#include "ron/trace_io.hpp"

namespace fs = std::filesystem;
using ron::SplitMix64;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("ron_test_" + std::to_string(SplitMix64(::getpid()).next_u64() % 1000000));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("gaussian marginal") {
    SUBCASE("single point") {
        const Eigen::VectorXd m = ron::gaussian_marginal(1, 0.5, 0.1);
        CHECK(m.size() == 1);
        CHECK(m[0] == doctest::Approx(1.0));
    }
    SUBCASE("flat limit") {
        const Eigen::VectorXd m = ron::gaussian_marginal(3, 0.5, 10.0);
        for (Eigen::Index i = 0; i < 3; ++i) {
            CHECK(std::abs(m[i] - 1.0 / 3.0) <= 1e-4);
        }
    }
    SUBCASE("peak location and normalization") {
        const Eigen::VectorXd m = ron::gaussian_marginal(101, 0.3, 0.05);
        Eigen::Index argmax = 0;
        m.maxCoeff(&argmax);
        CHECK(argmax == 30);  // grid point (30 + 0.5)/101 is nearest to 0.3
        CHECK(std::abs(m.sum() - 1.0) <= 1e-12);
    }
    SUBCASE("rejects bad parameters") {
        CHECK_THROWS_AS(ron::gaussian_marginal(0, 0.5, 0.1), std::invalid_argument);
        CHECK_THROWS_AS(ron::gaussian_marginal(5, 0.5, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(ron::gaussian_marginal(5, 2.0, 0.1), std::invalid_argument);
    }
}

TEST_CASE("uniform random cost") {
    SUBCASE("pinned 2x2 snapshot") {
        const Eigen::MatrixXd cost = ron::random_cost(2, 2, SplitMix64(2024));
        CHECK(cost(0, 0) == doctest::Approx(0.6227655366461097).epsilon(1e-15));
        CHECK(cost(0, 1) == doctest::Approx(0.0972319084876927).epsilon(1e-15));
        CHECK(cost(1, 0) == doctest::Approx(0.2985761611133584).epsilon(1e-15));
        CHECK(cost(1, 1) == doctest::Approx(0.1161867307224459).epsilon(1e-15));
    }
    SUBCASE("entries stay in range") {
        const Eigen::MatrixXd cost = ron::random_cost(1000, 1000, SplitMix64(17));
        CHECK(cost.minCoeff() >= 0.0);
        CHECK(cost.maxCoeff() < 1.0);
    }
    SUBCASE("different seeds differ") {
        CHECK(ron::random_cost(4, 4, SplitMix64(1)) != ron::random_cost(4, 4, SplitMix64(2)));
    }
}

TEST_CASE("grid l1 cost") {
    SUBCASE("1x2 grid") {
        const Eigen::MatrixXd cost = ron::grid_l1_cost(1, 2);
        CHECK(cost(0, 0) == 0.0);
        CHECK(cost(0, 1) == 1.0);
        CHECK(cost(1, 0) == 1.0);
        CHECK(cost(1, 1) == 0.0);
    }
    SUBCASE("2x2 corners") {
        const Eigen::MatrixXd cost = ron::grid_l1_cost(2, 2);
        // Raw distance between (0,0) and (1,1) is 2; the scale (h-1)+(w-1) = 2.
        CHECK(cost(0, 3) == doctest::Approx(1.0));
    }
    SUBCASE("metric structure on a 28x28 grid") {
        const Eigen::MatrixXd cost = ron::grid_l1_cost(28, 28);
        CHECK(cost.diagonal().cwiseAbs().maxCoeff() == 0.0);
        CHECK((cost - cost.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(cost.minCoeff() >= 0.0);
        CHECK(cost.maxCoeff() <= 1.0);
    }
}

TEST_CASE("singular value profile matrix") {
    SUBCASE("all-ones profile gives orthonormal columns") {
        const Eigen::MatrixXd a =
            ron::sv_profile_matrix(8, 8, Eigen::VectorXd::Ones(8), SplitMix64(5));
        CHECK((a.transpose() * a - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() <=
              1e-10);
    }
    SUBCASE("prescribed spectrum is recovered") {
        Eigen::VectorXd profile(2);
        profile << 2.0, 1.0;
        const Eigen::MatrixXd a = ron::sv_profile_matrix(2, 2, profile, SplitMix64(6));
        const Eigen::VectorXd sv = Eigen::BDCSVD<Eigen::MatrixXd>(a).singularValues();
        CHECK(sv[0] == doctest::Approx(2.0).epsilon(1e-10));
        CHECK(sv[1] == doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("fast decay numerical rank at 1e-3 is 14") {
        Eigen::VectorXd profile(20);
        for (Eigen::Index i = 0; i < 20; ++i) {
            profile[i] = std::max(std::pow(0.6, static_cast<double>(i)), 1e-4);
        }
        const Eigen::MatrixXd a = ron::sv_profile_matrix(30, 20, profile, SplitMix64(7));
        const Eigen::VectorXd sv = Eigen::BDCSVD<Eigen::MatrixXd>(a).singularValues();
        Eigen::Index rank = 0;
        for (Eigen::Index i = 0; i < sv.size(); ++i) {
            if (sv[i] > 1e-3) ++rank;
        }
        CHECK(rank == 14);
    }
    SUBCASE("rejects bad profiles") {
        Eigen::VectorXd increasing(2);
        increasing << 1.0, 2.0;
        CHECK_THROWS_AS(ron::sv_profile_matrix(3, 2, increasing, SplitMix64(0)),
                        std::invalid_argument);
        CHECK_THROWS_AS(ron::sv_profile_matrix(1, 2, Eigen::VectorXd::Ones(2), SplitMix64(0)),
                        std::invalid_argument);
        CHECK_THROWS_AS(ron::sv_profile("nonsense", 3), std::invalid_argument);
    }
}

TEST_CASE("matrix market reader and writer") {
    TempDir tmp;
    SUBCASE("coordinate general") {
        const std::string path = tmp.file("diag.mtx");
        std::ofstream out(path);
        out << "%%MatrixMarket matrix coordinate real general\n"
            << "% a comment\n"
            << "2 2 2\n"
            << "1 1 1.0\n"
            << "2 2 2.0\n";
        out.close();
        const Eigen::MatrixXd m = ron::read_matrix_market_dense(path);
        CHECK(m.rows() == 2);
        CHECK(m(0, 0) == 1.0);
        CHECK(m(1, 1) == 2.0);
        CHECK(m(0, 1) == 0.0);
    }
    SUBCASE("symmetric storage is expanded") {
        const std::string path = tmp.file("sym.mtx");
        std::ofstream out(path);
        out << "%%MatrixMarket matrix coordinate real symmetric\n"
            << "3 3 3\n"
            << "1 1 4.0\n"
            << "2 1 1.5\n"
            << "3 3 2.0\n";
        out.close();
        const Eigen::MatrixXd m = ron::read_matrix_market_dense(path);
        CHECK(m(0, 1) == 1.5);
        CHECK(m(1, 0) == 1.5);
        CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("array format") {
        const std::string path = tmp.file("arr.mtx");
        std::ofstream out(path);
        out << "%%MatrixMarket matrix array real general\n"
            << "2 2\n"
            << "1.0\n2.0\n3.0\n4.0\n";
        out.close();
        const Eigen::MatrixXd m = ron::read_matrix_market_dense(path);
        CHECK(m(0, 0) == 1.0);
        CHECK(m(1, 0) == 2.0);  // column-major listing
        CHECK(m(0, 1) == 3.0);
        CHECK(m(1, 1) == 4.0);
    }
    SUBCASE("round trip") {
        SplitMix64 rng(9);
        Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(7, 5);
        for (int k = 0; k < 12; ++k) {
            dense(static_cast<Eigen::Index>(rng.next_u64() % 7),
                  static_cast<Eigen::Index>(rng.next_u64() % 5)) = rng.next_gaussian();
        }
        const std::string path = tmp.file("rt.mtx");
        ron::write_matrix_market(path, dense);
        CHECK((ron::read_matrix_market_dense(path) - dense).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("rejections carry line numbers") {
        const std::string path = tmp.file("bad.mtx");
        {
            std::ofstream out(path);
            out << "%%MatrixMarket matrix coordinate complex general\n2 2 1\n1 1 1.0 0.0\n";
        }
        CHECK_THROWS_WITH_AS(ron::read_matrix_market(path),
                             doctest::Contains("unsupported field type"), ron::ParseError);
        {
            std::ofstream out(path);
            out << "%%MatrixMarket matrix coordinate real general\n2 2 1\n5 1 1.0\n";
        }
        try {
            ron::read_matrix_market(path);
            FAIL("expected ParseError");
        } catch (const ron::ParseError& err) {
            CHECK(std::string(err.what()).find(":3:") != std::string::npos);
            CHECK(std::string(err.what()).find("out of bounds") != std::string::npos);
        }
        {
            std::ofstream out(path);
            out << "%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 1\n";
        }
        CHECK_THROWS_AS(ron::read_matrix_market(path), ron::ParseError);
    }
}

TEST_CASE("trace csv round trip and error reporting") {
    TempDir tmp;
    std::vector<ron::TraceRow> rows(3);
    for (int i = 0; i < 3; ++i) {
        rows[i].iter = i;
        rows[i].f = 1.0 / (i + 1);
        rows[i].grad_norm = std::pow(10.0, -i);
        rows[i].lambda_sqrt = 0.5 * i;
        rows[i].rho = 0.25;
        rows[i].step_norm = 0.125;
        rows[i].flops = 100 * (i + 1);
        rows[i].wall_time = 0.5 * i;
    }
    const std::string path = tmp.file("trace.csv");
    ron::write_trace_csv(path, rows, true);
    const auto back = ron::read_trace_csv(path);
    REQUIRE(back.size() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(back[i].f == rows[i].f);
        CHECK(back[i].grad_norm == rows[i].grad_norm);
        CHECK(back[i].flops == rows[i].flops);
        CHECK(back[i].wall_time == rows[i].wall_time);
    }

    // Timing suppressed: wall_time_s column written as zeros.
    ron::write_trace_csv(path, rows, false);
    for (const auto& row : ron::read_trace_csv(path)) CHECK(row.wall_time == 0.0);

    std::ofstream(path, std::ios::app) << "7,not_a_number,1,1,1,1,1,1\n";
    try {
        ron::read_trace_csv(path);
        FAIL("expected ParseError");
    } catch (const ron::ParseError& err) {
        CHECK(std::string(err.what()).find("row 5") != std::string::npos);
    }
}

TEST_CASE("experiment configs validate inputs") {
    TempDir tmp;
    nlohmann::json j = {
        {"name", "demo"},
        {"problem", {{"kind", "eot"}, {"a", 4}, {"b", 4}, {"epsilon", 0.5}}},
        {"solvers", nlohmann::json::array({{{"name", "sinkhorn"}}})},
        {"seeds", {1, 2}},
        {"output_dir", tmp.file("out")},
    };
    CHECK_NOTHROW(ron::parse_experiment_config(j, ""));

    nlohmann::json dup = j;
    dup["seeds"] = {1, 1};
    CHECK_THROWS_AS(ron::parse_experiment_config(dup, ""), ron::ConfigError);

    nlohmann::json bad_solver = j;
    bad_solver["solvers"] = nlohmann::json::array({{{"name", "cgls"}}});
    CHECK_THROWS_AS(ron::parse_experiment_config(bad_solver, ""), ron::ConfigError);

    nlohmann::json missing_file = j;
    missing_file["problem"]["marginal_source"] = {{"kind", "file"},
                                                  {"row", tmp.file("absent.csv")},
                                                  {"col", tmp.file("absent.csv")}};
    CHECK_THROWS_AS(ron::parse_experiment_config(missing_file, ""), ron::ConfigError);
}

TEST_CASE("experiment runs write deterministic traces and a coherent summary") {
    TempDir tmp;
    ron::ExperimentConfig config;
    config.name = "mini";
    config.problem.kind = "eot";
    config.problem.eot.a = 20;
    config.problem.eot.b = 20;
    config.problem.eot.epsilon = 0.05;
    config.problem.eot.marginals.sigma = 0.05;
    config.seeds = {11};
    config.repeats = 1;
    config.output_dir = tmp.file("out");
    {
        ron::SolverSpec rpc;
        rpc.name = "ron_rpc";
        rpc.k = 20;
        rpc.tol = 1e-8;
        rpc.max_iters = 60;
        config.solvers.push_back(rpc);
        ron::SolverSpec sk;
        sk.name = "sinkhorn";
        sk.tol = 1e-8;
        sk.max_iters = 4000;
        config.solvers.push_back(sk);
    }

    const ron::ExperimentOutcome first = ron::run_experiment(config, 1);
    CHECK(first.failed_runs == 0);

    // Determinism: byte-identical traces on a re-run.
    const std::string trace = tmp.file("out/mini__ron_rpc__s11__r0.csv");
    const std::string before = slurp(trace);
    CHECK(!before.empty());
    ron::run_experiment(config, 1);
    CHECK(slurp(trace) == before);

    // Both solvers reached the tolerance; the sketched Newton run needs fewer
    // iterations than the scaling iteration.
    const auto& per_solver = first.summary["per_solver"];
    REQUIRE(per_solver["ron_rpc"]["runs_reaching_tol"].get<int>() == 1);
    REQUIRE(per_solver["sinkhorn"]["runs_reaching_tol"].get<int>() == 1);
    CHECK(per_solver["ron_rpc"]["iterations_to_tol"]["median"].get<double>() <
          per_solver["sinkhorn"]["iterations_to_tol"]["median"].get<double>());

    // Summary flops match the trace rows (ledger audit).
    for (const auto& run : first.summary["runs"]) {
        const auto rows =
            ron::read_trace_csv(tmp.file("out/" + run["trace"].get<std::string>()));
        CHECK(run["flops"].get<std::int64_t>() == rows.back().flops);
    }

    CHECK(fs::exists(tmp.file("out/summary.json")));
    CHECK(fs::exists(tmp.file("out/plot.csv")));
}

TEST_CASE("experiment with no solvers produces an empty summary") {
    TempDir tmp;
    ron::ExperimentConfig config;
    config.name = "empty";
    config.problem.kind = "eot";
    config.problem.eot.a = 3;
    config.problem.eot.b = 3;
    config.problem.eot.epsilon = 1.0;
    config.seeds = {1};
    config.output_dir = tmp.file("out");
    const ron::ExperimentOutcome outcome = ron::run_experiment(config, 1);
    CHECK(outcome.failed_runs == 0);
    CHECK(outcome.summary["runs"].empty());
}
