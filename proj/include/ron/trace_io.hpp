#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ron/newton.hpp"

namespace ron {

/// One line of the on-disk trace schema shared by every solver:
///   iter,f,grad_norm,lambda_sqrt,rho,step_norm,flops,wall_time_s
/// lambda_sqrt and rho are zero for solvers without a regularizer.
struct TraceRow {
    int iter = 0;
    double f = 0.0;
    double grad_norm = 0.0;
    double lambda_sqrt = 0.0;
    double rho = 0.0;
    double step_norm = 0.0;
    std::int64_t flops = 0;
    double wall_time = 0.0;
};

std::vector<TraceRow> to_trace_rows(const std::vector<StepDiagnostics>& steps);

/// Writes the CSV trace. When include_timing is false the wall_time_s column
/// is written as 0 so that repeated runs are byte-identical; measured times
/// stay available in the run summary.
void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows,
                     bool include_timing);

/// Throws ParseError with the 1-based row number on malformed input.
std::vector<TraceRow> read_trace_csv(const std::string& path);

void write_json_file(const std::string& path, const nlohmann::json& payload);
nlohmann::json read_json_file(const std::string& path);

// Vector/matrix CSV helpers (one value per cell, comma separated, %.17g).
void write_vector_csv(const std::string& path, const Eigen::VectorXd& v);
Eigen::VectorXd read_vector_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(const std::string& path);

std::string format_double(double x);  // shortest round-trip decimal (%.17g)

}  // namespace ron
