#include "ron/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ron/errors.hpp"

namespace ron {

namespace {

constexpr const char* kTraceHeader = "iter,f,grad_norm,lambda_sqrt,rho,step_norm,flops,wall_time_s";

double parse_double_field(const std::string& token, const std::string& path, std::size_t row) {
    std::size_t consumed = 0;
    double value = 0.0;
    try {
        value = std::stod(token, &consumed);
    } catch (const std::exception&) {
        throw ParseError(path + ": row " + std::to_string(row) + ": bad numeric field '" + token +
                         "'");
    }
    if (consumed != token.size()) {
        throw ParseError(path + ": row " + std::to_string(row) + ": bad numeric field '" + token +
                         "'");
    }
    return value;
}

}  // namespace

std::string format_double(double x) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", x);
    return buffer;
}

std::vector<TraceRow> to_trace_rows(const std::vector<StepDiagnostics>& steps) {
    std::vector<TraceRow> rows;
    rows.reserve(steps.size());
    for (const StepDiagnostics& s : steps) {
        rows.push_back({s.iter, s.f_value, s.grad_norm, s.lambda_sqrt, s.rho, s.step_norm, s.flops,
                        s.wall_time});
    }
    return rows;
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows,
                     bool include_timing) {
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open file for writing");
    out << kTraceHeader << "\n";
    for (const TraceRow& r : rows) {
        out << r.iter << "," << format_double(r.f) << "," << format_double(r.grad_norm) << ","
            << format_double(r.lambda_sqrt) << "," << format_double(r.rho) << ","
            << format_double(r.step_norm) << "," << r.flops << ","
            << format_double(include_timing ? r.wall_time : 0.0) << "\n";
    }
}

std::vector<TraceRow> read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    if (line != kTraceHeader) throw ParseError(path + ": row 1: unexpected header '" + line + "'");

    std::vector<TraceRow> rows;
    std::size_t row_number = 1;
    while (std::getline(in, line)) {
        ++row_number;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string token;
        while (std::getline(ss, token, ',')) fields.push_back(token);
        if (fields.size() != 8) {
            throw ParseError(path + ": row " + std::to_string(row_number) + ": expected 8 fields, got " +
                             std::to_string(fields.size()));
        }
        TraceRow r;
        r.iter = static_cast<int>(parse_double_field(fields[0], path, row_number));
        r.f = parse_double_field(fields[1], path, row_number);
        r.grad_norm = parse_double_field(fields[2], path, row_number);
        r.lambda_sqrt = parse_double_field(fields[3], path, row_number);
        r.rho = parse_double_field(fields[4], path, row_number);
        r.step_norm = parse_double_field(fields[5], path, row_number);
        r.flops = static_cast<std::int64_t>(parse_double_field(fields[6], path, row_number));
        r.wall_time = parse_double_field(fields[7], path, row_number);
        rows.push_back(r);
    }
    return rows;
}

void write_json_file(const std::string& path, const nlohmann::json& payload) {
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open file for writing");
    out << payload.dump(2) << "\n";
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& err) {
        throw ParseError(path + ": " + err.what());
    }
}

void write_vector_csv(const std::string& path, const Eigen::VectorXd& v) {
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open file for writing");
    for (Eigen::Index i = 0; i < v.size(); ++i) out << format_double(v[i]) << "\n";
}

Eigen::VectorXd read_vector_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    std::vector<double> values;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        values.push_back(parse_double_field(line, path, row));
    }
    if (values.empty()) throw ParseError(path + ": empty vector file");
    return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open file for writing");
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out << format_double(m(i, j)) << (j + 1 == m.cols() ? "\n" : ",");
        }
    }
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    std::vector<std::vector<double>> data;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::vector<double> values;
        std::stringstream ss(line);
        std::string token;
        while (std::getline(ss, token, ',')) {
            values.push_back(parse_double_field(token, path, row));
        }
        if (!data.empty() && values.size() != data.front().size()) {
            throw ParseError(path + ": row " + std::to_string(row) + ": ragged row");
        }
        data.push_back(std::move(values));
    }
    if (data.empty()) throw ParseError(path + ": empty matrix file");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(data.size()),
                      static_cast<Eigen::Index>(data.front().size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            m(i, j) = data[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    }
    return m;
}

}  // namespace ron
