#include "ron/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <vector>

#include "ron/errors.hpp"
#include "ron/trace_io.hpp"

namespace ron {

namespace {

[[noreturn]] void fail(const std::string& path, long line, const std::string& message) {
    throw ParseError(path + ":" + std::to_string(line) + ": " + message);
}

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

struct Header {
    bool coordinate = true;
    bool symmetric = false;
};

Header parse_banner(const std::string& path, const std::string& banner) {
    std::istringstream in(banner);
    std::string tag, object, format, field, symmetry;
    in >> tag >> object >> format >> field >> symmetry;
    if (tag != "%%MatrixMarket") fail(path, 1, "missing %%MatrixMarket banner");
    if (lowercase(object) != "matrix") fail(path, 1, "unsupported object '" + object + "'");

    Header header;
    const std::string fmt = lowercase(format);
    if (fmt == "coordinate") {
        header.coordinate = true;
    } else if (fmt == "array") {
        header.coordinate = false;
    } else {
        fail(path, 1, "unsupported format '" + format + "'");
    }

    const std::string fld = lowercase(field);
    if (fld != "real" && fld != "integer" && fld != "double") {
        fail(path, 1, "unsupported field type '" + field + "' (real or integer required)");
    }

    const std::string sym = lowercase(symmetry);
    if (sym == "general") {
        header.symmetric = false;
    } else if (sym == "symmetric") {
        header.symmetric = true;
    } else {
        fail(path, 1, "unsupported symmetry '" + symmetry + "'");
    }
    return header;
}

// Next content line (skipping blanks and % comments); returns false at EOF.
bool next_line(std::ifstream& in, std::string& line, long& line_number) {
    while (std::getline(in, line)) {
        ++line_number;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        if (line[first] == '%') continue;
        return true;
    }
    return false;
}

}  // namespace

Eigen::SparseMatrix<double> read_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");

    std::string line;
    long line_number = 0;
    if (!std::getline(in, line)) fail(path, 1, "empty file");
    ++line_number;
    const Header header = parse_banner(path, line);

    if (!next_line(in, line, line_number)) fail(path, line_number, "missing size line");
    std::istringstream size_line(line);
    long rows = 0, cols = 0, nnz = 0;
    if (header.coordinate) {
        if (!(size_line >> rows >> cols >> nnz)) fail(path, line_number, "malformed size line");
    } else {
        if (!(size_line >> rows >> cols)) fail(path, line_number, "malformed size line");
        nnz = rows * cols;
    }
    if (rows < 1 || cols < 1 || nnz < 0) fail(path, line_number, "invalid dimensions");

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(header.symmetric ? 2 * nnz : nnz));

    if (header.coordinate) {
        for (long k = 0; k < nnz; ++k) {
            if (!next_line(in, line, line_number)) {
                fail(path, line_number, "unexpected end of file: expected " + std::to_string(nnz) +
                                            " entries");
            }
            std::istringstream entry(line);
            long i = 0, j = 0;
            double value = 0.0;
            if (!(entry >> i >> j >> value)) fail(path, line_number, "malformed entry");
            if (i < 1 || i > rows || j < 1 || j > cols) {
                fail(path, line_number, "index out of bounds");
            }
            triplets.emplace_back(i - 1, j - 1, value);
            if (header.symmetric && i != j) triplets.emplace_back(j - 1, i - 1, value);
        }
    } else {
        // Array format: column-major dense listing; symmetric stores the lower
        // triangle only.
        for (long j = 1; j <= cols; ++j) {
            const long first_row = header.symmetric ? j : 1;
            for (long i = first_row; i <= rows; ++i) {
                if (!next_line(in, line, line_number)) {
                    fail(path, line_number, "unexpected end of file in array data");
                }
                std::istringstream entry(line);
                double value = 0.0;
                if (!(entry >> value)) fail(path, line_number, "malformed array value");
                triplets.emplace_back(i - 1, j - 1, value);
                if (header.symmetric && i != j) triplets.emplace_back(j - 1, i - 1, value);
            }
        }
    }

    Eigen::SparseMatrix<double> matrix(rows, cols);
    matrix.setFromTriplets(triplets.begin(), triplets.end());
    return matrix;
}

Eigen::MatrixXd read_matrix_market_dense(const std::string& path) {
    return Eigen::MatrixXd(read_matrix_market(path));
}

void write_matrix_market(const std::string& path, const Eigen::SparseMatrix<double>& matrix) {
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open file for writing");
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << matrix.rows() << " " << matrix.cols() << " " << matrix.nonZeros() << "\n";
    for (int k = 0; k < matrix.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(matrix, k); it; ++it) {
            out << (it.row() + 1) << " " << (it.col() + 1) << " " << format_double(it.value())
                << "\n";
        }
    }
}

void write_matrix_market(const std::string& path, const Eigen::MatrixXd& matrix) {
    write_matrix_market(path, Eigen::SparseMatrix<double>(matrix.sparseView()));
}

}  // namespace ron
