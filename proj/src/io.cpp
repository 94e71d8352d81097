#include "levgc/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace levgc {

std::string format_double(double x) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    if (ec != std::errc()) throw std::runtime_error("format_double failed");
    return std::string(buf, ptr);
}

namespace {

std::vector<std::vector<double>> read_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw std::runtime_error(path + ": bad numeric cell '" + cell + "'");
            }
        }
        if (!row.empty()) rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

Matrix read_matrix_csv(const std::string& path) {
    auto rows = read_rows(path);
    if (rows.empty()) throw std::runtime_error(path + ": empty matrix");
    const size_t d = rows[0].size();
    Matrix M(rows.size(), d);
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != d)
            throw std::runtime_error(path + ": ragged rows in CSV");
        for (size_t j = 0; j < d; ++j) M(i, j) = rows[i][j];
    }
    return M;
}

Vector read_vector_csv(const std::string& path) {
    auto rows = read_rows(path);
    if (rows.empty()) throw std::runtime_error(path + ": empty vector");
    Vector v(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != 1)
            throw std::runtime_error(path + ": expected one value per line");
        v(i) = rows[i][0];
    }
    return v;
}

void write_matrix_csv(const std::string& path, const Matrix& M) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            if (j) out << ',';
            out << format_double(M(i, j));
        }
        out << '\n';
    }
}

void write_vector_csv(const std::string& path, const Vector& v) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (Eigen::Index i = 0; i < v.size(); ++i) out << format_double(v(i)) << '\n';
}

std::vector<double> read_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<double> times;
    std::string line;
    while (std::getline(in, line)) {
        std::string trimmed;
        for (char c : line)
            if (!std::isspace(static_cast<unsigned char>(c))) trimmed += c;
        if (trimmed.empty()) continue;
        double t;
        try {
            t = std::stod(trimmed);
        } catch (const std::exception&) {
            throw std::runtime_error(path + ": bad trace line '" + line + "'");
        }
        if (t < 0.0) throw std::runtime_error(path + ": negative completion time");
        times.push_back(t);
    }
    if (times.empty()) throw std::runtime_error(path + ": empty trace");
    return times;
}

}  // namespace levgc
