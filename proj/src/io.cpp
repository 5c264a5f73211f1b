#include "tlrisk/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "tlrisk/errors.hpp"

namespace tlrisk {

Matrix read_matrix(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#')
            continue;
        std::istringstream fields(line);
        std::vector<double> row;
        double v;
        while (fields >> v)
            row.push_back(v);
        if (!fields.eof())
            throw IoError("matrix line has a non-numeric entry: " + line);
        if (!rows.empty() && row.size() != rows.front().size())
            throw IoError("matrix rows have inconsistent lengths");
        rows.push_back(std::move(row));
    }
    if (rows.empty() || rows.front().empty())
        throw IoError("matrix input has no entries");

    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(i, j) = rows[i][j];
    return m;
}

Matrix read_matrix_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open matrix file: " + path);
    return read_matrix(in);
}

void write_matrix(std::ostream& out, const Matrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j > 0)
                out << ' ';
            out << format_sig(m(i, j), 17);
        }
        out << '\n';
    }
}

void write_matrix_file(const std::string& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open matrix file for writing: " + path);
    write_matrix(out, m);
    if (!out)
        throw IoError("failed while writing matrix file: " + path);
}

std::string format_sig(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, value);
    return buf;
}

} // namespace tlrisk
