#include "tlrisk/matrix.hpp"

#include <cmath>

#include "tlrisk/errors.hpp"

namespace tlrisk {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_)
            throw ShapeError("matrix literal has ragged rows");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        m(i, i) = 1.0;
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j)
            t(j, i) = (*this)(i, j);
    return t;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
    if (cols_ != rhs.rows_)
        throw ShapeError("matrix product dimension mismatch");
    Matrix out(rows_, rhs.cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t k = 0; k < cols_; ++k) {
            double a = (*this)(i, k);
            if (a == 0.0)
                continue;
            const double* rrow = rhs.data_.data() + k * rhs.cols_;
            double* orow = out.data_.data() + i * rhs.cols_;
            for (std::size_t j = 0; j < rhs.cols_; ++j)
                orow[j] += a * rrow[j];
        }
    }
    return out;
}

Matrix Matrix::operator+(const Matrix& rhs) const {
    if (!same_shape(rhs))
        throw ShapeError("matrix sum dimension mismatch");
    Matrix out = *this;
    for (std::size_t i = 0; i < data_.size(); ++i)
        out.data_[i] += rhs.data_[i];
    return out;
}

Matrix Matrix::operator-(const Matrix& rhs) const {
    if (!same_shape(rhs))
        throw ShapeError("matrix difference dimension mismatch");
    Matrix out = *this;
    for (std::size_t i = 0; i < data_.size(); ++i)
        out.data_[i] -= rhs.data_[i];
    return out;
}

Matrix Matrix::scaled(double factor) const {
    Matrix out = *this;
    for (double& v : out.data_)
        v *= factor;
    return out;
}

void Matrix::add_scaled(const Matrix& rhs, double factor) {
    if (!same_shape(rhs))
        throw ShapeError("matrix accumulate dimension mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i)
        data_[i] += factor * rhs.data_[i];
}

double Matrix::frobenius_norm() const {
    double sum = 0.0;
    for (double v : data_)
        sum += v * v;
    return std::sqrt(sum);
}

bool Matrix::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v))
            return false;
    return true;
}

bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
}

std::vector<double> matvec(const Matrix& m, std::span<const double> x) {
    if (x.size() != m.cols())
        throw ShapeError("matrix-vector dimension mismatch");
    std::vector<double> y(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto r = m.row(i);
        double sum = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j)
            sum += r[j] * x[j];
        y[i] = sum;
    }
    return y;
}

Matrix gram(const Matrix& x) {
    Matrix g(x.cols(), x.cols());
    for (std::size_t s = 0; s < x.rows(); ++s) {
        auto r = x.row(s);
        for (std::size_t i = 0; i < x.cols(); ++i) {
            double v = r[i];
            if (v == 0.0)
                continue;
            for (std::size_t j = i; j < x.cols(); ++j)
                g(i, j) += v * r[j];
        }
    }
    for (std::size_t i = 0; i < x.cols(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            g(i, j) = g(j, i);
    return g;
}

SymMatrix::SymMatrix(const Matrix& square) : full_(square) {
    if (square.rows() != square.cols())
        throw ShapeError("symmetric matrix requires a square input");
    if (square.empty())
        throw ShapeError("symmetric matrix requires a nonempty input");
    for (std::size_t i = 0; i < full_.rows(); ++i) {
        for (std::size_t j = i + 1; j < full_.cols(); ++j) {
            double avg = 0.5 * (full_(i, j) + full_(j, i));
            full_(i, j) = avg;
            full_(j, i) = avg;
        }
    }
}

SymMatrix SymMatrix::identity(std::size_t n) {
    return SymMatrix(Matrix::identity(n));
}

SymMatrix SymMatrix::scaled_identity(std::size_t n, double value) {
    return SymMatrix(Matrix::identity(n).scaled(value));
}

SymMatrix SymMatrix::diagonal(const std::vector<double>& entries) {
    Matrix m(entries.size(), entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i)
        m(i, i) = entries[i];
    return SymMatrix(m);
}

} // namespace tlrisk
