#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace tlrisk {

// Dense row-major matrix.  All dimensions in this project are small (a few
// hundred at most), so everything is kept dense and simple.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    Matrix transposed() const;
    Matrix operator*(const Matrix& rhs) const;
    Matrix operator+(const Matrix& rhs) const;
    Matrix operator-(const Matrix& rhs) const;
    Matrix scaled(double factor) const;
    void add_scaled(const Matrix& rhs, double factor);

    double frobenius_norm() const;
    bool all_finite() const;

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }
    friend bool operator==(const Matrix& a, const Matrix& b);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// y = m * x
std::vector<double> matvec(const Matrix& m, std::span<const double> x);

// X^T X, accumulated over the rows of x.
Matrix gram(const Matrix& x);

// Square matrix forced symmetric on construction: entries are replaced by
// (m + m^T)/2, which keeps downstream eigensolves well defined even when the
// input carries round-off asymmetry.
class SymMatrix {
public:
    SymMatrix() = default; // order 0, fine as a placeholder before assignment
    explicit SymMatrix(const Matrix& square);
    static SymMatrix identity(std::size_t n);
    static SymMatrix scaled_identity(std::size_t n, double value);
    static SymMatrix diagonal(const std::vector<double>& entries);

    std::size_t order() const { return full_.rows(); }
    double operator()(std::size_t i, std::size_t j) const { return full_(i, j); }
    const Matrix& full() const { return full_; }

private:
    Matrix full_;
};

// Eigenvalues are sorted descending; eigenvector k is the k-th column of
// `vectors` and the columns are orthonormal.
struct EigDecomp {
    std::vector<double> values;
    Matrix vectors;
};

} // namespace tlrisk
