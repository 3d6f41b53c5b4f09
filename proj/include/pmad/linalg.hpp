#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pmad {

// Dense row-major matrix of doubles, sized for desk-scale feature tables.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * cols_, cols_};
    }
    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

// row vector x (length a.rows()) times a -> length a.cols()
std::vector<double> vecmat(std::span<const double> x, const Matrix& a);
// a times column vector x (length a.cols()) -> length a.rows()
std::vector<double> matvec(const Matrix& a, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);

struct SymmetricEigen {
    std::vector<double> values;  // descending
    Matrix vectors;              // column j pairs with values[j]
};

// Cyclic Jacobi for symmetric matrices; off-diagonal tolerance 1e-10.
// Eigenvectors carry a deterministic sign: the largest-magnitude entry of
// each vector is made positive (first such entry on ties).
SymmetricEigen eigen_symmetric(const Matrix& a);

struct ThinSvd {
    Matrix u;                   // m x k
    std::vector<double> sigma;  // descending, length k
    Matrix v;                   // k x k
};

// Thin SVD of an m x k matrix with small k, via eigen of A'A.
ThinSvd svd_thin(const Matrix& a);

// Solve (a + gamma I) x = b for symmetric positive semidefinite a.
// b may have multiple columns.
Matrix solve_spd_regularized(const Matrix& a, double gamma, const Matrix& b);

}  // namespace pmad
