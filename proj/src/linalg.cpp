#include "pmad/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pmad/error.hpp"

namespace pmad {

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw ContractError("matmul: dimension mismatch");
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    }
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

std::vector<double> vecmat(std::span<const double> x, const Matrix& a) {
    if (x.size() != a.rows()) throw ContractError("vecmat: dimension mismatch");
    std::vector<double> out(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        for (std::size_t j = 0; j < a.cols(); ++j) out[j] += xi * a(i, j);
    }
    return out;
}

std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
    if (x.size() != a.cols()) throw ContractError("matvec: dimension mismatch");
    std::vector<double> out(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
        out[i] = acc;
    }
    return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

namespace {

double off_diagonal_norm(const Matrix& a) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i + 1; j < a.cols(); ++j) acc += a(i, j) * a(i, j);
    return std::sqrt(2.0 * acc);
}

void apply_sign_convention(Matrix& vectors) {
    for (std::size_t j = 0; j < vectors.cols(); ++j) {
        std::size_t arg = 0;
        double best = 0.0;
        for (std::size_t i = 0; i < vectors.rows(); ++i) {
            const double m = std::fabs(vectors(i, j));
            if (m > best) {
                best = m;
                arg = i;
            }
        }
        if (vectors(arg, j) < 0.0)
            for (std::size_t i = 0; i < vectors.rows(); ++i) vectors(i, j) = -vectors(i, j);
    }
}

}  // namespace

SymmetricEigen eigen_symmetric(const Matrix& input) {
    if (input.rows() != input.cols()) throw ContractError("eigen_symmetric: matrix not square");
    const std::size_t n = input.rows();
    Matrix a = input;
    Matrix v = Matrix::identity(n);

    constexpr double kTol = 1e-10;
    constexpr int kMaxSweeps = 100;
    int sweep = 0;
    while (off_diagonal_norm(a) > kTol) {
        if (++sweep > kMaxSweeps)
            throw NumericError("eigen_symmetric: Jacobi did not converge in 100 sweeps");
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::fabs(apq) <= kTol * 1e-2) continue;
                const double app = a(p, p);
                const double aqq = a(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

    SymmetricEigen out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = a(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
    }
    apply_sign_convention(out.vectors);
    return out;
}

ThinSvd svd_thin(const Matrix& a) {
    const std::size_t k = a.cols();
    Matrix ata = matmul(transpose(a), a);
    SymmetricEigen eig = eigen_symmetric(ata);

    ThinSvd out;
    out.sigma.resize(k);
    out.v = eig.vectors;
    out.u = Matrix(a.rows(), k);
    for (std::size_t j = 0; j < k; ++j) {
        const double lambda = std::max(eig.values[j], 0.0);
        const double sigma = std::sqrt(lambda);
        out.sigma[j] = sigma;
        if (sigma > 1e-12) {
            std::vector<double> col(a.rows(), 0.0);
            for (std::size_t i = 0; i < a.rows(); ++i) {
                double acc = 0.0;
                for (std::size_t m = 0; m < k; ++m) acc += a(i, m) * eig.vectors(m, j);
                col[i] = acc / sigma;
            }
            for (std::size_t i = 0; i < a.rows(); ++i) out.u(i, j) = col[i];
        }
    }
    return out;
}

Matrix solve_spd_regularized(const Matrix& a, double gamma, const Matrix& b) {
    if (a.rows() != a.cols() || a.rows() != b.rows())
        throw ContractError("solve_spd_regularized: dimension mismatch");
    const std::size_t n = a.rows();
    Matrix l(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double acc = a(i, j) + (i == j ? gamma : 0.0);
            for (std::size_t k = 0; k < j; ++k) acc -= l(i, k) * l(j, k);
            if (i == j) {
                if (acc <= 0.0)
                    throw NumericError("solve_spd_regularized: matrix not positive definite");
                l(i, i) = std::sqrt(acc);
            } else {
                l(i, j) = acc / l(j, j);
            }
        }
    }
    Matrix x(n, b.cols());
    for (std::size_t col = 0; col < b.cols(); ++col) {
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = b(i, col);
            for (std::size_t k = 0; k < i; ++k) acc -= l(i, k) * y[k];
            y[i] = acc / l(i, i);
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double acc = y[ii];
            for (std::size_t k = ii + 1; k < n; ++k) acc -= l(k, ii) * x(k, col);
            x(ii, col) = acc / l(ii, ii);
        }
    }
    return x;
}

}  // namespace pmad
