#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace judgecal {

// Minimal dense square-ish matrix, row-major. Covariance matrices here are
// small (feature cap defaults to 10), so no external linear algebra is
// pulled in.
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

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    const std::vector<double>& data() const { return data_; }

    double trace() const;
    bool is_symmetric(double tol = 1e-9) const;

    // Frobenius norm of (*this - other).
    double frobenius_distance(const Matrix& other) const;
    double frobenius_norm() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Lower-triangular Cholesky factor of a symmetric positive-definite matrix;
// nullopt when a pivot is non-positive or non-finite.
std::optional<Matrix> cholesky(const Matrix& a);

} // namespace judgecal
