// Copyright the pdh contributors. Licensed under the terms of the Apache 2.0 license. See LICENSE in the project root.
#include "pdh/matrix.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pdh {

namespace {

void require_finite(const std::vector<double>& values) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("Matrix: non-finite entry");
        }
    }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (data_.size() != rows_ * cols_) {
        throw std::invalid_argument("Matrix: value count " + std::to_string(data_.size()) +
                                    " does not match shape " + std::to_string(rows_) + "x" +
                                    std::to_string(cols_));
    }
    require_finite(data_);
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
        if (row.size() != cols_) {
            throw std::invalid_argument("Matrix: ragged initializer");
        }
        data_.insert(data_.end(), row.begin(), row.end());
    }
    require_finite(data_);
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m.at(i, i) = 1.0;
    }
    return m;
}

bool Matrix::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("matmul: dimension mismatch, " + std::to_string(a.rows()) +
                                    "x" + std::to_string(a.cols()) + " * " +
                                    std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    }
    Matrix out(a.rows(), b.cols());
    // i-k-j order: per output element the inner index k still runs strictly
    // ascending, which fixes the summation order.
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a.at(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) {
                out.at(i, j) += aik * b.at(k, j);
            }
        }
    }
    return out;
}

}  // namespace pdh
