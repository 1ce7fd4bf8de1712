#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pottsrf {

/// Dense row-major matrix of doubles. Used for point sets (N x D),
/// probability / region-force matrices (N x K) and membership fields (N x K).
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}

    double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }

    std::span<double> row(int i) {
        return {data.data() + static_cast<std::size_t>(i) * cols, static_cast<std::size_t>(cols)};
    }
    std::span<const double> row(int i) const {
        return {data.data() + static_cast<std::size_t>(i) * cols, static_cast<std::size_t>(cols)};
    }

    void copy_col(int j, std::span<double> out) const {
        for (int i = 0; i < rows; ++i) out[i] = (*this)(i, j);
    }
    void set_col(int j, std::span<const double> in) {
        for (int i = 0; i < rows; ++i) (*this)(i, j) = in[i];
    }

    bool same_shape(const Matrix& other) const { return rows == other.rows && cols == other.cols; }
};

}  // namespace pottsrf
