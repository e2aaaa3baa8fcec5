#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ddnet {

// Dense row-major float matrix. Rows are time steps wherever a matrix holds
// a temporal series.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, float fill = 0.0f) : rows(r), cols(c), data(r * c, fill) {}

    float& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    float operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<float> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const float> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    bool operator==(const Matrix&) const = default;
};

}  // namespace ddnet
