#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace artifactnet::nn {

// Dense tensor of up to 4 axes (batch, channel, height, width), stored
// row-major. Lower-rank data keeps leading axes at 1; `rank` records the
// logical rank for serialization.
struct Tensor {
    std::array<int, 4> shape{1, 1, 1, 1};  // n, c, h, w
    int rank = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(int n, int c, int h, int w)
        : shape{n, c, h, w}, rank(4), data(static_cast<std::size_t>(n) * c * h * w, 0.0) {}

    static Tensor vec(int n) {
        Tensor t(1, 1, 1, n);
        t.rank = 1;
        return t;
    }
    static Tensor mat(int rows, int cols) {
        Tensor t(1, 1, rows, cols);
        t.rank = 2;
        return t;
    }

    int n() const { return shape[0]; }
    int c() const { return shape[1]; }
    int h() const { return shape[2]; }
    int w() const { return shape[3]; }
    std::size_t numel() const { return data.size(); }

    double& at(int n_, int c_, int h_, int w_) {
        return data[((static_cast<std::size_t>(n_) * shape[1] + c_) * shape[2] + h_) * shape[3] + w_];
    }
    double at(int n_, int c_, int h_, int w_) const {
        return data[((static_cast<std::size_t>(n_) * shape[1] + c_) * shape[2] + h_) * shape[3] + w_];
    }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
    void zero() { std::fill(data.begin(), data.end(), 0.0); }

    std::string shape_str() const {
        return std::to_string(shape[0]) + "x" + std::to_string(shape[1]) + "x" +
               std::to_string(shape[2]) + "x" + std::to_string(shape[3]);
    }
};

// Named view of one parameter and its gradient accumulator; the stable
// ordering of these drives serialization, SGD and gradient checks.
struct ParamRef {
    std::string name;
    Tensor* value = nullptr;
    Tensor* grad = nullptr;
};

}  // namespace artifactnet::nn
