#pragma once

#include <string>
#include <vector>

#include "artifactnet/nn/tensor.hpp"
#include "artifactnet/util/rng.hpp"

namespace artifactnet::nn {

// Layers cache what their backward pass needs during forward(). backward()
// takes d(loss)/d(output), accumulates parameter gradients in place and
// returns d(loss)/d(input). All layers support a leading batch axis.

// 3x3 convolution, stride 1, zero padding 1 (shape-preserving).
class Conv2d {
public:
    Conv2d() = default;
    Conv2d(int in_ch, int out_ch, Rng& rng);

    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& grad_out);
    std::vector<ParamRef> params(const std::string& prefix);

    Tensor weight;  // (out, in, 3, 3)
    Tensor bias;    // (out)
    Tensor grad_weight, grad_bias;

private:
    Tensor input_;
};

// Per-channel batch normalization with distinct train/eval statistics.
class BatchNorm2d {
public:
    BatchNorm2d() = default;
    explicit BatchNorm2d(int channels);

    Tensor forward(const Tensor& x, bool train);
    Tensor backward(const Tensor& grad_out);
    std::vector<ParamRef> params(const std::string& prefix);

    Tensor gamma, beta;
    Tensor running_mean, running_var;  // serialized with the weights
    Tensor grad_gamma, grad_beta;
    double momentum = 0.1;
    double eps = 1e-5;

private:
    Tensor input_;
    std::vector<double> batch_mean_, batch_var_;
    bool train_mode_ = false;
};

class Relu {
public:
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& grad_out) const;

private:
    Tensor input_;
};

class Sigmoid {
public:
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& grad_out) const;

private:
    Tensor output_;
};

// 2x2 max pooling, stride 2; trailing odd row/column dropped.
class MaxPool2x2 {
public:
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& grad_out) const;

private:
    std::array<int, 4> in_shape_{};
    std::vector<std::size_t> argmax_;
};

// Global average pool to 1x1 per channel.
class AdaptiveAvgPool {
public:
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& grad_out) const;

private:
    std::array<int, 4> in_shape_{};
};

// Fully connected layer on flattened (c*h*w) features per batch item.
class Linear {
public:
    Linear() = default;
    Linear(int in_features, int out_features, Rng& rng);

    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& grad_out);
    std::vector<ParamRef> params(const std::string& prefix);

    Tensor weight;  // (out, in) stored rank-2
    Tensor bias;    // (out)
    Tensor grad_weight, grad_bias;

private:
    Tensor input_;
};

// Nearest-neighbor 2x upsampling (UNet decoder path).
class Upsample2x {
public:
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& grad_out) const;

private:
    std::array<int, 4> in_shape_{};
};

// Free helpers used when wiring model graphs.
Tensor concat_channels(const Tensor& a, const Tensor& b);
void split_channels(const Tensor& grad, int c_first, Tensor& grad_a, Tensor& grad_b);
double sigmoid_scalar(double z);

}  // namespace artifactnet::nn
