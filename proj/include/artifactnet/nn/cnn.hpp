#pragma once

#include <array>
#include <vector>

#include "artifactnet/features.hpp"
#include "artifactnet/nn/layers.hpp"

namespace artifactnet::nn {

struct CnnConfig {
    std::array<int, 3> widths{16, 32, 64};
    int fc_hidden = 32;
};

// Compact segment classifier: 3x (Conv-BN-ReLU-Pool), adaptive average
// pool, two fully connected layers to a single logit.
class SegmentCnn {
public:
    SegmentCnn() = default;
    SegmentCnn(const CnnConfig& cfg, Rng& rng);

    // x is (n, 7, mels, frames). Returns logits (n, 1). Train mode uses
    // batch statistics in the BN layers and updates running statistics.
    Tensor forward(const Tensor& x, bool train);

    // grad_logits is (n, 1); accumulates parameter grads, returns gradient
    // w.r.t. the input features (used by phase-2 steering).
    Tensor backward(const Tensor& grad_logits);

    std::vector<ParamRef> params();        // trainable parameters
    std::vector<ParamRef> state_params();  // trainable + BN running stats, for serialization
    void zero_grads();

    const CnnConfig& config() const { return cfg_; }

private:
    CnnConfig cfg_;
    std::array<Conv2d, 3> convs_;
    std::array<BatchNorm2d, 3> bns_;
    std::array<Relu, 3> relus_;
    std::array<MaxPool2x2, 3> pools_;
    AdaptiveAvgPool avg_;
    Linear fc1_, fc2_;
    Relu fc_relu_;
};

// Probability P(AI) for one 7-channel segment, eval mode. Throws ShapeError
// unless the tensor has exactly 7 channels.
double cnn_forward(const features::FeatureTensor& f, SegmentCnn& model);

// FeatureTensor -> (1, 7, mels, frames) network input.
Tensor feature_to_tensor(const features::FeatureTensor& f);

}  // namespace artifactnet::nn
