#pragma once

#include <vector>

#include "artifactnet/nn/layers.hpp"
#include "artifactnet/spectral.hpp"

namespace artifactnet::nn {

struct UNetConfig {
    int depth = 3;
    int base_channels = 8;  // desk-scale default
    bool gated_bottleneck = true;
    bool bounded_mask = true;  // m = 0.5*sigmoid(z); false gives the ablation variant
};

// m = 0.5 * sigmoid(z), elementwise. Outputs lie strictly inside (0, 0.5).
Tensor bounded_mask(const Tensor& z);

// Encoder-decoder masking network. Predicts a multiplicative mask on the
// input magnitude; the residual is mask * input, so each output cell is at
// most half its input cell. The input to the conv stack is the magnitude
// scaled by its per-call maximum; the mask applies to the unscaled input.
class ArtifactUNet {
public:
    ArtifactUNet() = default;
    ArtifactUNet(const UNetConfig& cfg, Rng& rng);

    // Inference on a spectrogram; pads bins/frames to a multiple of 2^depth
    // by reflection and crops the output back.
    spectral::MagnitudeSpectrogram forward(const spectral::MagnitudeSpectrogram& x);

    // Training path: x is (n, 1, bins, frames), already any size (padding is
    // handled internally). Returns the residual in the input shape and keeps
    // the tape for backward().
    Tensor forward_residual(const Tensor& x);

    // grad_residual matches forward_residual()'s output shape. Accumulates
    // parameter gradients; returns nothing (input gradients are not needed
    // upstream of the spectrogram).
    void backward(const Tensor& grad_residual);

    // Mask from the latest forward, cropped to the input shape.
    const Tensor& last_mask() const { return mask_cropped_; }
    double last_mask_mean() const;

    std::vector<ParamRef> params();
    void zero_grads();

    const UNetConfig& config() const { return cfg_; }

private:
    Tensor forward_logits(const Tensor& x_norm);
    Tensor backward_logits(const Tensor& grad_z);

    UNetConfig cfg_;
    std::vector<Conv2d> enc_convs_;
    std::vector<Relu> enc_relus_;
    std::vector<MaxPool2x2> pools_;
    Conv2d bott_conv1_, bott_conv2_;
    Relu bott_relu_;
    std::vector<Upsample2x> ups_;
    std::vector<Conv2d> dec_convs_;
    std::vector<Relu> dec_relus_;
    Conv2d out_conv_;

    // tape
    Tensor x_padded_, z_, mask_, mask_cropped_;
    Tensor bott_input_, bott_value_, bott_gate_sig_;
    std::vector<int> concat_split_;
    int pad_h_ = 0, pad_w_ = 0;
    int orig_h_ = 0, orig_w_ = 0;
    double norm_scale_ = 1.0;
};

}  // namespace artifactnet::nn
