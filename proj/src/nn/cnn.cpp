#include "artifactnet/nn/cnn.hpp"

#include "artifactnet/errors.hpp"

namespace artifactnet::nn {

SegmentCnn::SegmentCnn(const CnnConfig& cfg, Rng& rng) : cfg_(cfg) {
    int ch = features::kNumChannels;
    for (int i = 0; i < 3; ++i) {
        convs_[i] = Conv2d(ch, cfg.widths[i], rng);
        bns_[i] = BatchNorm2d(cfg.widths[i]);
        ch = cfg.widths[i];
    }
    fc1_ = Linear(cfg.widths[2], cfg.fc_hidden, rng);
    fc2_ = Linear(cfg.fc_hidden, 1, rng);
}

Tensor SegmentCnn::forward(const Tensor& x, bool train) {
    if (x.c() != features::kNumChannels) {
        throw ShapeError("cnn expects 7 input channels, got " + x.shape_str());
    }
    Tensor cur = x;
    for (int i = 0; i < 3; ++i) {
        cur = pools_[i].forward(relus_[i].forward(bns_[i].forward(convs_[i].forward(cur), train)));
    }
    cur = avg_.forward(cur);
    cur = fc_relu_.forward(fc1_.forward(cur));
    return fc2_.forward(cur);
}

Tensor SegmentCnn::backward(const Tensor& grad_logits) {
    Tensor g = fc2_.backward(grad_logits);
    g = fc1_.backward(fc_relu_.backward(g));
    g = avg_.backward(g);
    for (int i = 2; i >= 0; --i) {
        g = convs_[i].backward(bns_[i].backward(relus_[i].backward(pools_[i].backward(g))));
    }
    return g;
}

std::vector<ParamRef> SegmentCnn::params() {
    std::vector<ParamRef> out;
    for (int i = 0; i < 3; ++i) {
        auto pc = convs_[i].params("cnn.block" + std::to_string(i) + ".conv");
        auto pb = bns_[i].params("cnn.block" + std::to_string(i) + ".bn");
        out.insert(out.end(), pc.begin(), pc.end());
        out.insert(out.end(), pb.begin(), pb.end());
    }
    auto f1 = fc1_.params("cnn.fc1");
    auto f2 = fc2_.params("cnn.fc2");
    out.insert(out.end(), f1.begin(), f1.end());
    out.insert(out.end(), f2.begin(), f2.end());
    return out;
}

std::vector<ParamRef> SegmentCnn::state_params() {
    std::vector<ParamRef> out = params();
    for (int i = 0; i < 3; ++i) {
        const std::string prefix = "cnn.block" + std::to_string(i) + ".bn";
        out.push_back({prefix + ".running_mean", &bns_[i].running_mean, nullptr});
        out.push_back({prefix + ".running_var", &bns_[i].running_var, nullptr});
    }
    return out;
}

void SegmentCnn::zero_grads() {
    for (auto& p : params()) p.grad->zero();
}

Tensor feature_to_tensor(const features::FeatureTensor& f) {
    Tensor t(1, features::kNumChannels, f.n_mels, f.frames);
    for (int c = 0; c < features::kNumChannels; ++c)
        for (int m = 0; m < f.n_mels; ++m)
            for (int fr = 0; fr < f.frames; ++fr) t.at(0, c, m, fr) = f.at(c, m, fr);
    return t;
}

double cnn_forward(const features::FeatureTensor& f, SegmentCnn& model) {
    const Tensor logits = model.forward(feature_to_tensor(f), false);
    return sigmoid_scalar(logits.data[0]);
}

}  // namespace artifactnet::nn
