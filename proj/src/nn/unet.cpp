#include "artifactnet/nn/unet.hpp"

#include <algorithm>
#include <cmath>

#include "artifactnet/errors.hpp"

namespace artifactnet::nn {

namespace {

int pad_to_multiple(int n, int m) { return (n % m == 0) ? 0 : m - n % m; }

// Reflect-pad bottom/right so both spatial axes divide 2^depth.
Tensor reflect_pad_hw(const Tensor& x, int pad_h, int pad_w) {
    if (pad_h == 0 && pad_w == 0) return x;
    Tensor y(x.n(), x.c(), x.h() + pad_h, x.w() + pad_w);
    for (int b = 0; b < x.n(); ++b)
        for (int c = 0; c < x.c(); ++c)
            for (int i = 0; i < y.h(); ++i) {
                long long si = i;
                while (si >= x.h()) si = 2 * (static_cast<long long>(x.h()) - 1) - si;
                if (si < 0) si = 0;
                for (int j = 0; j < y.w(); ++j) {
                    long long sj = j;
                    while (sj >= x.w()) sj = 2 * (static_cast<long long>(x.w()) - 1) - sj;
                    if (sj < 0) sj = 0;
                    y.at(b, c, i, j) = x.at(b, c, static_cast<int>(si), static_cast<int>(sj));
                }
            }
    return y;
}

}  // namespace

Tensor bounded_mask(const Tensor& z) {
    Tensor m = z;
    for (double& v : m.data) v = 0.5 * sigmoid_scalar(v);
    return m;
}

ArtifactUNet::ArtifactUNet(const UNetConfig& cfg, Rng& rng) : cfg_(cfg) {
    if (cfg.depth < 1 || cfg.base_channels < 1) throw ConfigError("unet: depth and channels must be >= 1");
    int ch = 1;
    for (int i = 0; i < cfg.depth; ++i) {
        const int out = cfg.base_channels << i;
        enc_convs_.emplace_back(ch, out, rng);
        ch = out;
    }
    enc_relus_.resize(cfg.depth);
    pools_.resize(cfg.depth);

    bott_conv1_ = Conv2d(ch, ch, rng);
    bott_conv2_ = Conv2d(ch, cfg.gated_bottleneck ? 2 * ch : ch, rng);

    ups_.resize(cfg.depth);
    dec_relus_.resize(cfg.depth);
    int cur = ch;
    for (int i = cfg.depth - 1; i >= 0; --i) {
        const int skip_ch = cfg.base_channels << i;
        const int out = i > 0 ? cfg.base_channels << (i - 1) : cfg.base_channels;
        dec_convs_.emplace_back(cur + skip_ch, out, rng);
        cur = out;
    }
    out_conv_ = Conv2d(cur, 1, rng);
}

Tensor ArtifactUNet::forward_logits(const Tensor& x_norm) {
    concat_split_.clear();
    std::vector<Tensor> enc_acts;
    Tensor cur = x_norm;
    for (int i = 0; i < cfg_.depth; ++i) {
        cur = enc_relus_[i].forward(enc_convs_[i].forward(cur));
        enc_acts.push_back(cur);
        cur = pools_[i].forward(cur);
    }

    // gated residual bottleneck: conv -> relu -> conv(2C), value gated by
    // the sigmoid half, added back onto the block input
    bott_input_ = cur;
    Tensor h = bott_relu_.forward(bott_conv1_.forward(cur));
    Tensor y2 = bott_conv2_.forward(h);
    if (cfg_.gated_bottleneck) {
        const int c = cur.c();
        bott_value_ = Tensor(y2.n(), c, y2.h(), y2.w());
        bott_gate_sig_ = Tensor(y2.n(), c, y2.h(), y2.w());
        Tensor out(y2.n(), c, y2.h(), y2.w());
        for (int b = 0; b < y2.n(); ++b)
            for (int ch = 0; ch < c; ++ch)
                for (int i = 0; i < y2.h(); ++i)
                    for (int j = 0; j < y2.w(); ++j) {
                        const double v = y2.at(b, ch, i, j);
                        const double g = sigmoid_scalar(y2.at(b, ch + c, i, j));
                        bott_value_.at(b, ch, i, j) = v;
                        bott_gate_sig_.at(b, ch, i, j) = g;
                        out.at(b, ch, i, j) = bott_input_.at(b, ch, i, j) + v * g;
                    }
        cur = out;
    } else {
        Tensor out = y2;
        for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += bott_input_.data[i];
        cur = out;
    }

    for (int d = 0; d < cfg_.depth; ++d) {
        const int level = cfg_.depth - 1 - d;
        Tensor up = ups_[d].forward(cur);
        concat_split_.push_back(up.c());
        Tensor cat = concat_channels(up, enc_acts[level]);
        cur = dec_relus_[d].forward(dec_convs_[d].forward(cat));
    }
    return out_conv_.forward(cur);
}

Tensor ArtifactUNet::backward_logits(const Tensor& grad_z) {
    Tensor g = out_conv_.backward(grad_z);
    std::vector<Tensor> skip_grads(cfg_.depth);
    for (int d = cfg_.depth - 1; d >= 0; --d) {
        const int level = cfg_.depth - 1 - d;
        g = dec_convs_[d].backward(dec_relus_[d].backward(g));
        Tensor g_up, g_skip;
        split_channels(g, concat_split_[d], g_up, g_skip);
        skip_grads[level] = std::move(g_skip);
        g = ups_[d].backward(g_up);
    }

    if (cfg_.gated_bottleneck) {
        const int c = bott_input_.c();
        Tensor g_y2(g.n(), 2 * c, g.h(), g.w());
        for (int b = 0; b < g.n(); ++b)
            for (int ch = 0; ch < c; ++ch)
                for (int i = 0; i < g.h(); ++i)
                    for (int j = 0; j < g.w(); ++j) {
                        const double gv = g.at(b, ch, i, j);
                        const double s = bott_gate_sig_.at(b, ch, i, j);
                        g_y2.at(b, ch, i, j) = gv * s;
                        g_y2.at(b, ch + c, i, j) =
                            gv * bott_value_.at(b, ch, i, j) * s * (1.0 - s);
                    }
        Tensor g_h = bott_conv2_.backward(g_y2);
        Tensor g_in = bott_conv1_.backward(bott_relu_.backward(g_h));
        for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += g_in.data[i];
    } else {
        Tensor g_h = bott_conv2_.backward(g);
        Tensor g_in = bott_conv1_.backward(bott_relu_.backward(g_h));
        for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += g_in.data[i];
    }

    for (int i = cfg_.depth - 1; i >= 0; --i) {
        Tensor gp = pools_[i].backward(g);
        for (std::size_t k = 0; k < gp.data.size(); ++k) gp.data[k] += skip_grads[i].data[k];
        g = enc_convs_[i].backward(enc_relus_[i].backward(gp));
    }
    return g;
}

Tensor ArtifactUNet::forward_residual(const Tensor& x) {
    if (x.c() != 1) throw ShapeError("unet expects a single input channel, got " + x.shape_str());
    orig_h_ = x.h();
    orig_w_ = x.w();
    const int mult = 1 << cfg_.depth;
    pad_h_ = pad_to_multiple(x.h(), mult);
    pad_w_ = pad_to_multiple(x.w(), mult);
    x_padded_ = reflect_pad_hw(x, pad_h_, pad_w_);

    norm_scale_ = 0.0;
    for (double v : x_padded_.data) norm_scale_ = std::max(norm_scale_, std::abs(v));
    if (norm_scale_ <= 0.0) norm_scale_ = 1.0;
    Tensor x_norm = x_padded_;
    for (double& v : x_norm.data) v /= norm_scale_;

    z_ = forward_logits(x_norm);
    mask_ = z_;
    for (double& v : mask_.data) {
        v = cfg_.bounded_mask ? 0.5 * sigmoid_scalar(v) : sigmoid_scalar(v);
    }

    Tensor r(x.n(), 1, orig_h_, orig_w_);
    mask_cropped_ = r;
    for (int b = 0; b < x.n(); ++b)
        for (int i = 0; i < orig_h_; ++i)
            for (int j = 0; j < orig_w_; ++j) {
                const double m = mask_.at(b, 0, i, j);
                mask_cropped_.at(b, 0, i, j) = m;
                r.at(b, 0, i, j) = m * x_padded_.at(b, 0, i, j);
            }
    return r;
}

void ArtifactUNet::backward(const Tensor& grad_residual) {
    Tensor grad_z = z_;
    grad_z.zero();
    const double peak = cfg_.bounded_mask ? 0.5 : 1.0;
    for (int b = 0; b < grad_residual.n(); ++b)
        for (int i = 0; i < orig_h_; ++i)
            for (int j = 0; j < orig_w_; ++j) {
                const double g = grad_residual.at(b, 0, i, j);
                if (g == 0.0) continue;
                const double m = mask_.at(b, 0, i, j);
                const double s = m / peak;  // sigmoid(z)
                grad_z.at(b, 0, i, j) = g * x_padded_.at(b, 0, i, j) * peak * s * (1.0 - s);
            }
    backward_logits(grad_z);
}

spectral::MagnitudeSpectrogram ArtifactUNet::forward(const spectral::MagnitudeSpectrogram& x) {
    Tensor t(1, 1, x.bins, x.frames);
    for (int f = 0; f < x.frames; ++f)
        for (int b = 0; b < x.bins; ++b) t.at(0, 0, b, f) = x.at(f, b);
    const Tensor r = forward_residual(t);
    spectral::MagnitudeSpectrogram out = x;
    for (int f = 0; f < x.frames; ++f)
        for (int b = 0; b < x.bins; ++b) out.at(f, b) = r.at(0, 0, b, f);
    return out;
}

double ArtifactUNet::last_mask_mean() const {
    if (mask_cropped_.numel() == 0) return 0.0;
    double s = 0.0;
    for (double v : mask_cropped_.data) s += v;
    return s / static_cast<double>(mask_cropped_.numel());
}

std::vector<ParamRef> ArtifactUNet::params() {
    std::vector<ParamRef> out;
    for (int i = 0; i < cfg_.depth; ++i) {
        auto p = enc_convs_[i].params("unet.enc" + std::to_string(i));
        out.insert(out.end(), p.begin(), p.end());
    }
    auto b1 = bott_conv1_.params("unet.bottleneck.conv1");
    auto b2 = bott_conv2_.params("unet.bottleneck.conv2");
    out.insert(out.end(), b1.begin(), b1.end());
    out.insert(out.end(), b2.begin(), b2.end());
    for (int d = 0; d < cfg_.depth; ++d) {
        auto p = dec_convs_[d].params("unet.dec" + std::to_string(cfg_.depth - 1 - d));
        out.insert(out.end(), p.begin(), p.end());
    }
    auto po = out_conv_.params("unet.out");
    out.insert(out.end(), po.begin(), po.end());
    return out;
}

void ArtifactUNet::zero_grads() {
    for (auto& p : params()) p.grad->zero();
}

}  // namespace artifactnet::nn
