#include "artifactnet/nn/layers.hpp"

#include <cmath>

#include "artifactnet/errors.hpp"

namespace artifactnet::nn {

namespace {

void check_channels(const char* layer, const Tensor& x, int expected) {
    if (x.c() != expected) {
        throw ShapeError(std::string(layer) + ": expected " + std::to_string(expected) +
                         " channels, got " + x.shape_str());
    }
}

}  // namespace

Conv2d::Conv2d(int in_ch, int out_ch, Rng& rng) {
    weight = Tensor(out_ch, in_ch, 3, 3);
    bias = Tensor::vec(out_ch);
    grad_weight = weight;
    grad_bias = bias;
    grad_weight.zero();
    grad_bias.zero();
    const double scale = std::sqrt(2.0 / (in_ch * 9.0));  // He init
    for (double& v : weight.data) v = rng.gaussian() * scale;
}

Tensor Conv2d::forward(const Tensor& x) {
    check_channels("conv2d", x, weight.c());
    input_ = x;
    const int n = x.n(), ci = x.c(), h = x.h(), w = x.w(), co = weight.n();
    Tensor y(n, co, h, w);
    for (int b = 0; b < n; ++b) {
        for (int oc = 0; oc < co; ++oc) {
            const double bv = bias.data[oc];
            for (int i = 0; i < h; ++i) {
                for (int j = 0; j < w; ++j) {
                    double acc = bv;
                    for (int ic = 0; ic < ci; ++ic) {
                        for (int di = -1; di <= 1; ++di) {
                            const int si = i + di;
                            if (si < 0 || si >= h) continue;
                            for (int dj = -1; dj <= 1; ++dj) {
                                const int sj = j + dj;
                                if (sj < 0 || sj >= w) continue;
                                acc += weight.at(oc, ic, di + 1, dj + 1) * x.at(b, ic, si, sj);
                            }
                        }
                    }
                    y.at(b, oc, i, j) = acc;
                }
            }
        }
    }
    return y;
}

Tensor Conv2d::backward(const Tensor& grad_out) {
    const Tensor& x = input_;
    const int n = x.n(), ci = x.c(), h = x.h(), w = x.w(), co = weight.n();
    Tensor grad_in(n, ci, h, w);
    for (int b = 0; b < n; ++b) {
        for (int oc = 0; oc < co; ++oc) {
            for (int i = 0; i < h; ++i) {
                for (int j = 0; j < w; ++j) {
                    const double g = grad_out.at(b, oc, i, j);
                    if (g == 0.0) continue;
                    grad_bias.data[oc] += g;
                    for (int ic = 0; ic < ci; ++ic) {
                        for (int di = -1; di <= 1; ++di) {
                            const int si = i + di;
                            if (si < 0 || si >= h) continue;
                            for (int dj = -1; dj <= 1; ++dj) {
                                const int sj = j + dj;
                                if (sj < 0 || sj >= w) continue;
                                grad_weight.at(oc, ic, di + 1, dj + 1) += g * x.at(b, ic, si, sj);
                                grad_in.at(b, ic, si, sj) += g * weight.at(oc, ic, di + 1, dj + 1);
                            }
                        }
                    }
                }
            }
        }
    }
    return grad_in;
}

std::vector<ParamRef> Conv2d::params(const std::string& prefix) {
    return {{prefix + ".weight", &weight, &grad_weight}, {prefix + ".bias", &bias, &grad_bias}};
}

BatchNorm2d::BatchNorm2d(int channels) {
    gamma = Tensor::vec(channels);
    beta = Tensor::vec(channels);
    running_mean = Tensor::vec(channels);
    running_var = Tensor::vec(channels);
    for (double& v : gamma.data) v = 1.0;
    for (double& v : running_var.data) v = 1.0;
    grad_gamma = gamma;
    grad_beta = beta;
    grad_gamma.zero();
    grad_beta.zero();
}

Tensor BatchNorm2d::forward(const Tensor& x, bool train) {
    check_channels("batchnorm", x, static_cast<int>(gamma.numel()));
    input_ = x;
    train_mode_ = train;
    const int n = x.n(), c = x.c(), h = x.h(), w = x.w();
    const double count = static_cast<double>(n) * h * w;

    batch_mean_.assign(c, 0.0);
    batch_var_.assign(c, 0.0);
    if (train) {
        for (int b = 0; b < n; ++b)
            for (int ch = 0; ch < c; ++ch)
                for (int i = 0; i < h; ++i)
                    for (int j = 0; j < w; ++j) batch_mean_[ch] += x.at(b, ch, i, j);
        for (int ch = 0; ch < c; ++ch) batch_mean_[ch] /= count;
        for (int b = 0; b < n; ++b)
            for (int ch = 0; ch < c; ++ch)
                for (int i = 0; i < h; ++i)
                    for (int j = 0; j < w; ++j) {
                        const double d = x.at(b, ch, i, j) - batch_mean_[ch];
                        batch_var_[ch] += d * d;
                    }
        for (int ch = 0; ch < c; ++ch) batch_var_[ch] /= count;
        // biased variance everywhere so frozen-stats eval reproduces train output
        for (int ch = 0; ch < c; ++ch) {
            running_mean.data[ch] = (1.0 - momentum) * running_mean.data[ch] + momentum * batch_mean_[ch];
            running_var.data[ch] = (1.0 - momentum) * running_var.data[ch] + momentum * batch_var_[ch];
        }
    } else {
        for (int ch = 0; ch < c; ++ch) {
            batch_mean_[ch] = running_mean.data[ch];
            batch_var_[ch] = running_var.data[ch];
        }
    }

    Tensor y(n, c, h, w);
    for (int b = 0; b < n; ++b)
        for (int ch = 0; ch < c; ++ch) {
            const double inv_std = 1.0 / std::sqrt(batch_var_[ch] + eps);
            for (int i = 0; i < h; ++i)
                for (int j = 0; j < w; ++j) {
                    const double xn = (x.at(b, ch, i, j) - batch_mean_[ch]) * inv_std;
                    y.at(b, ch, i, j) = gamma.data[ch] * xn + beta.data[ch];
                }
        }
    return y;
}

Tensor BatchNorm2d::backward(const Tensor& grad_out) {
    const Tensor& x = input_;
    const int n = x.n(), c = x.c(), h = x.h(), w = x.w();
    const double count = static_cast<double>(n) * h * w;
    Tensor grad_in(n, c, h, w);

    for (int ch = 0; ch < c; ++ch) {
        const double mean = batch_mean_[ch];
        const double inv_std = 1.0 / std::sqrt(batch_var_[ch] + eps);
        double sum_g = 0.0, sum_gx = 0.0;
        for (int b = 0; b < n; ++b)
            for (int i = 0; i < h; ++i)
                for (int j = 0; j < w; ++j) {
                    const double g = grad_out.at(b, ch, i, j);
                    const double xn = (x.at(b, ch, i, j) - mean) * inv_std;
                    sum_g += g;
                    sum_gx += g * xn;
                }
        grad_beta.data[ch] += sum_g;
        grad_gamma.data[ch] += sum_gx;

        const double gam = gamma.data[ch];
        for (int b = 0; b < n; ++b)
            for (int i = 0; i < h; ++i)
                for (int j = 0; j < w; ++j) {
                    const double g = grad_out.at(b, ch, i, j);
                    const double xn = (x.at(b, ch, i, j) - mean) * inv_std;
                    if (train_mode_) {
                        grad_in.at(b, ch, i, j) =
                            gam * inv_std * (g - sum_g / count - xn * sum_gx / count);
                    } else {
                        grad_in.at(b, ch, i, j) = gam * inv_std * g;
                    }
                }
    }
    return grad_in;
}

std::vector<ParamRef> BatchNorm2d::params(const std::string& prefix) {
    return {{prefix + ".gamma", &gamma, &grad_gamma}, {prefix + ".beta", &beta, &grad_beta}};
}

Tensor Relu::forward(const Tensor& x) {
    input_ = x;
    Tensor y = x;
    for (double& v : y.data) v = v > 0.0 ? v : 0.0;
    return y;
}

Tensor Relu::backward(const Tensor& grad_out) const {
    Tensor g = grad_out;
    for (std::size_t i = 0; i < g.data.size(); ++i) {
        if (input_.data[i] <= 0.0) g.data[i] = 0.0;
    }
    return g;
}

Tensor Sigmoid::forward(const Tensor& x) {
    Tensor y = x;
    for (double& v : y.data) v = sigmoid_scalar(v);
    output_ = y;
    return y;
}

Tensor Sigmoid::backward(const Tensor& grad_out) const {
    Tensor g = grad_out;
    for (std::size_t i = 0; i < g.data.size(); ++i) {
        const double s = output_.data[i];
        g.data[i] *= s * (1.0 - s);
    }
    return g;
}

Tensor MaxPool2x2::forward(const Tensor& x) {
    in_shape_ = x.shape;
    const int n = x.n(), c = x.c(), ho = x.h() / 2, wo = x.w() / 2;
    if (ho == 0 || wo == 0) throw ShapeError("maxpool: input too small " + x.shape_str());
    Tensor y(n, c, ho, wo);
    argmax_.resize(y.numel());
    std::size_t out_idx = 0;
    for (int b = 0; b < n; ++b)
        for (int ch = 0; ch < c; ++ch)
            for (int i = 0; i < ho; ++i)
                for (int j = 0; j < wo; ++j) {
                    double best = x.at(b, ch, 2 * i, 2 * j);
                    int bi = 2 * i, bj = 2 * j;
                    for (int di = 0; di < 2; ++di)
                        for (int dj = 0; dj < 2; ++dj) {
                            const double v = x.at(b, ch, 2 * i + di, 2 * j + dj);
                            if (v > best) {
                                best = v;
                                bi = 2 * i + di;
                                bj = 2 * j + dj;
                            }
                        }
                    y.at(b, ch, i, j) = best;
                    argmax_[out_idx++] =
                        ((static_cast<std::size_t>(b) * c + ch) * x.h() + bi) * x.w() + bj;
                }
    return y;
}

Tensor MaxPool2x2::backward(const Tensor& grad_out) const {
    Tensor g(in_shape_[0], in_shape_[1], in_shape_[2], in_shape_[3]);
    for (std::size_t i = 0; i < grad_out.numel(); ++i) g.data[argmax_[i]] += grad_out.data[i];
    return g;
}

Tensor AdaptiveAvgPool::forward(const Tensor& x) {
    in_shape_ = x.shape;
    const int n = x.n(), c = x.c();
    const double count = static_cast<double>(x.h()) * x.w();
    Tensor y(n, c, 1, 1);
    for (int b = 0; b < n; ++b)
        for (int ch = 0; ch < c; ++ch) {
            double acc = 0.0;
            for (int i = 0; i < x.h(); ++i)
                for (int j = 0; j < x.w(); ++j) acc += x.at(b, ch, i, j);
            y.at(b, ch, 0, 0) = acc / count;
        }
    return y;
}

Tensor AdaptiveAvgPool::backward(const Tensor& grad_out) const {
    Tensor g(in_shape_[0], in_shape_[1], in_shape_[2], in_shape_[3]);
    const double count = static_cast<double>(in_shape_[2]) * in_shape_[3];
    for (int b = 0; b < g.n(); ++b)
        for (int ch = 0; ch < g.c(); ++ch) {
            const double gv = grad_out.at(b, ch, 0, 0) / count;
            for (int i = 0; i < g.h(); ++i)
                for (int j = 0; j < g.w(); ++j) g.at(b, ch, i, j) = gv;
        }
    return g;
}

Linear::Linear(int in_features, int out_features, Rng& rng) {
    weight = Tensor::mat(out_features, in_features);
    bias = Tensor::vec(out_features);
    grad_weight = weight;
    grad_bias = bias;
    grad_weight.zero();
    grad_bias.zero();
    const double scale = std::sqrt(2.0 / in_features);
    for (double& v : weight.data) v = rng.gaussian() * scale;
}

Tensor Linear::forward(const Tensor& x) {
    const int in_f = weight.w(), out_f = weight.h();
    const int n = x.n();
    if (static_cast<int>(x.numel()) / n != in_f) {
        throw ShapeError("linear: expected " + std::to_string(in_f) + " features, got " +
                         x.shape_str());
    }
    input_ = x;
    Tensor y(n, 1, 1, out_f);
    y.rank = 2;
    for (int b = 0; b < n; ++b)
        for (int o = 0; o < out_f; ++o) {
            double acc = bias.data[o];
            for (int i = 0; i < in_f; ++i) {
                acc += weight.data[static_cast<std::size_t>(o) * in_f + i] *
                       x.data[static_cast<std::size_t>(b) * in_f + i];
            }
            y.data[static_cast<std::size_t>(b) * out_f + o] = acc;
        }
    return y;
}

Tensor Linear::backward(const Tensor& grad_out) {
    const int in_f = weight.w(), out_f = weight.h();
    const int n = input_.n();
    Tensor grad_in = input_;
    grad_in.zero();
    for (int b = 0; b < n; ++b)
        for (int o = 0; o < out_f; ++o) {
            const double g = grad_out.data[static_cast<std::size_t>(b) * out_f + o];
            if (g == 0.0) continue;
            grad_bias.data[o] += g;
            for (int i = 0; i < in_f; ++i) {
                grad_weight.data[static_cast<std::size_t>(o) * in_f + i] +=
                    g * input_.data[static_cast<std::size_t>(b) * in_f + i];
                grad_in.data[static_cast<std::size_t>(b) * in_f + i] +=
                    g * weight.data[static_cast<std::size_t>(o) * in_f + i];
            }
        }
    return grad_in;
}

std::vector<ParamRef> Linear::params(const std::string& prefix) {
    return {{prefix + ".weight", &weight, &grad_weight}, {prefix + ".bias", &bias, &grad_bias}};
}

Tensor Upsample2x::forward(const Tensor& x) {
    in_shape_ = x.shape;
    Tensor y(x.n(), x.c(), x.h() * 2, x.w() * 2);
    for (int b = 0; b < x.n(); ++b)
        for (int ch = 0; ch < x.c(); ++ch)
            for (int i = 0; i < y.h(); ++i)
                for (int j = 0; j < y.w(); ++j) y.at(b, ch, i, j) = x.at(b, ch, i / 2, j / 2);
    return y;
}

Tensor Upsample2x::backward(const Tensor& grad_out) const {
    Tensor g(in_shape_[0], in_shape_[1], in_shape_[2], in_shape_[3]);
    for (int b = 0; b < grad_out.n(); ++b)
        for (int ch = 0; ch < grad_out.c(); ++ch)
            for (int i = 0; i < grad_out.h(); ++i)
                for (int j = 0; j < grad_out.w(); ++j)
                    g.at(b, ch, i / 2, j / 2) += grad_out.at(b, ch, i, j);
    return g;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    if (a.n() != b.n() || a.h() != b.h() || a.w() != b.w()) {
        throw ShapeError("concat: incompatible shapes " + a.shape_str() + " vs " + b.shape_str());
    }
    Tensor y(a.n(), a.c() + b.c(), a.h(), a.w());
    for (int n = 0; n < a.n(); ++n) {
        for (int c = 0; c < a.c(); ++c)
            for (int i = 0; i < a.h(); ++i)
                for (int j = 0; j < a.w(); ++j) y.at(n, c, i, j) = a.at(n, c, i, j);
        for (int c = 0; c < b.c(); ++c)
            for (int i = 0; i < a.h(); ++i)
                for (int j = 0; j < a.w(); ++j) y.at(n, a.c() + c, i, j) = b.at(n, c, i, j);
    }
    return y;
}

void split_channels(const Tensor& grad, int c_first, Tensor& grad_a, Tensor& grad_b) {
    grad_a = Tensor(grad.n(), c_first, grad.h(), grad.w());
    grad_b = Tensor(grad.n(), grad.c() - c_first, grad.h(), grad.w());
    for (int n = 0; n < grad.n(); ++n) {
        for (int c = 0; c < c_first; ++c)
            for (int i = 0; i < grad.h(); ++i)
                for (int j = 0; j < grad.w(); ++j) grad_a.at(n, c, i, j) = grad.at(n, c, i, j);
        for (int c = c_first; c < grad.c(); ++c)
            for (int i = 0; i < grad.h(); ++i)
                for (int j = 0; j < grad.w(); ++j)
                    grad_b.at(n, c - c_first, i, j) = grad.at(n, c, i, j);
    }
}

double sigmoid_scalar(double z) {
    if (z >= 0.0) {
        const double e = std::exp(-z);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace artifactnet::nn
