#include "artifactnet/training.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "artifactnet/codecs.hpp"
#include "artifactnet/errors.hpp"

namespace artifactnet::training {

using features::FeatureTensor;
using nn::Tensor;
using spectral::MagnitudeSpectrogram;

namespace {

// The synthetic "artifact" lives in this band (fractions of Nyquist), below
// every simulated codec cutoff so it survives all four variants.
constexpr double kArtifactLo = 0.40;
constexpr double kArtifactHi = 0.55;

double energy(const std::vector<double>& x) {
    double e = 0.0;
    for (double v : x) e += v * v;
    return e;
}

std::vector<double> gen_clean(Rng& rng, int n) {
    std::vector<double> out(n, 0.0);
    for (int s = 0; s < 3; ++s) {
        const double freq = rng.uniform(0.01, 0.12);  // cycles/sample, low band
        const double amp = rng.uniform(0.4, 0.9);
        const double phase = rng.uniform(0.0, 6.283185307179586);
        for (int i = 0; i < n; ++i) out[i] += amp * std::sin(6.283185307179586 * freq * i + phase);
    }
    for (int i = 0; i < n; ++i) out[i] += 0.02 * rng.gaussian();  // broadband floor
    return out;
}

// Unit-energy noise confined to [lo, hi] fractions of Nyquist.
std::vector<double> band_noise(Rng& rng, int n, double lo, double hi) {
    std::size_t m = 1;
    while (m < static_cast<std::size_t>(n)) m <<= 1;
    std::vector<std::complex<double>> buf(m);
    for (auto& v : buf) v = rng.gaussian();
    spectral::fft(buf, false);
    const std::size_t half = m / 2;
    const std::size_t klo = static_cast<std::size_t>(lo * half);
    const std::size_t khi = static_cast<std::size_t>(hi * half);
    for (std::size_t k = 0; k <= half; ++k) {
        if (k < klo || k > khi) {
            buf[k] = 0.0;
            if (k > 0 && k < half) buf[m - k] = 0.0;
        }
    }
    spectral::fft(buf, true);
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = buf[i].real();
    const double e = energy(out);
    if (e > 0.0) {
        const double s = 1.0 / std::sqrt(e);
        for (double& v : out) v *= s;
    }
    return out;
}

std::vector<double> gen_artifact(Rng& rng, int n, double target_energy) {
    std::vector<double> a = band_noise(rng, n, kArtifactLo, kArtifactHi);
    const double s = std::sqrt(target_energy);
    for (double& v : a) v *= s;
    return a;
}

Tensor stack_features(const std::vector<const FeatureTensor*>& batch) {
    const int mels = batch.front()->n_mels;
    const int frames = batch.front()->frames;
    Tensor t(static_cast<int>(batch.size()), features::kNumChannels, mels, frames);
    for (std::size_t b = 0; b < batch.size(); ++b) {
        for (int c = 0; c < features::kNumChannels; ++c)
            for (int m = 0; m < mels; ++m)
                for (int f = 0; f < frames; ++f) t.at(static_cast<int>(b), c, m, f) = batch[b]->at(c, m, f);
    }
    return t;
}

}  // namespace

double bce_with_logit(double logit, double target, double& grad) {
    const double loss = std::max(logit, 0.0) - logit * target + std::log1p(std::exp(-std::abs(logit)));
    grad = nn::sigmoid_scalar(logit) - target;
    return loss;
}

void SgdOptimizer::step(const std::vector<nn::ParamRef>& params) {
    for (const auto& p : params) {
        auto& v = velocity_[p.name];
        if (v.size() != p.value->data.size()) v.assign(p.value->data.size(), 0.0);
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] = momentum_ * v[i] + p.grad->data[i];
            p.value->data[i] -= lr_ * v[i];
        }
    }
}

pipeline::Config TeacherOracle::toy_pipeline() {
    pipeline::Config cfg;
    cfg.stft = spectral::StftConfig{256, 64};
    cfg.n_mels = 32;
    cfg.hpss = features::HpssConfig{9, 9};
    cfg.sample_rate = 8000;
    return cfg;
}

TeacherOracle::TeacherOracle(std::uint64_t seed, int n_pairs, int n_samples,
                             const pipeline::Config& cfg, double artifact_gain)
    : cfg_(cfg) {
    Rng rng(seed);
    pairs_.reserve(n_pairs);
    for (int i = 0; i < n_pairs; ++i) {
        OraclePair pair;
        const std::vector<double> clean = gen_clean(rng, n_samples);
        const double e_clean = energy(clean);
        // 12% of the clean energy keeps the residual under the 25% bound
        const std::vector<double> artifact =
            gen_artifact(rng, n_samples, artifact_gain * artifact_gain * 0.12 * e_clean);
        pair.mixture.resize(n_samples);
        for (int k = 0; k < n_samples; ++k) pair.mixture[k] = clean[k] + artifact[k];

        if (energy(artifact) > 0.25 * energy(pair.mixture)) {
            throw ConfigError("oracle artifact exceeds the 25% mixture-energy bound");
        }

        pair.mixture_stft = spectral::stft(pair.mixture, cfg.stft, cfg.sample_rate);
        const spectral::Stft art = spectral::stft(artifact, cfg.stft, cfg.sample_rate);
        pair.residual_mag = art.magnitude;
        pair.residual_recon =
            spectral::istft(pair.residual_mag, pair.mixture_stft.phase, pair.mixture.size());
        pairs_.push_back(std::move(pair));
    }
}

std::vector<LabeledExample> make_toy_labeled_set(int n, std::uint64_t seed, int n_samples,
                                                 const pipeline::Config& cfg,
                                                 double artifact_gain) {
    (void)cfg;
    Rng rng(seed);
    std::vector<LabeledExample> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        LabeledExample ex;
        ex.label = i % 2;  // alternating real/ai keeps every prefix balanced
        ex.samples = gen_clean(rng, n_samples);
        const std::vector<double> artifact = gen_artifact(
            rng, n_samples, artifact_gain * artifact_gain * 0.02 * energy(ex.samples));
        if (ex.label == 1) {
            for (int k = 0; k < n_samples; ++k) ex.samples[k] += artifact[k];
        }
        out.push_back(std::move(ex));
    }
    return out;
}

Phase1Result phase1_distill(nn::ArtifactUNet& unet, const TeacherOracle& oracle,
                            const TrainConfig& cfg) {
    if (oracle.pairs().empty()) throw ConfigError("phase 1 needs a non-empty oracle");
    const auto& pairs = oracle.pairs();
    const pipeline::Config& pcfg = oracle.config();
    const int batch = std::min<int>(cfg.batch_size, static_cast<int>(pairs.size()));

    Rng rng(cfg.seed);
    SgdOptimizer opt(cfg.learning_rate, cfg.momentum);
    const auto params = unet.params();

    Phase1Result result;
    double initial_loss = 0.0;
    int high_streak = 0;

    for (int step = 0; step < cfg.steps; ++step) {
        unet.zero_grads();
        double batch_loss = 0.0;
        for (int k = 0; k < batch; ++k) {
            const std::size_t idx = batch == static_cast<int>(pairs.size())
                                        ? static_cast<std::size_t>(k)
                                        : rng.below(pairs.size());
            const OraclePair& pair = pairs[idx];

            const Tensor x = pipeline::mag_to_tensor(pair.mixture_stft.magnitude);
            const Tensor r = unet.forward_residual(x);

            // L1 on magnitudes
            const double inv_cells = 1.0 / static_cast<double>(r.numel());
            double l1 = 0.0;
            Tensor grad_r = r;
            for (int f = 0; f < pair.residual_mag.frames; ++f)
                for (int b = 0; b < pair.residual_mag.bins; ++b) {
                    const double d = r.at(0, 0, b, f) - pair.residual_mag.at(f, b);
                    l1 += std::abs(d);
                    grad_r.at(0, 0, b, f) = (d > 0.0 ? 1.0 : d < 0.0 ? -1.0 : 0.0) * inv_cells;
                }
            l1 *= inv_cells;

            // multi-resolution loss on phase-informed reconstructions
            const MagnitudeSpectrogram r_mag = pipeline::tensor_to_mag(r, pair.mixture_stft.magnitude);
            const std::vector<double> recon =
                spectral::istft(r_mag, pair.mixture_stft.phase, pair.mixture.size());
            std::vector<double> grad_time;
            const double mr = spectral::multires_stft_loss_grad(recon, pair.residual_recon, grad_time);
            const std::vector<double> grad_mag = spectral::istft_adjoint_magnitude(
                grad_time, pair.mixture_stft.phase, pcfg.stft, r_mag.frames);
            for (int f = 0; f < r_mag.frames; ++f)
                for (int b = 0; b < r_mag.bins; ++b)
                    grad_r.at(0, 0, b, f) += grad_mag[static_cast<std::size_t>(f) * r_mag.bins + b];

            const double scale = 1.0 / batch;
            for (double& g : grad_r.data) g *= scale;
            unet.backward(grad_r);
            batch_loss += (l1 + mr) * scale;
        }
        result.loss_curve.push_back(batch_loss);
        if (step == 0) initial_loss = batch_loss;

        if (batch_loss > 10.0 * initial_loss && initial_loss > 0.0) {
            if (++high_streak >= 20) {
                throw DivergenceError("phase 1 diverged at step " + std::to_string(step) +
                                          " (loss " + std::to_string(batch_loss) + " vs initial " +
                                          std::to_string(initial_loss) + ")",
                                      step);
            }
        } else {
            high_streak = 0;
        }
        opt.step(params);
    }
    return result;
}

namespace {

// transpose of the left-zero-padded first-difference operator
void diff_adjoint(const std::vector<double>& g, std::vector<double>& out, int frames) {
    for (int f = 0; f < frames; ++f) {
        double a = 0.0;
        if (f >= 1) a += g[f];
        if (f + 1 < frames) a -= g[f + 1];
        out[f] += a;
    }
}

// Forward the full feature pipe for one item, run BCE, and push gradients
// through the CNN and the mel path of the feature stack into the UNet.
// Channels derived from HPSS and the broadcast scalars are treated as
// constants; the differentiable path is mel_res and its linear derivatives.
double steer_item(nn::ArtifactUNet& unet, nn::SegmentCnn& cnn, const std::vector<double>& samples,
                  int label, const pipeline::Config& pcfg, double grad_scale) {
    const spectral::Stft s = spectral::stft(samples, pcfg.stft, pcfg.sample_rate);
    const Tensor x = pipeline::mag_to_tensor(s.magnitude);
    const Tensor r = unet.forward_residual(x);
    const MagnitudeSpectrogram r_mag = pipeline::tensor_to_mag(r, s.magnitude);
    const FeatureTensor feats = features::compute_channels(r_mag, pcfg.n_mels, pcfg.hpss);

    const Tensor logits = cnn.forward(nn::feature_to_tensor(feats), false);
    double grad_logit = 0.0;
    const double loss = bce_with_logit(logits.data[0], static_cast<double>(label), grad_logit);

    Tensor gl(1, 1, 1, 1);
    gl.data[0] = grad_logit * grad_scale;
    const Tensor gfeat = cnn.backward(gl);

    // accumulate d(loss)/d(mel_res) from mel_res, delta and delta2
    const int mels = feats.n_mels;
    const int frames = feats.frames;
    std::vector<double> gmel(static_cast<std::size_t>(frames) * mels, 0.0);
    std::vector<double> gd(frames), gd_total(frames), grow(frames);
    for (int m = 0; m < mels; ++m) {
        for (int f = 0; f < frames; ++f) gd[f] = gfeat.at(0, features::kDelta2, m, f);
        std::fill(gd_total.begin(), gd_total.end(), 0.0);
        diff_adjoint(gd, gd_total, frames);  // delta2 -> delta
        for (int f = 0; f < frames; ++f) gd_total[f] += gfeat.at(0, features::kDelta, m, f);
        std::fill(grow.begin(), grow.end(), 0.0);
        diff_adjoint(gd_total, grow, frames);  // delta -> mel_res
        for (int f = 0; f < frames; ++f) {
            gmel[static_cast<std::size_t>(f) * mels + m] =
                grow[f] + gfeat.at(0, features::kMelRes, m, f);
        }
    }

    const std::vector<double> gmag = spectral::mel_project_backward(r_mag, gmel, mels);
    Tensor grad_r(1, 1, r_mag.bins, r_mag.frames);
    for (int f = 0; f < r_mag.frames; ++f)
        for (int b = 0; b < r_mag.bins; ++b)
            grad_r.at(0, 0, b, f) = gmag[static_cast<std::size_t>(f) * r_mag.bins + b];
    unet.backward(grad_r);
    return loss;
}

}  // namespace

Phase2Result phase2_steer(nn::ArtifactUNet& unet, nn::SegmentCnn& frozen_cnn,
                          const std::vector<LabeledExample>& labeled_set, const TrainConfig& cfg,
                          const pipeline::Config& pcfg) {
    if (labeled_set.empty()) throw ConfigError("phase 2 needs a non-empty labeled set");

    const nn::ModelWeights before = nn::snapshot(frozen_cnn.state_params());
    const int batch = std::min<int>(cfg.batch_size, static_cast<int>(labeled_set.size()));

    Rng rng(cfg.seed);
    SgdOptimizer opt(cfg.learning_rate, cfg.momentum);
    const auto params = unet.params();

    Phase2Result result;
    for (int step = 0; step < cfg.steps; ++step) {
        unet.zero_grads();
        frozen_cnn.zero_grads();
        double batch_loss = 0.0;
        for (int k = 0; k < batch; ++k) {
            const std::size_t idx = batch == static_cast<int>(labeled_set.size())
                                        ? static_cast<std::size_t>(k)
                                        : rng.below(labeled_set.size());
            const LabeledExample& ex = labeled_set[idx];
            batch_loss += steer_item(unet, frozen_cnn, ex.samples, ex.label, pcfg, 1.0 / batch) / batch;
        }
        result.bce_curve.push_back(batch_loss);
        opt.step(params);
    }

    const nn::ModelWeights after = nn::snapshot(frozen_cnn.state_params());
    if (!nn::bitwise_equal(before, after)) {
        throw FrozenViolationError("phase 2 mutated frozen CNN parameters");
    }
    return result;
}

CodecBank build_simulated_bank(const std::vector<LabeledExample>& labeled_set, std::uint64_t seed,
                               const std::vector<std::string>& variants) {
    Rng rng(seed);
    CodecBank bank;
    bank.variants = variants;
    bank.items.reserve(labeled_set.size());
    for (const auto& ex : labeled_set) {
        std::map<std::string, std::vector<double>> item;
        for (const auto& v : variants) item[v] = codecs::simulate_codec(ex.samples, v, rng);
        bank.items.push_back(std::move(item));
    }
    return bank;
}

CodecBank build_identity_bank(const std::vector<LabeledExample>& labeled_set,
                              const std::vector<std::string>& variants) {
    CodecBank bank;
    bank.variants = variants;
    bank.items.reserve(labeled_set.size());
    for (const auto& ex : labeled_set) {
        std::map<std::string, std::vector<double>> item;
        for (const auto& v : variants) item[v] = ex.samples;
        bank.items.push_back(std::move(item));
    }
    return bank;
}

namespace {

void validate_bank(const CodecBank& bank, std::size_t n_items) {
    if (bank.items.size() != n_items) {
        throw IncompleteBankError("codec bank has " + std::to_string(bank.items.size()) +
                                  " items for " + std::to_string(n_items) + " tracks");
    }
    for (std::size_t i = 0; i < bank.items.size(); ++i) {
        for (const auto& v : bank.variants) {
            if (!bank.items[i].count(v)) {
                throw IncompleteBankError("track " + std::to_string(i) + " is missing codec variant '" +
                                          v + "'");
            }
        }
    }
}

}  // namespace

std::pair<double, double> eval_cross_codec_delta(nn::ArtifactUNet& unet, nn::SegmentCnn& cnn,
                                                 const std::vector<LabeledExample>& labeled_set,
                                                 const CodecBank& bank,
                                                 const pipeline::Config& pcfg) {
    validate_bank(bank, labeled_set.size());
    std::map<std::string, std::vector<double>> probs_real, probs_ai;
    for (std::size_t i = 0; i < labeled_set.size(); ++i) {
        for (const auto& v : bank.variants) {
            const FeatureTensor f =
                pipeline::segment_features(unet, bank.items[i].at(v), pcfg);
            const double p = nn::cnn_forward(f, cnn);
            (labeled_set[i].label == 1 ? probs_ai : probs_real)[v].push_back(p);
        }
    }
    const double d_real = codecs::cross_codec_delta(probs_real);
    const double d_ai = codecs::cross_codec_delta(probs_ai);
    return {d_real, d_ai};
}

Phase3Result phase3_codec_aware(nn::ArtifactUNet& unet, nn::SegmentCnn& frozen_cnn,
                                const std::vector<LabeledExample>& labeled_set,
                                const CodecBank& bank, const TrainConfig& cfg,
                                const pipeline::Config& pcfg,
                                const std::vector<LabeledExample>& heldout,
                                const CodecBank& heldout_bank) {
    if (labeled_set.empty()) throw ConfigError("phase 3 needs a non-empty labeled set");
    validate_bank(bank, labeled_set.size());

    const nn::ModelWeights before_cnn = nn::snapshot(frozen_cnn.state_params());

    Phase3Result result;
    std::tie(result.delta_real_before, result.delta_ai_before) =
        eval_cross_codec_delta(unet, frozen_cnn, heldout, heldout_bank, pcfg);

    const int batch = std::min<int>(cfg.batch_size, static_cast<int>(labeled_set.size()));
    const int variants = static_cast<int>(bank.variants.size());
    Rng rng(cfg.seed);
    SgdOptimizer opt(cfg.learning_rate, cfg.momentum);
    const auto params = unet.params();

    for (int step = 0; step < cfg.steps; ++step) {
        unet.zero_grads();
        frozen_cnn.zero_grads();
        double batch_loss = 0.0;
        const double scale = 1.0 / (batch * variants);
        for (int k = 0; k < batch; ++k) {
            const std::size_t idx = batch == static_cast<int>(labeled_set.size())
                                        ? static_cast<std::size_t>(k)
                                        : rng.below(labeled_set.size());
            // the whole 4-way codec family of the sampled track joins the batch
            for (const auto& v : bank.variants) {
                batch_loss += steer_item(unet, frozen_cnn, bank.items[idx].at(v),
                                         labeled_set[idx].label, pcfg, scale) *
                              scale;
            }
        }
        result.bce_curve.push_back(batch_loss);
        opt.step(params);
    }

    std::tie(result.delta_real_after, result.delta_ai_after) =
        eval_cross_codec_delta(unet, frozen_cnn, heldout, heldout_bank, pcfg);

    const nn::ModelWeights after_cnn = nn::snapshot(frozen_cnn.state_params());
    if (!nn::bitwise_equal(before_cnn, after_cnn)) {
        throw FrozenViolationError("phase 3 mutated frozen CNN parameters");
    }
    return result;
}

std::vector<double> train_cnn_head(nn::ArtifactUNet& unet, nn::SegmentCnn& cnn,
                                   const std::vector<LabeledExample>& labeled_set,
                                   const TrainConfig& cfg, const pipeline::Config& pcfg) {
    if (labeled_set.empty()) throw ConfigError("cnn head training needs a non-empty labeled set");

    // the UNet is fixed here, so features are computed once
    std::vector<FeatureTensor> feats;
    feats.reserve(labeled_set.size());
    for (const auto& ex : labeled_set) feats.push_back(pipeline::segment_features(unet, ex.samples, pcfg));

    const int batch = std::min<int>(cfg.batch_size, static_cast<int>(labeled_set.size()));
    Rng rng(cfg.seed);
    SgdOptimizer opt(cfg.learning_rate, cfg.momentum);
    const auto params = cnn.params();

    std::vector<double> curve;
    for (int step = 0; step < cfg.steps; ++step) {
        cnn.zero_grads();
        std::vector<const FeatureTensor*> items;
        std::vector<int> labels;
        for (int k = 0; k < batch; ++k) {
            const std::size_t idx = batch == static_cast<int>(labeled_set.size())
                                        ? static_cast<std::size_t>(k)
                                        : rng.below(labeled_set.size());
            items.push_back(&feats[idx]);
            labels.push_back(labeled_set[idx].label);
        }
        const Tensor x = stack_features(items);
        const Tensor logits = cnn.forward(x, true);
        Tensor grad(logits.n(), 1, 1, 1);
        double loss = 0.0;
        for (int b = 0; b < logits.n(); ++b) {
            double g = 0.0;
            loss += bce_with_logit(logits.data[b], static_cast<double>(labels[b]), g) / batch;
            grad.data[b] = g / batch;
        }
        curve.push_back(loss);
        cnn.backward(grad);
        opt.step(params);
    }
    return curve;
}

ChannelMeans compute_channel_means(const std::vector<FeatureTensor>& train_features) {
    if (train_features.empty()) throw ConfigError("channel means need at least one feature tensor");
    ChannelMeans means;
    means.n_mels = train_features.front().n_mels;
    means.frames = train_features.front().frames;
    means.maps.assign(train_features.front().data.size(), 0.0);
    for (const auto& f : train_features) {
        if (f.n_mels != means.n_mels || f.frames != means.frames) {
            throw ShapeError("channel means: inconsistent feature shapes");
        }
        for (std::size_t i = 0; i < f.data.size(); ++i) means.maps[i] += f.data[i];
    }
    const double inv = 1.0 / static_cast<double>(train_features.size());
    for (double& v : means.maps) v *= inv;
    return means;
}

namespace {

double f1_over_set(nn::SegmentCnn& cnn, const std::vector<FeatureTensor>& feats,
                   const std::vector<int>& labels, double tau) {
    long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < feats.size(); ++i) {
        const double p = nn::cnn_forward(feats[i], cnn);
        const bool ai = p >= tau;
        if (labels[i] == 1) {
            ai ? ++tp : ++fn;
        } else if (ai) {
            ++fp;
        }
    }
    const double prec = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    const double rec = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    return prec + rec > 0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
}

}  // namespace

AblationResult ablate_channel(nn::SegmentCnn& cnn, const std::vector<FeatureTensor>& eval_features,
                              const std::vector<int>& eval_labels, int channel_index,
                              const ChannelMeans& means, double tau) {
    if (channel_index < 0 || channel_index >= features::kNumChannels) {
        throw ConfigError("channel index " + std::to_string(channel_index) + " out of range 0..6");
    }
    if (eval_features.size() != eval_labels.size()) {
        throw ShapeError("ablate_channel: features/labels size mismatch");
    }
    AblationResult result;
    result.channel = channel_index;
    result.f1_baseline = f1_over_set(cnn, eval_features, eval_labels, tau);

    std::vector<FeatureTensor> ablated = eval_features;
    const std::size_t per_ch = static_cast<std::size_t>(means.n_mels) * means.frames;
    for (auto& f : ablated) {
        if (f.n_mels != means.n_mels || f.frames != means.frames) {
            throw ShapeError("ablate_channel: mean map shape does not match features");
        }
        for (std::size_t i = 0; i < per_ch; ++i) {
            f.data[channel_index * per_ch + i] = means.maps[channel_index * per_ch + i];
        }
    }
    result.f1_ablated = f1_over_set(cnn, ablated, eval_labels, tau);
    result.delta_f1 = result.f1_ablated - result.f1_baseline;
    return result;
}

UnboundedAblationReport unbounded_mask_ablation(const TeacherOracle& oracle,
                                                const std::vector<LabeledExample>& labeled_set,
                                                const TrainConfig& cfg) {
    UnboundedAblationReport report;
    const pipeline::Config& pcfg = oracle.config();

    for (const bool bounded : {true, false}) {
        Rng init_rng(cfg.seed + 17);
        nn::UNetConfig ucfg;
        ucfg.bounded_mask = bounded;
        nn::ArtifactUNet unet(ucfg, init_rng);
        phase1_distill(unet, oracle, cfg);

        Rng cnn_rng(cfg.seed + 29);
        nn::SegmentCnn cnn(nn::CnnConfig{}, cnn_rng);
        train_cnn_head(unet, cnn, labeled_set, cfg, pcfg);
        phase2_steer(unet, cnn, labeled_set, cfg, pcfg);

        double mask_sum = 0.0;
        double energy_in = 0.0, energy_res = 0.0;
        for (const auto& ex : labeled_set) {
            const spectral::Stft s = spectral::stft(ex.samples, pcfg.stft, pcfg.sample_rate);
            const Tensor x = pipeline::mag_to_tensor(s.magnitude);
            const Tensor r = unet.forward_residual(x);
            mask_sum += unet.last_mask_mean();
            for (std::size_t i = 0; i < x.data.size(); ++i) energy_in += x.data[i] * x.data[i];
            for (std::size_t i = 0; i < r.data.size(); ++i) energy_res += r.data[i] * r.data[i];
        }
        const double mask_mean = mask_sum / static_cast<double>(labeled_set.size());
        const double frac = energy_in > 0.0 ? energy_res / energy_in : 0.0;
        if (bounded) {
            report.bounded_mask_mean = mask_mean;
            report.bounded_energy_fraction = frac;
        } else {
            report.unbounded_mask_mean = mask_mean;
            report.unbounded_energy_fraction = frac;
        }
    }
    return report;
}

}  // namespace artifactnet::training
