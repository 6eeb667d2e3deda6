#pragma once

#include <map>
#include <string>
#include <vector>

#include "artifactnet/features.hpp"
#include "artifactnet/nn/cnn.hpp"
#include "artifactnet/nn/unet.hpp"
#include "artifactnet/pipeline.hpp"
#include "artifactnet/spectral.hpp"
#include "artifactnet/util/rng.hpp"

namespace artifactnet::training {

struct TrainConfig {
    double learning_rate = 0.05;
    int steps = 200;
    int batch_size = 4;
    std::uint64_t seed = 0;
    int phase = 1;
    double momentum = 0.9;  // 0 gives plain SGD
};

// Momentum SGD; learning_rate 0 is the identity on weights.
class SgdOptimizer {
public:
    SgdOptimizer(double learning_rate, double momentum) : lr_(learning_rate), momentum_(momentum) {}
    void step(const std::vector<nn::ParamRef>& params);

private:
    double lr_;
    double momentum_;
    std::map<std::string, std::vector<double>> velocity_;
};

// One synthetic distillation pair: a mixture track and the ground-truth
// artifact residual the mask should recover.
struct OraclePair {
    std::vector<double> mixture;
    spectral::Stft mixture_stft;
    spectral::MagnitudeSpectrogram residual_mag;   // |STFT(artifact)|
    std::vector<double> residual_recon;            // istft(residual_mag, mixture phase)
};

// Stand-in for the separation teacher: seeded synthetic mixtures with a
// band-limited artifact of known energy (fraction <= 25% of the mixture,
// compatible with the mask bound). artifact_gain 0 produces clean pairs.
class TeacherOracle {
public:
    TeacherOracle(std::uint64_t seed, int n_pairs, int n_samples,
                  const pipeline::Config& cfg = toy_pipeline(), double artifact_gain = 1.0);

    const std::vector<OraclePair>& pairs() const { return pairs_; }
    const pipeline::Config& config() const { return cfg_; }

    static pipeline::Config toy_pipeline();

private:
    pipeline::Config cfg_;
    std::vector<OraclePair> pairs_;
};

struct LabeledExample {
    std::vector<double> samples;
    int label = 0;  // 1 = ai
};

// Balanced toy classification set: real = clean mixtures, ai = clean plus a
// mid/high-band artifact that survives the simulated codec cutoffs.
std::vector<LabeledExample> make_toy_labeled_set(int n, std::uint64_t seed, int n_samples,
                                                 const pipeline::Config& cfg,
                                                 double artifact_gain = 1.0);

struct Phase1Result {
    std::vector<double> loss_curve;  // one entry per step
};

// Knowledge distillation against the oracle: L1 on residual magnitudes plus
// the multi-resolution STFT loss on phase-informed reconstructions. Throws
// DivergenceError when the loss exceeds 10x its initial value for 20
// consecutive steps.
Phase1Result phase1_distill(nn::ArtifactUNet& unet, const TeacherOracle& oracle,
                            const TrainConfig& cfg);

struct Phase2Result {
    std::vector<double> bce_curve;
};

// Frozen-classifier steering: BCE gradients flow through the classifier and
// the differentiable mel path of the feature stack into the UNet only. The
// CNN (parameters and BN statistics) is byte-compared before/after; any
// delta raises FrozenViolationError.
Phase2Result phase2_steer(nn::ArtifactUNet& unet, nn::SegmentCnn& frozen_cnn,
                          const std::vector<LabeledExample>& labeled_set, const TrainConfig& cfg,
                          const pipeline::Config& pcfg);

// Codec bank: per labeled example, one waveform per codec variant.
struct CodecBank {
    std::vector<std::string> variants;
    // items[i][variant] aligns with the labeled set by index
    std::vector<std::map<std::string, std::vector<double>>> items;
};

// Simulated 4-way bank (WAV/MP3/AAC/Opus stand-ins), deterministic in seed.
CodecBank build_simulated_bank(const std::vector<LabeledExample>& labeled_set,
                               std::uint64_t seed,
                               const std::vector<std::string>& variants = {
                                   "wav", "mp3-128", "aac-128", "opus-128"});

// Identity bank: all variants byte-equal to the source (no codec signal).
CodecBank build_identity_bank(const std::vector<LabeledExample>& labeled_set,
                              const std::vector<std::string>& variants = {
                                  "wav", "mp3-128", "aac-128", "opus-128"});

struct Phase3Result {
    std::vector<double> bce_curve;
    double delta_real_before = 0.0, delta_ai_before = 0.0;
    double delta_real_after = 0.0, delta_ai_after = 0.0;

    double delta_before() const { return 0.5 * (delta_real_before + delta_ai_before); }
    double delta_after() const { return 0.5 * (delta_real_after + delta_ai_after); }
};

// Codec-aware steering: every batch carries all bank variants of each
// sampled track (batch_size tracks -> batch_size * variants items per
// step). Reports cross-codec deltas on the held-out set before and after.
// A bank item missing a variant raises IncompleteBankError.
Phase3Result phase3_codec_aware(nn::ArtifactUNet& unet, nn::SegmentCnn& frozen_cnn,
                                const std::vector<LabeledExample>& labeled_set,
                                const CodecBank& bank, const TrainConfig& cfg,
                                const pipeline::Config& pcfg,
                                const std::vector<LabeledExample>& heldout,
                                const CodecBank& heldout_bank);

// Cross-codec deltas of the current model on a labeled set + bank.
std::pair<double, double> eval_cross_codec_delta(nn::ArtifactUNet& unet, nn::SegmentCnn& cnn,
                                                 const std::vector<LabeledExample>& labeled_set,
                                                 const CodecBank& bank,
                                                 const pipeline::Config& pcfg);

// Classifier head fitting (UNet held fixed). Not one of the three phases;
// it provides the frozen CNN that phases 2 and 3 steer against.
std::vector<double> train_cnn_head(nn::ArtifactUNet& unet, nn::SegmentCnn& cnn,
                                   const std::vector<LabeledExample>& labeled_set,
                                   const TrainConfig& cfg, const pipeline::Config& pcfg);

// Per-cell channel means over a feature set, the Appendix-style
// zero-information substitute.
struct ChannelMeans {
    std::vector<double> maps;  // same layout as FeatureTensor.data
    int n_mels = 0;
    int frames = 0;
};

ChannelMeans compute_channel_means(const std::vector<features::FeatureTensor>& train_features);

struct AblationResult {
    int channel = -1;
    double f1_baseline = 0.0;
    double f1_ablated = 0.0;
    double delta_f1 = 0.0;  // ablated minus baseline
};

// Replaces one channel with its training-set mean map at evaluation time
// and reports the F1 delta. channel_index must be 0..6.
AblationResult ablate_channel(nn::SegmentCnn& cnn,
                              const std::vector<features::FeatureTensor>& eval_features,
                              const std::vector<int>& eval_labels, int channel_index,
                              const ChannelMeans& means, double tau = 0.5);

struct UnboundedAblationReport {
    double bounded_mask_mean = 0.0;
    double unbounded_mask_mean = 0.0;
    double bounded_energy_fraction = 0.0;    // residual energy / input energy
    double unbounded_energy_fraction = 0.0;
};

// Trains a bounded and an unbounded mask variant through phases 1-2 on the
// toy task and compares mask statistics.
UnboundedAblationReport unbounded_mask_ablation(const TeacherOracle& oracle,
                                                const std::vector<LabeledExample>& labeled_set,
                                                const TrainConfig& cfg);

// Stable binary cross-entropy on a logit; grad is sigmoid(z) - y.
double bce_with_logit(double logit, double target, double& grad);

}  // namespace artifactnet::training
