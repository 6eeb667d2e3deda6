#pragma once

#include <vector>

#include "artifactnet/audio_io.hpp"
#include "artifactnet/features.hpp"
#include "artifactnet/nn/cnn.hpp"
#include "artifactnet/nn/unet.hpp"
#include "artifactnet/spectral.hpp"

namespace artifactnet::pipeline {

// Front-end settings shared by inference and the training phases. The
// defaults are the production geometry; tests shrink them.
struct Config {
    spectral::StftConfig stft{2048, 512};
    int n_mels = spectral::kDefaultMels;
    features::HpssConfig hpss{};
    int sample_rate = audio::kPipelineRate;
};

// (frames x bins) spectrogram <-> (1, 1, bins, frames) network tensor.
nn::Tensor mag_to_tensor(const spectral::MagnitudeSpectrogram& mag);
spectral::MagnitudeSpectrogram tensor_to_mag(const nn::Tensor& t,
                                             const spectral::MagnitudeSpectrogram& like);

// STFT -> UNet residual -> 7-channel stack for one segment.
features::FeatureTensor segment_features(nn::ArtifactUNet& unet,
                                         const std::vector<double>& segment, const Config& cfg);

// Residual magnitude for one segment (bandwidth / descriptor inputs).
spectral::MagnitudeSpectrogram segment_residual(nn::ArtifactUNet& unet,
                                                const std::vector<double>& segment,
                                                const Config& cfg);

// Per-segment P(AI) for a normalized waveform (segments per audio::segment).
std::vector<double> track_segment_probs(nn::ArtifactUNet& unet, nn::SegmentCnn& cnn,
                                        const audio::Waveform& normalized, const Config& cfg);

}  // namespace artifactnet::pipeline
