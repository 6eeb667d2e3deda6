#include "artifactnet/pipeline.hpp"

namespace artifactnet::pipeline {

nn::Tensor mag_to_tensor(const spectral::MagnitudeSpectrogram& mag) {
    nn::Tensor t(1, 1, mag.bins, mag.frames);
    for (int f = 0; f < mag.frames; ++f)
        for (int b = 0; b < mag.bins; ++b) t.at(0, 0, b, f) = mag.at(f, b);
    return t;
}

spectral::MagnitudeSpectrogram tensor_to_mag(const nn::Tensor& t,
                                             const spectral::MagnitudeSpectrogram& like) {
    spectral::MagnitudeSpectrogram out = like;
    for (int f = 0; f < out.frames; ++f)
        for (int b = 0; b < out.bins; ++b) out.at(f, b) = t.at(0, 0, b, f);
    return out;
}

spectral::MagnitudeSpectrogram segment_residual(nn::ArtifactUNet& unet,
                                                const std::vector<double>& segment,
                                                const Config& cfg) {
    const spectral::Stft s = spectral::stft(segment, cfg.stft, cfg.sample_rate);
    return unet.forward(s.magnitude);
}

features::FeatureTensor segment_features(nn::ArtifactUNet& unet,
                                         const std::vector<double>& segment, const Config& cfg) {
    return features::compute_channels(segment_residual(unet, segment, cfg), cfg.n_mels, cfg.hpss);
}

std::vector<double> track_segment_probs(nn::ArtifactUNet& unet, nn::SegmentCnn& cnn,
                                        const audio::Waveform& normalized, const Config& cfg) {
    const audio::SegmentSet segs = audio::segment(normalized);
    std::vector<double> probs;
    probs.reserve(segs.segments.size());
    for (const auto& seg : segs.segments) {
        const features::FeatureTensor f = segment_features(unet, seg, cfg);
        probs.push_back(nn::cnn_forward(f, cnn));
    }
    return probs;
}

}  // namespace artifactnet::pipeline
