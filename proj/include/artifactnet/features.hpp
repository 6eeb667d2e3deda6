#pragma once

#include <array>
#include <string>
#include <vector>

#include "artifactnet/spectral.hpp"

namespace artifactnet::features {

// Soft-mask partition of a magnitude spectrogram: H + P == input, entrywise.
struct HpssResult {
    spectral::MagnitudeSpectrogram harmonic;
    spectral::MagnitudeSpectrogram percussive;
};

struct HpssConfig {
    int kernel_t = 17;  // median length along time, odd
    int kernel_f = 17;  // median length along frequency, odd
};

// Channel order of the 7-channel forensic stack.
enum Channel : int {
    kMelRes = 0,
    kMelH = 1,
    kMelP = 2,
    kDelta = 3,
    kDelta2 = 4,
    kHpRatio = 5,
    kSpectralFlux = 6,
};
inline constexpr int kNumChannels = 7;

// 7 x n_mels x frames stack for one segment. Row-major [channel][mel][frame].
struct FeatureTensor {
    std::vector<double> data;
    int n_mels = 0;
    int frames = 0;
    std::string segment_id;

    double& at(int ch, int mel, int frame) {
        return data[(static_cast<std::size_t>(ch) * n_mels + mel) * frames + frame];
    }
    double at(int ch, int mel, int frame) const {
        return data[(static_cast<std::size_t>(ch) * n_mels + mel) * frames + frame];
    }
    std::size_t size() const { return data.size(); }
};

inline constexpr int kDescriptorSize = 103;
inline constexpr int kDescriptorBands = 8;
inline constexpr const char* kDescriptorLayoutVersion = "d103-1";

struct Descriptor103 {
    std::array<double, kDescriptorSize> values{};
};

// Median-filter HPSS with power-2 Wiener masks. kernels must be odd and >= 3.
HpssResult hpss_decompose(const spectral::MagnitudeSpectrogram& mag, int kernel_t = 17,
                          int kernel_f = 17);

// Builds the 7-channel stack from a residual magnitude spectrogram.
// Needs at least 3 frames (second difference).
FeatureTensor compute_channels(const spectral::MagnitudeSpectrogram& residual_mag,
                               int n_mels = spectral::kDefaultMels,
                               const HpssConfig& hpss = HpssConfig{});

// Track-level 103-entry offline descriptor:
//   7 channel means | 7 channel stddevs |
//   8 log-spaced bands (20 Hz..Nyquist) x {mean, std, max, skew, kurtosis,
//     flux-mean, flux-std, peak-frame-fraction} of per-frame band energy |
//   8 per-band log(H/P) energy ratios | 8 per-band H shares |
//   7 per-channel lag-1 autocorrelations | 2 global flux stats.
Descriptor103 descriptor_103(const FeatureTensor& track_channels,
                             const spectral::MagnitudeSpectrogram& residual_mag,
                             const HpssConfig& hpss = HpssConfig{});

// Log-spaced band edges in Hz: kDescriptorBands+1 values from 20 Hz to Nyquist.
std::vector<double> descriptor_band_edges(int sample_rate);

// Binary feature dump, one record per segment: "ANF1", then per record
// u32 channels, u32 n_mels, u32 frames, f32 payload. Little-endian.
void write_feature_dump(const std::string& path, const std::vector<FeatureTensor>& segments);
std::vector<FeatureTensor> read_feature_dump(const std::string& path);

}  // namespace artifactnet::features
