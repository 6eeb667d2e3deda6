#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace artifactnet::audio {

inline constexpr int kPipelineRate = 44100;
inline constexpr double kSegmentSeconds = 4.0;
inline constexpr std::size_t kSegmentSamples = 176400;  // 4 s at 44.1 kHz

// Decoded audio. Channels are interleaved until normalize() downmixes.
// After normalize(): mono, 44100 Hz, every sample in [-1, 1].
struct Waveform {
    std::vector<double> samples;
    int sample_rate = 0;
    int channels = 1;
    std::string source_path;

    double duration_seconds() const {
        return channels > 0 && sample_rate > 0
                   ? static_cast<double>(samples.size() / channels) / sample_rate
                   : 0.0;
    }
};

// Consecutive non-overlapping 4-second windows of one track, tail dropped.
struct SegmentSet {
    std::vector<std::vector<double>> segments;
    std::string track_id;
};

// Reads a RIFF/WAVE file with PCM 16/24/32-bit or 32-bit float payload.
// No clipping or rate conversion is applied here.
Waveform decode_wav(const std::string& path);

// Downmix to mono (channel mean), resample to 44.1 kHz with a windowed-sinc
// polyphase kernel, then clip to [-1, 1]. Idempotent.
Waveform normalize(const Waveform& w);

// Splits a normalized waveform into floor(duration / seg_seconds) windows.
SegmentSet segment(const Waveform& w, double seg_seconds = kSegmentSeconds);

// Writes mono or interleaved audio. format: 1 = PCM (bits 16/24/32),
// 3 = IEEE float 32. Used by tests and the codec workdir plumbing.
void write_wav(const std::string& path, const std::vector<double>& samples,
               int sample_rate, int channels = 1, int format = 3, int bits = 32);

// Rational polyphase resampler, windowed-sinc kernel (>= 64 taps).
std::vector<double> resample(const std::vector<double>& mono, int src_rate, int dst_rate);

}  // namespace artifactnet::audio
