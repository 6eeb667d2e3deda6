#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace artifactnet::spectral {

struct StftConfig {
    int n_fft = 2048;
    int hop = 512;
    // window is Hann (periodic); fixed by the front-end contract
};

// Frames x (n_fft/2 + 1) non-negative magnitudes. Stored row-major by frame.
struct MagnitudeSpectrogram {
    std::vector<double> values;
    int frames = 0;
    int bins = 0;
    StftConfig config;
    int sample_rate = 44100;

    double& at(int frame, int bin) { return values[static_cast<std::size_t>(frame) * bins + bin]; }
    double at(int frame, int bin) const { return values[static_cast<std::size_t>(frame) * bins + bin]; }
};

// Phases matching a MagnitudeSpectrogram, retained for reconstruction.
struct PhaseSpectrogram {
    std::vector<double> values;
    int frames = 0;
    int bins = 0;
};

struct Stft {
    MagnitudeSpectrogram magnitude;
    PhaseSpectrogram phase;
};

// Frames x n_mels, log-compressed: log(mel + kLogEps).
struct MelSpectrogram {
    std::vector<double> values;
    int frames = 0;
    int n_mels = 0;

    double& at(int frame, int mel) { return values[static_cast<std::size_t>(frame) * n_mels + mel]; }
    double at(int frame, int mel) const { return values[static_cast<std::size_t>(frame) * n_mels + mel]; }
};

inline constexpr double kLogEps = 1e-6;
inline constexpr int kDefaultMels = 128;

// Radix-2 complex FFT, in place. n must be a power of two.
void fft(std::vector<std::complex<double>>& a, bool inverse);

// Real-input helpers over the half spectrum (n/2 + 1 bins).
std::vector<std::complex<double>> rfft(const std::vector<double>& x);
std::vector<double> irfft(const std::vector<std::complex<double>>& half, int n);

// Periodic Hann window of length n.
std::vector<double> hann_window(int n);

// Centered (reflect-padded) Hann STFT. Throws TooShortError when
// samples.size() < n_fft.
Stft stft(const std::vector<double>& samples, const StftConfig& cfg, int sample_rate = 44100);

// Weighted overlap-add inverse of stft(); output trimmed to out_len samples.
std::vector<double> istft(const MagnitudeSpectrogram& mag, const PhaseSpectrogram& phase,
                          std::size_t out_len);

// Adjoint of istft() with the phase held fixed: maps a gradient w.r.t. the
// time signal back to a gradient w.r.t. the magnitude cells.
std::vector<double> istft_adjoint_magnitude(const std::vector<double>& grad_time,
                                            const PhaseSpectrogram& phase, const StftConfig& cfg,
                                            int frames);

// Triangular HTK-mel filterbank, n_mels x bins, row-major. 0 Hz .. Nyquist.
std::vector<double> mel_filterbank(int n_mels, int bins, int sample_rate, int n_fft);

// log(F * mag + eps) per frame; throws ConfigError when n_mels > bins.
MelSpectrogram mel_project(const MagnitudeSpectrogram& mag, int n_mels = kDefaultMels);

// Gradient of mel_project w.r.t. the magnitude cells given the gradient
// w.r.t. the log-mel cells. filterbank must match the forward call.
std::vector<double> mel_project_backward(const MagnitudeSpectrogram& mag,
                                         const std::vector<double>& grad_mel, int n_mels);

// Sum over n_fft in {512, 1024, 2048} (hop = n_fft/4) of a symmetric
// spectral-convergence term plus a log-magnitude L1 term, plus one
// time-domain L1 term. Zero iff the inputs are spectrally identical.
double multires_stft_loss(const std::vector<double>& a, const std::vector<double>& b);

// Same value, plus d(loss)/d(a).
double multires_stft_loss_grad(const std::vector<double>& a, const std::vector<double>& b,
                               std::vector<double>& grad_a);

}  // namespace artifactnet::spectral
