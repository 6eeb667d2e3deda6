#include "artifactnet/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "artifactnet/errors.hpp"

namespace artifactnet::features {

using spectral::MagnitudeSpectrogram;

namespace {

// Median of a window centered at each position, reflect-padded at the ends.
void median_filter_1d(const double* in, double* out, int n, int stride, int kernel,
                      std::vector<double>& scratch) {
    const int half = kernel / 2;
    scratch.resize(kernel);
    for (int i = 0; i < n; ++i) {
        for (int k = -half; k <= half; ++k) {
            long long j = i + k;
            while (j < 0 || j >= n) {
                if (j < 0) j = -j;
                if (j >= n) j = 2 * (static_cast<long long>(n) - 1) - j;
            }
            scratch[k + half] = in[j * stride];
        }
        std::nth_element(scratch.begin(), scratch.begin() + half, scratch.end());
        out[static_cast<long long>(i) * stride] = scratch[half];
    }
}

}  // namespace

HpssResult hpss_decompose(const MagnitudeSpectrogram& mag, int kernel_t, int kernel_f) {
    if (kernel_t < 3 || kernel_t % 2 == 0 || kernel_f < 3 || kernel_f % 2 == 0) {
        throw ConfigError("hpss kernels must be odd and >= 3 (got " + std::to_string(kernel_t) +
                          "x" + std::to_string(kernel_f) + ")");
    }

    const int frames = mag.frames;
    const int bins = mag.bins;
    std::vector<double> h_enh(mag.values.size());
    std::vector<double> p_enh(mag.values.size());
    std::vector<double> scratch;

    // harmonic enhancement: median along time for each frequency row
    for (int b = 0; b < bins; ++b) {
        median_filter_1d(mag.values.data() + b, h_enh.data() + b, frames, bins, kernel_t, scratch);
    }
    // percussive enhancement: median along frequency for each frame
    for (int f = 0; f < frames; ++f) {
        median_filter_1d(mag.values.data() + static_cast<std::size_t>(f) * bins,
                         p_enh.data() + static_cast<std::size_t>(f) * bins, bins, 1, kernel_f,
                         scratch);
    }

    HpssResult out;
    out.harmonic = mag;
    out.percussive = mag;
    for (std::size_t i = 0; i < mag.values.size(); ++i) {
        const double h2 = h_enh[i] * h_enh[i];
        const double p2 = p_enh[i] * p_enh[i];
        const double denom = h2 + p2;
        // power-2 Wiener mask; the even split at 0/0 keeps scale equivariance exact
        const double mask_h = denom > 0.0 ? h2 / denom : 0.5;
        out.harmonic.values[i] = mask_h * mag.values[i];
        out.percussive.values[i] = mag.values[i] - out.harmonic.values[i];
    }
    return out;
}

FeatureTensor compute_channels(const MagnitudeSpectrogram& residual_mag, int n_mels,
                               const HpssConfig& hpss) {
    if (residual_mag.frames < 3) {
        throw TooShortError("compute_channels needs >= 3 frames, got " +
                            std::to_string(residual_mag.frames));
    }

    const HpssResult hp = hpss_decompose(residual_mag, hpss.kernel_t, hpss.kernel_f);
    const spectral::MelSpectrogram mel_res = spectral::mel_project(residual_mag, n_mels);
    const spectral::MelSpectrogram mel_h = spectral::mel_project(hp.harmonic, n_mels);
    const spectral::MelSpectrogram mel_p = spectral::mel_project(hp.percussive, n_mels);

    const int frames = residual_mag.frames;
    FeatureTensor t;
    t.n_mels = n_mels;
    t.frames = frames;
    t.data.assign(static_cast<std::size_t>(kNumChannels) * n_mels * frames, 0.0);

    for (int m = 0; m < n_mels; ++m) {
        for (int f = 0; f < frames; ++f) {
            t.at(kMelRes, m, f) = mel_res.at(f, m);
            t.at(kMelH, m, f) = mel_h.at(f, m);
            t.at(kMelP, m, f) = mel_p.at(f, m);
        }
    }

    // first/second temporal differences of mel_res, zero at the left boundary
    for (int m = 0; m < n_mels; ++m) {
        for (int f = 1; f < frames; ++f) {
            t.at(kDelta, m, f) = t.at(kMelRes, m, f) - t.at(kMelRes, m, f - 1);
        }
        for (int f = 1; f < frames; ++f) {
            t.at(kDelta2, m, f) = t.at(kDelta, m, f) - t.at(kDelta, m, f - 1);
        }
    }

    // per-frame scalars broadcast across the mel axis
    for (int f = 0; f < frames; ++f) {
        double sum_h = 0.0, sum_p = 0.0;
        for (int b = 0; b < residual_mag.bins; ++b) {
            sum_h += hp.harmonic.at(f, b);
            sum_p += hp.percussive.at(f, b);
        }
        const double ratio = std::log((sum_h + spectral::kLogEps) / (sum_p + spectral::kLogEps));

        double flux = 0.0;
        if (f > 0) {
            for (int m = 0; m < n_mels; ++m) {
                const double d = mel_res.at(f, m) - mel_res.at(f - 1, m);
                if (d > 0.0) flux += d * d;
            }
            flux = std::sqrt(flux);
        }
        for (int m = 0; m < n_mels; ++m) {
            t.at(kHpRatio, m, f) = ratio;
            t.at(kSpectralFlux, m, f) = flux;
        }
    }
    return t;
}

std::vector<double> descriptor_band_edges(int sample_rate) {
    const double lo = 20.0;
    const double hi = sample_rate / 2.0;
    std::vector<double> edges(kDescriptorBands + 1);
    for (int i = 0; i <= kDescriptorBands; ++i) {
        edges[i] = lo * std::pow(hi / lo, static_cast<double>(i) / kDescriptorBands);
    }
    return edges;
}

namespace {

struct Moments {
    double mean = 0.0, stddev = 0.0, skew = 0.0, kurt = 0.0;
};

Moments moments(const std::vector<double>& xs) {
    Moments m;
    if (xs.empty()) return m;
    const double n = static_cast<double>(xs.size());
    for (double x : xs) m.mean += x;
    m.mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d = x - m.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    m.stddev = std::sqrt(m2);
    if (m2 > 0.0) {
        m.skew = m3 / std::pow(m2, 1.5);
        m.kurt = m4 / (m2 * m2);
    }
    return m;
}

double lag1_autocorr(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double var = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double d = xs[i] - mean;
        var += d * d;
        if (i + 1 < xs.size()) cov += d * (xs[i + 1] - mean);
    }
    return var > 0.0 ? cov / var : 0.0;
}

}  // namespace

Descriptor103 descriptor_103(const FeatureTensor& t, const MagnitudeSpectrogram& residual_mag,
                             const HpssConfig& hpss) {
    if (t.frames < 1 || t.n_mels < 1) throw ShapeError("descriptor_103: empty feature tensor");
    if (residual_mag.frames < 1) throw ShapeError("descriptor_103: empty residual magnitude");

    Descriptor103 d;
    int idx = 0;

    // 7 channel means + 7 channel stddevs
    const std::size_t per_ch = static_cast<std::size_t>(t.n_mels) * t.frames;
    std::array<double, kNumChannels> ch_mean{};
    for (int c = 0; c < kNumChannels; ++c) {
        double s = 0.0;
        for (std::size_t i = 0; i < per_ch; ++i) s += t.data[c * per_ch + i];
        ch_mean[c] = s / static_cast<double>(per_ch);
        d.values[idx++] = ch_mean[c];
    }
    for (int c = 0; c < kNumChannels; ++c) {
        double s2 = 0.0;
        for (std::size_t i = 0; i < per_ch; ++i) {
            const double dd = t.data[c * per_ch + i] - ch_mean[c];
            s2 += dd * dd;
        }
        d.values[idx++] = std::sqrt(s2 / static_cast<double>(per_ch));
    }

    // per-band residual energy trajectories
    const auto edges = descriptor_band_edges(residual_mag.sample_rate);
    const int frames = residual_mag.frames;
    std::vector<std::vector<double>> band_energy(kDescriptorBands,
                                                 std::vector<double>(frames, 0.0));
    for (int f = 0; f < frames; ++f) {
        for (int b = 0; b < residual_mag.bins; ++b) {
            const double freq =
                static_cast<double>(b) * residual_mag.sample_rate / residual_mag.config.n_fft;
            int band = -1;
            for (int k = 0; k < kDescriptorBands; ++k) {
                if (freq >= edges[k] && freq < edges[k + 1]) {
                    band = k;
                    break;
                }
            }
            if (freq >= edges[kDescriptorBands]) band = kDescriptorBands - 1;
            if (band < 0) continue;  // below 20 Hz
            const double v = residual_mag.at(f, b);
            band_energy[band][f] += v * v;
        }
    }

    // 8 bands x {mean, std, max, skew, kurtosis, flux-mean, flux-std, peak-frame-fraction}
    for (int k = 0; k < kDescriptorBands; ++k) {
        const auto& e = band_energy[k];
        const Moments m = moments(e);
        d.values[idx++] = m.mean;
        d.values[idx++] = m.stddev;
        d.values[idx++] = *std::max_element(e.begin(), e.end());
        d.values[idx++] = m.skew;
        d.values[idx++] = m.kurt;
        std::vector<double> flux(frames, 0.0);
        for (int f = 1; f < frames; ++f) flux[f] = std::max(0.0, e[f] - e[f - 1]);
        const Moments mf = moments(flux);
        d.values[idx++] = mf.mean;
        d.values[idx++] = mf.stddev;
        int peak_count = 0;
        for (int f = 0; f < frames; ++f) {
            int argmax = 0;
            for (int kk = 1; kk < kDescriptorBands; ++kk) {
                if (band_energy[kk][f] > band_energy[argmax][f]) argmax = kk;
            }
            if (argmax == k) ++peak_count;
        }
        d.values[idx++] = static_cast<double>(peak_count) / frames;
    }

    // HPSS summaries on the residual
    const HpssResult hp = hpss_decompose(residual_mag, hpss.kernel_t, hpss.kernel_f);
    std::array<double, kDescriptorBands> h_band{}, p_band{};
    for (int f = 0; f < frames; ++f) {
        for (int b = 0; b < residual_mag.bins; ++b) {
            const double freq =
                static_cast<double>(b) * residual_mag.sample_rate / residual_mag.config.n_fft;
            int band = -1;
            for (int k = 0; k < kDescriptorBands; ++k) {
                if (freq >= edges[k] && freq < edges[k + 1]) {
                    band = k;
                    break;
                }
            }
            if (freq >= edges[kDescriptorBands]) band = kDescriptorBands - 1;
            if (band < 0) continue;
            const double hv = hp.harmonic.at(f, b);
            const double pv = hp.percussive.at(f, b);
            h_band[band] += hv * hv;
            p_band[band] += pv * pv;
        }
    }
    // 8 per-band log(H/P) energy ratios
    for (int k = 0; k < kDescriptorBands; ++k) {
        d.values[idx++] =
            std::log((h_band[k] + spectral::kLogEps) / (p_band[k] + spectral::kLogEps));
    }
    // 8 per-band H shares
    for (int k = 0; k < kDescriptorBands; ++k) {
        const double denom = h_band[k] + p_band[k];
        d.values[idx++] = denom > 0.0 ? h_band[k] / denom : 0.5;
    }

    // 7 per-channel lag-1 autocorrelations of the frame-mean trajectory
    for (int c = 0; c < kNumChannels; ++c) {
        std::vector<double> traj(t.frames, 0.0);
        for (int f = 0; f < t.frames; ++f) {
            double s = 0.0;
            for (int m = 0; m < t.n_mels; ++m) s += t.at(c, m, f);
            traj[f] = s / t.n_mels;
        }
        d.values[idx++] = lag1_autocorr(traj);
    }

    // 2 global flux stats: mean/std of the per-frame spectral_flux scalar
    {
        std::vector<double> flux(t.frames, 0.0);
        for (int f = 0; f < t.frames; ++f) flux[f] = t.at(kSpectralFlux, 0, f);
        const Moments m = moments(flux);
        d.values[idx++] = m.mean;
        d.values[idx++] = m.stddev;
    }

    if (idx != kDescriptorSize) throw ShapeError("descriptor_103 layout bug: " + std::to_string(idx));
    return d;
}

void write_feature_dump(const std::string& path, const std::vector<FeatureTensor>& segments) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write("ANF1", 4);
    for (const auto& t : segments) {
        const std::uint32_t hdr[3] = {static_cast<std::uint32_t>(kNumChannels),
                                      static_cast<std::uint32_t>(t.n_mels),
                                      static_cast<std::uint32_t>(t.frames)};
        out.write(reinterpret_cast<const char*>(hdr), sizeof(hdr));
        for (double v : t.data) {
            const float f = static_cast<float>(v);
            out.write(reinterpret_cast<const char*>(&f), 4);
        }
    }
    if (!out) throw IoError("short write: " + path);
}

std::vector<FeatureTensor> read_feature_dump(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open feature dump: " + path);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "ANF1", 4) != 0) {
        throw FormatError("bad feature dump magic in " + path);
    }
    std::vector<FeatureTensor> out;
    while (true) {
        std::uint32_t hdr[3];
        if (!in.read(reinterpret_cast<char*>(hdr), sizeof(hdr))) break;
        if (hdr[0] != kNumChannels || hdr[1] == 0 || hdr[2] == 0 || hdr[1] > 1u << 20 ||
            hdr[2] > 1u << 20) {
            throw CorruptionError("implausible feature record header in " + path);
        }
        FeatureTensor t;
        t.n_mels = static_cast<int>(hdr[1]);
        t.frames = static_cast<int>(hdr[2]);
        t.data.resize(static_cast<std::size_t>(kNumChannels) * t.n_mels * t.frames);
        for (double& v : t.data) {
            float f;
            if (!in.read(reinterpret_cast<char*>(&f), 4)) {
                throw CorruptionError("truncated feature record in " + path);
            }
            v = static_cast<double>(f);
        }
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace artifactnet::features
