#include "artifactnet/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "artifactnet/errors.hpp"

namespace artifactnet::spectral {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Reflect-pad (librosa style, edge not repeated) used by the centered STFT.
std::vector<double> reflect_pad(const std::vector<double>& x, int pad) {
    const long long n = static_cast<long long>(x.size());
    std::vector<double> out(x.size() + 2 * pad);
    for (long long i = 0; i < static_cast<long long>(out.size()); ++i) {
        long long j = i - pad;
        while (j < 0 || j >= n) {
            if (j < 0) j = -j;
            if (j >= n) j = 2 * (n - 1) - j;
        }
        out[i] = x[j];
    }
    return out;
}

int frame_count(std::size_t len, const StftConfig& cfg) {
    return 1 + static_cast<int>(len / cfg.hop);
}

}  // namespace

void fft(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n <= 1) return;
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * kPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse) {
        const double inv_n = 1.0 / static_cast<double>(n);
        for (auto& v : a) v *= inv_n;
    }
}

std::vector<std::complex<double>> rfft(const std::vector<double>& x) {
    const int n = static_cast<int>(x.size());
    std::vector<std::complex<double>> buf(x.begin(), x.end());
    fft(buf, false);
    buf.resize(n / 2 + 1);
    return buf;
}

std::vector<double> irfft(const std::vector<std::complex<double>>& half, int n) {
    std::vector<std::complex<double>> full(n);
    for (int k = 0; k <= n / 2; ++k) full[k] = half[k];
    for (int k = 1; k < n / 2; ++k) full[n - k] = std::conj(half[k]);
    fft(full, true);
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = full[i].real();
    return out;
}

std::vector<double> hann_window(int n) {
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * i / n));
    return w;
}

Stft stft(const std::vector<double>& samples, const StftConfig& cfg, int sample_rate) {
    if (!is_pow2(cfg.n_fft)) throw ConfigError("n_fft must be a power of two");
    if (cfg.hop <= 0 || cfg.hop > cfg.n_fft) throw ConfigError("hop must be in (0, n_fft]");
    if (samples.size() < static_cast<std::size_t>(cfg.n_fft)) {
        throw TooShortError("stft needs at least n_fft=" + std::to_string(cfg.n_fft) +
                            " samples, got " + std::to_string(samples.size()));
    }

    const int frames = frame_count(samples.size(), cfg);
    const int bins = cfg.n_fft / 2 + 1;
    const std::vector<double> padded = reflect_pad(samples, cfg.n_fft / 2);
    const std::vector<double> win = hann_window(cfg.n_fft);

    Stft out;
    out.magnitude.frames = frames;
    out.magnitude.bins = bins;
    out.magnitude.config = cfg;
    out.magnitude.sample_rate = sample_rate;
    out.magnitude.values.resize(static_cast<std::size_t>(frames) * bins);
    out.phase.frames = frames;
    out.phase.bins = bins;
    out.phase.values.resize(static_cast<std::size_t>(frames) * bins);

    std::vector<double> frame(cfg.n_fft);
    for (int f = 0; f < frames; ++f) {
        const std::size_t start = static_cast<std::size_t>(f) * cfg.hop;
        for (int i = 0; i < cfg.n_fft; ++i) frame[i] = padded[start + i] * win[i];
        const auto spec = rfft(frame);
        for (int b = 0; b < bins; ++b) {
            out.magnitude.at(f, b) = std::abs(spec[b]);
            out.phase.values[static_cast<std::size_t>(f) * bins + b] = std::arg(spec[b]);
        }
    }
    return out;
}

std::vector<double> istft(const MagnitudeSpectrogram& mag, const PhaseSpectrogram& phase,
                          std::size_t out_len) {
    const StftConfig& cfg = mag.config;
    const int n = cfg.n_fft;
    const int bins = mag.bins;
    const std::vector<double> win = hann_window(n);

    const std::size_t padded_len = static_cast<std::size_t>(mag.frames - 1) * cfg.hop + n;
    std::vector<double> acc(padded_len, 0.0);
    std::vector<double> wsum(padded_len, 0.0);

    std::vector<std::complex<double>> spec(bins);
    for (int f = 0; f < mag.frames; ++f) {
        for (int b = 0; b < bins; ++b) {
            const double m = mag.at(f, b);
            const double p = phase.values[static_cast<std::size_t>(f) * bins + b];
            spec[b] = std::polar(m, p);
        }
        const std::vector<double> frame = irfft(spec, n);
        const std::size_t start = static_cast<std::size_t>(f) * cfg.hop;
        for (int i = 0; i < n; ++i) {
            acc[start + i] += frame[i] * win[i];
            wsum[start + i] += win[i] * win[i];
        }
    }

    std::vector<double> out(out_len, 0.0);
    const std::size_t lead = static_cast<std::size_t>(n / 2);
    for (std::size_t t = 0; t < out_len && lead + t < padded_len; ++t) {
        const double d = wsum[lead + t];
        out[t] = d > 1e-12 ? acc[lead + t] / d : 0.0;
    }
    return out;
}

std::vector<double> istft_adjoint_magnitude(const std::vector<double>& grad_time,
                                            const PhaseSpectrogram& phase, const StftConfig& cfg,
                                            int frames) {
    const int n = cfg.n_fft;
    const int bins = n / 2 + 1;
    const std::vector<double> win = hann_window(n);

    const std::size_t padded_len = static_cast<std::size_t>(frames - 1) * cfg.hop + n;
    std::vector<double> wsum(padded_len, 0.0);
    for (int f = 0; f < frames; ++f) {
        const std::size_t start = static_cast<std::size_t>(f) * cfg.hop;
        for (int i = 0; i < n; ++i) wsum[start + i] += win[i] * win[i];
    }

    // spread the output gradient into padded coordinates, through the WOLA division
    std::vector<double> gpad(padded_len, 0.0);
    const std::size_t lead = static_cast<std::size_t>(n / 2);
    for (std::size_t t = 0; t < grad_time.size() && lead + t < padded_len; ++t) {
        const double d = wsum[lead + t];
        if (d > 1e-12) gpad[lead + t] = grad_time[t] / d;
    }

    std::vector<double> grad_mag(static_cast<std::size_t>(frames) * bins, 0.0);
    std::vector<double> gframe(n);
    for (int f = 0; f < frames; ++f) {
        const std::size_t start = static_cast<std::size_t>(f) * cfg.hop;
        for (int i = 0; i < n; ++i) gframe[i] = gpad[start + i] * win[i];
        // adjoint of irfft: dL/dC_k = (c_k / n) * rfft(g)[k], c = 1 at DC/Nyquist else 2
        const auto g_spec = rfft(gframe);
        for (int b = 0; b < bins; ++b) {
            const double c = (b == 0 || b == n / 2) ? 1.0 : 2.0;
            const double g_re = c / n * g_spec[b].real();
            const double g_im = c / n * g_spec[b].imag();
            const double p = phase.values[static_cast<std::size_t>(f) * bins + b];
            grad_mag[static_cast<std::size_t>(f) * bins + b] = g_re * std::cos(p) + g_im * std::sin(p);
        }
    }
    return grad_mag;
}

namespace {

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

}  // namespace

std::vector<double> mel_filterbank(int n_mels, int bins, int sample_rate, int n_fft) {
    const double fmax = sample_rate / 2.0;
    const double mel_max = hz_to_mel(fmax);
    std::vector<double> corners(n_mels + 2);
    for (int i = 0; i < n_mels + 2; ++i) corners[i] = mel_to_hz(mel_max * i / (n_mels + 1));

    std::vector<double> fb(static_cast<std::size_t>(n_mels) * bins, 0.0);
    for (int m = 0; m < n_mels; ++m) {
        const double lo = corners[m], mid = corners[m + 1], hi = corners[m + 2];
        for (int b = 0; b < bins; ++b) {
            const double f = static_cast<double>(b) * sample_rate / n_fft;
            const double rise = (f - lo) / (mid - lo);
            const double fall = (hi - f) / (hi - mid);
            fb[static_cast<std::size_t>(m) * bins + b] = std::max(0.0, std::min(rise, fall));
        }
    }
    return fb;
}

MelSpectrogram mel_project(const MagnitudeSpectrogram& mag, int n_mels) {
    if (n_mels > mag.bins) {
        throw ConfigError("n_mels=" + std::to_string(n_mels) + " exceeds " +
                          std::to_string(mag.bins) + " frequency bins");
    }
    const auto fb = mel_filterbank(n_mels, mag.bins, mag.sample_rate, mag.config.n_fft);

    MelSpectrogram out;
    out.frames = mag.frames;
    out.n_mels = n_mels;
    out.values.resize(static_cast<std::size_t>(mag.frames) * n_mels);
    for (int f = 0; f < mag.frames; ++f) {
        for (int m = 0; m < n_mels; ++m) {
            double s = 0.0;
            for (int b = 0; b < mag.bins; ++b) s += fb[static_cast<std::size_t>(m) * mag.bins + b] * mag.at(f, b);
            out.at(f, m) = std::log(s + kLogEps);
        }
    }
    return out;
}

std::vector<double> mel_project_backward(const MagnitudeSpectrogram& mag,
                                         const std::vector<double>& grad_mel, int n_mels) {
    const auto fb = mel_filterbank(n_mels, mag.bins, mag.sample_rate, mag.config.n_fft);
    std::vector<double> grad_mag(mag.values.size(), 0.0);
    for (int f = 0; f < mag.frames; ++f) {
        for (int m = 0; m < n_mels; ++m) {
            double s = 0.0;
            for (int b = 0; b < mag.bins; ++b) s += fb[static_cast<std::size_t>(m) * mag.bins + b] * mag.at(f, b);
            const double g = grad_mel[static_cast<std::size_t>(f) * n_mels + m] / (s + kLogEps);
            for (int b = 0; b < mag.bins; ++b) {
                grad_mag[static_cast<std::size_t>(f) * mag.bins + b] +=
                    fb[static_cast<std::size_t>(m) * mag.bins + b] * g;
            }
        }
    }
    return grad_mag;
}

namespace {

const int kLossResolutions[3] = {512, 1024, 2048};

struct ResTerms {
    double sc = 0.0;
    double log_l1 = 0.0;
};

// Spectral convergence, symmetrized so loss(a, b) == loss(b, a) exactly.
ResTerms resolution_terms(const MagnitudeSpectrogram& ma, const MagnitudeSpectrogram& mb) {
    double dn2 = 0.0, sa2 = 0.0, sb2 = 0.0, log_l1 = 0.0;
    const std::size_t cells = ma.values.size();
    for (std::size_t i = 0; i < cells; ++i) {
        const double d = ma.values[i] - mb.values[i];
        dn2 += d * d;
        sa2 += ma.values[i] * ma.values[i];
        sb2 += mb.values[i] * mb.values[i];
        log_l1 += std::abs(std::log(ma.values[i] + kLogEps) - std::log(mb.values[i] + kLogEps));
    }
    ResTerms t;
    const double denom = std::sqrt(sa2) + std::sqrt(sb2);
    t.sc = denom > 0.0 ? 2.0 * std::sqrt(dn2) / denom : 0.0;
    t.log_l1 = log_l1 / static_cast<double>(cells);
    return t;
}

}  // namespace

namespace {

double multires_loss_impl(const std::vector<double>& a, const std::vector<double>& b,
                          std::vector<double>* grad_a) {
    if (a.size() != b.size()) {
        throw ShapeError("multires_stft_loss: length mismatch " + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()));
    }
    if (a.empty()) throw ShapeError("multires_stft_loss: empty input");

    const bool want_grad = grad_a != nullptr;
    if (want_grad) grad_a->assign(a.size(), 0.0);

    double loss = 0.0;
    // time-domain L1
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        loss += std::abs(d);
        if (want_grad)
            (*grad_a)[i] += (d > 0.0 ? 1.0 : d < 0.0 ? -1.0 : 0.0) / static_cast<double>(a.size());
    }
    loss /= static_cast<double>(a.size());

    for (int n_fft : kLossResolutions) {
        if (a.size() < static_cast<std::size_t>(n_fft)) continue;  // resolution longer than signal
        StftConfig cfg{n_fft, n_fft / 4};
        const Stft sa = stft(a, cfg);
        const Stft sb = stft(b, cfg);
        const ResTerms t = resolution_terms(sa.magnitude, sb.magnitude);
        loss += t.sc + t.log_l1;

        if (!want_grad) continue;
        const std::size_t cells = sa.magnitude.values.size();
        double dn2 = 0.0, sa2 = 0.0, sb2 = 0.0;
        for (std::size_t i = 0; i < cells; ++i) {
            const double d = sa.magnitude.values[i] - sb.magnitude.values[i];
            dn2 += d * d;
            sa2 += sa.magnitude.values[i] * sa.magnitude.values[i];
            sb2 += sb.magnitude.values[i] * sb.magnitude.values[i];
        }
        const double dn = std::sqrt(dn2);
        const double na = std::sqrt(sa2);
        const double nb = std::sqrt(sb2);
        const double denom = na + nb;

        // d(loss)/d(|A|) for both terms at this resolution
        std::vector<double> gmag(cells, 0.0);
        for (std::size_t i = 0; i < cells; ++i) {
            const double ma = sa.magnitude.values[i];
            const double mb = sb.magnitude.values[i];
            double g = 0.0;
            if (denom > 0.0 && dn > 0.0) {
                g += 2.0 * ((ma - mb) / dn / denom);
                if (na > 0.0) g -= 2.0 * dn / (denom * denom) * (ma / na);
            }
            const double ld = std::log(ma + kLogEps) - std::log(mb + kLogEps);
            g += (ld > 0.0 ? 1.0 : ld < 0.0 ? -1.0 : 0.0) / (ma + kLogEps) / static_cast<double>(cells);
            gmag[i] = g;
        }

        // through |A| and the windowed frames back to the time signal
        const int bins = sa.magnitude.bins;
        const std::vector<double> win = hann_window(n_fft);
        const int pad = n_fft / 2;
        const long long n_sig = static_cast<long long>(a.size());
        std::vector<std::complex<double>> gfull(n_fft);
        for (int f = 0; f < sa.magnitude.frames; ++f) {
            std::fill(gfull.begin(), gfull.end(), std::complex<double>(0.0, 0.0));
            for (int b = 0; b < bins; ++b) {
                const double m = sa.magnitude.at(f, b);
                const double g = gmag[static_cast<std::size_t>(f) * bins + b];
                if (g == 0.0) continue;
                const double p = sa.phase.values[static_cast<std::size_t>(f) * bins + b];
                // d|A|/dA is the unit phase; zero magnitude gets zero subgradient
                if (m > 0.0) gfull[b] = std::polar(g, p);
            }
            // g_time[n] = Re( sum_k G_k e^{+i w k n} ), stored bins only
            fft(gfull, true);
            const std::size_t start = static_cast<std::size_t>(f) * cfg.hop;
            for (int i = 0; i < n_fft; ++i) {
                const double gt = gfull[i].real() * n_fft * win[i];
                if (gt == 0.0) continue;
                // adjoint of the reflect padding
                long long j = static_cast<long long>(start) + i - pad;
                while (j < 0 || j >= n_sig) {
                    if (j < 0) j = -j;
                    if (j >= n_sig) j = 2 * (n_sig - 1) - j;
                }
                (*grad_a)[j] += gt;
            }
        }
    }
    return loss;
}

}  // namespace

double multires_stft_loss(const std::vector<double>& a, const std::vector<double>& b) {
    return multires_loss_impl(a, b, nullptr);
}

double multires_stft_loss_grad(const std::vector<double>& a, const std::vector<double>& b,
                               std::vector<double>& grad_a) {
    return multires_loss_impl(a, b, &grad_a);
}

}  // namespace artifactnet::spectral
