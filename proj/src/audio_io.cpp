#include "artifactnet/audio_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "artifactnet/errors.hpp"

namespace artifactnet::audio {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint32_t read_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16le(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

struct FmtChunk {
    std::uint16_t format = 0;
    std::uint16_t channels = 0;
    std::uint32_t sample_rate = 0;
    std::uint16_t bits = 0;
};

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

Waveform decode_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open wav file: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());

    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw FormatError("not a RIFF/WAVE file: " + path);
    }

    FmtChunk fmt;
    bool have_fmt = false;
    const unsigned char* data_ptr = nullptr;
    std::size_t data_len = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        char id[5] = {0};
        std::memcpy(id, bytes.data() + pos, 4);
        const std::uint32_t chunk_len = read_u32le(bytes.data() + pos + 4);
        pos += 8;
        if (pos + chunk_len > bytes.size()) throw FormatError("truncated chunk '" + std::string(id) + "' in " + path);
        if (std::strcmp(id, "fmt ") == 0) {
            if (chunk_len < 16) throw FormatError("fmt chunk too small in " + path);
            const unsigned char* p = bytes.data() + pos;
            fmt.format = read_u16le(p);
            fmt.channels = read_u16le(p + 2);
            fmt.sample_rate = read_u32le(p + 4);
            fmt.bits = read_u16le(p + 14);
            if (fmt.format == kFormatExtensible) {
                if (chunk_len < 40) throw FormatError("extensible fmt chunk too small in " + path);
                fmt.format = read_u16le(p + 24);  // first 2 bytes of the SubFormat GUID
            }
            have_fmt = true;
        } else if (std::strcmp(id, "data") == 0) {
            data_ptr = bytes.data() + pos;
            data_len = chunk_len;
        }
        pos += chunk_len + (chunk_len & 1);  // chunks are word-aligned
    }

    if (!have_fmt || data_ptr == nullptr) throw FormatError("missing fmt/data chunk in " + path);
    if (fmt.channels == 0 || fmt.sample_rate == 0) throw FormatError("bad fmt fields in " + path);

    const bool pcm_ok = fmt.format == kFormatPcm && (fmt.bits == 16 || fmt.bits == 24 || fmt.bits == 32);
    const bool float_ok = fmt.format == kFormatFloat && fmt.bits == 32;
    if (!pcm_ok && !float_ok) {
        throw UnsupportedCodecError("unsupported wav encoding (format=" + std::to_string(fmt.format) +
                                    ", bits=" + std::to_string(fmt.bits) + ") in " + path);
    }

    const std::size_t bytes_per_sample = fmt.bits / 8;
    const std::size_t n = data_len / bytes_per_sample;

    Waveform w;
    w.sample_rate = static_cast<int>(fmt.sample_rate);
    w.channels = fmt.channels;
    w.source_path = path;
    w.samples.resize(n);

    const unsigned char* p = data_ptr;
    if (fmt.format == kFormatFloat) {
        for (std::size_t i = 0; i < n; ++i, p += 4) {
            float v;
            std::memcpy(&v, p, 4);
            w.samples[i] = static_cast<double>(v);
        }
    } else if (fmt.bits == 16) {
        for (std::size_t i = 0; i < n; ++i, p += 2) {
            const std::int16_t v = static_cast<std::int16_t>(p[0] | (p[1] << 8));
            w.samples[i] = static_cast<double>(v) / 32768.0;
        }
    } else if (fmt.bits == 24) {
        for (std::size_t i = 0; i < n; ++i, p += 3) {
            std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
            if (v & 0x800000) v |= ~0xFFFFFF;  // sign-extend
            w.samples[i] = static_cast<double>(v) / 8388608.0;
        }
    } else {  // 32-bit PCM
        for (std::size_t i = 0; i < n; ++i, p += 4) {
            std::int32_t v;
            std::memcpy(&v, p, 4);
            w.samples[i] = static_cast<double>(v) / 2147483648.0;
        }
    }
    return w;
}

std::vector<double> resample(const std::vector<double>& mono, int src_rate, int dst_rate) {
    if (src_rate == dst_rate) return mono;
    if (mono.empty()) return {};

    const long long g = std::gcd(static_cast<long long>(src_rate), static_cast<long long>(dst_rate));
    const long long up = dst_rate / g;    // L
    const long long down = src_rate / g;  // M

    // Kernel half-width in input samples: 32 taps per side at the output
    // rate, stretched when downsampling so the anti-alias cutoff holds.
    const double stretch = std::max(1.0, static_cast<double>(down) / static_cast<double>(up));
    const double cutoff = 0.92 / stretch;  // fraction of input Nyquist, small rolloff margin
    const int half = static_cast<int>(std::ceil(32.0 * stretch));

    const std::size_t n_in = mono.size();
    const std::size_t n_out = static_cast<std::size_t>((n_in - 1) * up / down) + 1;
    std::vector<double> out(n_out);

    for (std::size_t i = 0; i < n_out; ++i) {
        const long long num = static_cast<long long>(i) * down;
        const long long base = num / up;
        const double frac = static_cast<double>(num % up) / static_cast<double>(up);

        double acc = 0.0;
        double norm = 0.0;
        for (int k = -half + 1; k <= half; ++k) {
            const double t = static_cast<double>(k) - frac;
            const double x = kPi * cutoff * t;
            const double sinc = x == 0.0 ? 1.0 : std::sin(x) / x;
            // Blackman window over [-half, half]
            const double u = (t / half + 1.0) * 0.5;
            if (u < 0.0 || u > 1.0) continue;
            const double win = 0.42 - 0.5 * std::cos(2.0 * kPi * u) + 0.08 * std::cos(4.0 * kPi * u);
            const double h = sinc * win;
            const long long j = base + k;
            norm += h;
            if (j >= 0 && j < static_cast<long long>(n_in)) acc += h * mono[j];
        }
        out[i] = norm != 0.0 ? acc / norm : 0.0;  // per-phase DC normalization
    }
    return out;
}

Waveform normalize(const Waveform& w) {
    if (w.samples.empty()) throw EmptyInputError("cannot normalize empty waveform: " + w.source_path);
    if (w.channels < 1) throw FormatError("waveform has no channels: " + w.source_path);

    std::vector<double> mono;
    if (w.channels == 1) {
        mono = w.samples;
    } else {
        const std::size_t frames = w.samples.size() / w.channels;
        mono.resize(frames);
        for (std::size_t i = 0; i < frames; ++i) {
            double acc = 0.0;
            for (int c = 0; c < w.channels; ++c) acc += w.samples[i * w.channels + c];
            mono[i] = acc / w.channels;
        }
    }

    if (w.sample_rate != kPipelineRate) mono = resample(mono, w.sample_rate, kPipelineRate);

    for (double& s : mono) s = std::clamp(s, -1.0, 1.0);

    Waveform out;
    out.samples = std::move(mono);
    out.sample_rate = kPipelineRate;
    out.channels = 1;
    out.source_path = w.source_path;
    return out;
}

SegmentSet segment(const Waveform& w, double seg_seconds) {
    const std::size_t seg_len = static_cast<std::size_t>(std::llround(seg_seconds * w.sample_rate));
    if (seg_len == 0) throw ConfigError("segment length must be positive");
    if (w.samples.size() < seg_len) {
        throw TooShortError("track too short to segment: " + std::to_string(w.duration_seconds()) +
                            " s < " + std::to_string(seg_seconds) + " s (" + w.source_path + ")");
    }
    SegmentSet set;
    set.track_id = w.source_path;
    const std::size_t count = w.samples.size() / seg_len;
    set.segments.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        set.segments.emplace_back(w.samples.begin() + i * seg_len,
                                  w.samples.begin() + (i + 1) * seg_len);
    }
    return set;
}

void write_wav(const std::string& path, const std::vector<double>& samples,
               int sample_rate, int channels, int format, int bits) {
    if (format == kFormatFloat) bits = 32;
    if (format != kFormatPcm && format != kFormatFloat) throw ConfigError("write_wav: format must be 1 or 3");
    if (bits != 16 && bits != 24 && bits != 32) throw ConfigError("write_wav: bits must be 16/24/32");

    const std::uint32_t bytes_per = bits / 8;
    const std::uint32_t data_len = static_cast<std::uint32_t>(samples.size() * bytes_per);
    const std::uint32_t block_align = bytes_per * channels;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);

    auto put_u32 = [&](std::uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
        out.write(reinterpret_cast<char*>(b), 4);
    };
    auto put_u16 = [&](std::uint16_t v) {
        unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
        out.write(reinterpret_cast<char*>(b), 2);
    };

    out.write("RIFF", 4);
    put_u32(36 + data_len);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    put_u32(16);
    put_u16(static_cast<std::uint16_t>(format));
    put_u16(static_cast<std::uint16_t>(channels));
    put_u32(static_cast<std::uint32_t>(sample_rate));
    put_u32(static_cast<std::uint32_t>(sample_rate) * block_align);
    put_u16(static_cast<std::uint16_t>(block_align));
    put_u16(static_cast<std::uint16_t>(bits));
    out.write("data", 4);
    put_u32(data_len);

    for (double s : samples) {
        if (format == kFormatFloat) {
            const float v = static_cast<float>(s);
            out.write(reinterpret_cast<const char*>(&v), 4);
        } else if (bits == 16) {
            const double c = std::clamp(s, -1.0, 1.0);
            const std::int16_t v = static_cast<std::int16_t>(std::lrint(c * 32767.0));
            put_u16(static_cast<std::uint16_t>(v));
        } else if (bits == 24) {
            const double c = std::clamp(s, -1.0, 1.0);
            const std::int32_t v = static_cast<std::int32_t>(std::lrint(c * 8388607.0));
            unsigned char b[3] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                  static_cast<unsigned char>(v >> 16)};
            out.write(reinterpret_cast<char*>(b), 3);
        } else {
            const double c = std::clamp(s, -1.0, 1.0);
            const std::int32_t v = static_cast<std::int32_t>(std::lrint(c * 2147483647.0));
            put_u32(static_cast<std::uint32_t>(v));
        }
    }
    if (!out) throw IoError("short write: " + path);
}

}  // namespace artifactnet::audio
