#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "artifactnet/audio_io.hpp"
#include "artifactnet/bench.hpp"
#include "artifactnet/util/rng.hpp"

namespace artifactnet::codecs {

// Closed set of codec variants the harness knows about.
const std::vector<std::string>& known_variants();

struct CodecVariant {
    std::string name;              // one of known_variants()
    std::string command_template;  // encoder invocation with {in}/{out}
};

// Encoder command templates. Defaults target ffmpeg; a JSON file
// {"variant": "cmd {in} {out}", ...} overrides them. ARTIFACT_ENCODER_DIR,
// when set, is prepended to PATH for the spawned command.
std::map<std::string, std::string> default_encoder_templates();
std::map<std::string, std::string> load_encoder_templates(const std::string& path);

// Throws ConfigError for names outside the closed set or missing templates.
CodecVariant make_variant(const std::string& name,
                          const std::map<std::string, std::string>& templates);

// Encode track -> {workdir}/{variant}/{track_id}.wav via the external tool,
// decode the result and normalize it. Exit 127 raises EnvError (tool not
// found); any other nonzero exit raises EncoderError with the captured
// output.
audio::Waveform encode_variant(const std::string& track_path, const CodecVariant& variant,
                               const std::string& workdir, const std::string& track_id);

// In-process stand-in used by toy training and CI paths without encoders:
// brick-wall high-band attenuation plus quantization dither.
std::vector<double> simulate_codec(const std::vector<double>& samples, const std::string& variant,
                                   Rng& rng);

// Per-class spread of mean probability across codecs. Lists must be aligned
// by track (same order, same length per codec).
double cross_codec_delta(const std::map<std::string, std::vector<double>>& probs_by_codec);

struct CodecSweepRow {
    std::string variant;
    double tpr = 0.0;
    double fpr = 0.0;
    double delta_tpr_vs_wav = 0.0;  // percentage points
    double mean_prob_ai = 0.0;
    double mean_prob_real = 0.0;
    long n_ok = 0;
    long n_failed = 0;
};

struct CodecSweepReport {
    std::vector<CodecSweepRow> rows;  // one per variant, in request order
    double delta_real = 0.0;
    double delta_ai = 0.0;
    // per-variant prediction records; failed tracks carry non-ok status and
    // feed the missing-prediction accounting
    std::map<std::string, std::vector<bench::PredictionRecord>> predictions;
    bool degenerate = false;  // all probabilities identical (stub encoder etc.)
};

// segment_scorer maps a decoded+normalized waveform to per-segment
// probabilities. Encoder/decode failures are recorded per track, not fatal.
CodecSweepReport codec_sweep(
    const std::function<std::vector<double>(const audio::Waveform&)>& segment_scorer,
    const std::vector<bench::ManifestEntry>& manifest, const std::vector<CodecVariant>& variants,
    const std::string& workdir, double tau = bench::kDefaultTau, int workers = 1);

std::string codec_sweep_csv(const CodecSweepReport& report);

}  // namespace artifactnet::codecs
