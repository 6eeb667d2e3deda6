#include "artifactnet/codecs.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "artifactnet/errors.hpp"
#include "artifactnet/spectral.hpp"
#include "artifactnet/util/parallel.hpp"

namespace artifactnet::codecs {

namespace fs = std::filesystem;

const std::vector<std::string>& known_variants() {
    static const std::vector<std::string> v = {"wav",      "mp3-128",  "mp3-320",
                                               "aac-128",  "opus-128", "opus-192"};
    return v;
}

std::map<std::string, std::string> default_encoder_templates() {
    // encode to the target codec and immediately decode back to wav
    return {
        {"wav", "cp {in} {out}"},
        {"mp3-128", "ffmpeg -loglevel error -y -i {in} -codec:a libmp3lame -b:a 128k -f mp3 - | "
                    "ffmpeg -loglevel error -y -f mp3 -i - {out}"},
        {"mp3-320", "ffmpeg -loglevel error -y -i {in} -codec:a libmp3lame -b:a 320k -f mp3 - | "
                    "ffmpeg -loglevel error -y -f mp3 -i - {out}"},
        {"aac-128", "ffmpeg -loglevel error -y -i {in} -codec:a aac -b:a 128k -f adts - | "
                    "ffmpeg -loglevel error -y -f aac -i - {out}"},
        {"opus-128", "ffmpeg -loglevel error -y -i {in} -codec:a libopus -b:a 128k -f opus - | "
                     "ffmpeg -loglevel error -y -f opus -i - {out}"},
        {"opus-192", "ffmpeg -loglevel error -y -i {in} -codec:a libopus -b:a 192k -f opus - | "
                     "ffmpeg -loglevel error -y -f opus -i - {out}"},
    };
}

std::map<std::string, std::string> load_encoder_templates(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open encoder templates: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw FormatError("encoder templates " + path + ": " + e.what());
    }
    auto templates = default_encoder_templates();
    for (auto it = j.begin(); it != j.end(); ++it) {
        templates[it.key()] = it.value().get<std::string>();
    }
    return templates;
}

CodecVariant make_variant(const std::string& name,
                          const std::map<std::string, std::string>& templates) {
    const auto& known = known_variants();
    if (std::find(known.begin(), known.end(), name) == known.end()) {
        throw ConfigError("unknown codec variant '" + name + "'");
    }
    const auto it = templates.find(name);
    if (it == templates.end()) throw ConfigError("no encoder template for variant '" + name + "'");
    return {name, it->second};
}

namespace {

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') {
            out += "'\\''";
        } else {
            out += c;
        }
    }
    out += "'";
    return out;
}

std::string substitute(const std::string& tmpl, const std::string& in_path,
                       const std::string& out_path) {
    std::string cmd = tmpl;
    const auto replace_all = [&cmd](const std::string& key, const std::string& value) {
        std::size_t pos = 0;
        while ((pos = cmd.find(key, pos)) != std::string::npos) {
            cmd.replace(pos, key.size(), value);
            pos += value.size();
        }
    };
    replace_all("{in}", shell_quote(in_path));
    replace_all("{out}", shell_quote(out_path));
    return cmd;
}

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run_command(const std::string& cmd) {
    std::string full = cmd + " 2>&1";
    if (const char* dir = std::getenv("ARTIFACT_ENCODER_DIR"); dir != nullptr && dir[0] != '\0') {
        full = "PATH=" + shell_quote(std::string(dir) + ":" + (std::getenv("PATH") ? std::getenv("PATH") : "")) +
               " " + full;
    }
    FILE* pipe = popen(full.c_str(), "r");
    if (!pipe) throw EnvError("cannot spawn shell for: " + cmd);
    RunResult r;
    std::array<char, 512> buf;
    while (fgets(buf.data(), static_cast<int>(buf.size()), pipe) != nullptr) r.output += buf.data();
    const int status = pclose(pipe);
    if (WIFEXITED(status)) {
        r.exit_code = WEXITSTATUS(status);
    }
    return r;
}

}  // namespace

audio::Waveform encode_variant(const std::string& track_path, const CodecVariant& variant,
                               const std::string& workdir, const std::string& track_id) {
    const fs::path dir = fs::path(workdir) / variant.name;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create workdir " + dir.string() + ": " + ec.message());
    const std::string out_path = (dir / (track_id + ".wav")).string();

    const std::string cmd = substitute(variant.command_template, track_path, out_path);
    const RunResult run = run_command(cmd);
    if (run.exit_code == 127) {
        throw EnvError("encoder tool not found for variant '" + variant.name + "': expected `" +
                       variant.command_template + "` to be runnable");
    }
    if (run.exit_code != 0) {
        throw EncoderError("encoder exited " + std::to_string(run.exit_code) + " for '" + track_id +
                           "' (" + variant.name + "): " + run.output);
    }
    return audio::normalize(audio::decode_wav(out_path));
}

std::vector<double> simulate_codec(const std::vector<double>& samples, const std::string& variant,
                                   Rng& rng) {
    // brick-wall cutoff as a fraction of Nyquist + quantization dither
    double cutoff = 1.0;
    double dither = 0.0;
    if (variant == "wav") {
        return samples;
    } else if (variant == "mp3-128") {
        cutoff = 0.62;
        dither = 3e-3;
    } else if (variant == "mp3-320") {
        cutoff = 0.85;
        dither = 8e-4;
    } else if (variant == "aac-128") {
        cutoff = 0.72;
        dither = 1.5e-3;
    } else if (variant == "opus-128") {
        cutoff = 0.82;
        dither = 8e-4;
    } else if (variant == "opus-192") {
        cutoff = 0.90;
        dither = 4e-4;
    } else {
        throw ConfigError("unknown codec variant '" + variant + "'");
    }

    // zero everything above the cutoff; length padded to a power of two
    std::size_t n = 1;
    while (n < samples.size()) n <<= 1;
    std::vector<std::complex<double>> buf(n, {0.0, 0.0});
    for (std::size_t i = 0; i < samples.size(); ++i) buf[i] = samples[i];
    spectral::fft(buf, false);
    const std::size_t lo = static_cast<std::size_t>(cutoff * (n / 2));
    for (std::size_t k = lo; k <= n - lo && k < n; ++k) buf[k] = 0.0;
    spectral::fft(buf, true);

    std::vector<double> out(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        out[i] = buf[i].real() + dither * rng.uniform(-1.0, 1.0);
    }
    return out;
}

double cross_codec_delta(const std::map<std::string, std::vector<double>>& probs_by_codec) {
    if (probs_by_codec.empty()) return 0.0;
    const std::size_t n = probs_by_codec.begin()->second.size();
    double max_mean = -1.0, min_mean = 2.0;
    for (const auto& [codec, probs] : probs_by_codec) {
        if (probs.size() != n) {
            throw AlignmentError("codec '" + codec + "' has " + std::to_string(probs.size()) +
                                 " probabilities, expected " + std::to_string(n));
        }
        if (probs.empty()) continue;
        double mean = 0.0;
        for (double p : probs) mean += p;
        mean /= static_cast<double>(probs.size());
        max_mean = std::max(max_mean, mean);
        min_mean = std::min(min_mean, mean);
    }
    return max_mean < min_mean ? 0.0 : max_mean - min_mean;
}

CodecSweepReport codec_sweep(
    const std::function<std::vector<double>(const audio::Waveform&)>& segment_scorer,
    const std::vector<bench::ManifestEntry>& manifest, const std::vector<CodecVariant>& variants,
    const std::string& workdir, double tau, int workers) {
    CodecSweepReport report;

    struct Job {
        const bench::ManifestEntry* entry;
        const CodecVariant* variant;
    };
    std::vector<Job> jobs;
    for (const auto& v : variants) {
        for (const auto& e : manifest) jobs.push_back({&e, &v});
    }
    std::vector<bench::PredictionRecord> results(jobs.size());

    run_parallel(jobs.size(), workers, [&](std::size_t i) {
        const Job& job = jobs[i];
        bench::PredictionRecord rec;
        rec.id = job.entry->id;
        try {
            const audio::Waveform w =
                encode_variant(job.entry->path, *job.variant, workdir, job.entry->id);
            rec.segment_probs = segment_scorer(w);
            rec.status = bench::PredStatus::kOk;
        } catch (const EncoderError&) {
            rec.status = bench::PredStatus::kMissing;
        } catch (const EnvError&) {
            rec.status = bench::PredStatus::kMissing;
        } catch (const Error&) {
            rec.status = bench::PredStatus::kDecodeError;
        }
        results[i] = std::move(rec);
    });

    // aggregate per variant, deterministically (jobs are variant-major)
    std::map<std::string, std::vector<double>> ai_probs, real_probs;
    double wav_tpr = 0.0;
    bool have_wav = false;
    std::vector<double> all_probs;

    std::size_t idx = 0;
    for (const auto& v : variants) {
        CodecSweepRow row;
        row.variant = v.name;
        long tp = 0, fn = 0, fp = 0, tn = 0;
        double sum_ai = 0.0, sum_real = 0.0;
        long n_ai = 0, n_real = 0;
        auto& preds = report.predictions[v.name];
        for (const auto& e : manifest) {
            bench::PredictionRecord& rec = results[idx++];
            if (rec.status == bench::PredStatus::kOk && !rec.segment_probs.empty()) {
                const auto [prob, verdict] = bench::median_verdict(rec.segment_probs, tau);
                rec.song_prob = prob;
                rec.verdict = verdict;
                all_probs.push_back(prob);
                ++row.n_ok;
                if (e.label == bench::Label::kAi) {
                    ai_probs[v.name].push_back(prob);
                    sum_ai += prob;
                    ++n_ai;
                    verdict == bench::Label::kAi ? ++tp : ++fn;
                } else {
                    real_probs[v.name].push_back(prob);
                    sum_real += prob;
                    ++n_real;
                    verdict == bench::Label::kAi ? ++fp : ++tn;
                }
            } else {
                if (rec.status == bench::PredStatus::kOk) rec.status = bench::PredStatus::kDecodeError;
                ++row.n_failed;
            }
            preds.push_back(rec);
        }
        row.tpr = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
        row.fpr = fp + tn > 0 ? static_cast<double>(fp) / (fp + tn) : 0.0;
        row.mean_prob_ai = n_ai > 0 ? sum_ai / n_ai : 0.0;
        row.mean_prob_real = n_real > 0 ? sum_real / n_real : 0.0;
        if (v.name == "wav") {
            wav_tpr = row.tpr;
            have_wav = true;
        }
        report.rows.push_back(row);
    }

    const double base_tpr = have_wav ? wav_tpr : (report.rows.empty() ? 0.0 : report.rows.front().tpr);
    for (auto& row : report.rows) row.delta_tpr_vs_wav = (row.tpr - base_tpr) * 100.0;

    // deltas need aligned track sets; skip codecs with failures
    auto aligned = [&](const std::map<std::string, std::vector<double>>& probs) {
        std::map<std::string, std::vector<double>> out;
        std::size_t expect = std::string::npos;
        for (const auto& [name, p] : probs) {
            if (expect == std::string::npos) expect = p.size();
            if (p.size() == expect) out[name] = p;
        }
        return out;
    };
    report.delta_ai = cross_codec_delta(aligned(ai_probs));
    report.delta_real = cross_codec_delta(aligned(real_probs));

    if (!all_probs.empty()) {
        const double first = all_probs.front();
        report.degenerate = std::all_of(all_probs.begin(), all_probs.end(),
                                        [&](double p) { return p == first; });
    }
    return report;
}

std::string codec_sweep_csv(const CodecSweepReport& report) {
    std::ostringstream out;
    out << "variant,tpr,fpr,delta_tpr_vs_wav_pp,mean_prob_ai,mean_prob_real,n_ok,n_failed\n";
    for (const auto& row : report.rows) {
        out << row.variant << "," << row.tpr << "," << row.fpr << "," << row.delta_tpr_vs_wav
            << "," << row.mean_prob_ai << "," << row.mean_prob_real << "," << row.n_ok << ","
            << row.n_failed << "\n";
    }
    return out.str();
}

}  // namespace artifactnet::codecs
