#pragma once

#include <map>
#include <string>
#include <vector>

#include "artifactnet/spectral.hpp"

namespace artifactnet::bandwidth {

// Cumulative-energy bandwidth of one residual: f_star is the smallest
// frequency below which at least 95% of the spectral energy lies.
struct BandwidthResult {
    double f_star = 0.0;
    double cumulative_fraction = 0.0;  // fraction at f_star, >= 0.95
    std::string track_id;
    std::string group;  // generator name or "human"
};

inline constexpr double kEnergyFraction = 0.95;
// Human residuals in the reference pool never converge below this point;
// a lower reading flags a likely low-pass or mastering confound.
inline constexpr double kHumanConfoundHz = 800.0;

// Frame-averaged magnitude-energy spectrum, cumulative threshold with
// linear interpolation inside the crossing bin. Throws
// UndefinedBandwidthError on an all-zero input.
BandwidthResult effective_bandwidth(const spectral::MagnitudeSpectrogram& residual);

// Convenience: STFT (2048/512) of a residual waveform, then as above.
BandwidthResult effective_bandwidth(const std::vector<double>& residual_samples,
                                    int sample_rate = 44100);

struct BandwidthGroupRow {
    std::string group;
    double mean_f_star = 0.0;
    int count = 0;
};

struct BandwidthReport {
    std::vector<BandwidthGroupRow> rows;  // per-generator rows, sorted by group
    double ai_average = 0.0;              // mean over all non-human results
    int ai_count = 0;
    double human_average = 0.0;
    int human_count = 0;
    std::vector<std::string> warnings;  // confound flags
};

// Per-group mean f_star plus AI-average and human rows.
BandwidthReport bandwidth_report(const std::vector<BandwidthResult>& results);

std::string bandwidth_report_csv(const BandwidthReport& report);

}  // namespace artifactnet::bandwidth
