#include "artifactnet/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "artifactnet/errors.hpp"

namespace artifactnet::bandwidth {

BandwidthResult effective_bandwidth(const spectral::MagnitudeSpectrogram& residual) {
    const int bins = residual.bins;
    const int frames = residual.frames;
    std::vector<double> energy(bins, 0.0);
    for (int f = 0; f < frames; ++f) {
        for (int b = 0; b < bins; ++b) {
            const double v = residual.at(f, b);
            energy[b] += v * v;
        }
    }
    for (double& e : energy) e /= frames;

    double total = 0.0;
    for (double e : energy) total += e;
    if (total <= 0.0) throw UndefinedBandwidthError("all-zero residual has no effective bandwidth");

    const double target = kEnergyFraction * total;
    const double bin_hz = static_cast<double>(residual.sample_rate) / residual.config.n_fft;

    double cum = 0.0;
    BandwidthResult out;
    for (int b = 0; b < bins; ++b) {
        const double prev = cum;
        cum += energy[b];
        if (cum > target) {
            // linear interpolation across the crossing bin [b*hz, (b+1)*hz)
            const double frac_in_bin = energy[b] > 0.0 ? (target - prev) / energy[b] : 0.0;
            out.f_star = std::min((b + frac_in_bin) * bin_hz,
                                  residual.sample_rate / 2.0);
            out.cumulative_fraction = cum / total;
            return out;
        }
    }
    out.f_star = residual.sample_rate / 2.0;
    out.cumulative_fraction = 1.0;
    return out;
}

BandwidthResult effective_bandwidth(const std::vector<double>& residual_samples, int sample_rate) {
    const spectral::Stft s = spectral::stft(residual_samples, spectral::StftConfig{}, sample_rate);
    return effective_bandwidth(s.magnitude);
}

BandwidthReport bandwidth_report(const std::vector<BandwidthResult>& results) {
    std::map<std::string, std::pair<double, int>> groups;
    BandwidthReport report;
    for (const auto& r : results) {
        auto& g = groups[r.group];
        g.first += r.f_star;
        g.second += 1;
        if (r.group == "human") {
            report.human_average += r.f_star;
            report.human_count += 1;
            if (r.f_star < kHumanConfoundHz) {
                report.warnings.push_back("human track '" + r.track_id + "' has f*=" +
                                          std::to_string(r.f_star) +
                                          " Hz; possible low-pass/mastering confound");
            }
        } else {
            report.ai_average += r.f_star;
            report.ai_count += 1;
        }
    }
    for (const auto& [name, acc] : groups) {
        if (acc.second == 0) {
            report.warnings.push_back("group '" + name + "' is empty; omitted");
            continue;
        }
        if (name == "human") continue;  // reported as the aggregate human row
        report.rows.push_back({name, acc.first / acc.second, acc.second});
    }
    if (report.ai_count > 0) report.ai_average /= report.ai_count;
    if (report.human_count > 0) report.human_average /= report.human_count;
    return report;
}

std::string bandwidth_report_csv(const BandwidthReport& report) {
    std::ostringstream out;
    out << "group,mean_f_star_hz,count\n";
    for (const auto& row : report.rows) {
        out << row.group << "," << row.mean_f_star << "," << row.count << "\n";
    }
    if (report.ai_count > 0) out << "AI avg," << report.ai_average << "," << report.ai_count << "\n";
    if (report.human_count > 0)
        out << "human," << report.human_average << "," << report.human_count << "\n";
    return out.str();
}

}  // namespace artifactnet::bandwidth
