#include "artifactnet/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "artifactnet/util/rng.hpp"

namespace artifactnet::nn {

GradCheckReport grad_check(const std::function<double(bool)>& loss,
                           const std::vector<ParamRef>& params, const GradCheckOptions& opt) {
    for (const auto& p : params) p.grad->zero();
    loss(true);
    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (const auto& p : params) analytic.push_back(p.grad->data);

    Rng rng(opt.seed);
    GradCheckReport report;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        const auto& p = params[pi];
        GradCheckEntry entry;
        entry.param = p.name;

        const std::size_t n = p.value->data.size();
        std::vector<std::size_t> idx;
        if (n <= static_cast<std::size_t>(opt.samples_per_param)) {
            for (std::size_t i = 0; i < n; ++i) idx.push_back(i);
        } else {
            for (int k = 0; k < opt.samples_per_param; ++k) idx.push_back(rng.below(n));
        }

        for (std::size_t i : idx) {
            const double orig = p.value->data[i];
            p.value->data[i] = orig + opt.step;
            const double up = loss(false);
            p.value->data[i] = orig - opt.step;
            const double down = loss(false);
            p.value->data[i] = orig;

            const double numeric = (up - down) / (2.0 * opt.step);
            const double a = analytic[pi][i];
            const double rel = std::abs(a - numeric) / std::max(std::abs(a) + std::abs(numeric), 1e-6);
            entry.max_rel_err = std::max(entry.max_rel_err, rel);
        }
        entry.flagged = entry.max_rel_err > opt.tolerance;
        report.worst = std::max(report.worst, entry.max_rel_err);
        if (entry.flagged) report.all_ok = false;
        report.entries.push_back(std::move(entry));
    }
    return report;
}

}  // namespace artifactnet::nn
