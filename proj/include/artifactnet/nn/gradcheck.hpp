#pragma once

#include <functional>
#include <string>
#include <vector>

#include "artifactnet/nn/tensor.hpp"

namespace artifactnet::nn {

struct GradCheckOptions {
    double step = 1e-5;        // central-difference step
    int samples_per_param = 8;  // random entries probed per parameter tensor
    double tolerance = 1e-4;
    std::uint64_t seed = 1;
};

struct GradCheckEntry {
    std::string param;
    double max_rel_err = 0.0;
    bool flagged = false;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    double worst = 0.0;
    bool all_ok = true;
};

// Compares analytic gradients against central finite differences on a
// random subsample of each parameter tensor. loss(true) must run forward
// and backward, leaving gradients in the ParamRefs; loss(false) must only
// evaluate the scalar. Report-only: never throws on a mismatch.
GradCheckReport grad_check(const std::function<double(bool with_grad)>& loss,
                           const std::vector<ParamRef>& params,
                           const GradCheckOptions& opt = GradCheckOptions{});

}  // namespace artifactnet::nn
