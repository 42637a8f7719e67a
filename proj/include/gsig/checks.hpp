#pragma once

#include "gsig/trainer.hpp"

#include <string>
#include <vector>

namespace gsig {

/// Finite-difference check of model_backward under the sample's loss, for
/// every trainable tensor. `corrupt` is added to the first analytic entry of
/// the first tensor (negative control).
GradCheckReport model_grad_check(const GSignatureModel& model, const Sample& sample, double eps, double corrupt = 0.0);

/// Small model plus a matching random sample for gradient checks.
struct GradCheckCase {
    std::string label;
    GSignatureModel model;
    Sample sample;
};

/// One case per head and activation: h1 = h2 = 6, k = 5, p = 2, L = 2.
std::vector<GradCheckCase> default_grad_check_cases(std::uint64_t seed);

struct CheckLine {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Signature self-checks: term counts, 1-d closed form, Chen consistency,
/// lead-lag moments and a linear readout of the reference reservoir.
std::vector<CheckLine> signature_checks(std::uint64_t seed);

} // namespace gsig
