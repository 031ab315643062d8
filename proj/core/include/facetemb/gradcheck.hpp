#pragma once

#include <string>
#include <vector>

#include "facetemb/objectives.hpp"

namespace facetemb {

struct GradCheckEntry {
    std::string block;
    std::size_t index = 0;
    double analytic = 0.0;
    double finite_diff = 0.0;
    double rel_err = 0.0;
};

/// Compares the analytic gradient against central finite differences of the
/// corresponding loss, sampling samples_per_block coordinates from every
/// parameter block. rel_err = |analytic - fd| / (|analytic| + 1e-8).
std::vector<GradCheckEntry> finite_difference_check(const EncoderParams& params, const CpBatch& cp,
                                                    const PfBatch& pf, const LossConfig& cfg,
                                                    int samples_per_block, double step, Rng& rng,
                                                    bool baseline_mode = false);

}  // namespace facetemb
