#pragma once

#include <vector>

#include "facetemb/corpus.hpp"
#include "facetemb/training.hpp"

namespace facetemb {

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Zero-division convention: any undefined ratio is 0.
Prf prf_from_counts(long tp, long fp, long fn);

/// F1 of the positive class; a pair is predicted positive when its score is
/// strictly above the threshold.
Prf eval_f1(const EncoderParams& params, const std::vector<LabeledPair>& test, LossMode mode,
            double threshold = 0.5);

}  // namespace facetemb
