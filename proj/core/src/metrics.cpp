#include "facetemb/metrics.hpp"

#include "facetemb/errors.hpp"

namespace facetemb {

Prf prf_from_counts(long tp, long fp, long fn) {
    Prf out;
    out.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    out.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    out.f1 = out.precision + out.recall > 0.0
                 ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
                 : 0.0;
    return out;
}

Prf eval_f1(const EncoderParams& params, const std::vector<LabeledPair>& test, LossMode mode,
            double threshold) {
    if (test.empty()) throw InvalidArgument("eval_f1: empty test set");
    long tp = 0, fp = 0, fn = 0;
    for (const LabeledPair& lp : test) {
        bool predicted = predict(params, lp.concept_id, lp.property_id, mode) > threshold;
        if (predicted && lp.label) ++tp;
        else if (predicted && !lp.label) ++fp;
        else if (!predicted && lp.label) ++fn;
    }
    return prf_from_counts(tp, fp, fn);
}

}  // namespace facetemb
