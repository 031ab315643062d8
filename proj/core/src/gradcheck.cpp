#include "facetemb/gradcheck.hpp"

#include <cmath>

namespace facetemb {

std::vector<GradCheckEntry> finite_difference_check(const EncoderParams& params, const CpBatch& cp,
                                                    const PfBatch& pf, const LossConfig& cfg,
                                                    int samples_per_block, double step, Rng& rng,
                                                    bool baseline_mode) {
    auto [loss, grad] = baseline_mode ? grad_baseline(params, cp) : grad_total(params, cp, pf, cfg);
    (void)loss;

    EncoderParams work = params;
    std::vector<ParamBlockRef> blocks = param_blocks(work);
    std::vector<ParamBlockRef> grads = grad_blocks(grad);

    auto eval = [&]() {
        if (baseline_mode) return loss_baseline(work, cp.positives, cp.negatives);
        return loss_total(work, cp, pf, cfg);
    };

    std::vector<GradCheckEntry> entries;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        std::span<double> data = blocks[b].data;
        if (data.empty()) continue;
        for (int s = 0; s < samples_per_block; ++s) {
            std::size_t i = rng.uniform_index(data.size());
            double saved = data[i];
            data[i] = saved + step;
            double plus = eval();
            data[i] = saved - step;
            double minus = eval();
            data[i] = saved;

            GradCheckEntry e;
            e.block = blocks[b].name;
            e.index = i;
            e.analytic = grads[b].data[i];
            e.finite_diff = (plus - minus) / (2.0 * step);
            e.rel_err = std::abs(e.analytic - e.finite_diff) / (std::abs(e.analytic) + 1e-8);
            entries.push_back(std::move(e));
        }
    }
    return entries;
}

}  // namespace facetemb
