#include "facetemb/training.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "facetemb/errors.hpp"
#include "facetemb/metrics.hpp"
#include "json.hpp"

namespace facetemb {

void TrainConfig::validate() const {
    if (lr <= 0) throw InvalidArgument("lr must be > 0");
    if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
    if (patience < 1) throw InvalidArgument("patience must be >= 1");
    if (max_epochs < 1) throw InvalidArgument("max_epochs must be >= 1");
    if (pf_per_cp < 1) throw InvalidArgument("pf_per_cp must be >= 1");
    if (weight_decay < 0) throw InvalidArgument("weight_decay must be >= 0");
}

void sgd_step(EncoderParams& params, Gradients& grads, double lr) {
    std::vector<ParamBlockRef> p = param_blocks(params);
    std::vector<ParamBlockRef> g = grad_blocks(grads);
    for (std::size_t b = 0; b < p.size(); ++b) axpy(-lr, g[b].data, p[b].data);
}

void adam_step(EncoderParams& params, Gradients& grads, AdamState& state, const TrainConfig& cfg) {
    std::vector<ParamBlockRef> p = param_blocks(params);
    std::vector<ParamBlockRef> g = grad_blocks(grads);
    if (state.m.empty()) {
        state.m.resize(p.size());
        state.v.resize(p.size());
        for (std::size_t b = 0; b < p.size(); ++b) {
            state.m[b].assign(p[b].data.size(), 0.0);
            state.v[b].assign(p[b].data.size(), 0.0);
        }
    }
    ++state.step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (std::size_t b = 0; b < p.size(); ++b) {
        std::span<double> theta = p[b].data;
        std::span<const double> grad = g[b].data;
        Vec& m = state.m[b];
        Vec& v = state.v[b];
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
            theta[i] -= cfg.lr * ((m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg.adam_eps) +
                                  cfg.weight_decay * theta[i]);
        }
    }
}

std::pair<EncoderParams, TrainReport> train(const TrainingCorpus& corpus, EncoderParams params,
                                            const TrainConfig& train_cfg, const LossConfig& loss_cfg,
                                            const std::vector<LabeledPair>& validation) {
    train_cfg.validate();
    if (corpus.cp_pairs.empty()) throw InvalidArgument("train: corpus has no cp pairs");
    if (train_cfg.loss_mode == LossMode::faceted && corpus.pf_pairs.empty())
        throw InvalidArgument("train: faceted mode needs pf pairs");
    if (validation.empty()) throw InvalidArgument("train: empty validation set");

    Rng root(train_cfg.seed);
    AdamState adam;
    EarlyStopper stopper(train_cfg.patience);
    TrainReport report;
    EncoderParams best =params;
    bool have_best = false;

    const std::vector<CpPair>& positives = corpus.cp_pairs.pairs();
    for (int epoch = 1; epoch <= train_cfg.max_epochs; ++epoch) {
        Rng erng = root.child(static_cast<std::uint64_t>(epoch));
        std::vector<std::size_t> order(positives.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        erng.shuffle(order);

        double loss_sum = 0.0;
        std::size_t example_count = 0;
        const std::size_t bs = static_cast<std::size_t>(train_cfg.batch_size);
        for (std::size_t start = 0, batch_idx = 0; start < order.size(); start += bs, ++batch_idx) {
            CpBatch batch;
            for (std::size_t i = start; i < std::min(start + bs, order.size()); ++i)
                batch.positives.push_back(positives[order[i]]);
            batch.negatives = sample_negatives(corpus, batch.positives, loss_cfg.n_neg_cp, erng);

            double loss = 0.0;
            Gradients grads;
            try {
                if (train_cfg.loss_mode == LossMode::faceted) {
                    PfBatch pf = sample_pf_batch(
                        corpus, train_cfg.pf_per_cp * static_cast<int>(batch.positives.size()),
                        loss_cfg.n_neg_pf, erng);
                    std::tie(loss, grads) = grad_total(params, batch, pf, loss_cfg);
                    example_count += batch.positives.size() + pf.examples.size();
                } else {
                    std::tie(loss, grads) = grad_baseline(params, batch);
                    example_count += batch.positives.size();
                }
            } catch (const NumericalError& e) {
                throw NumericalError("epoch " + std::to_string(epoch) + ", batch " +
                                     std::to_string(batch_idx) + ": " + e.what());
            }
            loss_sum += loss;
            if (train_cfg.optimizer == OptimizerKind::adam)
                adam_step(params, grads, adam, train_cfg);
            else
                sgd_step(params, grads, train_cfg.lr);
        }

        double metric = train_cfg.val_metric == ValMetric::f1
                            ? eval_f1(params, validation, train_cfg.loss_mode).f1
                            : -validation_loss(params, validation, train_cfg.loss_mode);
        report.epochs.push_back({epoch, loss_sum / static_cast<double>(example_count), metric});
        if (metric > stopper.best_metric()) {
            best = params;
            have_best = true;
        }
        if (stopper.observe(epoch, metric)) {
            report.stopping_reason = "early stopping (patience " + std::to_string(train_cfg.patience) + ")";
            break;
        }
    }
    if (report.stopping_reason.empty()) report.stopping_reason = "max epochs reached";
    report.best_epoch = stopper.best_epoch();
    report.best_metric = stopper.best_metric();
    return {have_best ? std::move(best) : std::move(params), std::move(report)};
}

double predict_score(const EncoderParams& params, int concept_id, int property_id, LossMode mode,
                     double mask_eps) {
    Vec prop = encode_property(params, property_id);
    if (mode == LossMode::faceted) {
        MaskedVec mc = masked_concept(params, concept_id, property_id, mask_eps);
        return mc.degenerate ? 0.0 : dot(mc.v, prop);
    }
    return dot(encode_concept(params, concept_id), prop);
}

double predict(const EncoderParams& params, int concept_id, int property_id, LossMode mode,
               double mask_eps) {
    return 1.0 / (1.0 + std::exp(-predict_score(params, concept_id, property_id, mode, mask_eps)));
}

double validation_loss(const EncoderParams& params, const std::vector<LabeledPair>& pairs,
                       LossMode mode) {
    if (pairs.empty()) throw InvalidArgument("validation_loss: empty pair set");
    double total = 0.0;
    for (const LabeledPair& lp : pairs) {
        double s = predict_score(params, lp.concept_id, lp.property_id, mode);
        // -log sigmoid(s) for positives, -log(1 - sigmoid(s)) for negatives
        total += lp.label ? (s > 0 ? std::log1p(std::exp(-s)) : -s + std::log1p(std::exp(s)))
                          : (s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)));
    }
    return total / static_cast<double>(pairs.size());
}

std::vector<LabeledPair> sample_fit_validation(const TrainingCorpus& corpus, double fraction,
                                               int negs_per_positive, Rng& rng) {
    if (fraction <= 0.0 || fraction > 1.0)
        throw InvalidArgument("validation fraction must be in (0,1]");
    std::vector<CpPair> pairs = corpus.cp_pairs.pairs();
    rng.shuffle(pairs);
    std::size_t n_val = std::max<std::size_t>(
        1, static_cast<std::size_t>(fraction * static_cast<double>(pairs.size())));
    std::vector<CpPair> val_pos(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(n_val));

    std::vector<LabeledPair> validation;
    for (auto [c, p] : val_pos) validation.push_back({c, p, true});
    for (auto [c, p] : sample_negatives(corpus, val_pos, negs_per_positive, rng))
        validation.push_back({c, p, false});
    return validation;
}

void write_train_report_jsonl(const TrainReport& report, std::ostream& out) {
    for (const EpochStat& e : report.epochs) {
        nlohmann::json line = {{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_metric", e.val_metric}};
        out << line.dump() << '\n';
    }
}

}  // namespace facetemb
