#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "facetemb/corpus.hpp"
#include "facetemb/objectives.hpp"

namespace facetemb {

enum class LossMode { baseline, faceted };
enum class OptimizerKind { sgd, adam };

/// Model-selection signal: F1 at threshold 0.5 when the validation labels are
/// trustworthy, negative validation cross-entropy otherwise (both maximized).
enum class ValMetric { f1, neg_loss };

struct TrainConfig {
    double lr = 1e-2;
    int batch_size = 128;
    int max_epochs = 500;
    int patience = 20;
    OptimizerKind optimizer = OptimizerKind::adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    /// Decoupled weight decay applied by the adam path (0 = plain adam).
    double weight_decay = 0.0;
    LossMode loss_mode = LossMode::faceted;
    ValMetric val_metric = ValMetric::f1;
    std::uint64_t seed = 0;
    /// InfoNCE examples interleaved per cp batch, as a multiple of batch_size.
    int pf_per_cp = 1;

    void validate() const;
};

struct EpochStat {
    int epoch = 0;          // 1-based
    double train_loss = 0.0;  // mean per example
    double val_metric = 0.0;  // F1 on the validation pairs
};

struct TrainReport {
    std::vector<EpochStat> epochs;
    int best_epoch = 0;
    double best_metric = 0.0;
    std::string stopping_reason;
};

/// Tracks the best validation metric; stop() becomes true once no epoch
/// improved on the best for `patience` epochs.
class EarlyStopper {
public:
    explicit EarlyStopper(int patience) : patience_(patience) {}

    /// Returns true when training should stop after this epoch.
    bool observe(int epoch, double metric) {
        if (metric > best_metric_) {
            best_metric_ = metric;
            best_epoch_ = epoch;
        }
        return epoch - best_epoch_ >= patience_;
    }

    int best_epoch() const { return best_epoch_; }
    double best_metric() const { return best_metric_; }

private:
    int patience_;
    int best_epoch_ = 0;
    double best_metric_ = -std::numeric_limits<double>::infinity();
};

struct AdamState {
    std::vector<Vec> m;
    std::vector<Vec> v;
    long step = 0;
};

void sgd_step(EncoderParams& params, Gradients& grads, double lr);
void adam_step(EncoderParams& params, Gradients& grads, AdamState& state, const TrainConfig& cfg);

/// Mini-batch training of L1+L2 (faceted) or the baseline loss, with
/// per-epoch negative resampling and early stopping on validation F1.
/// Returns the parameters of the best-validation epoch.
std::pair<EncoderParams, TrainReport> train(const TrainingCorpus& corpus, EncoderParams params,
                                            const TrainConfig& train_cfg, const LossConfig& loss_cfg,
                                            const std::vector<LabeledPair>& validation);

/// The pre-sigmoid score: MC(c,p) . Prop(p) in faceted mode, Con(c) . Prop(p)
/// in baseline mode.
double predict_score(const EncoderParams& params, int concept_id, int property_id, LossMode mode,
                     double mask_eps = 1e-12);

/// sigmoid(predict_score(...)).
double predict(const EncoderParams& params, int concept_id, int property_id, LossMode mode,
               double mask_eps = 1e-12);

/// Mean binary cross-entropy of the labeled pairs under the model.
double validation_loss(const EncoderParams& params, const std::vector<LabeledPair>& pairs,
                       LossMode mode);

/// Fit-monitoring validation for self-supervised runs: samples `fraction` of
/// the corpus cp pairs as positives (they stay in training) plus
/// negs_per_positive sampled non-positives per sampled positive. Pair it with
/// ValMetric::neg_loss.
std::vector<LabeledPair> sample_fit_validation(const TrainingCorpus& corpus, double fraction,
                                               int negs_per_positive, Rng& rng);

/// One epoch per line: {"epoch": ..., "train_loss": ..., "val_metric": ...}.
void write_train_report_jsonl(const TrainReport& report, std::ostream& out);

}  // namespace facetemb
