#pragma once

#include <utility>
#include <vector>

#include "facetemb/corpus.hpp"
#include "facetemb/encoders.hpp"

namespace facetemb {

struct LossConfig {
    double tau = 0.05;      // InfoNCE temperature
    int n_neg_cp = 5;       // negatives per cp positive
    int n_neg_pf = 32;      // InfoNCE negatives per positive pair; 0 = full population
    double mask_eps = 1e-12;
};

/// Masked embedding plus a degeneracy flag for all-zero products. Degeneracy
/// is reachable mid-training and must not throw.
struct MaskedVec {
    Vec v;
    bool degenerate = false;
};

/// MC(c,p): componentwise product of Con(c) and Facet(p), renormalized.
MaskedVec masked_concept(const EncoderParams& params, int concept_id, int property_id,
                         double mask_eps = 1e-12);

struct CpBatch {
    std::vector<CpPair> positives;
    std::vector<CpPair> negatives;
};

/// One InfoNCE example: anchor and positive share a facet, negatives are
/// properties outside that facet's pf pairs.
struct PfExample {
    int anchor = 0;
    int positive = 0;
    std::vector<int> negatives;
};

struct PfBatch {
    std::vector<PfExample> examples;
};

/// Plain bi-encoder loss: -sum log sigmoid(Con(c).Prop(p)) over positives
/// minus sum log(1 - sigmoid) over negatives.
double loss_baseline(const EncoderParams& params, const std::vector<CpPair>& positives,
                     const std::vector<CpPair>& negatives);

/// Same shape with MC(c,p) replacing Con(c). Degenerate masks score 0.
double loss_l1(const EncoderParams& params, const std::vector<CpPair>& positives,
               const std::vector<CpPair>& negatives, const LossConfig& cfg);

/// InfoNCE over facet vectors with cosine similarity and temperature tau.
double loss_l2(const EncoderParams& params, const PfBatch& batch, const LossConfig& cfg);

double loss_total(const EncoderParams& params, const CpBatch& cp, const PfBatch& pf,
                  const LossConfig& cfg);

struct Gradients {
    Matrix concept_table;
    Matrix property_table;
    Mlp prop_head;
    Mlp facet_head;

    static Gradients zeros_like(const EncoderParams& params);
};
std::vector<ParamBlockRef> grad_blocks(Gradients& grads);

/// Loss and analytic gradient of L1 + L2. Degenerate-mask terms contribute
/// their constant loss but zero gradient. Throws when both batches are empty
/// or when a term goes non-finite (the offending pair is named).
std::pair<double, Gradients> grad_total(const EncoderParams& params, const CpBatch& cp,
                                        const PfBatch& pf, const LossConfig& cfg);

/// Loss and analytic gradient of the baseline loss (facet head untouched).
std::pair<double, Gradients> grad_baseline(const EncoderParams& params, const CpBatch& cp);

/// Samples InfoNCE examples: ordered same-facet property pairs (anchor !=
/// positive) with n_neg_pf sampled negatives each; n_neg_pf == 0 attaches the
/// full negative population.
PfBatch sample_pf_batch(const TrainingCorpus& corpus, int n_examples, int n_neg_pf, Rng& rng);

/// Every ordered same-facet pair with the full negative population; the exact
/// form of the L2 sum, for verification.
PfBatch full_pf_batch(const TrainingCorpus& corpus);

}  // namespace facetemb
