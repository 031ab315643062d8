#pragma once

#include <span>
#include <string>
#include <vector>

#include "facetemb/corpus.hpp"
#include "facetemb/matrix.hpp"
#include "facetemb/rng.hpp"

namespace facetemb {

/// One-hidden-layer tanh MLP: y = w2 * tanh(w1 * x + b1) + b2.
struct Mlp {
    Matrix w1;  // h x d
    Vec b1;     // h
    Matrix w2;  // d x h
    Vec b2;     // d

    bool operator==(const Mlp&) const = default;
};

Vec mlp_forward(const Mlp& mlp, std::span<const double> x);

/// All trainable parameters of the three encoders. The property table feeds
/// both heads; the concept side is a table plus normalization.
struct EncoderParams {
    int dim = 0;
    int hidden = 0;
    Matrix concept_table;   // |concepts| x dim
    Matrix property_table;  // |properties| x dim
    Mlp prop_head;
    Mlp facet_head;

    bool operator==(const EncoderParams&) const = default;
};

/// Named views over every parameter block, in checkpoint order.
struct ParamBlockRef {
    std::string name;
    std::span<double> data;
};
std::vector<ParamBlockRef> param_blocks(EncoderParams& params);

EncoderParams init_params(const TrainingCorpus& corpus, int dim, int hidden, Rng& rng);

/// Con(c): the concept row normalized to unit Euclidean norm.
Vec encode_concept(const EncoderParams& params, int concept_id);

/// Prop(p): prop_head applied to the property row; deliberately unnormalized.
Vec encode_property(const EncoderParams& params, int property_id);

/// Facet(p): facet_head applied to the property row; unnormalized, any sign.
Vec encode_facet(const EncoderParams& params, int property_id);

struct EmbeddingSpace {
    int dim = 0;
    Matrix concept_vecs;   // unit rows
    Matrix property_vecs;
    Matrix facet_vecs;
    const TrainingCorpus* corpus = nullptr;
};

EmbeddingSpace materialize(const EncoderParams& params, const TrainingCorpus& corpus);

/// Binary little-endian checkpoint: magic "FCSP", version, dim, hidden, the
/// three vocab hashes, then the parameter blocks as row-major f64.
void save_checkpoint(const EncoderParams& params, const TrainingCorpus& corpus, const std::string& path);

/// Throws FormatError on bad magic/version, StateMismatchError when the vocab
/// hashes do not match the given corpus.
EncoderParams load_checkpoint(const std::string& path, const TrainingCorpus& corpus);

}  // namespace facetemb
