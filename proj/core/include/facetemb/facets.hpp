#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "facetemb/encoders.hpp"
#include "facetemb/objectives.hpp"

namespace facetemb {

struct KmeansResult {
    std::vector<int> assignments;
    Matrix centroids;
    std::vector<double> inertia_history;  // one entry per Lloyd iteration
};

/// Lloyd's algorithm with k-means++ seeding. Empty clusters are repaired by
/// stealing the farthest member of the largest cluster. Deterministic under
/// the seed.
KmeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, int max_iters = 100,
                    double tol = 1e-9);

struct FacetDecomposition {
    int k = 0;
    std::vector<int> property_ids;  // the clustered property set
    std::vector<int> assignment;    // aligned with property_ids
    Matrix mask_vecs;               // k x d, exact sums of member facet vectors
    Matrix centroids;               // k x d

    std::optional<int> cluster_of(int property_id) const;
    std::vector<std::vector<int>> members() const;
};

/// Clusters the facet vectors of the given properties into k facets and sums
/// member facet vectors into per-facet mask vectors.
FacetDecomposition decompose(const EmbeddingSpace& space, const std::vector<int>& property_set,
                             int k, std::uint64_t seed);

/// Facet-specific embedding: Con(c) masked by the summed facet vectors of
/// cluster j, renormalized. Zero products flag degeneracy.
MaskedVec facet_specific(const EmbeddingSpace& space, const FacetDecomposition& decomp,
                         int concept_id, int facet);

struct FacetedConceptVecs {
    int k = 0;
    int dim = 0;
    std::vector<Matrix> vecs;                 // per facet, |concepts| x d
    std::vector<std::vector<char>> degenerate;  // per facet, per concept
};

FacetedConceptVecs faceted_vectors(const EmbeddingSpace& space, const FacetDecomposition& decomp);

struct Neighbour {
    int concept_id = 0;
    double similarity = 0.0;
};

/// Concepts ranked by cosine similarity of facet-specific vectors within one
/// facet; the query is excluded, degenerate candidates are skipped, ties
/// break toward the lower concept id.
std::vector<Neighbour> facet_neighbours(const EmbeddingSpace& space, const FacetDecomposition& decomp,
                                        int concept_id, int facet, int top_n);

void write_decomposition_json(const FacetDecomposition& decomp, const TrainingCorpus& corpus,
                              std::ostream& out);

}  // namespace facetemb
