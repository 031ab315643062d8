#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "facetemb/affinity.hpp"
#include "facetemb/facets.hpp"

namespace facetemb {

enum class AugmentFormat { labels, rules };

/// labels: item<TAB>cluster_<exemplar_index> per line.
/// rules:  X SUBCLASS_OF Y_cluster_<facet>_<exemplar_index> per line.
void emit_clu_augmentation(const Clustering& clustering, const std::vector<std::string>& item_names,
                           AugmentFormat format, std::ostream& out, int facet_index = 0,
                           bool skip_singletons = false);

struct FacetClustering {
    int facet = 0;
    std::vector<int> concept_ids;  // non-degenerate concepts, ascending
    Clustering clustering;         // indices into concept_ids
    bool skipped = false;
    std::string note;
};

/// MClu: one affinity-propagation clustering per facet-specific space.
/// Degenerate concepts are excluded per facet; a facet whose clustering
/// fails is recorded as skipped and the run continues.
std::vector<FacetClustering> mclu(const EmbeddingSpace& space, const FacetDecomposition& decomp,
                                  const std::vector<int>& concept_ids, const ApConfig& cfg);

}  // namespace facetemb
