#include "facetemb/augment.hpp"

#include <map>
#include <ostream>

#include "facetemb/errors.hpp"

namespace facetemb {

void emit_clu_augmentation(const Clustering& clustering, const std::vector<std::string>& item_names,
                           AugmentFormat format, std::ostream& out, int facet_index,
                           bool skip_singletons) {
    if (clustering.assignment.size() != item_names.size())
        throw InvalidArgument("clustering size does not match item name count");

    std::map<int, int> cluster_sizes;
    for (int e : clustering.assignment) ++cluster_sizes[e];

    for (std::size_t i = 0; i < item_names.size(); ++i) {
        int exemplar = clustering.assignment[i];
        if (skip_singletons && cluster_sizes[exemplar] == 1) continue;
        if (format == AugmentFormat::labels) {
            out << item_names[i] << '\t' << "cluster_" << exemplar << '\n';
        } else {
            out << item_names[i] << " SUBCLASS_OF Y_cluster_" << facet_index << '_' << exemplar << '\n';
        }
    }
}

std::vector<FacetClustering> mclu(const EmbeddingSpace& space, const FacetDecomposition& decomp,
                                  const std::vector<int>& concept_ids, const ApConfig& cfg) {
    std::vector<FacetClustering> out;
    out.reserve(static_cast<std::size_t>(decomp.k));
    for (int f = 0; f < decomp.k; ++f) {
        FacetClustering fc;
        fc.facet = f;
        std::vector<Vec> rows;
        for (int c : concept_ids) {
            MaskedVec mv = facet_specific(space, decomp, c, f);
            if (mv.degenerate) {
                fc.note += fc.note.empty() ? "degenerate: " : ", ";
                fc.note += space.corpus ? space.corpus->concepts.item(c) : std::to_string(c);
                continue;
            }
            fc.concept_ids.push_back(c);
            rows.push_back(std::move(mv.v));
        }
        if (fc.concept_ids.empty()) {
            fc.skipped = true;
            fc.note = "all concepts degenerate in this facet";
            out.push_back(std::move(fc));
            continue;
        }
        Matrix m(rows.size(), static_cast<std::size_t>(space.dim));
        for (std::size_t i = 0; i < rows.size(); ++i)
            std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
        try {
            fc.clustering = cluster_concepts(m, cfg);
        } catch (const Error& e) {
            fc.skipped = true;
            fc.note = e.what();
        }
        out.push_back(std::move(fc));
    }
    return out;
}

}  // namespace facetemb
