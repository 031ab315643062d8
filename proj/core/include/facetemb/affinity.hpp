#pragma once

#include <optional>
#include <vector>

#include "facetemb/matrix.hpp"

namespace facetemb {

struct ApConfig {
    /// Quantile of the off-diagonal similarity distribution placed on the
    /// diagonal as the shared preference. Ignored when preference_value is set.
    double preference_quantile = 0.5;
    std::optional<double> preference_value;
    double damping = 0.9;
    int max_iters = 1000;
    /// Converged once the exemplar set is stable for this many iterations.
    int convergence_window = 50;
    /// Deterministic symmetry-breaking perturbation; duplicate points would
    /// otherwise oscillate forever.
    bool jitter = true;
};

struct Clustering {
    std::vector<int> exemplars;   // ascending item indices
    std::vector<int> assignment;  // item -> exemplar item index

    int n_clusters() const { return static_cast<int>(exemplars.size()); }
};

/// Frey-Dueck responsibility/availability message passing with damping.
/// Exemplars are the items with r(k,k) + a(k,k) > 0; every exemplar is
/// assigned to itself, every other item to its max-similarity exemplar.
Clustering affinity_propagation(const Matrix& similarity, const ApConfig& cfg = {});

/// Pairwise cosine similarities of the rows.
Matrix cosine_similarity_matrix(const Matrix& rows);

/// Clu: affinity propagation on the cosine similarities of concept vectors.
Clustering cluster_concepts(const Matrix& concept_rows, const ApConfig& cfg = {});

}  // namespace facetemb
