#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "facetemb/matrix.hpp"
#include "facetemb/objectives.hpp"
#include "facetemb/propdb.hpp"

namespace facetemb {

/// One benchmark item: 10 concepts of which 3 (the positives) share the
/// source property and 7 outliers pairwise share no property at all.
struct OutlierInstance {
    std::string property;
    std::vector<std::string> concepts;  // exactly 10, no duplicates
    std::array<int, 3> positives{};     // ascending indices into concepts
};

/// Rejection-samples instances for one property: 3 positives from 3 different
/// taxonomic groups, 7 outliers lacking the property with pairwise-disjoint
/// property sets. Deterministic under the seed; throws NumericalError naming
/// the property once the retry budget is exhausted.
std::vector<OutlierInstance> build_outlier_benchmark(const PropertyDB& db, const std::string& property,
                                                     int n_instances, std::uint64_t seed,
                                                     int retry_budget = 10000);

void write_benchmark_jsonl(const std::vector<OutlierInstance>& instances, std::ostream& out);
std::vector<OutlierInstance> read_benchmark_jsonl(std::istream& in);

/// score(c) = cos(c, c2) - cos(c, c3) over the 2nd/3rd nearest neighbours of
/// c (self excluded, ties by index); returns the argmax concept and its two
/// nearest neighbours, ascending.
std::array<int, 3> detect_outliers_single(const std::vector<Vec>& vectors);

struct MultiDetectResult {
    std::array<int, 3> prediction{};
    int facet = 0;
};

/// Runs the single-space detector in every facet (degenerate vectors excluded
/// from that facet's ranking, facets with fewer than 4 usable vectors
/// skipped) and returns the prediction of the facet with the maximal top
/// score, ties toward the lower facet index.
MultiDetectResult detect_outliers_multi(const std::vector<std::vector<MaskedVec>>& per_facet_vectors);

bool exact_match(const std::array<int, 3>& predicted, const std::array<int, 3>& gold);

}  // namespace facetemb
