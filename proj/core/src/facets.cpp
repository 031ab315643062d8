#include "facetemb/facets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <unordered_map>

#include "facetemb/errors.hpp"
#include "json.hpp"

namespace facetemb {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

Matrix kmeanspp_init(const Matrix& points, int k, Rng& rng) {
    const std::size_t n = points.rows();
    Matrix centroids(static_cast<std::size_t>(k), points.cols());
    std::size_t first = rng.uniform_index(n);
    std::copy(points.row(first).begin(), points.row(first).end(), centroids.row(0).begin());

    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(points.row(i), centroids.row(0));
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (double v : d2) total += v;
        std::size_t chosen;
        if (total <= 0.0) {
            chosen = rng.uniform_index(n);  // all points coincide with a centroid
        } else {
            double r = rng.uniform() * total;
            double acc = 0.0;
            chosen = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc > r) {
                    chosen = i;
                    break;
                }
            }
        }
        std::copy(points.row(chosen).begin(), points.row(chosen).end(),
                  centroids.row(static_cast<std::size_t>(c)).begin());
        for (std::size_t i = 0; i < n; ++i)
            d2[i] = std::min(d2[i], sq_dist(points.row(i), centroids.row(static_cast<std::size_t>(c))));
    }
    return centroids;
}

}  // namespace

KmeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, int max_iters, double tol) {
    const std::size_t n = points.rows();
    if (k < 1) throw InvalidArgument("kmeans: k must be >= 1");
    if (n < static_cast<std::size_t>(k))
        throw InvalidArgument("kmeans: fewer points (" + std::to_string(n) + ") than clusters (" +
                              std::to_string(k) + ")");

    Rng rng(splitmix64(seed ^ 0x6b6d65616e73ULL));
    KmeansResult result;
    result.centroids = kmeanspp_init(points, k, rng);
    result.assignments.assign(n, 0);

    for (int iter = 0; iter < max_iters; ++iter) {
        // Assignment step; ties go to the lower centroid index.
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            int best_c = 0;
            for (int c = 0; c < k; ++c) {
                double d = sq_dist(points.row(i), result.centroids.row(static_cast<std::size_t>(c)));
                if (d < best) {
                    best = d;
                    best_c = c;
                }
            }
            result.assignments[i] = best_c;
            inertia += best;
        }

        // Empty-cluster repair: steal the farthest point from the largest cluster.
        std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
        for (int a : result.assignments) ++counts[static_cast<std::size_t>(a)];
        for (int c = 0; c < k; ++c) {
            while (counts[static_cast<std::size_t>(c)] == 0) {
                std::size_t donor = static_cast<std::size_t>(
                    std::max_element(counts.begin(), counts.end()) - counts.begin());
                std::size_t farthest = n;
                double far_d = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (result.assignments[i] != static_cast<int>(donor)) continue;
                    double d = sq_dist(points.row(i), result.centroids.row(donor));
                    if (d > far_d) {
                        far_d = d;
                        farthest = i;
                    }
                }
                result.assignments[farthest] = c;
                --counts[donor];
                ++counts[static_cast<std::size_t>(c)];
            }
        }

        result.inertia_history.push_back(inertia);

        // Update step.
        Matrix next(static_cast<std::size_t>(k), points.cols());
        std::vector<double> totals(static_cast<std::size_t>(k), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            axpy(1.0, points.row(i), next.row(static_cast<std::size_t>(result.assignments[i])));
            totals[static_cast<std::size_t>(result.assignments[i])] += 1.0;
        }
        double shift = 0.0;
        for (int c = 0; c < k; ++c) {
            scale(next.row(static_cast<std::size_t>(c)), 1.0 / totals[static_cast<std::size_t>(c)]);
            shift = std::max(shift, std::sqrt(sq_dist(next.row(static_cast<std::size_t>(c)),
                                                      result.centroids.row(static_cast<std::size_t>(c)))));
        }
        result.centroids = std::move(next);
        if (shift < tol) break;
    }
    return result;
}

std::optional<int> FacetDecomposition::cluster_of(int property_id) const {
    for (std::size_t i = 0; i < property_ids.size(); ++i)
        if (property_ids[i] == property_id) return assignment[i];
    return std::nullopt;
}

std::vector<std::vector<int>> FacetDecomposition::members() const {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < property_ids.size(); ++i)
        out[static_cast<std::size_t>(assignment[i])].push_back(property_ids[i]);
    return out;
}

FacetDecomposition decompose(const EmbeddingSpace& space, const std::vector<int>& property_set,
                             int k, std::uint64_t seed) {
    if (property_set.size() < static_cast<std::size_t>(k))
        throw InvalidArgument("decompose: property set smaller than k");

    Matrix points(property_set.size(), static_cast<std::size_t>(space.dim));
    for (std::size_t i = 0; i < property_set.size(); ++i) {
        std::span<const double> row = space.facet_vecs.row(static_cast<std::size_t>(property_set[i]));
        std::copy(row.begin(), row.end(), points.row(i).begin());
    }

    KmeansResult km = kmeans(points, k, seed);
    FacetDecomposition decomp;
    decomp.k = k;
    decomp.property_ids = property_set;
    decomp.assignment = km.assignments;
    decomp.centroids = std::move(km.centroids);
    decomp.mask_vecs = Matrix(static_cast<std::size_t>(k), static_cast<std::size_t>(space.dim));
    for (std::size_t i = 0; i < property_set.size(); ++i)
        axpy(1.0, points.row(i), decomp.mask_vecs.row(static_cast<std::size_t>(km.assignments[i])));
    return decomp;
}

MaskedVec facet_specific(const EmbeddingSpace& space, const FacetDecomposition& decomp,
                         int concept_id, int facet) {
    if (facet < 0 || facet >= decomp.k) throw InvalidArgument("facet index out of range");
    std::span<const double> con = space.concept_vecs.row(static_cast<std::size_t>(concept_id));
    std::span<const double> mask = decomp.mask_vecs.row(static_cast<std::size_t>(facet));
    Vec prod(con.size());
    for (std::size_t i = 0; i < con.size(); ++i) prod[i] = con[i] * mask[i];
    double n = norm(prod);
    if (n < 1e-12) return {Vec(con.size(), 0.0), true};
    scale(prod, 1.0 / n);
    return {std::move(prod), false};
}

FacetedConceptVecs faceted_vectors(const EmbeddingSpace& space, const FacetDecomposition& decomp) {
    FacetedConceptVecs out;
    out.k = decomp.k;
    out.dim = space.dim;
    const std::size_t n = space.concept_vecs.rows();
    out.vecs.assign(static_cast<std::size_t>(decomp.k), Matrix(n, static_cast<std::size_t>(space.dim)));
    out.degenerate.assign(static_cast<std::size_t>(decomp.k), std::vector<char>(n, 0));
    for (int j = 0; j < decomp.k; ++j)
        for (std::size_t c = 0; c < n; ++c) {
            MaskedVec mv = facet_specific(space, decomp, static_cast<int>(c), j);
            std::copy(mv.v.begin(), mv.v.end(), out.vecs[static_cast<std::size_t>(j)].row(c).begin());
            out.degenerate[static_cast<std::size_t>(j)][c] = mv.degenerate ? 1 : 0;
        }
    return out;
}

std::vector<Neighbour> facet_neighbours(const EmbeddingSpace& space, const FacetDecomposition& decomp,
                                        int concept_id, int facet, int top_n) {
    if (top_n < 1) throw InvalidArgument("top_n must be >= 1");
    MaskedVec query = facet_specific(space, decomp, concept_id, facet);
    if (query.degenerate)
        throw NumericalError("degenerate facet-specific vector for query concept " +
                             std::to_string(concept_id));

    std::vector<Neighbour> candidates;
    for (std::size_t c = 0; c < space.concept_vecs.rows(); ++c) {
        if (static_cast<int>(c) == concept_id) continue;
        MaskedVec mv = facet_specific(space, decomp, static_cast<int>(c), facet);
        if (mv.degenerate) continue;
        candidates.push_back({static_cast<int>(c), dot(query.v, mv.v)});
    }
    std::stable_sort(candidates.begin(), candidates.end(), [](const Neighbour& a, const Neighbour& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.concept_id < b.concept_id;
    });
    if (candidates.size() > static_cast<std::size_t>(top_n)) candidates.resize(static_cast<std::size_t>(top_n));
    return candidates;
}

void write_decomposition_json(const FacetDecomposition& decomp, const TrainingCorpus& corpus,
                              std::ostream& out) {
    nlohmann::json j;
    j["k"] = decomp.k;
    nlohmann::json assignments = nlohmann::json::object();
    for (std::size_t i = 0; i < decomp.property_ids.size(); ++i)
        assignments[corpus.properties.item(decomp.property_ids[i])] = decomp.assignment[i];
    j["assignments"] = std::move(assignments);
    nlohmann::json masks = nlohmann::json::array();
    for (int f = 0; f < decomp.k; ++f) {
        std::span<const double> row = decomp.mask_vecs.row(static_cast<std::size_t>(f));
        masks.push_back(std::vector<double>(row.begin(), row.end()));
    }
    j["mask_vecs"] = std::move(masks);
    out << j.dump(2) << '\n';
}

}  // namespace facetemb
