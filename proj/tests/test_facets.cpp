#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "facetemb/errors.hpp"
#include "facetemb/facets.hpp"
#include "json.hpp"

using namespace facetemb;

namespace {

Matrix from_rows(const std::vector<Vec>& rows) {
    Matrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
    return m;
}

/// Two well-separated gaussian blobs around +center/-center.
Matrix two_blobs(int per_blob, double center, double spread, std::uint64_t seed,
                 std::vector<int>* truth = nullptr) {
    Rng rng(seed);
    Matrix m(static_cast<std::size_t>(2 * per_blob), 2);
    for (int i = 0; i < 2 * per_blob; ++i) {
        double cx = i < per_blob ? center : -center;
        m.at(static_cast<std::size_t>(i), 0) = cx + spread * rng.normal();
        m.at(static_cast<std::size_t>(i), 1) = spread * rng.normal();
        if (truth) truth->push_back(i < per_blob ? 0 : 1);
    }
    return m;
}

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j)
            if ((a[i] == a[j]) != (b[i] == b[j])) return false;
    return true;
}

/// Hand-assembled space for tests that do not need trained encoders.
EmbeddingSpace space_from(const std::vector<Vec>& concept_rows, const std::vector<Vec>& facet_rows) {
    EmbeddingSpace space;
    space.dim = static_cast<int>(concept_rows[0].size());
    space.concept_vecs = from_rows(concept_rows);
    space.property_vecs = from_rows(facet_rows);
    space.facet_vecs = from_rows(facet_rows);
    return space;
}

}  // namespace

TEST_CASE("kmeans with k=1 returns the mean") {
    Matrix points = from_rows({{1.0, 0.0}, {3.0, 2.0}, {5.0, 4.0}});
    KmeansResult r = kmeans(points, 1, 0);
    CHECK(r.centroids.at(0, 0) == doctest::Approx(3.0));
    CHECK(r.centroids.at(0, 1) == doctest::Approx(2.0));
    for (int a : r.assignments) CHECK(a == 0);
}

TEST_CASE("kmeans recovers two separated blobs exactly") {
    std::vector<int> truth;
    Matrix points = two_blobs(20, 10.0, 0.3, 42, &truth);
    KmeansResult r = kmeans(points, 2, 7);
    CHECK(same_partition(r.assignments, truth));
}

TEST_CASE("kmeans with k=n gives singleton clusters and zero inertia") {
    Matrix points = from_rows({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {5.0, 5.0}});
    KmeansResult r = kmeans(points, 4, 3);
    std::set<int> used(r.assignments.begin(), r.assignments.end());
    CHECK(used.size() == 4);
    CHECK(r.inertia_history.back() == doctest::Approx(0.0));
}

TEST_CASE("kmeans inertia never increases across Lloyd iterations") {
    Rng rng(19);
    std::vector<Vec> rows;
    for (int i = 0; i < 60; ++i) rows.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
    KmeansResult r = kmeans(from_rows(rows), 5, 2);
    for (std::size_t i = 1; i < r.inertia_history.size(); ++i)
        CHECK(r.inertia_history[i] <= r.inertia_history[i - 1] + 1e-9);
}

TEST_CASE("kmeans rejects n < k and repairs forced empty clusters") {
    Matrix points = from_rows({{0.0, 0.0}, {0.0, 0.0}});
    CHECK_THROWS_AS(kmeans(points, 3, 0), InvalidArgument);

    // All-identical points force the repair path: both clusters stay populated.
    Matrix identical = from_rows({{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}});
    KmeansResult r = kmeans(identical, 2, 5);
    std::set<int> used(r.assignments.begin(), r.assignments.end());
    CHECK(used.size() == 2);
}

TEST_CASE("kmeans is deterministic under the seed") {
    std::vector<int> truth;
    Matrix points = two_blobs(15, 8.0, 0.5, 9, &truth);
    KmeansResult a = kmeans(points, 2, 33);
    KmeansResult b = kmeans(points, 2, 33);
    CHECK(a.assignments == b.assignments);
    CHECK(a.centroids == b.centroids);
}

TEST_CASE("decompose: singleton clusters when k equals the property count") {
    std::vector<Vec> facet_rows = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.5}};
    EmbeddingSpace space = space_from({{1.0, 0.0}}, facet_rows);
    FacetDecomposition decomp = decompose(space, {0, 1, 2}, 3, 0);
    std::vector<std::vector<int>> members = decomp.members();
    for (const std::vector<int>& m : members) CHECK(m.size() == 1);
    // mask of a singleton cluster is exactly its facet vector
    for (std::size_t i = 0; i < 3; ++i) {
        int cluster = decomp.assignment[i];
        std::span<const double> mask = decomp.mask_vecs.row(static_cast<std::size_t>(cluster));
        for (std::size_t d = 0; d < 2; ++d) CHECK(mask[d] == facet_rows[i][d]);
    }
}

TEST_CASE("decompose: mask vectors are exact member sums and members partition the set") {
    Rng rng(21);
    std::vector<Vec> facet_rows;
    for (int i = 0; i < 12; ++i) facet_rows.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
    EmbeddingSpace space = space_from({{1.0, 0.0, 0.0, 0.0}}, facet_rows);
    std::vector<int> property_set = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
    FacetDecomposition decomp = decompose(space, property_set, 3, 4);

    std::vector<std::vector<int>> members = decomp.members();
    std::set<int> all;
    for (int j = 0; j < 3; ++j) {
        Vec sum(4, 0.0);
        for (int p : members[static_cast<std::size_t>(j)]) {
            for (std::size_t d = 0; d < 4; ++d) sum[d] += facet_rows[static_cast<std::size_t>(p)][d];
            CHECK(all.insert(p).second);  // pairwise disjoint
        }
        for (std::size_t d = 0; d < 4; ++d)
            CHECK(decomp.mask_vecs.at(static_cast<std::size_t>(j), d) == sum[d]);  // exact, no averaging
    }
    CHECK(all.size() == property_set.size());
    CHECK(decomp.cluster_of(5).has_value());
    CHECK(!decomp.cluster_of(99).has_value());
}

TEST_CASE("decompose rejects a property set smaller than k") {
    EmbeddingSpace space = space_from({{1.0, 0.0}}, {{1.0, 0.0}, {0.0, 1.0}});
    CHECK_THROWS_AS(decompose(space, {0, 1}, 3, 0), InvalidArgument);
}

TEST_CASE("decompose with the default k=10 yields ten facet spaces") {
    Rng rng(55);
    std::vector<Vec> facet_rows;
    std::vector<int> property_set;
    for (int p = 0; p < 40; ++p) {
        Vec v(6);
        for (double& x : v) x = rng.uniform(-1, 1);
        facet_rows.push_back(v);
        property_set.push_back(p);
    }
    EmbeddingSpace space = space_from({{1.0, 0.0, 0.0, 0.0, 0.0, 0.0}}, facet_rows);
    FacetDecomposition decomp = decompose(space, property_set, 10, 1);
    CHECK(decomp.k == 10);
    std::size_t total = 0;
    for (const std::vector<int>& m : decomp.members()) {
        CHECK(!m.empty());
        total += m.size();
    }
    CHECK(total == 40);
}

TEST_CASE("facet_specific: all-ones mask reproduces the concept vector") {
    EmbeddingSpace space = space_from({{0.6, 0.8}}, {{1.0, 1.0}});
    FacetDecomposition decomp;
    decomp.k = 1;
    decomp.property_ids = {0};
    decomp.assignment = {0};
    decomp.mask_vecs = from_rows({{1.0, 1.0}});
    MaskedVec mv = facet_specific(space, decomp, 0, 0);
    REQUIRE(!mv.degenerate);
    CHECK(mv.v[0] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(mv.v[1] == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("facet_specific: scaling is absorbed by normalization") {
    EmbeddingSpace space = space_from({{0.6, 0.8}}, {{2.0, 0.0}});
    FacetDecomposition decomp;
    decomp.k = 1;
    decomp.property_ids = {0};
    decomp.assignment = {0};
    decomp.mask_vecs = from_rows({{2.0, 0.0}});
    MaskedVec mv = facet_specific(space, decomp, 0, 0);
    REQUIRE(!mv.degenerate);
    CHECK(mv.v[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mv.v[1] == doctest::Approx(0.0).epsilon(1e-12));

    // positive rescaling of the mask leaves the output unchanged
    FacetDecomposition scaled = decomp;
    for (double& v : scaled.mask_vecs.data()) v *= 17.0;
    MaskedVec mv2 = facet_specific(space, scaled, 0, 0);
    for (std::size_t d = 0; d < 2; ++d) CHECK(mv2.v[d] == doctest::Approx(mv.v[d]).epsilon(1e-9));
}

TEST_CASE("facet_specific agrees with a naive recomputation from raw sums") {
    Rng rng(31);
    std::vector<Vec> concept_rows, facet_rows;
    for (int c = 0; c < 5; ++c) {
        Vec v(6);
        for (double& x : v) x = rng.uniform(-1, 1);
        double n = norm(v);
        for (double& x : v) x /= n;
        concept_rows.push_back(v);
    }
    for (int p = 0; p < 9; ++p) {
        Vec v(6);
        for (double& x : v) x = rng.uniform(-1, 1);
        facet_rows.push_back(v);
    }
    EmbeddingSpace space = space_from(concept_rows, facet_rows);
    FacetDecomposition decomp = decompose(space, {0, 1, 2, 3, 4, 5, 6, 7, 8}, 3, 11);
    std::vector<std::vector<int>> members = decomp.members();
    for (int c = 0; c < 5; ++c)
        for (int j = 0; j < 3; ++j) {
            // naive: sum member facet vectors, multiply, normalize
            Vec sum(6, 0.0);
            for (int p : members[static_cast<std::size_t>(j)])
                for (std::size_t d = 0; d < 6; ++d) sum[d] += facet_rows[static_cast<std::size_t>(p)][d];
            Vec prod(6);
            for (std::size_t d = 0; d < 6; ++d) prod[d] = concept_rows[static_cast<std::size_t>(c)][d] * sum[d];
            double n = norm(prod);
            MaskedVec mv = facet_specific(space, decomp, c, j);
            REQUIRE(!mv.degenerate);
            for (std::size_t d = 0; d < 6; ++d)
                CHECK(mv.v[d] == doctest::Approx(prod[d] / n).epsilon(1e-12));
        }
}

TEST_CASE("faceted_vectors flags degenerate combinations") {
    EmbeddingSpace space = space_from({{1.0, 0.0}, {0.0, 1.0}}, {{0.0, 1.0}});
    FacetDecomposition decomp;
    decomp.k = 1;
    decomp.property_ids = {0};
    decomp.assignment = {0};
    decomp.mask_vecs = from_rows({{0.0, 1.0}});
    FacetedConceptVecs fv = faceted_vectors(space, decomp);
    CHECK(fv.degenerate[0][0] == 1);  // (1,0) * (0,1) = 0
    CHECK(fv.degenerate[0][1] == 0);
}

TEST_CASE("facet_neighbours: two concepts, the other is rank 1") {
    EmbeddingSpace space = space_from({{1.0, 0.0}, {0.8, 0.6}}, {{1.0, 1.0}});
    FacetDecomposition decomp;
    decomp.k = 1;
    decomp.property_ids = {0};
    decomp.assignment = {0};
    decomp.mask_vecs = from_rows({{1.0, 1.0}});
    std::vector<Neighbour> nn = facet_neighbours(space, decomp, 0, 0, 5);
    REQUIRE(nn.size() == 1);
    CHECK(nn[0].concept_id == 1);
}

TEST_CASE("facet_neighbours: ties break toward the lower concept id") {
    EmbeddingSpace space = space_from({{1.0, 0.0}, {1.0, 0.0}, {1.0, 0.0}}, {{1.0, 1.0}});
    FacetDecomposition decomp;
    decomp.k = 1;
    decomp.property_ids = {0};
    decomp.assignment = {0};
    decomp.mask_vecs = from_rows({{1.0, 1.0}});
    std::vector<Neighbour> nn = facet_neighbours(space, decomp, 2, 0, 2);
    REQUIRE(nn.size() == 2);
    CHECK(nn[0].concept_id == 0);
    CHECK(nn[1].concept_id == 1);
}

TEST_CASE("facet_neighbours ranks within-block concepts first in a block-structured space") {
    // Concepts 0-2 share the first two coordinates, 3-5 the last two. Facet 0
    // masks the first block, so neighbours of 0 in facet 0 are 1 and 2.
    std::vector<Vec> concepts;
    Rng rng(41);
    for (int i = 0; i < 6; ++i) {
        Vec v(4, 0.0);
        if (i < 3) {
            v[0] = 1.0;
            v[1] = 0.9 + 0.01 * i;
            v[2] = rng.uniform(-1, 1);
            v[3] = rng.uniform(-1, 1);
        } else {
            v[0] = rng.uniform(-1, 1);
            v[1] = rng.uniform(-1, 1);
            v[2] = 1.0;
            v[3] = 0.9 + 0.01 * i;
        }
        double n = norm(v);
        for (double& x : v) x /= n;
        concepts.push_back(v);
    }
    EmbeddingSpace space = space_from(concepts, {{1.0, 1.0, 0.0, 0.0}, {0.0, 0.0, 1.0, 1.0}});
    FacetDecomposition decomp;
    decomp.k = 2;
    decomp.property_ids = {0, 1};
    decomp.assignment = {0, 1};
    decomp.mask_vecs = from_rows({{1.0, 1.0, 0.0, 0.0}, {0.0, 0.0, 1.0, 1.0}});

    std::vector<Neighbour> nn = facet_neighbours(space, decomp, 0, 0, 2);
    REQUIRE(nn.size() == 2);
    std::set<int> top = {nn[0].concept_id, nn[1].concept_id};
    CHECK(top == std::set<int>{1, 2});

    // brute-force oracle: full ranking by explicit cosine
    MaskedVec q = facet_specific(space, decomp, 0, 0);
    std::vector<std::pair<double, int>> ranked;
    for (int c = 1; c < 6; ++c) {
        MaskedVec mv = facet_specific(space, decomp, c, 0);
        if (mv.degenerate) continue;
        ranked.emplace_back(-dot(q.v, mv.v), c);
    }
    std::sort(ranked.begin(), ranked.end());
    std::vector<Neighbour> full = facet_neighbours(space, decomp, 0, 0, static_cast<int>(ranked.size()));
    REQUIRE(full.size() == ranked.size());
    for (std::size_t i = 0; i < ranked.size(); ++i) CHECK(full[i].concept_id == ranked[i].second);
}

TEST_CASE("facet_neighbours rejects a degenerate query") {
    EmbeddingSpace space = space_from({{1.0, 0.0}, {0.0, 1.0}}, {{0.0, 1.0}});
    FacetDecomposition decomp;
    decomp.k = 1;
    decomp.property_ids = {0};
    decomp.assignment = {0};
    decomp.mask_vecs = from_rows({{0.0, 1.0}});
    CHECK_THROWS_AS(facet_neighbours(space, decomp, 0, 0, 1), NumericalError);
}

TEST_CASE("decomposition JSON carries k, named assignments, and mask rows") {
    CorpusBuilder builder;
    builder.add_cp("banana", "yellow");
    builder.add_cp("sea", "blue");
    builder.add_pf("yellow", "colour");
    builder.add_pf("blue", "colour");
    TrainingCorpus corpus = builder.build();

    EmbeddingSpace space = space_from({{1.0, 0.0}, {0.0, 1.0}}, {{1.0, 0.2}, {0.9, 0.1}});
    FacetDecomposition decomp = decompose(space, {0, 1}, 1, 0);
    std::ostringstream out;
    write_decomposition_json(decomp, corpus, out);
    nlohmann::json j = nlohmann::json::parse(out.str());
    CHECK(j.at("k") == 1);
    CHECK(j.at("assignments").at("yellow") == 0);
    CHECK(j.at("assignments").at("blue") == 0);
    CHECK(j.at("mask_vecs").size() == 1);
    CHECK(j.at("mask_vecs")[0].size() == 2);
}
