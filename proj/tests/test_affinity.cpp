#include <set>

#include "doctest.h"
#include "facetemb/affinity.hpp"
#include "facetemb/errors.hpp"
#include "facetemb/rng.hpp"

using namespace facetemb;

namespace {

Matrix from_rows(const std::vector<Vec>& rows) {
    Matrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
    return m;
}

std::set<std::set<int>> clusters_of(const Clustering& c) {
    std::set<std::set<int>> out;
    for (int e : c.exemplars) {
        std::set<int> members;
        for (std::size_t i = 0; i < c.assignment.size(); ++i)
            if (c.assignment[i] == e) members.insert(static_cast<int>(i));
        out.insert(members);
    }
    return out;
}

Matrix random_similarity(int n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Vec> rows;
    for (int i = 0; i < n; ++i) {
        Vec v(5);
        for (double& x : v) x = rng.uniform(-1, 1);
        rows.push_back(v);
    }
    return cosine_similarity_matrix(from_rows(rows));
}

}  // namespace

TEST_CASE("a single item is its own exemplar") {
    Matrix s(1, 1);
    s.at(0, 0) = 0.0;
    Clustering c = affinity_propagation(s);
    CHECK(c.exemplars == std::vector<int>{0});
    CHECK(c.assignment == std::vector<int>{0});
}

TEST_CASE("duplicate pairs with median preference form exactly two clusters") {
    // Two pairs of duplicate points on opposite sides of the origin; cosine
    // similarity is 1 within a pair and -1 across.
    Matrix s = cosine_similarity_matrix(
        from_rows({{1.0, 0.0}, {1.0, 0.0}, {-1.0, 0.0}, {-1.0, 0.0}}));
    ApConfig cfg;
    cfg.preference_quantile = 0.5;
    Clustering c = affinity_propagation(s, cfg);
    CHECK(clusters_of(c) == std::set<std::set<int>>{{0, 1}, {2, 3}});
}

TEST_CASE("exemplars assign to themselves and everything maps to an exemplar") {
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        Clustering c = affinity_propagation(random_similarity(14, seed));
        REQUIRE(!c.exemplars.empty());
        std::set<int> exemplars(c.exemplars.begin(), c.exemplars.end());
        for (int e : c.exemplars) CHECK(c.assignment[static_cast<std::size_t>(e)] == e);
        for (int a : c.assignment) CHECK(exemplars.contains(a));
    }
}

TEST_CASE("affinity propagation is deterministic") {
    Matrix s = random_similarity(12, 99);
    Clustering a = affinity_propagation(s);
    Clustering b = affinity_propagation(s);
    CHECK(a.exemplars == b.exemplars);
    CHECK(a.assignment == b.assignment);
}

TEST_CASE("preference quantile controls the cluster count direction") {
    Matrix s = random_similarity(16, 7);
    ApConfig low, high;
    low.preference_quantile = 0.5;
    high.preference_quantile = 0.9;
    int n_low = affinity_propagation(s, low).n_clusters();
    int n_high = affinity_propagation(s, high).n_clusters();
    CHECK(n_low <= n_high);  // higher preference -> more exemplars
}

TEST_CASE("affinity propagation validates its inputs") {
    Matrix bad(2, 2);
    bad.at(0, 1) = 1.0;
    bad.at(1, 0) = 0.5;
    CHECK_THROWS_AS(affinity_propagation(bad), InvalidArgument);

    Matrix s = random_similarity(4, 1);
    ApConfig cfg;
    cfg.damping = 0.3;
    CHECK_THROWS_AS(affinity_propagation(s, cfg), InvalidArgument);
}

TEST_CASE("hopeless preference reports the no-exemplar failure") {
    Matrix s(3, 3);  // all similarities 0
    ApConfig cfg;
    cfg.preference_value = -1e9;
    cfg.max_iters = 40;
    cfg.convergence_window = 10;
    CHECK_THROWS_WITH_AS(affinity_propagation(s, cfg), doctest::Contains("preference"),
                         NumericalError);
}

TEST_CASE("cluster_concepts groups duplicate concept rows") {
    Matrix rows = from_rows({{0.0, 1.0}, {0.0, 1.0}, {1.0, 0.0}, {1.0, 0.0}});
    Clustering c = cluster_concepts(rows);
    CHECK(clusters_of(c) == std::set<std::set<int>>{{0, 1}, {2, 3}});
}
