#include <cmath>

#include "doctest.h"
#include "facetemb/encoders.hpp"
#include "facetemb/errors.hpp"
#include "support/temp_dir.hpp"

using namespace facetemb;
using testsupport::TempDir;

namespace {

TrainingCorpus small_corpus(int n_concepts = 3, int n_properties = 2) {
    CorpusBuilder builder;
    for (int c = 0; c < n_concepts; ++c)
        builder.add_cp("c" + std::to_string(c), "p" + std::to_string(c % n_properties));
    for (int p = 0; p < n_properties; ++p) builder.add_pf("p" + std::to_string(p), "f0");
    return builder.build();
}

}  // namespace

TEST_CASE("init_params shapes and uniform scale") {
    TrainingCorpus corpus = small_corpus(3, 2);
    Rng rng(1);
    EncoderParams p = init_params(corpus, 8, 4, rng);
    CHECK(p.concept_table.rows() == 3);
    CHECK(p.concept_table.cols() == 8);
    CHECK(p.property_table.rows() == 2);
    CHECK(p.prop_head.w1.rows() == 4);
    CHECK(p.prop_head.w1.cols() == 8);
    CHECK(p.prop_head.w2.rows() == 8);
    const double bound = 1.0 / std::sqrt(8.0);
    for (double v : p.concept_table.data()) {
        CHECK(v > -bound);
        CHECK(v < bound);
    }
    for (double v : p.prop_head.b1) CHECK(v == 0.0);
}

TEST_CASE("init_params is deterministic and validates dims") {
    TrainingCorpus corpus = small_corpus();
    Rng a(9), b(9);
    CHECK(init_params(corpus, 8, 4, a) == init_params(corpus, 8, 4, b));
    Rng c(9);
    CHECK_THROWS_AS(init_params(corpus, 1, 4, c), InvalidArgument);
    CHECK_THROWS_AS(init_params(corpus, 8, 0, c), InvalidArgument);
}

TEST_CASE("encode_concept normalizes rows (3-4-5 triangle)") {
    TrainingCorpus corpus = small_corpus(2, 2);
    Rng rng(2);
    EncoderParams p = init_params(corpus, 4, 2, rng);
    std::span<double> row = p.concept_table.row(0);
    row[0] = 3.0;
    row[1] = 4.0;
    row[2] = 0.0;
    row[3] = 0.0;
    Vec v = encode_concept(p, 0);
    CHECK(v[0] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(v[1] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(norm(v) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("encode_concept: proportional rows give identical embeddings") {
    // Direct recomputation: scaling a row by any positive factor cannot move
    // the normalized vector.
    TrainingCorpus corpus = small_corpus(2, 2);
    Rng rng(3);
    EncoderParams p = init_params(corpus, 6, 2, rng);
    for (std::size_t i = 0; i < 6; ++i) p.concept_table.at(1, i) = 2.5 * p.concept_table.at(0, i);
    Vec a = encode_concept(p, 0);
    Vec b = encode_concept(p, 1);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("encode_concept rejects a zero row") {
    TrainingCorpus corpus = small_corpus(2, 2);
    Rng rng(4);
    EncoderParams p = init_params(corpus, 4, 2, rng);
    for (std::size_t i = 0; i < 4; ++i) p.concept_table.at(0, i) = 0.0;
    CHECK_THROWS_AS(encode_concept(p, 0), NumericalError);
}

TEST_CASE("encode_property matches a hand-computed 2x2 forward pass") {
    TrainingCorpus corpus = small_corpus(2, 2);
    Rng rng(5);
    EncoderParams p = init_params(corpus, 2, 2, rng);
    // x = (0.5, -1), w1 = [[1, 0], [0, 1]], b1 = (0, 0.5)
    p.property_table.at(0, 0) = 0.5;
    p.property_table.at(0, 1) = -1.0;
    p.prop_head.w1.at(0, 0) = 1.0;
    p.prop_head.w1.at(0, 1) = 0.0;
    p.prop_head.w1.at(1, 0) = 0.0;
    p.prop_head.w1.at(1, 1) = 1.0;
    p.prop_head.b1 = {0.0, 0.5};
    // w2 = [[2, 1], [0, -1]], b2 = (0.25, 0)
    p.prop_head.w2.at(0, 0) = 2.0;
    p.prop_head.w2.at(0, 1) = 1.0;
    p.prop_head.w2.at(1, 0) = 0.0;
    p.prop_head.w2.at(1, 1) = -1.0;
    p.prop_head.b2 = {0.25, 0.0};

    const double t0 = std::tanh(0.5);
    const double t1 = std::tanh(-0.5);
    Vec y = encode_property(p, 0);
    CHECK(y[0] == doctest::Approx(2.0 * t0 + t1 + 0.25).epsilon(1e-12));
    CHECK(y[1] == doctest::Approx(-t1).epsilon(1e-12));
}

TEST_CASE("encode_property with zeroed output layer returns the bias") {
    TrainingCorpus corpus = small_corpus(2, 2);
    Rng rng(6);
    EncoderParams p = init_params(corpus, 4, 3, rng);
    for (double& v : p.prop_head.w2.data()) v = 0.0;
    p.prop_head.b2.assign(4, 0.0);
    Vec y = encode_property(p, 0);
    for (double v : y) CHECK(v == 0.0);
}

TEST_CASE("prop and facet heads differ on random params, and outputs are unnormalized") {
    TrainingCorpus corpus = small_corpus(3, 3);
    Rng rng(7);
    EncoderParams p = init_params(corpus, 16, 8, rng);
    int differing = 0;
    for (int prop = 0; prop < 3; ++prop) {
        Vec a = encode_property(p, prop);
        Vec b = encode_facet(p, prop);
        if (a != b) ++differing;
        CHECK(std::abs(norm(a) - 1.0) > 1e-6);  // no normalization constraint
    }
    CHECK(differing == 3);
}

TEST_CASE("encoders are pure") {
    TrainingCorpus corpus = small_corpus();
    Rng rng(8);
    EncoderParams p = init_params(corpus, 8, 4, rng);
    CHECK(encode_concept(p, 0) == encode_concept(p, 0));
    CHECK(encode_property(p, 0) == encode_property(p, 0));
    CHECK(encode_facet(p, 0) == encode_facet(p, 0));
}

TEST_CASE("materialize matches single-item encoders bit for bit") {
    TrainingCorpus corpus = small_corpus(4, 3);
    Rng rng(9);
    EncoderParams p = init_params(corpus, 8, 4, rng);
    EmbeddingSpace space = materialize(p, corpus);
    CHECK(space.concept_vecs.rows() == 4);
    CHECK(space.property_vecs.rows() == 3);
    CHECK(space.facet_vecs.rows() == 3);
    for (int c = 0; c < 4; ++c) {
        Vec v = encode_concept(p, c);
        for (std::size_t i = 0; i < v.size(); ++i) CHECK(space.concept_vecs.at(c, i) == v[i]);
    }
    for (int prop = 0; prop < 3; ++prop) {
        Vec v = encode_facet(p, prop);
        for (std::size_t i = 0; i < v.size(); ++i) CHECK(space.facet_vecs.at(prop, i) == v[i]);
    }
}

TEST_CASE("materialize rejects an empty property vocabulary") {
    CorpusBuilder builder;
    TrainingCorpus corpus = builder.build();
    EncoderParams p;
    p.dim = 4;
    CHECK_THROWS_AS(materialize(p, corpus), InvalidArgument);
}

TEST_CASE("checkpoint round-trip is bitwise exact") {
    TrainingCorpus corpus = small_corpus(5, 4);
    Rng rng(10);
    EncoderParams p = init_params(corpus, 8, 4, rng);
    TempDir dir;
    std::string path = dir.file("model.fcsp");
    save_checkpoint(p, corpus, path);
    EncoderParams loaded = load_checkpoint(path, corpus);
    CHECK(loaded == p);
}

TEST_CASE("checkpoint load rejects corrupted header and foreign corpus") {
    TrainingCorpus corpus = small_corpus(3, 2);
    Rng rng(11);
    EncoderParams p = init_params(corpus, 8, 4, rng);
    TempDir dir;
    std::string path = dir.file("model.fcsp");
    save_checkpoint(p, corpus, path);

    std::string bytes = testsupport::read_file(path);
    bytes[0] = 'X';
    TempDir dir2;
    std::string corrupted = dir2.write("bad.fcsp", bytes);
    CHECK_THROWS_AS(load_checkpoint(corrupted, corpus), FormatError);

    bytes = testsupport::read_file(path);
    bytes[4] = 9;  // version field
    std::string wrong_version = dir2.write("version.fcsp", bytes);
    CHECK_THROWS_WITH_AS(load_checkpoint(wrong_version, corpus), doctest::Contains("version"),
                         FormatError);

    CorpusBuilder extra;
    for (int c = 0; c < 4; ++c) extra.add_cp("c" + std::to_string(c), "p" + std::to_string(c % 2));
    for (int q = 0; q < 2; ++q) extra.add_pf("p" + std::to_string(q), "f0");
    TrainingCorpus other = extra.build();
    CHECK_THROWS_AS(load_checkpoint(path, other), StateMismatchError);
}
