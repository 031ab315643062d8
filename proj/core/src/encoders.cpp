#include "facetemb/encoders.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "facetemb/errors.hpp"
#include "facetemb/hash.hpp"

namespace facetemb {

namespace {
constexpr double kNormFloor = 1e-12;
constexpr char kMagic[4] = {'F', 'C', 'S', 'P'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

Vec mlp_forward(const Mlp& mlp, std::span<const double> x) {
    const std::size_t h = mlp.b1.size();
    const std::size_t d = mlp.b2.size();
    Vec t(h);
    for (std::size_t i = 0; i < h; ++i) t[i] = std::tanh(dot(mlp.w1.row(i), x) + mlp.b1[i]);
    Vec y(d);
    for (std::size_t i = 0; i < d; ++i) y[i] = dot(mlp.w2.row(i), t) + mlp.b2[i];
    return y;
}

std::vector<ParamBlockRef> param_blocks(EncoderParams& p) {
    return {
        {"concept_table", p.concept_table.data()},
        {"property_table", p.property_table.data()},
        {"prop_head.w1", p.prop_head.w1.data()},
        {"prop_head.b1", p.prop_head.b1},
        {"prop_head.w2", p.prop_head.w2.data()},
        {"prop_head.b2", p.prop_head.b2},
        {"facet_head.w1", p.facet_head.w1.data()},
        {"facet_head.b1", p.facet_head.b1},
        {"facet_head.w2", p.facet_head.w2.data()},
        {"facet_head.b2", p.facet_head.b2},
    };
}

namespace {

void fill_uniform(std::span<double> data, double scale, Rng& rng) {
    for (double& v : data) v = rng.uniform(-scale, scale);
}

Mlp init_mlp(int dim, int hidden, Rng& rng) {
    Mlp mlp;
    mlp.w1 = Matrix(static_cast<std::size_t>(hidden), static_cast<std::size_t>(dim));
    mlp.b1.assign(static_cast<std::size_t>(hidden), 0.0);
    mlp.w2 = Matrix(static_cast<std::size_t>(dim), static_cast<std::size_t>(hidden));
    mlp.b2.assign(static_cast<std::size_t>(dim), 0.0);
    fill_uniform(mlp.w1.data(), 1.0 / std::sqrt(static_cast<double>(dim)), rng);
    fill_uniform(mlp.w2.data(), 1.0 / std::sqrt(static_cast<double>(hidden)), rng);
    return mlp;
}

}  // namespace

EncoderParams init_params(const TrainingCorpus& corpus, int dim, int hidden, Rng& rng) {
    if (dim < 2) throw InvalidArgument("dim must be >= 2");
    if (hidden < 1) throw InvalidArgument("hidden must be >= 1");

    EncoderParams p;
    p.dim = dim;
    p.hidden = hidden;
    p.concept_table = Matrix(static_cast<std::size_t>(corpus.concepts.size()), static_cast<std::size_t>(dim));
    p.property_table = Matrix(static_cast<std::size_t>(corpus.properties.size()), static_cast<std::size_t>(dim));
    const double table_scale = 1.0 / std::sqrt(static_cast<double>(dim));
    fill_uniform(p.concept_table.data(), table_scale, rng);
    fill_uniform(p.property_table.data(), table_scale, rng);
    p.prop_head = init_mlp(dim, hidden, rng);
    p.facet_head = init_mlp(dim, hidden, rng);
    return p;
}

Vec encode_concept(const EncoderParams& params, int concept_id) {
    std::span<const double> row = params.concept_table.row(static_cast<std::size_t>(concept_id));
    double n = norm(row);
    if (n < kNormFloor)
        throw NumericalError("concept row " + std::to_string(concept_id) + " has near-zero norm");
    Vec out = to_vec(row);
    scale(out, 1.0 / n);
    return out;
}

Vec encode_property(const EncoderParams& params, int property_id) {
    return mlp_forward(params.prop_head, params.property_table.row(static_cast<std::size_t>(property_id)));
}

Vec encode_facet(const EncoderParams& params, int property_id) {
    return mlp_forward(params.facet_head, params.property_table.row(static_cast<std::size_t>(property_id)));
}

EmbeddingSpace materialize(const EncoderParams& params, const TrainingCorpus& corpus) {
    if (corpus.concepts.size() == 0) throw InvalidArgument("empty concept vocabulary");
    if (corpus.properties.size() == 0) throw InvalidArgument("empty property vocabulary");

    EmbeddingSpace space;
    space.dim = params.dim;
    space.corpus = &corpus;
    const std::size_t d = static_cast<std::size_t>(params.dim);
    space.concept_vecs = Matrix(static_cast<std::size_t>(corpus.concepts.size()), d);
    space.property_vecs = Matrix(static_cast<std::size_t>(corpus.properties.size()), d);
    space.facet_vecs = Matrix(static_cast<std::size_t>(corpus.properties.size()), d);
    for (int c = 0; c < corpus.concepts.size(); ++c) {
        Vec v = encode_concept(params, c);
        std::copy(v.begin(), v.end(), space.concept_vecs.row(static_cast<std::size_t>(c)).begin());
    }
    for (int p = 0; p < corpus.properties.size(); ++p) {
        Vec pv = encode_property(params, p);
        Vec fv = encode_facet(params, p);
        std::copy(pv.begin(), pv.end(), space.property_vecs.row(static_cast<std::size_t>(p)).begin());
        std::copy(fv.begin(), fv.end(), space.facet_vecs.row(static_cast<std::size_t>(p)).begin());
    }
    return space;
}

namespace {

void write_bytes(std::ofstream& out, const void* data, std::size_t size) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
}

void read_bytes(std::ifstream& in, void* data, std::size_t size, const std::string& path) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
    if (static_cast<std::size_t>(in.gcount()) != size)
        throw FormatError(path + ": truncated checkpoint");
}

void write_u32(std::ofstream& out, std::uint32_t v) { write_bytes(out, &v, 4); }
void write_u64(std::ofstream& out, std::uint64_t v) { write_bytes(out, &v, 8); }

std::uint32_t read_u32(std::ifstream& in, const std::string& path) {
    std::uint32_t v = 0;
    read_bytes(in, &v, 4, path);
    return v;
}

std::uint64_t read_u64(std::ifstream& in, const std::string& path) {
    std::uint64_t v = 0;
    read_bytes(in, &v, 8, path);
    return v;
}

}  // namespace

void save_checkpoint(const EncoderParams& params, const TrainingCorpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    write_bytes(out, kMagic, 4);
    write_u32(out, kVersion);
    write_u32(out, static_cast<std::uint32_t>(params.dim));
    write_u32(out, static_cast<std::uint32_t>(params.hidden));
    write_u64(out, hash_string_list(corpus.concepts.items()));
    write_u64(out, hash_string_list(corpus.properties.items()));
    write_u64(out, hash_string_list(corpus.facets.items()));
    for (const ParamBlockRef& block : param_blocks(const_cast<EncoderParams&>(params)))
        write_bytes(out, block.data.data(), block.data.size() * sizeof(double));
    if (!out) throw IoError("write failed: " + path);
}

EncoderParams load_checkpoint(const std::string& path, const TrainingCorpus& corpus) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    char magic[4];
    read_bytes(in, magic, 4, path);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError(path + ": not a checkpoint file (bad magic)");
    std::uint32_t version = read_u32(in, path);
    if (version != kVersion)
        throw FormatError(path + ": unsupported checkpoint version " + std::to_string(version));
    int dim = static_cast<int>(read_u32(in, path));
    int hidden = static_cast<int>(read_u32(in, path));
    std::uint64_t concept_hash = read_u64(in, path);
    std::uint64_t property_hash = read_u64(in, path);
    std::uint64_t facet_hash = read_u64(in, path);
    if (concept_hash != hash_string_list(corpus.concepts.items()) ||
        property_hash != hash_string_list(corpus.properties.items()) ||
        facet_hash != hash_string_list(corpus.facets.items()))
        throw StateMismatchError(path + ": checkpoint was trained on a different corpus (vocab hash mismatch)");

    EncoderParams p;
    p.dim = dim;
    p.hidden = hidden;
    p.concept_table = Matrix(static_cast<std::size_t>(corpus.concepts.size()), static_cast<std::size_t>(dim));
    p.property_table = Matrix(static_cast<std::size_t>(corpus.properties.size()), static_cast<std::size_t>(dim));
    p.prop_head.w1 = Matrix(static_cast<std::size_t>(hidden), static_cast<std::size_t>(dim));
    p.prop_head.b1.assign(static_cast<std::size_t>(hidden), 0.0);
    p.prop_head.w2 = Matrix(static_cast<std::size_t>(dim), static_cast<std::size_t>(hidden));
    p.prop_head.b2.assign(static_cast<std::size_t>(dim), 0.0);
    p.facet_head = p.prop_head;
    for (const ParamBlockRef& block : param_blocks(p))
        read_bytes(in, block.data.data(), block.data.size() * sizeof(double), path);
    char extra;
    if (in.read(&extra, 1); in.gcount() != 0)
        throw FormatError(path + ": trailing bytes after parameter blocks");
    return p;
}

}  // namespace facetemb
