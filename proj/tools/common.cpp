#include "common.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "facetemb/errors.hpp"

namespace facetemb::cli {

CorpusInputs load_corpus_inputs(const std::string& cp_path, const std::string& pf_path,
                                const std::string& labeled_path) {
    CorpusBuilder builder;
    if (!cp_path.empty()) builder.load_pair_file(cp_path, PairFileFormat::cp_tsv);
    if (!pf_path.empty()) builder.load_pair_file(pf_path, PairFileFormat::pf_tsv);
    if (!labeled_path.empty()) builder.load_pair_file(labeled_path, PairFileFormat::labeled_tsv);
    CorpusInputs inputs;
    inputs.corpus = builder.build();
    inputs.labeled = builder.labeled();
    inputs.corpus.check_invariants(false);
    return inputs;
}

TrainingCorpus with_cp_pairs(const TrainingCorpus& corpus, const std::vector<CpPair>& pairs) {
    TrainingCorpus out;
    out.concepts = corpus.concepts;
    out.properties = corpus.properties;
    out.facets = corpus.facets;
    out.pf_pairs = corpus.pf_pairs;
    for (auto [c, p] : pairs) out.cp_pairs.insert(c, p);
    return out;
}

ManifestWriter::ManifestWriter(const GlobalOpts& global, std::string command)
    : out_dir_(ensure_out_dir(global.out_dir)), start_(std::chrono::steady_clock::now()) {
    manifest_.command = std::move(command);
    manifest_.seed = global.seed;
    manifest_.add_config("out_dir", global.out_dir);
    manifest_.add_config("threads", std::to_string(global.threads));
}

void ManifestWriter::write() {
    manifest_.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    std::string name = manifest_.command;
    for (char& ch : name)
        if (ch == ' ') ch = '-';
    write_manifest(manifest_, out_dir_ + "/manifest_" + name + ".json");
}

std::string ensure_out_dir(const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + out_dir);
    return out_dir;
}

std::string format_table_text(const Table& table) {
    std::vector<std::size_t> widths(table.header.size(), 0);
    for (std::size_t c = 0; c < table.header.size(); ++c) widths[c] = table.header[c].size();
    for (const std::vector<std::string>& row : table.rows)
        for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());

    std::string out;
    auto emit_row = [&](const std::vector<std::string>& row) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out += row[c];
            if (c + 1 < row.size()) out.append(widths[c] - row[c].size() + 2, ' ');
        }
        out += '\n';
    };
    emit_row(table.header);
    std::size_t total = 0;
    for (std::size_t w : widths) total += w + 2;
    out.append(total > 2 ? total - 2 : total, '-');
    out += '\n';
    for (const std::vector<std::string>& row : table.rows) emit_row(row);
    return out;
}

std::string format_table_tsv(const Table& table) {
    std::string out;
    auto emit_row = [&](const std::vector<std::string>& row) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out += row[c];
            out += c + 1 < row.size() ? '\t' : '\n';
        }
    };
    emit_row(table.header);
    for (const std::vector<std::string>& row : table.rows) emit_row(row);
    return out;
}

std::string fmt_double(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw IoError("cannot write: " + path);
    out << contents;
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace facetemb::cli
