#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "facetemb/corpus.hpp"
#include "facetemb/manifest.hpp"

namespace facetemb::cli {

struct GlobalOpts {
    std::uint64_t seed = 42;
    std::string out_dir = "out";
    int threads = 1;
};

/// Loads cp (+ optional pf / labeled) files into one vocabulary universe.
struct CorpusInputs {
    TrainingCorpus corpus;
    std::vector<LabeledPair> labeled;
};
CorpusInputs load_corpus_inputs(const std::string& cp_path, const std::string& pf_path,
                                const std::string& labeled_path = "");

/// Same vocabularies and pf pairs, but cp pairs replaced.
TrainingCorpus with_cp_pairs(const TrainingCorpus& corpus, const std::vector<CpPair>& pairs);

/// Starts timing on construction; write() stamps wall time and writes
/// manifest_<command>.json into out_dir.
class ManifestWriter {
public:
    ManifestWriter(const GlobalOpts& global, std::string command);
    RunManifest& manifest() { return manifest_; }
    void write();

private:
    std::string out_dir_;
    RunManifest manifest_;
    std::chrono::steady_clock::time_point start_;
};

std::string ensure_out_dir(const std::string& out_dir);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};
std::string format_table_text(const Table& table);
std::string format_table_tsv(const Table& table);
std::string fmt_double(double v, int precision = 4);

void write_text_file(const std::string& path, const std::string& contents);

}  // namespace facetemb::cli
