#include <fstream>
#include <iostream>
#include <sstream>

#include "commands.hpp"
#include "facetemb/errors.hpp"

namespace facetemb::cli {

namespace {

void write_corpus_files(const TrainingCorpus& corpus, const std::string& out_dir,
                        RunManifest& manifest, bool write_pf) {
    std::string cp_path = out_dir + "/cp.tsv";
    std::ostringstream cp;
    write_cp_tsv(corpus, cp);
    write_text_file(cp_path, cp.str());
    manifest.outputs.push_back(cp_path);
    if (write_pf) {
        std::string pf_path = out_dir + "/pf.tsv";
        std::ostringstream pf;
        write_pf_tsv(corpus, pf);
        write_text_file(pf_path, pf.str());
        manifest.outputs.push_back(pf_path);
    }
}

void print_counts(const TrainingCorpus& corpus) {
    std::cout << "concepts=" << corpus.concepts.size() << " properties=" << corpus.properties.size()
              << " facets=" << corpus.facets.size() << " cp_pairs=" << corpus.cp_pairs.size()
              << " pf_pairs=" << corpus.pf_pairs.size() << "\n";
}

}  // namespace

int run_ingest_conceptnet(const GlobalOpts& global, const IngestConceptnetOpts& opts) {
    ManifestWriter writer(global, "ingest conceptnet");
    writer.manifest().add_config("input", opts.input);
    writer.manifest().add_config("min_tail_count", std::to_string(opts.min_tail_count));
    writer.manifest().add_config("relations", opts.relations);
    writer.manifest().add_input(opts.input);

    IngestOptions ingest;
    ingest.min_tail_count = opts.min_tail_count;
    if (opts.relations != "default") {
        ingest.allowed_relations.clear();
        std::istringstream in(opts.relations);
        std::string rel;
        while (std::getline(in, rel, ','))
            if (!rel.empty()) ingest.allowed_relations.insert(rel);
        if (ingest.allowed_relations.empty())
            throw InvalidArgument("--relations needs 'default' or a comma-separated list");
    }

    TrainingCorpus corpus = ingest_conceptnet(read_conceptnet_file(opts.input), ingest);
    write_corpus_files(corpus, global.out_dir, writer.manifest(), true);
    print_counts(corpus);
    writer.write();
    return 0;
}

int run_ingest_pairs(const GlobalOpts& global, const IngestPairsOpts& opts) {
    if (opts.cp_path.empty()) throw InvalidArgument("ingest pairs needs --cp");
    ManifestWriter writer(global, "ingest pairs");
    writer.manifest().add_config("cp", opts.cp_path);
    writer.manifest().add_config("pf", opts.pf_path);
    writer.manifest().add_config("labeled", opts.labeled_path);
    writer.manifest().add_input(opts.cp_path);
    if (!opts.pf_path.empty()) writer.manifest().add_input(opts.pf_path);
    if (!opts.labeled_path.empty()) writer.manifest().add_input(opts.labeled_path);

    CorpusInputs inputs = load_corpus_inputs(opts.cp_path, opts.pf_path, opts.labeled_path);
    write_corpus_files(inputs.corpus, global.out_dir, writer.manifest(), !opts.pf_path.empty());
    if (!opts.labeled_path.empty()) {
        std::string path = global.out_dir + "/labeled.tsv";
        std::ostringstream out;
        write_labeled_tsv(inputs.corpus, inputs.labeled, out);
        write_text_file(path, out.str());
        writer.manifest().outputs.push_back(path);
    }
    print_counts(inputs.corpus);
    writer.write();
    return 0;
}

}  // namespace facetemb::cli
