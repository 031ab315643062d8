#include <iostream>
#include <sstream>

#include "commands.hpp"
#include "facetemb/facets.hpp"

namespace facetemb::cli {

int run_extract(const GlobalOpts& global, const ExtractOpts& opts) {
    ManifestWriter writer(global, "extract");
    RunManifest& manifest = writer.manifest();
    manifest.add_config("checkpoint", opts.checkpoint);
    manifest.add_config("cp", opts.cp_path);
    manifest.add_config("pf", opts.pf_path);
    manifest.add_config("k", std::to_string(opts.k));
    manifest.add_input(opts.checkpoint);
    manifest.add_input(opts.cp_path);
    if (!opts.pf_path.empty()) manifest.add_input(opts.pf_path);

    CorpusInputs inputs = load_corpus_inputs(opts.cp_path, opts.pf_path);
    EncoderParams params = load_checkpoint(opts.checkpoint, inputs.corpus);
    EmbeddingSpace space = materialize(params, inputs.corpus);

    std::vector<int> all_properties(static_cast<std::size_t>(inputs.corpus.properties.size()));
    for (int p = 0; p < inputs.corpus.properties.size(); ++p)
        all_properties[static_cast<std::size_t>(p)] = p;
    FacetDecomposition decomp = decompose(space, all_properties, opts.k, global.seed);

    std::string path = global.out_dir + "/facets.json";
    std::ostringstream out;
    write_decomposition_json(decomp, inputs.corpus, out);
    write_text_file(path, out.str());
    manifest.outputs.push_back(path);

    std::vector<std::vector<int>> members = decomp.members();
    std::cout << "k=" << decomp.k << " cluster_sizes=";
    for (std::size_t j = 0; j < members.size(); ++j)
        std::cout << (j ? "," : "") << members[j].size();
    std::cout << "\n";
    writer.write();
    return 0;
}

}  // namespace facetemb::cli
