#include <iostream>
#include <sstream>

#include "commands.hpp"
#include "facetemb/errors.hpp"
#include "facetemb/facets.hpp"

namespace facetemb::cli {

int run_neighbours(const GlobalOpts& global, const NeighboursOpts& opts) {
    ManifestWriter writer(global, "neighbours");
    RunManifest& manifest = writer.manifest();
    manifest.add_config("checkpoint", opts.checkpoint);
    manifest.add_config("cp", opts.cp_path);
    manifest.add_config("pf", opts.pf_path);
    manifest.add_config("concept", opts.concept_name);
    manifest.add_config("facet", std::to_string(opts.facet));
    manifest.add_config("top", std::to_string(opts.top));
    manifest.add_config("k", std::to_string(opts.k));
    manifest.add_input(opts.checkpoint);
    manifest.add_input(opts.cp_path);
    if (!opts.pf_path.empty()) manifest.add_input(opts.pf_path);

    CorpusInputs inputs = load_corpus_inputs(opts.cp_path, opts.pf_path);
    std::optional<int> concept_id = inputs.corpus.concepts.find(opts.concept_name);
    if (!concept_id) throw InvalidArgument("unknown concept: " + opts.concept_name);

    EncoderParams params = load_checkpoint(opts.checkpoint, inputs.corpus);
    EmbeddingSpace space = materialize(params, inputs.corpus);
    std::vector<int> all_properties(static_cast<std::size_t>(inputs.corpus.properties.size()));
    for (int p = 0; p < inputs.corpus.properties.size(); ++p)
        all_properties[static_cast<std::size_t>(p)] = p;
    FacetDecomposition decomp = decompose(space, all_properties, opts.k, global.seed);

    std::vector<int> facets;
    if (opts.facet >= 0) {
        if (opts.facet >= decomp.k) throw InvalidArgument("facet index out of range");
        facets.push_back(opts.facet);
    } else {
        for (int f = 0; f < decomp.k; ++f) facets.push_back(f);
    }

    std::ostringstream out;
    out << "nearest neighbours of '" << opts.concept_name << "'\n";
    for (int f : facets) {
        out << "facet " << f << ": ";
        try {
            std::vector<Neighbour> nn = facet_neighbours(space, decomp, *concept_id, f, opts.top);
            for (std::size_t i = 0; i < nn.size(); ++i) {
                if (i) out << ", ";
                out << inputs.corpus.concepts.item(nn[i].concept_id) << " ("
                    << fmt_double(nn[i].similarity, 3) << ")";
            }
            out << "\n";
        } catch (const NumericalError&) {
            out << "(degenerate in this facet)\n";
        }
    }
    std::string report = out.str();
    std::string path = global.out_dir + "/neighbours.txt";
    write_text_file(path, report);
    manifest.outputs.push_back(path);
    std::cout << report;
    writer.write();
    return 0;
}

}  // namespace facetemb::cli
