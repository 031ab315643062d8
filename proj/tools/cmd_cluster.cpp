#include <iostream>
#include <sstream>

#include "commands.hpp"
#include "facetemb/augment.hpp"
#include "facetemb/errors.hpp"

namespace facetemb::cli {

int run_cluster(const GlobalOpts& global, const ClusterOpts& opts) {
    if (opts.mode != "clu" && opts.mode != "mclu")
        throw InvalidArgument("--mode must be clu or mclu, got '" + opts.mode + "'");
    AugmentFormat format;
    if (opts.format == "labels")
        format = AugmentFormat::labels;
    else if (opts.format == "rules")
        format = AugmentFormat::rules;
    else
        throw InvalidArgument("--format must be labels or rules, got '" + opts.format + "'");

    ManifestWriter writer(global, "cluster");
    RunManifest& manifest = writer.manifest();
    manifest.add_config("checkpoint", opts.checkpoint);
    manifest.add_config("cp", opts.cp_path);
    manifest.add_config("pf", opts.pf_path);
    manifest.add_config("mode", opts.mode);
    manifest.add_config("k", std::to_string(opts.k));
    manifest.add_config("preference", fmt_double(opts.preference, 4));
    manifest.add_config("damping", fmt_double(opts.damping, 4));
    manifest.add_config("format", opts.format);
    manifest.add_input(opts.checkpoint);
    manifest.add_input(opts.cp_path);
    if (!opts.pf_path.empty()) manifest.add_input(opts.pf_path);

    CorpusInputs inputs = load_corpus_inputs(opts.cp_path, opts.pf_path);
    EncoderParams params = load_checkpoint(opts.checkpoint, inputs.corpus);
    EmbeddingSpace space = materialize(params, inputs.corpus);

    ApConfig ap;
    ap.preference_quantile = opts.preference;
    ap.damping = opts.damping;

    std::string ext = opts.format == "labels" ? ".labels.tsv" : ".rules";
    if (opts.mode == "clu") {
        Clustering clustering = cluster_concepts(space.concept_vecs, ap);
        std::ostringstream out;
        emit_clu_augmentation(clustering, inputs.corpus.concepts.items(), format, out, 0,
                              opts.skip_singletons);
        std::string path = global.out_dir + "/augment_clu" + ext;
        write_text_file(path, out.str());
        manifest.outputs.push_back(path);
        std::cout << "clusters=" << clustering.n_clusters() << " file=" << path << "\n";
    } else {
        std::vector<int> all_properties(static_cast<std::size_t>(inputs.corpus.properties.size()));
        for (int p = 0; p < inputs.corpus.properties.size(); ++p)
            all_properties[static_cast<std::size_t>(p)] = p;
        FacetDecomposition decomp = decompose(space, all_properties, opts.k, global.seed);

        std::vector<int> all_concepts(static_cast<std::size_t>(inputs.corpus.concepts.size()));
        for (int c = 0; c < inputs.corpus.concepts.size(); ++c)
            all_concepts[static_cast<std::size_t>(c)] = c;
        std::vector<FacetClustering> clusterings = mclu(space, decomp, all_concepts, ap);

        int emitted = 0;
        for (const FacetClustering& fc : clusterings) {
            if (fc.skipped) {
                std::cout << "facet " << fc.facet << " skipped: " << fc.note << "\n";
                manifest.add_config("skipped_facet_" + std::to_string(fc.facet), fc.note);
                continue;
            }
            std::vector<std::string> names;
            names.reserve(fc.concept_ids.size());
            for (int c : fc.concept_ids) names.push_back(inputs.corpus.concepts.item(c));
            std::ostringstream out;
            emit_clu_augmentation(fc.clustering, names, format, out, fc.facet, opts.skip_singletons);
            std::string path = global.out_dir + "/augment_facet" + std::to_string(fc.facet) + ext;
            write_text_file(path, out.str());
            manifest.outputs.push_back(path);
            ++emitted;
        }
        std::cout << "facets=" << clusterings.size() << " files=" << emitted << "\n";
    }
    writer.write();
    return 0;
}

}  // namespace facetemb::cli
