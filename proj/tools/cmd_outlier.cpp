#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "commands.hpp"
#include "facetemb/errors.hpp"
#include "facetemb/facets.hpp"
#include "facetemb/outlier.hpp"
#include "facetemb/parallel.hpp"

namespace facetemb::cli {

int run_outlier_build(const GlobalOpts& global, const OutlierBuildOpts& opts) {
    if (opts.db_paths.empty()) throw InvalidArgument("outlier build needs at least one --db");
    if (opts.groups_path.empty()) throw InvalidArgument("outlier build needs --groups");

    ManifestWriter writer(global, "outlier build");
    RunManifest& manifest = writer.manifest();
    for (const std::string& path : opts.db_paths) {
        manifest.add_config("db", path);
        manifest.add_input(path);
    }
    manifest.add_config("groups", opts.groups_path);
    manifest.add_config("properties", opts.properties);
    manifest.add_config("n_instances", std::to_string(opts.n_instances));
    manifest.add_input(opts.groups_path);

    PropertyDB db;
    for (const std::string& path : opts.db_paths) db.add_pairs_file(path);
    db.load_groups_file(opts.groups_path);

    std::vector<std::string> properties;
    if (opts.properties == "all") {
        properties = db.properties_with_groups();
    } else {
        std::istringstream in(opts.properties);
        std::string name;
        while (std::getline(in, name, ','))
            if (!name.empty()) properties.push_back(name);
    }
    if (properties.empty()) throw InvalidArgument("no properties to build instances for");

    std::vector<OutlierInstance> instances;
    for (const std::string& property : properties) {
        std::vector<OutlierInstance> batch =
            build_outlier_benchmark(db, property, opts.n_instances, global.seed);
        instances.insert(instances.end(), batch.begin(), batch.end());
    }

    std::string path = global.out_dir + "/benchmark.jsonl";
    std::ostringstream out;
    write_benchmark_jsonl(instances, out);
    write_text_file(path, out.str());
    manifest.outputs.push_back(path);
    std::cout << "properties=" << properties.size() << " instances=" << instances.size() << "\n";
    writer.write();
    return 0;
}

namespace {

std::vector<int> instance_concept_ids(const OutlierInstance& inst, const TrainingCorpus& corpus) {
    std::vector<int> ids;
    ids.reserve(inst.concepts.size());
    for (const std::string& name : inst.concepts) {
        std::optional<int> id = corpus.concepts.find(name);
        if (!id)
            throw FormatError("benchmark concept '" + name + "' is not in the corpus vocabulary");
        ids.push_back(*id);
    }
    return ids;
}

}  // namespace

int run_outlier_run(const GlobalOpts& global, const OutlierRunOpts& opts) {
    bool run_single = opts.strategy == "single" || opts.strategy == "both";
    bool run_multi = opts.strategy == "multi" || opts.strategy == "both";
    if (!run_single && !run_multi)
        throw InvalidArgument("--strategy must be single, multi or both, got '" + opts.strategy + "'");

    ManifestWriter writer(global, "outlier run");
    RunManifest& manifest = writer.manifest();
    manifest.add_config("benchmark", opts.benchmark);
    manifest.add_config("checkpoint", opts.checkpoint);
    manifest.add_config("cp", opts.cp_path);
    manifest.add_config("pf", opts.pf_path);
    manifest.add_config("strategy", opts.strategy);
    manifest.add_config("k", std::to_string(opts.k));
    manifest.add_input(opts.benchmark);
    manifest.add_input(opts.checkpoint);
    manifest.add_input(opts.cp_path);
    if (!opts.pf_path.empty()) manifest.add_input(opts.pf_path);

    CorpusInputs inputs = load_corpus_inputs(opts.cp_path, opts.pf_path);
    EncoderParams params = load_checkpoint(opts.checkpoint, inputs.corpus);
    EmbeddingSpace space = materialize(params, inputs.corpus);

    std::ifstream bench_in(opts.benchmark);
    if (!bench_in) throw IoError("cannot open benchmark: " + opts.benchmark);
    std::vector<OutlierInstance> instances = read_benchmark_jsonl(bench_in);

    FacetDecomposition decomp;
    FacetedConceptVecs faceted;
    if (run_multi) {
        std::vector<int> all_properties(static_cast<std::size_t>(inputs.corpus.properties.size()));
        for (int p = 0; p < inputs.corpus.properties.size(); ++p)
            all_properties[static_cast<std::size_t>(p)] = p;
        decomp = decompose(space, all_properties, opts.k, global.seed);
        faceted = faceted_vectors(space, decomp);
    }

    std::vector<char> single_hit(instances.size(), 0);
    std::vector<char> multi_hit(instances.size(), 0);
    parallel_for_indexed(instances.size(), global.threads, [&](std::size_t i) {
        const OutlierInstance& inst = instances[i];
        std::vector<int> ids = instance_concept_ids(inst, inputs.corpus);
        if (run_single) {
            std::vector<Vec> vecs;
            vecs.reserve(ids.size());
            for (int id : ids) vecs.push_back(to_vec(space.concept_vecs.row(static_cast<std::size_t>(id))));
            single_hit[i] = exact_match(detect_outliers_single(vecs), inst.positives) ? 1 : 0;
        }
        if (run_multi) {
            std::vector<std::vector<MaskedVec>> per_facet(static_cast<std::size_t>(decomp.k));
            for (int f = 0; f < decomp.k; ++f) {
                per_facet[static_cast<std::size_t>(f)].reserve(ids.size());
                for (int id : ids) {
                    MaskedVec mv;
                    mv.v = to_vec(faceted.vecs[static_cast<std::size_t>(f)].row(static_cast<std::size_t>(id)));
                    mv.degenerate = faceted.degenerate[static_cast<std::size_t>(f)][static_cast<std::size_t>(id)] != 0;
                    per_facet[static_cast<std::size_t>(f)].push_back(std::move(mv));
                }
            }
            multi_hit[i] = exact_match(detect_outliers_multi(per_facet).prediction, inst.positives) ? 1 : 0;
        }
    });

    // Per-property exact-match table, properties in first-appearance order.
    std::vector<std::string> order;
    std::map<std::string, std::pair<long, std::pair<long, long>>> stats;  // n, (single, multi)
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const std::string& prop = instances[i].property;
        if (!stats.contains(prop)) order.push_back(prop);
        auto& entry = stats[prop];
        ++entry.first;
        entry.second.first += single_hit[i];
        entry.second.second += multi_hit[i];
    }

    Table table;
    table.header = {"property", "instances"};
    if (run_single) table.header.push_back("single_exact_match");
    if (run_multi) table.header.push_back("multi_exact_match");
    long n_total = 0, single_total = 0, multi_total = 0;
    for (const std::string& prop : order) {
        const auto& entry = stats[prop];
        std::vector<std::string> row = {prop, std::to_string(entry.first)};
        if (run_single)
            row.push_back(fmt_double(100.0 * static_cast<double>(entry.second.first) /
                                     static_cast<double>(entry.first), 1));
        if (run_multi)
            row.push_back(fmt_double(100.0 * static_cast<double>(entry.second.second) /
                                     static_cast<double>(entry.first), 1));
        table.rows.push_back(std::move(row));
        n_total += entry.first;
        single_total += entry.second.first;
        multi_total += entry.second.second;
    }
    std::vector<std::string> total_row = {"TOTAL", std::to_string(n_total)};
    if (run_single)
        total_row.push_back(fmt_double(100.0 * static_cast<double>(single_total) /
                                       static_cast<double>(n_total), 1));
    if (run_multi)
        total_row.push_back(fmt_double(100.0 * static_cast<double>(multi_total) /
                                       static_cast<double>(n_total), 1));
    table.rows.push_back(std::move(total_row));

    std::string text = format_table_text(table);
    write_text_file(global.out_dir + "/outlier_results.txt", text);
    write_text_file(global.out_dir + "/outlier_results.tsv", format_table_tsv(table));
    manifest.outputs.push_back(global.out_dir + "/outlier_results.txt");
    manifest.outputs.push_back(global.out_dir + "/outlier_results.tsv");
    std::cout << text;
    writer.write();
    return 0;
}

}  // namespace facetemb::cli
