#include <fstream>
#include <iostream>
#include <sstream>

#include "commands.hpp"
#include "facetemb/errors.hpp"
#include "facetemb/metrics.hpp"
#include "facetemb/training.hpp"

namespace facetemb::cli {

namespace {

struct SplitRun {
    std::string name;
    SplitSpec spec;
};

std::vector<int> read_concept_list(const std::string& path, const TrainingCorpus& corpus) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open test concept list: " + path);
    std::vector<int> ids;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::optional<int> id = corpus.concepts.find(line);
        if (!id) throw FormatError(path + ": unknown concept '" + line + "'");
        ids.push_back(*id);
    }
    if (ids.empty()) throw FormatError(path + ": no concepts");
    return ids;
}

}  // namespace

int run_eval(const GlobalOpts& global, const EvalOpts& opts) {
    if (opts.labeled_path.empty()) throw InvalidArgument("eval needs --labeled");
    if (opts.cp_path.empty()) throw InvalidArgument("eval needs --cp");
    LossMode mode;
    if (opts.mode == "faceted")
        mode = LossMode::faceted;
    else if (opts.mode == "baseline")
        mode = LossMode::baseline;
    else
        throw InvalidArgument("--mode must be faceted or baseline, got '" + opts.mode + "'");

    ManifestWriter writer(global, "eval");
    RunManifest& manifest = writer.manifest();
    manifest.add_config("labeled", opts.labeled_path);
    manifest.add_config("cp", opts.cp_path);
    manifest.add_config("pf", opts.pf_path);
    manifest.add_config("checkpoint", opts.checkpoint);
    manifest.add_config("split", opts.split);
    manifest.add_config("folds", std::to_string(opts.folds));
    manifest.add_config("mode", opts.mode);
    manifest.add_input(opts.labeled_path);
    manifest.add_input(opts.cp_path);
    if (!opts.pf_path.empty()) manifest.add_input(opts.pf_path);
    if (!opts.checkpoint.empty()) manifest.add_input(opts.checkpoint);

    // The labeled file is loaded against the cp/pf vocabularies so split ids,
    // checkpoints and encoders all live in one universe.
    CorpusInputs inputs = load_corpus_inputs(opts.cp_path, opts.pf_path, opts.labeled_path);
    if (inputs.labeled.empty()) throw FormatError(opts.labeled_path + ": no labeled pairs");

    std::vector<SplitRun> runs;
    auto add_run = [&](const std::string& name) {
        SplitRun run;
        run.name = name;
        run.spec.seed = global.seed;
        if (name == "concept") {
            run.spec.mode = SplitMode::concepts;
            run.spec.folds = opts.folds > 0 ? opts.folds : 5;
            if (!opts.test_concepts_path.empty()) {
                run.spec.folds = 1;
                run.spec.fixed_test_concepts = read_concept_list(opts.test_concepts_path, inputs.corpus);
            }
        } else if (name == "property") {
            run.spec.mode = SplitMode::properties;
            run.spec.folds = opts.folds > 0 ? opts.folds : 5;
        } else if (name == "cpp") {
            run.spec.mode = SplitMode::concept_plus_property;
            run.spec.folds = opts.folds > 0 ? opts.folds : 3;
        } else {
            throw InvalidArgument("--split must be concept, property, cpp or all, got '" + name + "'");
        }
        runs.push_back(std::move(run));
    };
    if (opts.split == "all") {
        add_run("concept");
        add_run("property");
        add_run("cpp");
    } else {
        add_run(opts.split);
    }

    TrainConfig train_cfg;
    train_cfg.lr = opts.lr;
    train_cfg.batch_size = opts.batch_size;
    train_cfg.max_epochs = opts.max_epochs;
    train_cfg.patience = opts.patience;
    train_cfg.loss_mode = mode;

    LossConfig loss_cfg;
    loss_cfg.tau = opts.tau;
    loss_cfg.n_neg_cp = opts.n_neg;
    loss_cfg.n_neg_pf = opts.pf_neg;

    Table table;
    table.header = {"split", "partitions", "precision", "recall", "f1"};
    for (const SplitRun& run : runs) {
        std::vector<SplitPartition> parts = make_splits(inputs.corpus, inputs.labeled, run.spec);
        double sum_p = 0.0, sum_r = 0.0, sum_f1 = 0.0;
        int fold_index = 0;
        for (const SplitPartition& part : parts) {
            std::vector<CpPair> positives;
            for (const LabeledPair& lp : part.train)
                if (lp.label) positives.emplace_back(lp.concept_id, lp.property_id);
            if (positives.empty() || part.validation.empty() || part.test.empty())
                throw InvalidArgument("split '" + run.name +
                                      "' produced an unusable partition; use more labeled data");
            TrainingCorpus fold_corpus = with_cp_pairs(inputs.corpus, positives);

            EncoderParams params;
            if (opts.checkpoint.empty()) {
                Rng rng = Rng(global.seed).child(static_cast<std::uint64_t>(1000 + fold_index));
                params = init_params(inputs.corpus, 32, 32, rng);
            } else {
                params = load_checkpoint(opts.checkpoint, inputs.corpus);
            }
            TrainConfig fold_cfg = train_cfg;
            fold_cfg.seed = splitmix64(global.seed ^ static_cast<std::uint64_t>(fold_index));
            auto [best, report] = train(fold_corpus, std::move(params), fold_cfg, loss_cfg, part.validation);
            Prf prf = eval_f1(best, part.test, mode);
            sum_p += prf.precision;
            sum_r += prf.recall;
            sum_f1 += prf.f1;
            ++fold_index;
        }
        double n = static_cast<double>(parts.size());
        table.rows.push_back({run.name, std::to_string(parts.size()), fmt_double(sum_p / n),
                              fmt_double(sum_r / n), fmt_double(sum_f1 / n)});
    }

    std::string text = format_table_text(table);
    write_text_file(global.out_dir + "/eval_results.txt", text);
    write_text_file(global.out_dir + "/eval_results.tsv", format_table_tsv(table));
    manifest.outputs.push_back(global.out_dir + "/eval_results.txt");
    manifest.outputs.push_back(global.out_dir + "/eval_results.tsv");
    std::cout << text;
    writer.write();
    return 0;
}

}  // namespace facetemb::cli
