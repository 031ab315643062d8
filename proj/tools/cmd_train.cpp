#include <fstream>
#include <iostream>
#include <sstream>

#include "commands.hpp"
#include "facetemb/encoders.hpp"
#include "facetemb/errors.hpp"
#include "facetemb/training.hpp"

namespace facetemb::cli {

namespace {

LossMode parse_mode(const std::string& mode) {
    if (mode == "faceted") return LossMode::faceted;
    if (mode == "baseline") return LossMode::baseline;
    throw InvalidArgument("--mode must be faceted or baseline, got '" + mode + "'");
}

OptimizerKind parse_optimizer(const std::string& name) {
    if (name == "adam") return OptimizerKind::adam;
    if (name == "sgd") return OptimizerKind::sgd;
    throw InvalidArgument("--optimizer must be adam or sgd, got '" + name + "'");
}

}  // namespace

int run_train(const GlobalOpts& global, const TrainOpts& opts) {
    LossMode mode = parse_mode(opts.mode);
    if (opts.cp_path.empty()) throw InvalidArgument("train needs --cp");
    if (mode == LossMode::faceted && opts.pf_path.empty())
        throw InvalidArgument("faceted training needs --pf");

    ManifestWriter writer(global, "train");
    RunManifest& manifest = writer.manifest();
    manifest.add_config("cp", opts.cp_path);
    manifest.add_config("pf", opts.pf_path);
    manifest.add_config("labeled", opts.labeled_path);
    manifest.add_config("mode", opts.mode);
    manifest.add_config("dim", std::to_string(opts.dim));
    manifest.add_config("hidden", std::to_string(opts.hidden));
    manifest.add_config("lr", fmt_double(opts.lr, 8));
    manifest.add_config("batch_size", std::to_string(opts.batch_size));
    manifest.add_config("max_epochs", std::to_string(opts.max_epochs));
    manifest.add_config("patience", std::to_string(opts.patience));
    manifest.add_config("optimizer", opts.optimizer);
    manifest.add_config("weight_decay", fmt_double(opts.weight_decay, 8));
    manifest.add_config("tau", fmt_double(opts.tau, 8));
    manifest.add_config("n_neg", std::to_string(opts.n_neg));
    manifest.add_config("pf_neg", std::to_string(opts.pf_neg));
    manifest.add_input(opts.cp_path);
    if (!opts.pf_path.empty()) manifest.add_input(opts.pf_path);
    if (!opts.labeled_path.empty()) manifest.add_input(opts.labeled_path);

    CorpusInputs inputs = load_corpus_inputs(opts.cp_path, opts.pf_path, opts.labeled_path);

    TrainConfig train_cfg;
    train_cfg.lr = opts.lr;
    train_cfg.batch_size = opts.batch_size;
    train_cfg.max_epochs = opts.max_epochs;
    train_cfg.patience = opts.patience;
    train_cfg.optimizer = parse_optimizer(opts.optimizer);
    train_cfg.weight_decay = opts.weight_decay;
    train_cfg.loss_mode = mode;
    train_cfg.seed = global.seed;

    LossConfig loss_cfg;
    loss_cfg.tau = opts.tau;
    loss_cfg.n_neg_cp = opts.n_neg;
    loss_cfg.n_neg_pf = opts.pf_neg;

    std::vector<LabeledPair> validation = inputs.labeled;
    if (validation.empty()) {
        Rng val_rng = Rng(global.seed).child(0x7a11d);
        validation = sample_fit_validation(inputs.corpus, opts.val_fraction, 1, val_rng);
    }
    if (opts.val_metric == "f1")
        train_cfg.val_metric = ValMetric::f1;
    else if (opts.val_metric == "loss")
        train_cfg.val_metric = ValMetric::neg_loss;
    else if (opts.val_metric == "auto")
        train_cfg.val_metric = inputs.labeled.empty() ? ValMetric::neg_loss : ValMetric::f1;
    else
        throw InvalidArgument("--val-metric must be auto, f1 or loss, got '" + opts.val_metric + "'");
    manifest.add_config("val_metric",
                        train_cfg.val_metric == ValMetric::f1 ? "f1" : "loss");

    Rng init_rng(global.seed);
    EncoderParams params = init_params(inputs.corpus, opts.dim, opts.hidden, init_rng);
    auto [best, report] = train(inputs.corpus, std::move(params), train_cfg, loss_cfg, validation);

    std::string model_path = global.out_dir + "/model.fcsp";
    save_checkpoint(best, inputs.corpus, model_path);
    manifest.outputs.push_back(model_path);

    std::string report_path = global.out_dir + "/train_report.jsonl";
    std::ostringstream report_out;
    write_train_report_jsonl(report, report_out);
    write_text_file(report_path, report_out.str());
    manifest.outputs.push_back(report_path);

    std::cout << "epochs=" << report.epochs.size() << " best_epoch=" << report.best_epoch
              << " best_val_metric=" << fmt_double(report.best_metric) << " (" << report.stopping_reason
              << ")\n";
    writer.write();
    return 0;
}

}  // namespace facetemb::cli
