#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "facetemb/errors.hpp"

using namespace facetemb;
using namespace facetemb::cli;

int main(int argc, char** argv) {
    CLI::App app{"facetemb: multi-facet concept embeddings (train, extract facets, evaluate)"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "Flat key=value config file (flags win over file values)");

    GlobalOpts global;
    app.add_option("--seed", global.seed, "Seed for every random choice")->capture_default_str();
    app.add_option("--out-dir", global.out_dir, "Directory for outputs and the run manifest")
        ->capture_default_str();
    app.add_option("--threads", global.threads, "Worker threads for instance-parallel evaluation")
        ->capture_default_str();

    // ingest
    CLI::App* ingest = app.add_subcommand("ingest", "Build a normalized pair corpus");
    ingest->require_subcommand(1);
    ingest->fallthrough();

    IngestConceptnetOpts cn_opts;
    CLI::App* ingest_cn = ingest->add_subcommand("conceptnet", "Ingest a ConceptNet dump");
    ingest_cn->fallthrough();
    ingest_cn->add_option("--input", cn_opts.input, "ConceptNet assertions (5-column dump or 3-column TSV)")
        ->required();
    ingest_cn->add_option("--min-tail-count", cn_opts.min_tail_count, "Keep tails appearing at least this often")
        ->capture_default_str();
    ingest_cn->add_option("--relations", cn_opts.relations, "'default' or a comma-separated relation list")
        ->capture_default_str();

    IngestPairsOpts pair_opts;
    CLI::App* ingest_pairs = ingest->add_subcommand("pairs", "Merge cp/pf/labeled TSV files");
    ingest_pairs->fallthrough();
    ingest_pairs->add_option("--cp", pair_opts.cp_path, "concept<TAB>property file")->required();
    ingest_pairs->add_option("--pf", pair_opts.pf_path, "property<TAB>facet file");
    ingest_pairs->add_option("--labeled", pair_opts.labeled_path, "concept<TAB>property<TAB>{0,1} file");

    // train
    TrainOpts train_opts;
    CLI::App* train = app.add_subcommand("train", "Train the encoders");
    train->fallthrough();
    train->add_option("--cp", train_opts.cp_path, "cp pair file")->required();
    train->add_option("--pf", train_opts.pf_path, "pf pair file (needed for faceted mode)");
    train->add_option("--labeled", train_opts.labeled_path, "labeled validation pairs");
    train->add_option("--mode", train_opts.mode, "faceted | baseline")->capture_default_str();
    train->add_option("--dim", train_opts.dim, "embedding dimensionality")->capture_default_str();
    train->add_option("--hidden", train_opts.hidden, "MLP hidden width")->capture_default_str();
    train->add_option("--lr", train_opts.lr, "learning rate")->capture_default_str();
    train->add_option("--batch-size", train_opts.batch_size)->capture_default_str();
    train->add_option("--max-epochs", train_opts.max_epochs)->capture_default_str();
    train->add_option("--patience", train_opts.patience, "early-stopping patience")->capture_default_str();
    train->add_option("--optimizer", train_opts.optimizer, "adam | sgd")->capture_default_str();
    train->add_option("--weight-decay", train_opts.weight_decay, "decoupled decay for the adam path")
        ->capture_default_str();
    train->add_option("--tau", train_opts.tau, "InfoNCE temperature")->capture_default_str();
    train->add_option("--neg", train_opts.n_neg, "negatives per cp positive")->capture_default_str();
    train->add_option("--pf-neg", train_opts.pf_neg, "InfoNCE negatives per pair (0 = full)")
        ->capture_default_str();
    train->add_option("--val-fraction", train_opts.val_fraction,
                      "held-out validation fraction when --labeled is absent")
        ->capture_default_str();
    train->add_option("--val-metric", train_opts.val_metric, "auto | f1 | loss")
        ->capture_default_str();

    // extract
    ExtractOpts extract_opts;
    CLI::App* extract = app.add_subcommand("extract", "K-means facet decomposition of a checkpoint");
    extract->fallthrough();
    extract->add_option("--checkpoint", extract_opts.checkpoint)->required();
    extract->add_option("--cp", extract_opts.cp_path)->required();
    extract->add_option("--pf", extract_opts.pf_path);
    extract->add_option("--k", extract_opts.k, "number of facet clusters")->capture_default_str();

    // outlier
    CLI::App* outlier = app.add_subcommand("outlier", "Outlier detection benchmark");
    outlier->require_subcommand(1);
    outlier->fallthrough();

    OutlierBuildOpts ob_opts;
    CLI::App* outlier_build = outlier->add_subcommand("build", "Sample benchmark instances");
    outlier_build->fallthrough();
    outlier_build->add_option("--db", ob_opts.db_paths, "concept<TAB>property source (repeatable)")
        ->required();
    outlier_build->add_option("--groups", ob_opts.groups_path, "property<TAB>group<TAB>concept file")
        ->required();
    outlier_build->add_option("--properties", ob_opts.properties, "'all' or a comma-separated list")
        ->capture_default_str();
    outlier_build->add_option("--n", ob_opts.n_instances, "instances per property")->capture_default_str();

    OutlierRunOpts or_opts;
    CLI::App* outlier_run = outlier->add_subcommand("run", "Score a benchmark with a checkpoint");
    outlier_run->fallthrough();
    outlier_run->add_option("--benchmark", or_opts.benchmark)->required();
    outlier_run->add_option("--checkpoint", or_opts.checkpoint)->required();
    outlier_run->add_option("--cp", or_opts.cp_path)->required();
    outlier_run->add_option("--pf", or_opts.pf_path);
    outlier_run->add_option("--strategy", or_opts.strategy, "single | multi | both")->capture_default_str();
    outlier_run->add_option("--k", or_opts.k, "facet count for the multi strategy")->capture_default_str();

    // cluster
    ClusterOpts cluster_opts;
    CLI::App* cluster = app.add_subcommand("cluster", "Affinity-propagation label/rule augmentation");
    cluster->fallthrough();
    cluster->add_option("--checkpoint", cluster_opts.checkpoint)->required();
    cluster->add_option("--cp", cluster_opts.cp_path)->required();
    cluster->add_option("--pf", cluster_opts.pf_path);
    cluster->add_option("--mode", cluster_opts.mode, "clu | mclu")->capture_default_str();
    cluster->add_option("--k", cluster_opts.k, "facet count for mclu")->capture_default_str();
    cluster->add_option("--preference", cluster_opts.preference,
                        "preference quantile of the off-diagonal similarities")
        ->capture_default_str();
    cluster->add_option("--damping", cluster_opts.damping)->capture_default_str();
    cluster->add_option("--format", cluster_opts.format, "labels | rules")->capture_default_str();
    cluster->add_flag("--skip-singletons", cluster_opts.skip_singletons, "drop singleton clusters");

    // eval
    EvalOpts eval_opts;
    CLI::App* eval = app.add_subcommand("eval", "Cross-validated property-prediction F1");
    eval->fallthrough();
    eval->add_option("--labeled", eval_opts.labeled_path)->required();
    eval->add_option("--cp", eval_opts.cp_path)->required();
    eval->add_option("--pf", eval_opts.pf_path);
    eval->add_option("--checkpoint", eval_opts.checkpoint, "optional warm-start checkpoint");
    eval->add_option("--split", eval_opts.split, "concept | property | cpp | all")->capture_default_str();
    eval->add_option("--folds", eval_opts.folds, "0 = per-split default (5, 5, 3x3)")->capture_default_str();
    eval->add_option("--test-concepts", eval_opts.test_concepts_path,
                     "fixed test concepts for the concept split (one per line)");
    eval->add_option("--mode", eval_opts.mode, "faceted | baseline")->capture_default_str();
    eval->add_option("--lr", eval_opts.lr)->capture_default_str();
    eval->add_option("--batch-size", eval_opts.batch_size)->capture_default_str();
    eval->add_option("--max-epochs", eval_opts.max_epochs)->capture_default_str();
    eval->add_option("--patience", eval_opts.patience)->capture_default_str();
    eval->add_option("--tau", eval_opts.tau)->capture_default_str();
    eval->add_option("--neg", eval_opts.n_neg)->capture_default_str();
    eval->add_option("--pf-neg", eval_opts.pf_neg)->capture_default_str();

    // neighbours
    NeighboursOpts nn_opts;
    CLI::App* neighbours = app.add_subcommand("neighbours", "Per-facet nearest-neighbour report");
    neighbours->fallthrough();
    neighbours->add_option("--checkpoint", nn_opts.checkpoint)->required();
    neighbours->add_option("--cp", nn_opts.cp_path)->required();
    neighbours->add_option("--pf", nn_opts.pf_path);
    neighbours->add_option("--concept", nn_opts.concept_name)->required();
    neighbours->add_option("--facet", nn_opts.facet, "facet index, -1 = all")->capture_default_str();
    neighbours->add_option("--top", nn_opts.top)->capture_default_str();
    neighbours->add_option("--k", nn_opts.k, "facet count")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (ingest_cn->parsed()) return run_ingest_conceptnet(global, cn_opts);
        if (ingest_pairs->parsed()) return run_ingest_pairs(global, pair_opts);
        if (train->parsed()) return run_train(global, train_opts);
        if (extract->parsed()) return run_extract(global, extract_opts);
        if (outlier_build->parsed()) return run_outlier_build(global, ob_opts);
        if (outlier_run->parsed()) return run_outlier_run(global, or_opts);
        if (cluster->parsed()) return run_cluster(global, cluster_opts);
        if (eval->parsed()) return run_eval(global, eval_opts);
        if (neighbours->parsed()) return run_neighbours(global, nn_opts);
    } catch (const StateMismatchError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {  // Io, Format, InvalidArgument
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
