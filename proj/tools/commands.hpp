#pragma once

#include <string>
#include <vector>

#include "common.hpp"

namespace facetemb::cli {

struct IngestConceptnetOpts {
    std::string input;
    int min_tail_count = 10;
    std::string relations = "default";  // or comma-separated list
};
int run_ingest_conceptnet(const GlobalOpts& global, const IngestConceptnetOpts& opts);

struct IngestPairsOpts {
    std::string cp_path;
    std::string pf_path;
    std::string labeled_path;
};
int run_ingest_pairs(const GlobalOpts& global, const IngestPairsOpts& opts);

struct TrainOpts {
    std::string cp_path;
    std::string pf_path;
    std::string labeled_path;  // validation pairs; empty = hold out from cp
    std::string mode = "faceted";
    int dim = 64;
    int hidden = 64;
    double lr = 1e-2;
    int batch_size = 128;
    int max_epochs = 500;
    int patience = 20;
    std::string optimizer = "adam";
    double weight_decay = 0.0;
    double tau = 0.05;
    int n_neg = 5;
    int pf_neg = 32;
    double val_fraction = 0.1;
    /// auto: F1 when --labeled is given, validation loss for held-out pairs.
    std::string val_metric = "auto";
};
int run_train(const GlobalOpts& global, const TrainOpts& opts);

struct ExtractOpts {
    std::string checkpoint;
    std::string cp_path;
    std::string pf_path;
    int k = 10;
};
int run_extract(const GlobalOpts& global, const ExtractOpts& opts);

struct OutlierBuildOpts {
    std::vector<std::string> db_paths;
    std::string groups_path;
    std::string properties = "all";  // or comma-separated list
    int n_instances = 100;
};
int run_outlier_build(const GlobalOpts& global, const OutlierBuildOpts& opts);

struct OutlierRunOpts {
    std::string benchmark;
    std::string checkpoint;
    std::string cp_path;
    std::string pf_path;
    std::string strategy = "both";  // single | multi | both
    int k = 10;
};
int run_outlier_run(const GlobalOpts& global, const OutlierRunOpts& opts);

struct ClusterOpts {
    std::string checkpoint;
    std::string cp_path;
    std::string pf_path;
    std::string mode = "mclu";  // clu | mclu
    int k = 10;
    double preference = 0.5;
    double damping = 0.9;
    std::string format = "rules";  // labels | rules
    bool skip_singletons = false;
};
int run_cluster(const GlobalOpts& global, const ClusterOpts& opts);

struct EvalOpts {
    std::string labeled_path;
    std::string cp_path;
    std::string pf_path;
    std::string checkpoint;  // optional warm start
    std::string split = "property";  // concept | property | cpp | all
    int folds = 0;                   // 0 = mode default (5 or 3)
    std::string test_concepts_path;  // fixed concept-split test list
    std::string mode = "faceted";
    double lr = 1e-2;
    int batch_size = 128;
    int max_epochs = 100;
    int patience = 20;
    double tau = 0.05;
    int n_neg = 5;
    int pf_neg = 32;
};
int run_eval(const GlobalOpts& global, const EvalOpts& opts);

struct NeighboursOpts {
    std::string checkpoint;
    std::string cp_path;
    std::string pf_path;
    std::string concept_name;
    int facet = -1;  // -1 = all facets
    int top = 10;
    int k = 10;
};
int run_neighbours(const GlobalOpts& global, const NeighboursOpts& opts);

}  // namespace facetemb::cli
