#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pocshield/dataset.hpp"

namespace posh {

enum class Algorithm {
    DecisionTree,
    RandomForest,
    ExtraTrees,
    Bagging,
    Knn,
    NaiveBayes,
    SgdLogistic,
};

const char* algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

// Hyperparameter keys are restricted per algorithm:
//   DecisionTree            max_depth (0 = unbounded), min_samples_leaf
//   RandomForest/ExtraTrees n_estimators, max_depth, min_samples_leaf,
//                           max_features (0 = sqrt)
//   Bagging                 n_estimators, max_depth, min_samples_leaf
//   Knn                     k
//   NaiveBayes              (none)
//   SgdLogistic             epochs, alpha, eta0, power_t
struct ClassifierSpec {
    Algorithm algorithm = Algorithm::DecisionTree;
    std::map<std::string, double> hyperparams;
    std::uint64_t seed = 0;

    double param(const std::string& key, double fallback) const;
    std::string id() const;  // algorithm plus non-default hyperparams
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int leaf_label = 1;  // Label as int at leaves
};

struct Tree {
    std::vector<TreeNode> nodes;  // node 0 is the root
    int predict(const std::vector<double>& values) const;
};

// One container for all seven algorithms; only the fields of the trained
// algorithm are populated.
struct TrainedModel {
    ClassifierSpec spec;
    std::uint64_t schema_fingerprint = 0;
    std::size_t n_features = 0;
    std::size_t train_rows = 0;
    double prior_phishing = 0.0;

    std::vector<Tree> trees;  // DecisionTree holds exactly one

    // knn (points stored standardized)
    std::vector<std::vector<double>> knn_points;
    std::vector<int> knn_labels;

    // z-score scaler fitted on train (knn, sgd)
    std::vector<double> scale_mean;
    std::vector<double> scale_std;

    // gaussian naive bayes, index 0 = benign, 1 = phishing
    std::vector<double> nb_mean[2];
    std::vector<double> nb_var[2];
    double nb_log_prior[2] = {0.0, 0.0};

    // logistic regression weights on standardized features
    std::vector<double> sgd_weights;
    double sgd_bias = 0.0;
    std::vector<double> sgd_epoch_loss;  // mean train loss after each epoch

    std::string to_json() const;
    static TrainedModel from_json(const std::string& text);
    void save(const std::string& path) const;
    static TrainedModel load(const std::string& path);
};

TrainedModel train(const ClassifierSpec& spec, const Dataset& train_set);

// Deterministic; knn votes tie toward Phishing.
Label predict(const TrainedModel& model, const Sample& sample);

// Hyperparameter lattice: every key maps to its candidate values; the grid
// is their cartesian product.
using HyperGrid = std::map<std::string, std::vector<double>>;

// Picks the spec maximizing mean cross-validated F1 over stratified folds.
// Ties prefer the smaller model (fewer trees, smaller depth, stronger
// regularization), then the earlier grid cell.
ClassifierSpec grid_search(Algorithm algorithm, const Dataset& train_set,
                           const HyperGrid& grid, std::size_t folds,
                           std::uint64_t seed);

// Built-in per-algorithm default search grids used by the harness.
HyperGrid default_grid(Algorithm algorithm);

}  // namespace posh
