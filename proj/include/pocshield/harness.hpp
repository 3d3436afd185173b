#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pocshield/attacks.hpp"
#include "pocshield/classifiers.hpp"
#include "pocshield/dataset.hpp"
#include "pocshield/eval.hpp"
#include "pocshield/opchain.hpp"

namespace posh {

struct PocParams {
    std::size_t psi = 20;
    std::size_t max_size = 3;
    std::size_t candidate_maps = 100;
    double prevalence_target = 100.0;
};

struct ExperimentConfig {
    std::vector<std::string> dataset_paths;
    std::string schema_path;          // empty = canonical 27-feature schema
    std::string attack_profiles_path; // empty = data/attack_profiles.json next to cwd
    std::vector<Algorithm> classifiers;
    PocParams poc;
    std::vector<double> deltas = {10, 20, 30, 40, 50, 60, 70};
    std::size_t delta_trials = 10;
    bool simple_attacks = true;
    double train_fraction = 0.8;
    std::size_t cv_folds = 3;
    bool regrid_poc = false;  // default: POC variants reuse baseline hyperparams
    std::size_t workers = 4;
    std::uint64_t master_seed = 1;
    std::string output_dir = "out";

    static ExperimentConfig load(const std::string& path);
    std::string to_json() const;
    void validate() const;
};

// One (dataset, classifier) sweep cell. Failures are isolated per cell.
struct CellResult {
    std::string dataset_id;
    std::string classifier_id;
    bool ok = false;
    std::string error;

    ClassifierSpec baseline_spec;
    std::uint64_t map_seed = 0;
    std::string map_text;  // serialized selected map
    Metrics baseline_clean;  // on the clean test split
    Metrics poc_clean;
    std::vector<ImpactReport> baseline_impacts;  // aligned with attack_ids
    std::vector<ImpactReport> poc_impacts;
};

struct SweepResult {
    std::vector<std::string> attack_ids;
    std::vector<CellResult> cells;
};

struct PrevalencePoint {
    double target = 100.0;
    std::size_t coverage = 0;  // distinct source features in the map
    double fpr = 0.0;
    double clean_recall = 0.0;
    std::vector<double> attack_recall;  // aligned with attack_ids
};

struct PrevalenceResult {
    std::vector<std::string> attack_ids;
    std::string classifier_id;
    std::vector<PrevalencePoint> points;
};

// Baseline protocol: per (dataset, classifier) grid-search on the train
// split, train, evaluate on the test split. Writes baseline_metrics.{csv,md}.
void run_baseline(const ExperimentConfig& config);

// Generates candidate maps, scores each by validation F1 of the given
// classifier in the mapped space, returns the argmax (ties: lowest
// candidate index).
FeatureMap select_poc_map(const ClassifierSpec& spec, const Dataset& train,
                          const PocParams& params, const FeatureSchema& schema,
                          std::uint64_t seed, const std::vector<std::size_t>& pool = {});

// Full attack sweep: baseline and POC-hardened impacts for every
// (dataset, classifier, attack) cell, plus difference tables, metric
// tables, boxplot series and the run manifest.
SweepResult run_attack_sweep(const ExperimentConfig& config);

// POC with incomplete prevalence: per target, restrict the leaf pool to a
// seeded subset of ceil(target * |F| / 100) features, reselect and retrain,
// and report FPR plus detection rate under every attack.
PrevalenceResult run_prevalence_sweep(const ExperimentConfig& config,
                                      const std::vector<double>& targets);

// Wilcoxon machinery over sweep outputs: per-dataset baseline-vs-POC impact
// comparisons under a Bonferroni-adjusted alpha, the no-attack equivalence
// tests, and the per-dataset pre/post-attack recall drop tests.
std::vector<StatReport> run_significance(const ExperimentConfig& config,
                                         const SweepResult& sweep, double alpha = 0.05);

// Builds a labeled dataset from a URL list ("url" or "url,label" per line)
// and a directory of snapshot JSON documents keyed by their url field.
Dataset extract_corpus(const std::string& urls_path, const std::string& snapshots_dir,
                       const FeatureSchema& schema);

// Renders the markdown tables from a sweep result (also done by the sweep
// itself; exposed for the report subcommand).
void write_sweep_reports(const ExperimentConfig& config, const SweepResult& sweep);
void write_prevalence_reports(const ExperimentConfig& config,
                              const PrevalenceResult& result);
std::vector<StatReport> load_and_run_significance(const ExperimentConfig& config);

// Machine-readable impact table IO (out/impacts.csv).
void write_impacts_csv(const std::string& path, const SweepResult& sweep);
SweepResult load_impacts_csv(const std::string& path);

std::uint64_t file_digest(const std::string& path);

}  // namespace posh
