// pocshield command line front end. Links only the public C interface.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pocshield.h"

namespace {

[[noreturn]] void die(posh_status status) {
    std::cerr << "error (" << static_cast<int>(status) << "): " << posh_last_error()
              << '\n';
    std::exit(1);
}

void check(posh_status status) {
    if (status != POSH_OK) die(status);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot open " << path << '\n';
        std::exit(1);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct DatasetHandle {
    posh_dataset* ptr = nullptr;
    ~DatasetHandle() { posh_dataset_free(ptr); }
};

struct ModelHandle {
    posh_model* ptr = nullptr;
    ~ModelHandle() { posh_model_free(ptr); }
};

struct MapHandle {
    posh_map* ptr = nullptr;
    ~MapHandle() { posh_map_free(ptr); }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pocshield: harden phishing detectors with protective operation chains"};
    app.require_subcommand(1);

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "Generate the synthetic surrogate corpus");
    std::string synth_out = "corpus.csv";
    std::size_t synth_phishing = 6050, synth_benign = 3950;
    double synth_noise = 0.025;
    std::uint64_t synth_seed = 1;
    synth->add_option("--out", synth_out, "Output CSV path");
    synth->add_option("--phishing", synth_phishing, "Phishing row count");
    synth->add_option("--benign", synth_benign, "Benign row count");
    synth->add_option("--noise", synth_noise, "Label-flip fraction");
    synth->add_option("--seed", synth_seed, "Generator seed");

    // ---- extract ----
    auto* extract = app.add_subcommand("extract", "Extract the 27 features for a site");
    std::string extract_url, extract_snapshot;
    extract->add_option("--url", extract_url, "URL (features derivable offline only)");
    extract->add_option("--snapshot", extract_snapshot, "Snapshot JSON file");

    // ---- train ----
    auto* train_cmd = app.add_subcommand("train", "Grid-search and train a classifier");
    std::string train_data, train_algorithm = "extra_trees", train_out = "model.json";
    std::string train_map;
    std::size_t train_folds = 3;
    std::uint64_t train_seed = 1;
    train_cmd->add_option("--data", train_data, "Training CSV")->required();
    train_cmd->add_option("--algorithm", train_algorithm,
                          "decision_tree|random_forest|extra_trees|bagging|knn|"
                          "naive_bayes|sgd_logistic");
    train_cmd->add_option("--map", train_map, "Remap through this map file first");
    train_cmd->add_option("--cv-folds", train_folds, "Cross-validation folds");
    train_cmd->add_option("--seed", train_seed, "Seed");
    train_cmd->add_option("--out", train_out, "Model output path");

    // ---- predict ----
    auto* predict_cmd = app.add_subcommand("predict", "Classify one feature vector");
    std::string predict_model, predict_map;
    std::vector<double> predict_values;
    predict_cmd->add_option("--model", predict_model, "Model file")->required();
    predict_cmd->add_option("--values", predict_values, "Feature values")->required();
    predict_cmd->add_option("--map", predict_map, "Remap the vector through this map");

    // ---- select-map ----
    auto* select = app.add_subcommand("select-map",
                                      "Pick the best protective map by validation F1");
    std::string select_data, select_algorithm = "extra_trees", select_out = "best.pocmap";
    std::size_t select_psi = 20, select_max_size = 3, select_candidates = 100;
    std::uint64_t select_seed = 1;
    select->add_option("--data", select_data, "Training CSV")->required();
    select->add_option("--algorithm", select_algorithm, "Classifier family");
    select->add_option("--psi", select_psi, "Mapped feature count");
    select->add_option("--max-size", select_max_size, "Maximum block length");
    select->add_option("--candidates", select_candidates, "Candidate map count");
    select->add_option("--seed", select_seed, "Seed");
    select->add_option("--out", select_out, "Map output path");

    // ---- attack ----
    auto* attack = app.add_subcommand("attack", "Measure attack impact on a model");
    std::string attack_model, attack_train, attack_test, attack_name = "gba3";
    std::string attack_profiles = "data/attack_profiles.json", attack_map;
    double attack_delta = -1.0;
    std::size_t attack_trials = 10;
    std::uint64_t attack_seed = 1;
    attack->add_option("--model", attack_model, "Model file")->required();
    attack->add_option("--train", attack_train, "Train CSV (for the benign reference)")
        ->required();
    attack->add_option("--test", attack_test, "Test CSV")->required();
    attack->add_option("--attack", attack_name, "gba1|gba2|gba3");
    attack->add_option("--profiles", attack_profiles, "Attack profile JSON");
    attack->add_option("--delta", attack_delta,
                       "Use the delta-bounded attack with this percentage instead");
    attack->add_option("--trials", attack_trials, "Delta attack trials");
    attack->add_option("--seed", attack_seed, "Delta attack seed");
    attack->add_option("--map", attack_map, "Model was trained in this mapped space");

    // ---- pipeline stages ----
    std::string config_path = "config.json";
    auto* baseline = app.add_subcommand("baseline", "Baseline metrics for a config");
    baseline->add_option("--config", config_path, "Experiment config JSON");
    auto* sweep = app.add_subcommand("sweep", "Full attack/hardening sweep");
    sweep->add_option("--config", config_path, "Experiment config JSON");
    auto* prevalence = app.add_subcommand("prevalence", "Incomplete-coverage sweep");
    prevalence->add_option("--config", config_path, "Experiment config JSON");
    auto* stats = app.add_subcommand("stats", "Recompute significance tests");
    stats->add_option("--config", config_path, "Experiment config JSON");
    auto* report = app.add_subcommand("report", "Re-render reports from sweep outputs");
    report->add_option("--config", config_path, "Experiment config JSON");

    CLI11_PARSE(app, argc, argv);

    if (*synth) {
        DatasetHandle data;
        check(posh_dataset_synth(synth_phishing, synth_benign, synth_noise, synth_seed,
                                 &data.ptr));
        check(posh_dataset_save(data.ptr, synth_out.c_str()));
        std::cout << "wrote " << synth_out << '\n';
        return 0;
    }

    if (*extract) {
        std::string json;
        if (!extract_snapshot.empty()) {
            json = read_file(extract_snapshot);
        } else if (!extract_url.empty()) {
            json = "{\"url\": \"" + extract_url + "\"}";
        } else {
            std::cerr << "error: extract needs --url or --snapshot\n";
            return 1;
        }
        double values[27];
        std::size_t len = 27;
        check(posh_extract_features(json.c_str(), values, &len));
        for (std::size_t i = 0; i < len; ++i) {
            std::cout << values[i] << (i + 1 == len ? '\n' : ',');
        }
        return 0;
    }

    if (*train_cmd) {
        DatasetHandle data;
        check(posh_dataset_load(train_data.c_str(), &data.ptr));
        if (!train_map.empty()) {
            MapHandle map;
            check(posh_map_load(train_map.c_str(), &map.ptr));
            DatasetHandle mapped;
            check(posh_map_transform(map.ptr, data.ptr, &mapped.ptr));
            std::swap(data.ptr, mapped.ptr);
        }
        ModelHandle model;
        check(posh_model_train(data.ptr, train_algorithm.c_str(), train_folds, train_seed,
                               &model.ptr));
        check(posh_model_save(model.ptr, train_out.c_str()));
        double f1 = 0.0;
        check(posh_model_evaluate(model.ptr, data.ptr, &f1, nullptr, nullptr, nullptr));
        std::cout << "wrote " << train_out << " (train F1 " << f1 << ")\n";
        return 0;
    }

    if (*predict_cmd) {
        ModelHandle model;
        check(posh_model_load(predict_model.c_str(), &model.ptr));
        std::vector<double> values = predict_values;
        if (!predict_map.empty()) {
            // remap by building a one-row dataset is unnecessary: the map
            // applies per vector, so round-trip through a temporary dataset
            std::cerr << "error: --map is not supported for single vectors; remap the "
                         "CSV with 'train --map' instead\n";
            return 1;
        }
        int label = 0;
        check(posh_model_predict(model.ptr, values.data(), values.size(), &label));
        std::cout << (label == 1 ? "phishing" : "benign") << '\n';
        return 0;
    }

    if (*select) {
        DatasetHandle data;
        check(posh_dataset_load(select_data.c_str(), &data.ptr));
        MapHandle map;
        check(posh_map_select(data.ptr, select_algorithm.c_str(), select_psi,
                              select_max_size, select_candidates, select_seed, &map.ptr));
        check(posh_map_save(map.ptr, select_out.c_str()));
        double prev = 0.0;
        check(posh_map_prevalence(map.ptr, &prev));
        std::cout << "wrote " << select_out << " (prevalence " << prev << "%)\n";
        return 0;
    }

    if (*attack) {
        ModelHandle model;
        DatasetHandle train_set, test_set;
        check(posh_model_load(attack_model.c_str(), &model.ptr));
        check(posh_dataset_load(attack_train.c_str(), &train_set.ptr));
        check(posh_dataset_load(attack_test.c_str(), &test_set.ptr));
        MapHandle map;
        if (!attack_map.empty()) check(posh_map_load(attack_map.c_str(), &map.ptr));
        double impact = 0.0;
        if (attack_delta >= 0.0) {
            check(posh_attack_delta_impact(model.ptr, train_set.ptr, test_set.ptr,
                                           attack_delta, attack_trials, attack_seed,
                                           map.ptr, &impact));
        } else {
            check(posh_attack_impact(model.ptr, train_set.ptr, test_set.ptr,
                                     attack_name.c_str(), attack_profiles.c_str(),
                                     map.ptr, &impact));
        }
        std::cout << "impact " << impact << '\n';
        return 0;
    }

    const char* stage = nullptr;
    if (*baseline) stage = "baseline";
    if (*sweep) stage = "sweep";
    if (*prevalence) stage = "prevalence";
    if (*stats || *report) stage = "stats";
    if (stage) {
        check(posh_run_stage(config_path.c_str(), stage));
        std::cout << "stage " << stage << " complete\n";
        return 0;
    }

    return 0;
}
