#include "pocshield.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "pocshield/attacks.hpp"
#include "pocshield/classifiers.hpp"
#include "pocshield/dataset.hpp"
#include "pocshield/error.hpp"
#include "pocshield/eval.hpp"
#include "pocshield/featextract.hpp"
#include "pocshield/harness.hpp"
#include "pocshield/opchain.hpp"
#include "pocshield/rng.hpp"
#include "pocshield/schema.hpp"
#include "pocshield/synth.hpp"

struct posh_dataset {
    posh::Dataset impl;
};

struct posh_model {
    posh::TrainedModel impl;
};

struct posh_map {
    posh::FeatureMap impl;
};

namespace {

thread_local std::string g_last_error = "";

posh_status set_error(const posh::Error& e) {
    g_last_error = e.what();
    int code = static_cast<int>(e.code());
    if (code < 1 || code > 21) return POSH_E_UNKNOWN;
    return static_cast<posh_status>(code);
}

posh_status set_error(const std::exception& e) {
    g_last_error = e.what();
    return POSH_E_UNKNOWN;
}

posh_status bad_argument(const char* what) {
    g_last_error = std::string("invalid argument: ") + what;
    return POSH_E_CONFIG;
}

template <typename Fn>
posh_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return POSH_OK;
    } catch (const posh::Error& e) {
        return set_error(e);
    } catch (const std::exception& e) {
        return set_error(e);
    }
}

posh::ClassifierSpec search_spec(posh::Algorithm algorithm, const posh::Dataset& train,
                                 std::size_t cv_folds, std::uint64_t seed) {
    return posh::grid_search(algorithm, train, posh::default_grid(algorithm), cv_folds,
                             seed);
}

}  // namespace

extern "C" {

const char* posh_last_error(void) { return g_last_error.c_str(); }

const char* posh_version(void) { return "1.0.0"; }

posh_status posh_dataset_load(const char* csv_path, posh_dataset** out) {
    if (!csv_path || !out) return bad_argument("posh_dataset_load");
    return guarded([&] {
        *out = new posh_dataset{posh::load_csv(csv_path, posh::canonical_schema())};
    });
}

posh_status posh_dataset_synth(size_t phishing_rows, size_t benign_rows,
                               double label_noise, uint64_t seed, posh_dataset** out) {
    if (!out) return bad_argument("posh_dataset_synth");
    return guarded([&] {
        posh::SynthParams params;
        params.n_phishing = phishing_rows;
        params.n_benign = benign_rows;
        params.label_noise = label_noise;
        params.seed = seed;
        *out = new posh_dataset{posh::synth_corpus(posh::canonical_schema(), params)};
    });
}

posh_status posh_dataset_save(const posh_dataset* dataset, const char* csv_path) {
    if (!dataset || !csv_path) return bad_argument("posh_dataset_save");
    return guarded([&] { posh::write_csv(dataset->impl, csv_path); });
}

posh_status posh_dataset_split(const posh_dataset* dataset, double train_fraction,
                               uint64_t seed, posh_dataset** out_train,
                               posh_dataset** out_test) {
    if (!dataset || !out_train || !out_test) return bad_argument("posh_dataset_split");
    return guarded([&] {
        auto [train, test] = posh::split(dataset->impl, train_fraction, seed);
        *out_train = new posh_dataset{std::move(train)};
        *out_test = new posh_dataset{std::move(test)};
    });
}

posh_status posh_dataset_rows(const posh_dataset* dataset, size_t* out_rows) {
    if (!dataset || !out_rows) return bad_argument("posh_dataset_rows");
    *out_rows = dataset->impl.size();
    return POSH_OK;
}

posh_status posh_dataset_features(const posh_dataset* dataset, size_t* out_features) {
    if (!dataset || !out_features) return bad_argument("posh_dataset_features");
    *out_features = dataset->impl.schema().size();
    return POSH_OK;
}

void posh_dataset_free(posh_dataset* dataset) { delete dataset; }

posh_status posh_extract_features(const char* snapshot_json, double* out_values,
                                  size_t* out_len) {
    if (!snapshot_json || !out_values || !out_len || *out_len < 27) {
        return bad_argument("posh_extract_features");
    }
    return guarded([&] {
        posh::SiteSnapshot snap = posh::SiteSnapshot::from_json(snapshot_json, ".");
        std::vector<double> values = posh::extract_features(snap);
        for (std::size_t i = 0; i < values.size(); ++i) out_values[i] = values[i];
        *out_len = values.size();
    });
}

posh_status posh_map_generate(size_t psi, size_t max_size, double prevalence_target,
                              uint64_t seed, posh_map** out) {
    if (!out) return bad_argument("posh_map_generate");
    return guarded([&] {
        posh::MapParams params;
        params.max_size = max_size;
        params.prevalence_target = prevalence_target;
        *out = new posh_map{posh::generate_map(posh::canonical_schema(), params, psi,
                                               posh::FmopSet::standard(), seed)};
    });
}

posh_status posh_map_select(const posh_dataset* train, const char* algorithm, size_t psi,
                            size_t max_size, size_t candidate_maps, uint64_t seed,
                            posh_map** out) {
    if (!train || !algorithm || !out) return bad_argument("posh_map_select");
    return guarded([&] {
        posh::Algorithm a = posh::algorithm_from_name(algorithm);
        posh::ClassifierSpec spec = search_spec(a, train->impl, 3, seed);
        posh::PocParams params;
        params.psi = psi;
        params.max_size = max_size;
        params.candidate_maps = candidate_maps;
        *out = new posh_map{posh::select_poc_map(spec, train->impl, params,
                                                 train->impl.schema(), seed)};
    });
}

posh_status posh_map_transform(const posh_map* map, const posh_dataset* dataset,
                               posh_dataset** out) {
    if (!map || !dataset || !out) return bad_argument("posh_map_transform");
    return guarded(
        [&] { *out = new posh_dataset{posh::transform(dataset->impl, map->impl)}; });
}

posh_status posh_map_prevalence(const posh_map* map, double* out_percent) {
    if (!map || !out_percent) return bad_argument("posh_map_prevalence");
    return guarded([&] {
        *out_percent = posh::prevalence(map->impl.source_schema, map->impl);
    });
}

posh_status posh_map_save(const posh_map* map, const char* path) {
    if (!map || !path) return bad_argument("posh_map_save");
    return guarded([&] {
        std::ofstream out(path, std::ios::binary);
        if (!out) posh::raise(posh::ErrorCode::IoError, std::string("cannot write ") + path);
        out << posh::serialize_map(map->impl);
    });
}

posh_status posh_map_load(const char* path, posh_map** out) {
    if (!path || !out) return bad_argument("posh_map_load");
    return guarded([&] {
        std::ifstream in(path, std::ios::binary);
        if (!in) posh::raise(posh::ErrorCode::IoError, std::string("cannot open ") + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        *out = new posh_map{posh::deserialize_map(buf.str())};
    });
}

void posh_map_free(posh_map* map) { delete map; }

posh_status posh_model_train(const posh_dataset* train, const char* algorithm,
                             size_t cv_folds, uint64_t seed, posh_model** out) {
    if (!train || !algorithm || !out) return bad_argument("posh_model_train");
    return guarded([&] {
        posh::Algorithm a = posh::algorithm_from_name(algorithm);
        posh::ClassifierSpec spec = search_spec(a, train->impl, cv_folds, seed);
        *out = new posh_model{posh::train(spec, train->impl)};
    });
}

posh_status posh_model_predict(const posh_model* model, const double* values, size_t len,
                               int* out_label) {
    if (!model || !values || !out_label) return bad_argument("posh_model_predict");
    if (len != model->impl.n_features) {
        g_last_error = "feature count does not match the model";
        return POSH_E_SCHEMA_MISMATCH;
    }
    return guarded([&] {
        posh::Sample s;
        s.values.assign(values, values + len);
        *out_label = posh::predict(model->impl, s) == posh::Label::Phishing ? 1 : 0;
    });
}

posh_status posh_model_evaluate(const posh_model* model, const posh_dataset* test,
                                double* out_f1, double* out_accuracy, double* out_fpr,
                                double* out_tpr) {
    if (!model || !test) return bad_argument("posh_model_evaluate");
    return guarded([&] {
        posh::Metrics m = posh::metrics(posh::confusion(model->impl, test->impl));
        if (out_f1) *out_f1 = m.f1;
        if (out_accuracy) *out_accuracy = m.accuracy;
        if (out_fpr) *out_fpr = m.fpr;
        if (out_tpr) *out_tpr = m.tpr;
    });
}

posh_status posh_model_save(const posh_model* model, const char* path) {
    if (!model || !path) return bad_argument("posh_model_save");
    return guarded([&] { model->impl.save(path); });
}

posh_status posh_model_load(const char* path, posh_model** out) {
    if (!path || !out) return bad_argument("posh_model_load");
    return guarded([&] { *out = new posh_model{posh::TrainedModel::load(path)}; });
}

void posh_model_free(posh_model* model) { delete model; }

namespace {

double impact_of(const posh::TrainedModel& model, const posh::Dataset& test,
                 const posh::PerturbedSet& set, const posh_map* map) {
    if (!map) return posh::attack_impact(model, test, set).impact;
    posh::PerturbedSet mapped;
    mapped.attack_id = set.attack_id;
    mapped.modified_features = set.modified_features;
    for (const auto& trial : set.trials) {
        std::vector<posh::Sample> rows;
        rows.reserve(trial.size());
        for (const auto& s : trial) {
            posh::Sample m;
            m.label = s.label;
            m.values.reserve(map->impl.chains.size());
            for (const auto& c : map->impl.chains) m.values.push_back(c.eval(s.values));
            rows.push_back(std::move(m));
        }
        mapped.trials.push_back(std::move(rows));
    }
    return posh::attack_impact(model, posh::transform(test, map->impl), mapped).impact;
}

}  // namespace

posh_status posh_attack_impact(const posh_model* model, const posh_dataset* train,
                               const posh_dataset* test, const char* attack_name,
                               const char* profiles_json_path, const posh_map* map,
                               double* out_impact) {
    if (!model || !train || !test || !attack_name || !profiles_json_path || !out_impact) {
        return bad_argument("posh_attack_impact");
    }
    return guarded([&] {
        auto profiles = posh::load_attack_profiles(profiles_json_path);
        const posh::AttackProfile* profile = posh::find_profile(profiles, attack_name);
        if (!profile) {
            posh::raise(posh::ErrorCode::ConfigError,
                        std::string("attack profile '") + attack_name + "' not found");
        }
        auto reference = posh::benign_reference_profile(train->impl);
        auto set = posh::simple_attack(*profile, posh::phishing_rows(test->impl),
                                       test->impl.schema(), reference);
        *out_impact = impact_of(model->impl, test->impl, set, map);
    });
}

posh_status posh_attack_delta_impact(const posh_model* model, const posh_dataset* train,
                                     const posh_dataset* test, double delta_percent,
                                     size_t trials, uint64_t seed, const posh_map* map,
                                     double* out_impact) {
    if (!model || !train || !test || !out_impact) {
        return bad_argument("posh_attack_delta_impact");
    }
    return guarded([&] {
        auto reference = posh::benign_reference_profile(train->impl);
        auto set = posh::gba_delta(posh::phishing_rows(test->impl), delta_percent,
                                   test->impl.schema(), reference, trials, seed);
        *out_impact = impact_of(model->impl, test->impl, set, map);
    });
}

posh_status posh_wilcoxon(const double* a, const double* b, size_t n,
                          double* out_p_value, double* out_effect_size) {
    if (!a || !b || !out_p_value) return bad_argument("posh_wilcoxon");
    return guarded([&] {
        std::vector<std::pair<double, double>> pairs;
        pairs.reserve(n);
        for (size_t i = 0; i < n; ++i) pairs.emplace_back(a[i], b[i]);
        posh::WilcoxonResult w = posh::wilcoxon_signed_rank(pairs);
        *out_p_value = w.p_value;
        if (out_effect_size) *out_effect_size = w.effect_size;
    });
}

double posh_impact(double value_no_attack, double value_under_attack) {
    try {
        return posh::impact(value_no_attack, value_under_attack);
    } catch (const posh::Error& e) {
        g_last_error = e.what();
        return 0.0;
    }
}

double posh_bonferroni(double alpha, size_t comparisons) {
    return posh::bonferroni(alpha, comparisons);
}

posh_status posh_run_stage(const char* config_path, const char* stage) {
    if (!config_path || !stage) return bad_argument("posh_run_stage");
    return guarded([&] {
        posh::ExperimentConfig config = posh::ExperimentConfig::load(config_path);
        std::string which = stage;
        if (which == "baseline") {
            posh::run_baseline(config);
        } else if (which == "sweep") {
            posh::run_attack_sweep(config);
        } else if (which == "prevalence") {
            posh::run_prevalence_sweep(config, {65, 70, 75, 80, 85, 90, 100});
        } else if (which == "stats") {
            posh::load_and_run_significance(config);
        } else {
            posh::raise(posh::ErrorCode::ConfigError,
                        "unknown stage '" + which + "'");
        }
    });
}

}  // extern "C"
