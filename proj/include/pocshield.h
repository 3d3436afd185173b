/* pocshield — C interface to the phishing-detector hardening library.
 *
 * Every function returns a posh_status (POSH_OK on success); the last error
 * message is thread-local and readable via posh_last_error(). Handles are
 * opaque and must be released with their matching *_free function. The
 * library is safe to use from multiple threads as long as each handle is
 * confined to one thread at a time.
 */
#ifndef POCSHIELD_H
#define POCSHIELD_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum posh_status {
    POSH_OK = 0,
    POSH_E_MISSING_COLUMN = 1,
    POSH_E_DOMAIN_VIOLATION = 2,
    POSH_E_UNPARSABLE_VALUE = 3,
    POSH_E_DEGENERATE_SPLIT = 4,
    POSH_E_NO_BENIGN_SAMPLES = 5,
    POSH_E_UNPARSABLE_URL = 6,
    POSH_E_INVALID_URL = 7,
    POSH_E_EMPTY_FEATURE_SET = 8,
    POSH_E_PREVALENCE_UNREACHABLE = 9,
    POSH_E_REPAIR_BUDGET_EXCEEDED = 10,
    POSH_E_SCHEMA_MISMATCH = 11,
    POSH_E_PARSE = 12,
    POSH_E_SINGLE_CLASS_TRAINING = 13,
    POSH_E_NON_FINITE_FEATURE = 14,
    POSH_E_GRID_EXHAUSTED = 15,
    POSH_E_ZERO_BASELINE_METRIC = 16,
    POSH_E_EMPTY_MALICIOUS_SET = 17,
    POSH_E_TOO_FEW_PAIRS = 18,
    POSH_E_CONFIG = 19,
    POSH_E_IO = 20,
    POSH_E_BAD_HYPERPARAM = 21,
    POSH_E_UNKNOWN = 100
} posh_status;

typedef struct posh_dataset posh_dataset;
typedef struct posh_model posh_model;
typedef struct posh_map posh_map;

/* Last error message raised on the calling thread; never NULL. */
const char* posh_last_error(void);

/* Library semantic version string, e.g. "1.0.0". */
const char* posh_version(void);

/* ---- datasets ------------------------------------------------------- */

/* Loads a CSV against the built-in 27-feature schema. */
posh_status posh_dataset_load(const char* csv_path, posh_dataset** out);

/* Deterministic synthetic surrogate corpus over the built-in schema. */
posh_status posh_dataset_synth(size_t phishing_rows, size_t benign_rows,
                               double label_noise, uint64_t seed,
                               posh_dataset** out);

posh_status posh_dataset_save(const posh_dataset* dataset, const char* csv_path);

/* Stratified shuffle split; both outputs are freshly allocated. */
posh_status posh_dataset_split(const posh_dataset* dataset, double train_fraction,
                               uint64_t seed, posh_dataset** out_train,
                               posh_dataset** out_test);

posh_status posh_dataset_rows(const posh_dataset* dataset, size_t* out_rows);
posh_status posh_dataset_features(const posh_dataset* dataset, size_t* out_features);

void posh_dataset_free(posh_dataset* dataset);

/* ---- feature extraction --------------------------------------------- */

/* Extracts the 27 rule-based features for one site snapshot JSON document
 * (see docs/feature_rules.md). out_values must hold out_len >= 27 doubles;
 * *out_len receives the count written. */
posh_status posh_extract_features(const char* snapshot_json, double* out_values,
                                  size_t* out_len);

/* ---- protective operation chains ------------------------------------ */

/* Generates one random map: psi chains, block length <= max_size, leaves
 * restricted so the map's feature prevalence reaches prevalence_target
 * percent of the schema. */
posh_status posh_map_generate(size_t psi, size_t max_size, double prevalence_target,
                              uint64_t seed, posh_map** out);

/* Candidate-map selection: generates candidate_maps maps and keeps the one
 * whose mapped feature space yields the best validation F1 for the model
 * family named by algorithm ("random_forest", "extra_trees", ...). */
posh_status posh_map_select(const posh_dataset* train, const char* algorithm,
                            size_t psi, size_t max_size, size_t candidate_maps,
                            uint64_t seed, posh_map** out);

posh_status posh_map_transform(const posh_map* map, const posh_dataset* dataset,
                               posh_dataset** out);

posh_status posh_map_prevalence(const posh_map* map, double* out_percent);

posh_status posh_map_save(const posh_map* map, const char* path);
posh_status posh_map_load(const char* path, posh_map** out);

void posh_map_free(posh_map* map);

/* ---- classifiers ----------------------------------------------------- */

/* Trains with the built-in hyperparameter grid search (cv_folds stratified
 * folds). algorithm is one of: decision_tree, random_forest, extra_trees,
 * bagging, knn, naive_bayes, sgd_logistic. */
posh_status posh_model_train(const posh_dataset* train, const char* algorithm,
                             size_t cv_folds, uint64_t seed, posh_model** out);

/* values must contain exactly the model's feature count; *out_label is
 * 1 = phishing, 0 = benign. */
posh_status posh_model_predict(const posh_model* model, const double* values,
                               size_t len, int* out_label);

/* F1, accuracy, FPR, TPR on a dataset; any output pointer may be NULL. */
posh_status posh_model_evaluate(const posh_model* model, const posh_dataset* test,
                                double* out_f1, double* out_accuracy,
                                double* out_fpr, double* out_tpr);

posh_status posh_model_save(const posh_model* model, const char* path);
posh_status posh_model_load(const char* path, posh_model** out);

void posh_model_free(posh_model* model);

/* ---- attacks and impact ---------------------------------------------- */

/* Mean recall impact of a named substitution attack (gba1/gba2/gba3 from
 * profiles_json_path) against the model on the test split. When map is
 * non-NULL, perturbed samples are remapped before classification (the
 * model must have been trained in the mapped space). */
posh_status posh_attack_impact(const posh_model* model, const posh_dataset* train,
                               const posh_dataset* test, const char* attack_name,
                               const char* profiles_json_path, const posh_map* map,
                               double* out_impact);

/* Impact of the delta-bounded attack: trials random feature subsets of
 * floor(delta_percent * 27 / 100) features forced to the benign reference. */
posh_status posh_attack_delta_impact(const posh_model* model, const posh_dataset* train,
                                     const posh_dataset* test, double delta_percent,
                                     size_t trials, uint64_t seed, const posh_map* map,
                                     double* out_impact);

/* ---- statistics ------------------------------------------------------ */

/* Two-sided Wilcoxon signed-rank test on n paired observations. */
posh_status posh_wilcoxon(const double* a, const double* b, size_t n,
                          double* out_p_value, double* out_effect_size);

double posh_impact(double value_no_attack, double value_under_attack);
double posh_bonferroni(double alpha, size_t comparisons);

/* ---- experiment pipeline --------------------------------------------- */

/* Runs a full experiment stage from a JSON config file (see README):
 * stage is one of "baseline", "sweep", "prevalence", "stats". */
posh_status posh_run_stage(const char* config_path, const char* stage);

#ifdef __cplusplus
}
#endif

#endif /* POCSHIELD_H */
