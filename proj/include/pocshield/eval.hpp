#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pocshield/attacks.hpp"
#include "pocshield/classifiers.hpp"
#include "pocshield/dataset.hpp"

namespace posh {

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
};

struct Metrics {
    double f1 = 0.0;
    double accuracy = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;  // recall
};

// Standard definitions with 0/0 -> 0 conventions; phishing is the
// positive class throughout.
Metrics metrics(const ConfusionCounts& counts);

ConfusionCounts confusion(const TrainedModel& model, const Dataset& dataset);

// Relative drop of a performance metric under attack:
// (mu_no_attack - mu_attack) / mu_no_attack. Negative when the attack
// improved the metric.
double impact(double mu_no_attack, double mu_attack);

struct ImpactReport {
    std::string attack_id;
    std::string classifier_id;
    std::string dataset_id;
    std::string metric_name;
    double value_no_attack = 0.0;
    double value_under_attack = 0.0;  // mean over trials
    double impact = 0.0;              // mean of per-trial impacts
    std::vector<double> per_trial_impact;
};

// Recall-based impact of an attack: the no-attack value is the model's
// recall over the clean phishing rows, the under-attack value its recall
// over each perturbed trial; the reported impact is the mean of per-trial
// impacts.
ImpactReport attack_impact(const TrainedModel& model, const Dataset& clean_test,
                           const PerturbedSet& perturbed);

// baseline.impact - hardened.impact; positive means the hardened variant
// mitigated the attack.
double impact_difference(const ImpactReport& baseline, const ImpactReport& hardened);

struct WilcoxonResult {
    double p_value = 1.0;
    double effect_size = 0.0;  // rank-biserial: (W+ - W-) / (W+ + W-)
    std::size_t n = 0;         // pairs remaining after dropping zero diffs
    double w_plus = 0.0;
    double w_minus = 0.0;
};

// Two-sided Wilcoxon signed-rank test on paired samples. Zero differences
// are dropped, ties get average ranks; the null distribution is exact for
// n <= 25 and a normal approximation with continuity correction beyond.
// Requires n >= 5 after drops.
WilcoxonResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& paired);

double bonferroni(double alpha, std::size_t comparisons);

struct StatReport {
    std::string comparison_id;
    double p_value = 1.0;
    double effect_size = 0.0;
    std::size_t n = 0;
    double alpha_adjusted = 0.05;
};

}  // namespace posh
