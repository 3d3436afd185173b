#include "pocshield/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "pocshield/error.hpp"

namespace posh {

Metrics metrics(const ConfusionCounts& c) {
    Metrics m;
    const double tp = static_cast<double>(c.tp);
    const double fp = static_cast<double>(c.fp);
    const double tn = static_cast<double>(c.tn);
    const double fn = static_cast<double>(c.fn);
    const double total = tp + fp + tn + fn;

    double precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
    double recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
    m.tpr = recall;
    m.f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    m.accuracy = total > 0.0 ? (tp + tn) / total : 0.0;
    m.fpr = fp + tn > 0.0 ? fp / (fp + tn) : 0.0;
    return m;
}

ConfusionCounts confusion(const TrainedModel& model, const Dataset& dataset) {
    if (dataset.schema().fingerprint() != model.schema_fingerprint) {
        raise(ErrorCode::SchemaMismatch, "dataset schema does not match model");
    }
    ConfusionCounts c;
    for (const auto& s : dataset.samples()) {
        Label got = predict(model, s);
        if (s.label == Label::Phishing) {
            got == Label::Phishing ? ++c.tp : ++c.fn;
        } else {
            got == Label::Phishing ? ++c.fp : ++c.tn;
        }
    }
    return c;
}

namespace {

// Snap to 15 significant decimal digits. The relative drop is a ratio of two
// measured metrics; the raw division carries sub-ulp noise that depends on the
// algebraic form used, so values like (0.8, 0.6) land one ulp away from the
// intended 0.25. Fifteen digits is also the precision report files carry, so
// snapping keeps in-memory values identical to their serialized form.
double snap15(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    return std::strtod(buf, nullptr);
}

}  // namespace

double impact(double mu_no_attack, double mu_attack) {
    if (!(mu_no_attack > 0.0)) {
        raise(ErrorCode::ZeroBaselineMetric, "impact needs a positive baseline metric");
    }
    return snap15((mu_no_attack - mu_attack) / mu_no_attack);
}

namespace {

double recall_over(const TrainedModel& model, const std::vector<Sample>& rows) {
    std::size_t hit = 0;
    for (const auto& s : rows) {
        if (predict(model, s) == Label::Phishing) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(rows.size());
}

}  // namespace

ImpactReport attack_impact(const TrainedModel& model, const Dataset& clean_test,
                           const PerturbedSet& perturbed) {
    if (clean_test.schema().fingerprint() != model.schema_fingerprint) {
        raise(ErrorCode::SchemaMismatch, "test schema does not match model");
    }
    auto malicious = phishing_rows(clean_test);
    if (malicious.empty()) {
        raise(ErrorCode::EmptyMaliciousSet, "no phishing rows in the test partition");
    }
    for (const auto& trial : perturbed.trials) {
        if (trial.size() != malicious.size()) {
            raise(ErrorCode::SchemaMismatch,
                  "perturbed trial is not aligned with the clean phishing rows");
        }
    }

    ImpactReport report;
    report.attack_id = perturbed.attack_id;
    report.classifier_id = algorithm_name(model.spec.algorithm);
    report.dataset_id = clean_test.name();
    report.metric_name = "recall";
    report.value_no_attack = recall_over(model, malicious);

    double attack_sum = 0.0;
    double impact_sum = 0.0;
    for (const auto& trial : perturbed.trials) {
        double r = recall_over(model, trial);
        attack_sum += r;
        double i = impact(report.value_no_attack, r);
        report.per_trial_impact.push_back(i);
        impact_sum += i;
    }
    report.value_under_attack = attack_sum / static_cast<double>(perturbed.trials.size());
    report.impact = impact_sum / static_cast<double>(perturbed.trials.size());
    return report;
}

double impact_difference(const ImpactReport& baseline, const ImpactReport& hardened) {
    return baseline.impact - hardened.impact;
}

namespace {

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

WilcoxonResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& paired) {
    std::vector<double> diffs;
    for (const auto& [a, b] : paired) {
        double d = a - b;
        if (d != 0.0) diffs.push_back(d);
    }
    const std::size_t n = diffs.size();
    if (n < 5) {
        raise(ErrorCode::TooFewPairs,
              "wilcoxon needs >= 5 nonzero differences, got " + std::to_string(n));
    }

    // average ranks over |d| with ties
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(diffs[a]) < std::abs(diffs[b]);
    });
    std::vector<double> rank(n, 0.0);
    double tie_correction = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && std::abs(diffs[order[j]]) == std::abs(diffs[order[i]])) ++j;
        double avg = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
        for (std::size_t k = i; k < j; ++k) rank[order[k]] = avg;
        double t = static_cast<double>(j - i);
        tie_correction += t * t * t - t;
        i = j;
    }

    WilcoxonResult res;
    res.n = n;
    for (std::size_t i = 0; i < n; ++i) {
        (diffs[i] > 0.0 ? res.w_plus : res.w_minus) += rank[i];
    }
    res.effect_size = (res.w_plus - res.w_minus) / (res.w_plus + res.w_minus);

    if (n <= 25) {
        // exact null distribution of W+ by dynamic programming; ranks are
        // halves at worst, so doubling them gives integers
        std::vector<long> scaled(n);
        long total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            scaled[i] = std::lround(2.0 * rank[i]);
            total += scaled[i];
        }
        std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
        count[0] = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (long s = total; s >= scaled[i]; --s) {
                count[static_cast<std::size_t>(s)] +=
                    count[static_cast<std::size_t>(s - scaled[i])];
            }
        }
        const double denom = std::pow(2.0, static_cast<double>(n));
        long w = std::lround(2.0 * res.w_plus);
        double cdf = 0.0, sf = 0.0;
        for (long s = 0; s <= total; ++s) {
            double p = count[static_cast<std::size_t>(s)] / denom;
            if (s <= w) cdf += p;
            if (s >= w) sf += p;
        }
        res.p_value = std::min(1.0, 2.0 * std::min(cdf, sf));
    } else {
        const double nd = static_cast<double>(n);
        const double mean = nd * (nd + 1.0) / 4.0;
        const double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_correction / 48.0;
        double delta = res.w_plus - mean;
        double cc = delta > 0.0 ? -0.5 : (delta < 0.0 ? 0.5 : 0.0);
        double z = (delta + cc) / std::sqrt(var);
        res.p_value = std::min(1.0, 2.0 * normal_sf(std::abs(z)));
    }
    return res;
}

double bonferroni(double alpha, std::size_t comparisons) {
    if (comparisons == 0) raise(ErrorCode::ConfigError, "comparisons must be >= 1");
    return alpha / static_cast<double>(comparisons);
}

}  // namespace posh
