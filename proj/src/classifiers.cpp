#include "pocshield/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>

#include "pocshield/error.hpp"
#include "pocshield/eval.hpp"
#include "pocshield/rng.hpp"

namespace posh {

namespace {

const std::map<std::string, double>& defaults_for(Algorithm a) {
    static const std::map<Algorithm, std::map<std::string, double>> table = {
        {Algorithm::DecisionTree, {{"max_depth", 0}, {"min_samples_leaf", 1}}},
        {Algorithm::RandomForest,
         {{"n_estimators", 100}, {"max_depth", 0}, {"min_samples_leaf", 1}, {"max_features", 0}}},
        {Algorithm::ExtraTrees,
         {{"n_estimators", 100}, {"max_depth", 0}, {"min_samples_leaf", 1}, {"max_features", 0}}},
        {Algorithm::Bagging,
         {{"n_estimators", 100}, {"max_depth", 0}, {"min_samples_leaf", 1}}},
        {Algorithm::Knn, {{"k", 5}}},
        {Algorithm::NaiveBayes, {}},
        {Algorithm::SgdLogistic,
         {{"epochs", 50}, {"alpha", 1e-4}, {"eta0", 0.1}, {"power_t", 0.5}}},
    };
    return table.at(a);
}

void validate_hyperparams(const ClassifierSpec& spec) {
    const auto& allowed = defaults_for(spec.algorithm);
    for (const auto& [key, value] : spec.hyperparams) {
        if (!allowed.count(key)) {
            raise(ErrorCode::BadHyperparam,
                  std::string(algorithm_name(spec.algorithm)) +
                      " does not accept hyperparameter '" + key + "'");
        }
        (void)value;
    }
}

struct TrainData {
    // column-major feature matrix plus labels
    std::vector<std::vector<double>> columns;
    std::vector<int> labels;
    std::size_t rows = 0;

    explicit TrainData(const Dataset& d) {
        rows = d.size();
        columns.assign(d.schema().size(), std::vector<double>(rows));
        labels.resize(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            const auto& s = d.row(r);
            labels[r] = static_cast<int>(s.label);
            for (std::size_t f = 0; f < s.values.size(); ++f) {
                columns[f][r] = s.values[f];
            }
        }
    }
};

// ---------------------------------------------------------------------------
// CART trees

struct TreeParams {
    std::size_t max_depth = 0;  // 0 = unbounded
    std::size_t min_samples_leaf = 1;
    std::size_t max_features = 0;  // 0 = all
    bool random_thresholds = false;  // ExtraTrees
};

struct SplitChoice {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double impurity = std::numeric_limits<double>::infinity();
};

double weighted_gini(double n_left, double p_left, double n_right, double p_right) {
    auto gini = [](double n, double p) {
        if (n <= 0.0) return 0.0;
        double q = p / n;
        return 2.0 * q * (1.0 - q);
    };
    double n = n_left + n_right;
    return (n_left * gini(n_left, p_left) + n_right * gini(n_right, p_right)) / n;
}

class TreeBuilder {
public:
    TreeBuilder(const TrainData& data, const TreeParams& params, Rng& rng)
        : data_(data), params_(params), rng_(rng) {}

    Tree build(const std::vector<std::size_t>& rows) {
        Tree tree;
        grow(rows, 0, tree);
        return tree;
    }

private:
    int make_leaf(const std::vector<std::size_t>& rows, Tree& tree) {
        std::size_t phishing = 0;
        for (std::size_t r : rows) phishing += static_cast<std::size_t>(data_.labels[r]);
        TreeNode node;
        // majority; exact tie goes to Phishing
        node.leaf_label = 2 * phishing >= rows.size() ? 1 : 0;
        tree.nodes.push_back(node);
        return static_cast<int>(tree.nodes.size() - 1);
    }

    std::vector<std::size_t> candidate_features() {
        const std::size_t nf = data_.columns.size();
        std::size_t take = params_.max_features == 0 ? nf : std::min(params_.max_features, nf);
        std::vector<std::size_t> all(nf);
        std::iota(all.begin(), all.end(), 0);
        if (take >= nf) return all;
        // partial Fisher-Yates, then sorted so the scan order is canonical
        for (std::size_t i = 0; i < take; ++i) {
            std::size_t j = i + static_cast<std::size_t>(rng_.uniform_index(nf - i));
            std::swap(all[i], all[j]);
        }
        all.resize(take);
        std::sort(all.begin(), all.end());
        return all;
    }

    SplitChoice best_split(const std::vector<std::size_t>& rows) {
        SplitChoice best;
        for (std::size_t f : candidate_features()) {
            if (params_.random_thresholds) {
                score_random_threshold(rows, f, best);
            } else {
                score_exact(rows, f, best);
            }
        }
        return best;
    }

    // exhaustive threshold scan between distinct sorted values
    void score_exact(const std::vector<std::size_t>& rows, std::size_t f,
                     SplitChoice& best) {
        const auto& col = data_.columns[f];
        std::vector<std::pair<double, int>> vals;
        vals.reserve(rows.size());
        for (std::size_t r : rows) vals.emplace_back(col[r], data_.labels[r]);
        std::sort(vals.begin(), vals.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        double total_p = 0.0;
        for (const auto& [v, l] : vals) total_p += l;
        const double n = static_cast<double>(vals.size());

        double left_n = 0.0, left_p = 0.0;
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
            left_n += 1.0;
            left_p += vals[i].second;
            if (vals[i].first == vals[i + 1].first) continue;
            if (left_n < params_.min_samples_leaf ||
                n - left_n < params_.min_samples_leaf) {
                continue;
            }
            double imp = weighted_gini(left_n, left_p, n - left_n, total_p - left_p);
            double thr = 0.5 * (vals[i].first + vals[i + 1].first);
            if (imp < best.impurity - 1e-15 ||
                (std::abs(imp - best.impurity) <= 1e-15 && best.found &&
                 (f < best.feature || (f == best.feature && thr < best.threshold)))) {
                best.found = true;
                best.impurity = imp;
                best.feature = f;
                best.threshold = thr;
            }
        }
    }

    // one uniform threshold in the node's value range
    void score_random_threshold(const std::vector<std::size_t>& rows, std::size_t f,
                                SplitChoice& best) {
        const auto& col = data_.columns[f];
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t r : rows) {
            lo = std::min(lo, col[r]);
            hi = std::max(hi, col[r]);
        }
        if (!(hi > lo)) return;
        double thr = rng_.uniform_real(lo, hi);

        double left_n = 0.0, left_p = 0.0, total_p = 0.0;
        for (std::size_t r : rows) {
            total_p += data_.labels[r];
            if (col[r] <= thr) {
                left_n += 1.0;
                left_p += data_.labels[r];
            }
        }
        double n = static_cast<double>(rows.size());
        if (left_n < params_.min_samples_leaf || n - left_n < params_.min_samples_leaf ||
            left_n == 0.0 || left_n == n) {
            return;
        }
        double imp = weighted_gini(left_n, left_p, n - left_n, total_p - left_p);
        if (imp < best.impurity) {
            best.found = true;
            best.impurity = imp;
            best.feature = f;
            best.threshold = thr;
        }
    }

    int grow(const std::vector<std::size_t>& rows, std::size_t depth, Tree& tree) {
        std::size_t phishing = 0;
        for (std::size_t r : rows) phishing += static_cast<std::size_t>(data_.labels[r]);
        bool pure = phishing == 0 || phishing == rows.size();
        bool depth_capped = params_.max_depth != 0 && depth >= params_.max_depth;
        if (pure || depth_capped || rows.size() < 2 * params_.min_samples_leaf) {
            return make_leaf(rows, tree);
        }

        SplitChoice split = best_split(rows);
        if (!split.found) return make_leaf(rows, tree);

        std::vector<std::size_t> left_rows, right_rows;
        const auto& col = data_.columns[split.feature];
        for (std::size_t r : rows) {
            (col[r] <= split.threshold ? left_rows : right_rows).push_back(r);
        }
        if (left_rows.empty() || right_rows.empty()) return make_leaf(rows, tree);

        TreeNode node;
        node.feature = static_cast<int>(split.feature);
        node.threshold = split.threshold;
        tree.nodes.push_back(node);
        int self = static_cast<int>(tree.nodes.size() - 1);
        int left = grow(left_rows, depth + 1, tree);
        int right = grow(right_rows, depth + 1, tree);
        tree.nodes[static_cast<std::size_t>(self)].left = left;
        tree.nodes[static_cast<std::size_t>(self)].right = right;
        return self;
    }

    const TrainData& data_;
    const TreeParams& params_;
    Rng& rng_;
};

TreeParams tree_params_from(const ClassifierSpec& spec, std::size_t n_features) {
    TreeParams p;
    p.max_depth = static_cast<std::size_t>(spec.param("max_depth", 0));
    p.min_samples_leaf = std::max<std::size_t>(
        1, static_cast<std::size_t>(spec.param("min_samples_leaf", 1)));
    if (spec.algorithm == Algorithm::RandomForest ||
        spec.algorithm == Algorithm::ExtraTrees) {
        auto mf = static_cast<std::size_t>(spec.param("max_features", 0));
        p.max_features = mf != 0 ? mf
                                 : static_cast<std::size_t>(std::max(
                                       1.0, std::floor(std::sqrt(
                                                static_cast<double>(n_features)))));
    }
    p.random_thresholds = spec.algorithm == Algorithm::ExtraTrees;
    return p;
}

void train_tree_family(const ClassifierSpec& spec, const TrainData& data,
                       TrainedModel& model) {
    TreeParams params = tree_params_from(spec, data.columns.size());
    if (spec.algorithm == Algorithm::DecisionTree) {
        std::vector<std::size_t> rows(data.rows);
        std::iota(rows.begin(), rows.end(), 0);
        Rng rng(derive_seed(spec.seed, "tree-0"));
        model.trees.push_back(TreeBuilder(data, params, rng).build(rows));
        return;
    }
    auto n_trees = static_cast<std::size_t>(spec.param("n_estimators", 100));
    if (n_trees == 0) raise(ErrorCode::BadHyperparam, "n_estimators must be >= 1");
    model.trees.reserve(n_trees);
    for (std::size_t t = 0; t < n_trees; ++t) {
        Rng rng(derive_seed(spec.seed, "tree-" + std::to_string(t)));
        std::vector<std::size_t> rows(data.rows);
        for (auto& r : rows) r = static_cast<std::size_t>(rng.uniform_index(data.rows));
        std::sort(rows.begin(), rows.end());
        model.trees.push_back(TreeBuilder(data, params, rng).build(rows));
    }
}

// ---------------------------------------------------------------------------
// scaling helpers (knn, sgd)

void fit_scaler(const TrainData& data, TrainedModel& model) {
    const std::size_t nf = data.columns.size();
    model.scale_mean.assign(nf, 0.0);
    model.scale_std.assign(nf, 1.0);
    for (std::size_t f = 0; f < nf; ++f) {
        double sum = 0.0;
        for (double v : data.columns[f]) sum += v;
        double mean = sum / static_cast<double>(data.rows);
        double ss = 0.0;
        for (double v : data.columns[f]) ss += (v - mean) * (v - mean);
        double sd = std::sqrt(ss / static_cast<double>(data.rows));
        model.scale_mean[f] = mean;
        model.scale_std[f] = sd > 1e-12 ? sd : 1.0;  // constant columns pass through
    }
}

std::vector<double> scaled(const TrainedModel& model, const std::vector<double>& values) {
    std::vector<double> out(values.size());
    for (std::size_t f = 0; f < values.size(); ++f) {
        out[f] = (values[f] - model.scale_mean[f]) / model.scale_std[f];
    }
    return out;
}

// ---------------------------------------------------------------------------

void train_knn(const TrainData& data, TrainedModel& model) {
    fit_scaler(data, model);
    model.knn_points.reserve(data.rows);
    std::vector<double> row(data.columns.size());
    for (std::size_t r = 0; r < data.rows; ++r) {
        for (std::size_t f = 0; f < data.columns.size(); ++f) row[f] = data.columns[f][r];
        model.knn_points.push_back(scaled(model, row));
        model.knn_labels.push_back(data.labels[r]);
    }
}

void train_naive_bayes(const TrainData& data, TrainedModel& model) {
    constexpr double kVarFloor = 1e-9;
    const std::size_t nf = data.columns.size();
    std::size_t n_cls[2] = {0, 0};
    for (int l : data.labels) n_cls[static_cast<std::size_t>(l)]++;
    for (int c = 0; c < 2; ++c) {
        model.nb_mean[c].assign(nf, 0.0);
        model.nb_var[c].assign(nf, kVarFloor);
        model.nb_log_prior[c] =
            std::log(static_cast<double>(n_cls[c]) / static_cast<double>(data.rows));
    }
    for (std::size_t f = 0; f < nf; ++f) {
        double sum[2] = {0.0, 0.0};
        for (std::size_t r = 0; r < data.rows; ++r) {
            sum[static_cast<std::size_t>(data.labels[r])] += data.columns[f][r];
        }
        for (int c = 0; c < 2; ++c) {
            model.nb_mean[c][f] = sum[c] / static_cast<double>(n_cls[c]);
        }
        double ss[2] = {0.0, 0.0};
        for (std::size_t r = 0; r < data.rows; ++r) {
            int c = data.labels[r];
            double d = data.columns[f][r] - model.nb_mean[static_cast<std::size_t>(c)][f];
            ss[static_cast<std::size_t>(c)] += d * d;
        }
        for (int c = 0; c < 2; ++c) {
            model.nb_var[c][f] =
                std::max(kVarFloor, ss[c] / static_cast<double>(n_cls[c]));
        }
    }
}

void train_sgd_logistic(const ClassifierSpec& spec, const TrainData& data,
                        TrainedModel& model) {
    fit_scaler(data, model);
    const std::size_t nf = data.columns.size();
    const auto epochs = static_cast<std::size_t>(spec.param("epochs", 50));
    const double alpha = spec.param("alpha", 1e-4);
    const double eta0 = spec.param("eta0", 0.1);
    const double power_t = spec.param("power_t", 0.5);

    std::vector<std::vector<double>> x;
    x.reserve(data.rows);
    std::vector<double> row(nf);
    for (std::size_t r = 0; r < data.rows; ++r) {
        for (std::size_t f = 0; f < nf; ++f) row[f] = data.columns[f][r];
        x.push_back(scaled(model, row));
    }

    model.sgd_weights.assign(nf, 0.0);
    model.sgd_bias = 0.0;
    Rng rng(derive_seed(spec.seed, "sgd"));
    std::vector<std::size_t> order(data.rows);
    std::iota(order.begin(), order.end(), 0);

    auto margin = [&](const std::vector<double>& v) {
        double z = model.sgd_bias;
        for (std::size_t f = 0; f < nf; ++f) z += model.sgd_weights[f] * v[f];
        return z;
    };

    std::size_t step = 0;
    for (std::size_t e = 0; e < epochs; ++e) {
        rng.shuffle(order);
        for (std::size_t r : order) {
            ++step;
            double eta = eta0 / std::pow(static_cast<double>(step), power_t);
            double y = data.labels[r] == 1 ? 1.0 : -1.0;
            double z = margin(x[r]);
            double g = -y / (1.0 + std::exp(y * z));  // d/dz log(1+exp(-yz))
            for (std::size_t f = 0; f < nf; ++f) {
                model.sgd_weights[f] -=
                    eta * (g * x[r][f] + alpha * model.sgd_weights[f]);
            }
            model.sgd_bias -= eta * g;
        }
        double loss = 0.0;
        for (std::size_t r = 0; r < data.rows; ++r) {
            double y = data.labels[r] == 1 ? 1.0 : -1.0;
            double z = y * margin(x[r]);
            loss += z > 35.0 ? 0.0 : std::log1p(std::exp(-z));
        }
        model.sgd_epoch_loss.push_back(loss / static_cast<double>(data.rows));
    }
}

}  // namespace

const char* algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::DecisionTree: return "decision_tree";
        case Algorithm::RandomForest: return "random_forest";
        case Algorithm::ExtraTrees: return "extra_trees";
        case Algorithm::Bagging: return "bagging";
        case Algorithm::Knn: return "knn";
        case Algorithm::NaiveBayes: return "naive_bayes";
        case Algorithm::SgdLogistic: return "sgd_logistic";
    }
    return "?";
}

Algorithm algorithm_from_name(const std::string& name) {
    static const std::map<std::string, Algorithm> table = {
        {"decision_tree", Algorithm::DecisionTree},
        {"random_forest", Algorithm::RandomForest},
        {"extra_trees", Algorithm::ExtraTrees},
        {"bagging", Algorithm::Bagging},
        {"knn", Algorithm::Knn},
        {"naive_bayes", Algorithm::NaiveBayes},
        {"sgd_logistic", Algorithm::SgdLogistic},
    };
    auto it = table.find(name);
    if (it == table.end()) {
        raise(ErrorCode::ConfigError, "unknown algorithm: " + name);
    }
    return it->second;
}

double ClassifierSpec::param(const std::string& key, double fallback) const {
    auto it = hyperparams.find(key);
    return it == hyperparams.end() ? fallback : it->second;
}

std::string ClassifierSpec::id() const {
    std::string out = algorithm_name(algorithm);
    for (const auto& [key, value] : hyperparams) {
        char buf[64];
        std::snprintf(buf, sizeof buf, ",%s=%g", key.c_str(), value);
        out += buf;
    }
    return out;
}

int Tree::predict(const std::vector<double>& values) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
        const TreeNode& n = nodes[static_cast<std::size_t>(i)];
        i = values[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].leaf_label;
}

TrainedModel train(const ClassifierSpec& spec, const Dataset& train_set) {
    validate_hyperparams(spec);
    std::size_t phishing = train_set.count(Label::Phishing);
    if (phishing == 0 || phishing == train_set.size()) {
        raise(ErrorCode::SingleClassTraining, "training set must contain both classes");
    }
    for (const auto& s : train_set.samples()) {
        for (double v : s.values) {
            if (!std::isfinite(v)) {
                raise(ErrorCode::NonFiniteFeature, "training features must be finite");
            }
        }
    }

    TrainedModel model;
    model.spec = spec;
    model.schema_fingerprint = train_set.schema().fingerprint();
    model.n_features = train_set.schema().size();
    model.train_rows = train_set.size();
    model.prior_phishing =
        static_cast<double>(phishing) / static_cast<double>(train_set.size());

    TrainData data(train_set);
    switch (spec.algorithm) {
        case Algorithm::DecisionTree:
        case Algorithm::RandomForest:
        case Algorithm::ExtraTrees:
        case Algorithm::Bagging:
            train_tree_family(spec, data, model);
            break;
        case Algorithm::Knn:
            train_knn(data, model);
            break;
        case Algorithm::NaiveBayes:
            train_naive_bayes(data, model);
            break;
        case Algorithm::SgdLogistic:
            train_sgd_logistic(spec, data, model);
            break;
    }
    return model;
}

namespace {

Label predict_knn(const TrainedModel& model, const std::vector<double>& values) {
    auto q = scaled(model, values);
    std::vector<double> dist(model.knn_points.size());
    for (std::size_t i = 0; i < model.knn_points.size(); ++i) {
        double d = 0.0;
        for (std::size_t f = 0; f < q.size(); ++f) {
            double diff = q[f] - model.knn_points[i][f];
            d += diff * diff;
        }
        dist[i] = d;
    }
    auto k = static_cast<std::size_t>(model.spec.param("k", 5));
    k = std::min(std::max<std::size_t>(k, 1), dist.size());

    std::vector<double> sorted = dist;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(k - 1),
                     sorted.end());
    double kth = sorted[k - 1];

    // rows strictly closer than the kth distance vote in full; ties at the
    // boundary share the remaining slots fractionally, so the vote does not
    // depend on training row order
    double votes[2] = {0.0, 0.0};
    double tie_count[2] = {0.0, 0.0};
    std::size_t closer = 0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        if (dist[i] < kth) {
            votes[static_cast<std::size_t>(model.knn_labels[i])] += 1.0;
            ++closer;
        } else if (dist[i] == kth) {
            tie_count[static_cast<std::size_t>(model.knn_labels[i])] += 1.0;
        }
    }
    double remaining = static_cast<double>(k - closer);
    double ties = tie_count[0] + tie_count[1];
    if (ties > 0.0 && remaining > 0.0) {
        votes[0] += remaining * tie_count[0] / ties;
        votes[1] += remaining * tie_count[1] / ties;
    }
    return votes[1] >= votes[0] ? Label::Phishing : Label::Benign;
}

Label predict_nb(const TrainedModel& model, const std::vector<double>& values) {
    double score[2];
    for (int c = 0; c < 2; ++c) {
        double s = model.nb_log_prior[c];
        for (std::size_t f = 0; f < values.size(); ++f) {
            double var = model.nb_var[c][f];
            double d = values[f] - model.nb_mean[c][f];
            s += -0.5 * (std::log(6.283185307179586 * var) + d * d / var);
        }
        score[c] = s;
    }
    return score[1] >= score[0] ? Label::Phishing : Label::Benign;
}

}  // namespace

Label predict(const TrainedModel& model, const Sample& sample) {
    if (sample.values.size() != model.n_features) {
        raise(ErrorCode::SchemaMismatch, "sample width does not match model");
    }
    switch (model.spec.algorithm) {
        case Algorithm::DecisionTree:
        case Algorithm::RandomForest:
        case Algorithm::ExtraTrees:
        case Algorithm::Bagging: {
            std::size_t phishing = 0;
            for (const auto& t : model.trees) {
                phishing += static_cast<std::size_t>(t.predict(sample.values));
            }
            return 2 * phishing >= model.trees.size() ? Label::Phishing : Label::Benign;
        }
        case Algorithm::Knn:
            return predict_knn(model, sample.values);
        case Algorithm::NaiveBayes:
            return predict_nb(model, sample.values);
        case Algorithm::SgdLogistic: {
            auto x = scaled(model, sample.values);
            double z = model.sgd_bias;
            for (std::size_t f = 0; f < x.size(); ++f) {
                z += model.sgd_weights[f] * x[f];
            }
            return z >= 0.0 ? Label::Phishing : Label::Benign;
        }
    }
    return Label::Benign;
}

namespace {

std::vector<std::map<std::string, double>> expand_grid(const HyperGrid& grid) {
    std::vector<std::map<std::string, double>> cells = {{}};
    for (const auto& [key, values] : grid) {
        if (values.empty()) raise(ErrorCode::ConfigError, "empty grid axis: " + key);
        std::vector<std::map<std::string, double>> next;
        for (const auto& cell : cells) {
            for (double v : values) {
                auto c = cell;
                c[key] = v;
                next.push_back(std::move(c));
            }
        }
        cells = std::move(next);
    }
    return cells;
}

// smaller-model ordering used to break F1 ties
bool smaller_model(const ClassifierSpec& a, const ClassifierSpec& b) {
    auto key = [](const ClassifierSpec& s) {
        double depth = s.param("max_depth", 0);
        if (depth == 0) depth = std::numeric_limits<double>::infinity();
        return std::tuple(s.param("n_estimators", 0), depth, -s.param("alpha", 0.0),
                          -s.param("min_samples_leaf", 1), s.param("k", 0));
    };
    return key(a) < key(b);
}

}  // namespace

ClassifierSpec grid_search(Algorithm algorithm, const Dataset& train_set,
                           const HyperGrid& grid, std::size_t folds,
                           std::uint64_t seed) {
    if (folds < 2) raise(ErrorCode::ConfigError, "grid search needs >= 2 folds");
    auto cells = expand_grid(grid);
    if (cells.empty()) raise(ErrorCode::ConfigError, "empty hyperparameter grid");

    // stratified fold assignment, deterministic by seed
    std::vector<std::size_t> fold_of(train_set.size());
    {
        Rng rng(derive_seed(seed, "cv-folds"));
        std::vector<std::size_t> benign, phishing;
        for (std::size_t i = 0; i < train_set.size(); ++i) {
            (train_set.row(i).label == Label::Benign ? benign : phishing).push_back(i);
        }
        for (auto* rows : {&benign, &phishing}) {
            rng.shuffle(*rows);
            for (std::size_t i = 0; i < rows->size(); ++i) {
                fold_of[(*rows)[i]] = i % folds;
            }
        }
    }

    bool any_ok = false;
    double best_f1 = -1.0;
    ClassifierSpec best;
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        ClassifierSpec spec;
        spec.algorithm = algorithm;
        spec.hyperparams = cells[ci];
        spec.seed = derive_seed(seed, "cv-model");
        double f1_sum = 0.0;
        std::size_t ok_folds = 0;
        try {
            for (std::size_t k = 0; k < folds; ++k) {
                std::vector<Sample> tr, va;
                for (std::size_t i = 0; i < train_set.size(); ++i) {
                    (fold_of[i] == k ? va : tr).push_back(train_set.row(i));
                }
                Dataset fold_train(train_set.schema(), std::move(tr), "cv.train");
                Dataset fold_val(train_set.schema(), std::move(va), "cv.val");
                TrainedModel model = train(spec, fold_train);
                f1_sum += metrics(confusion(model, fold_val)).f1;
                ++ok_folds;
            }
        } catch (const Error&) {
            continue;  // failing cells are skipped
        }
        double mean_f1 = f1_sum / static_cast<double>(ok_folds);
        any_ok = true;
        if (mean_f1 > best_f1 + 1e-12 ||
            (std::abs(mean_f1 - best_f1) <= 1e-12 && smaller_model(spec, best))) {
            best_f1 = mean_f1;
            best = spec;
        }
    }
    if (!any_ok) raise(ErrorCode::GridExhausted, "every grid cell failed to train");
    return best;
}

HyperGrid default_grid(Algorithm algorithm) {
    switch (algorithm) {
        case Algorithm::DecisionTree:
            return {{"max_depth", {0, 8, 16}}, {"min_samples_leaf", {1, 4}}};
        case Algorithm::RandomForest:
        case Algorithm::ExtraTrees:
            return {{"n_estimators", {50, 100}}, {"max_depth", {0, 16}}};
        case Algorithm::Bagging:
            return {{"n_estimators", {25, 50}}, {"max_depth", {0, 16}}};
        case Algorithm::Knn:
            return {{"k", {3, 5, 9}}};
        case Algorithm::NaiveBayes:
            return {};
        case Algorithm::SgdLogistic:
            return {{"alpha", {1e-5, 1e-4, 1e-3}}, {"eta0", {0.05, 0.1}}};
    }
    return {};
}

}  // namespace posh
