#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pocshield/classifiers.hpp"
#include "pocshield/error.hpp"

namespace posh {

namespace {

constexpr int kModelFormatVersion = 1;

nlohmann::json tree_to_json(const Tree& t) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : t.nodes) {
        nodes.push_back({n.feature, n.threshold, n.left, n.right, n.leaf_label});
    }
    return nodes;
}

Tree tree_from_json(const nlohmann::json& doc) {
    Tree t;
    for (const auto& item : doc) {
        TreeNode n;
        n.feature = item.at(0).get<int>();
        n.threshold = item.at(1).get<double>();
        n.left = item.at(2).get<int>();
        n.right = item.at(3).get<int>();
        n.leaf_label = item.at(4).get<int>();
        t.nodes.push_back(n);
    }
    return t;
}

}  // namespace

std::string TrainedModel::to_json() const {
    nlohmann::json doc;
    doc["format_version"] = kModelFormatVersion;
    doc["algorithm"] = algorithm_name(spec.algorithm);
    doc["hyperparams"] = spec.hyperparams;
    doc["seed"] = spec.seed;
    doc["schema_fingerprint"] = schema_fingerprint;
    doc["n_features"] = n_features;
    doc["train_rows"] = train_rows;
    doc["prior_phishing"] = prior_phishing;

    if (!trees.empty()) {
        doc["trees"] = nlohmann::json::array();
        for (const auto& t : trees) doc["trees"].push_back(tree_to_json(t));
    }
    if (!knn_points.empty()) {
        doc["knn_points"] = knn_points;
        doc["knn_labels"] = knn_labels;
    }
    if (!scale_mean.empty()) {
        doc["scale_mean"] = scale_mean;
        doc["scale_std"] = scale_std;
    }
    if (!nb_mean[0].empty()) {
        doc["nb_mean"] = {nb_mean[0], nb_mean[1]};
        doc["nb_var"] = {nb_var[0], nb_var[1]};
        doc["nb_log_prior"] = {nb_log_prior[0], nb_log_prior[1]};
    }
    if (!sgd_weights.empty()) {
        doc["sgd_weights"] = sgd_weights;
        doc["sgd_bias"] = sgd_bias;
        doc["sgd_epoch_loss"] = sgd_epoch_loss;
    }
    return doc.dump();
}

TrainedModel TrainedModel::from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        raise(ErrorCode::ParseError, std::string("model JSON: ") + e.what());
    }
    if (doc.value("format_version", -1) != kModelFormatVersion) {
        raise(ErrorCode::ParseError, "model JSON: unsupported format version");
    }
    TrainedModel m;
    m.spec.algorithm = algorithm_from_name(doc.at("algorithm").get<std::string>());
    m.spec.hyperparams = doc.at("hyperparams").get<std::map<std::string, double>>();
    m.spec.seed = doc.at("seed").get<std::uint64_t>();
    m.schema_fingerprint = doc.at("schema_fingerprint").get<std::uint64_t>();
    m.n_features = doc.at("n_features").get<std::size_t>();
    m.train_rows = doc.at("train_rows").get<std::size_t>();
    m.prior_phishing = doc.at("prior_phishing").get<double>();

    if (doc.contains("trees")) {
        for (const auto& t : doc["trees"]) m.trees.push_back(tree_from_json(t));
    }
    if (doc.contains("knn_points")) {
        m.knn_points = doc["knn_points"].get<std::vector<std::vector<double>>>();
        m.knn_labels = doc["knn_labels"].get<std::vector<int>>();
    }
    if (doc.contains("scale_mean")) {
        m.scale_mean = doc["scale_mean"].get<std::vector<double>>();
        m.scale_std = doc["scale_std"].get<std::vector<double>>();
    }
    if (doc.contains("nb_mean")) {
        m.nb_mean[0] = doc["nb_mean"][0].get<std::vector<double>>();
        m.nb_mean[1] = doc["nb_mean"][1].get<std::vector<double>>();
        m.nb_var[0] = doc["nb_var"][0].get<std::vector<double>>();
        m.nb_var[1] = doc["nb_var"][1].get<std::vector<double>>();
        m.nb_log_prior[0] = doc["nb_log_prior"][0].get<double>();
        m.nb_log_prior[1] = doc["nb_log_prior"][1].get<double>();
    }
    if (doc.contains("sgd_weights")) {
        m.sgd_weights = doc["sgd_weights"].get<std::vector<double>>();
        m.sgd_bias = doc["sgd_bias"].get<double>();
        m.sgd_epoch_loss = doc["sgd_epoch_loss"].get<std::vector<double>>();
    }
    return m;
}

void TrainedModel::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) raise(ErrorCode::IoError, "cannot write model file: " + path);
    out << to_json() << "\n";
}

TrainedModel TrainedModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open model file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

}  // namespace posh
