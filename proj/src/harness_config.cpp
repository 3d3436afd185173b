#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pocshield/error.hpp"
#include "pocshield/harness.hpp"

namespace posh {

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
        raise(ErrorCode::ConfigError, std::string("config JSON: ") + e.what());
    }

    ExperimentConfig c;
    c.dataset_paths = doc.at("datasets").get<std::vector<std::string>>();
    c.schema_path = doc.value("schema", std::string());
    c.attack_profiles_path = doc.value("attack_profiles", std::string());
    for (const auto& name : doc.at("classifiers")) {
        c.classifiers.push_back(algorithm_from_name(name.get<std::string>()));
    }
    if (doc.contains("poc")) {
        const auto& p = doc["poc"];
        c.poc.psi = p.value("psi", c.poc.psi);
        c.poc.max_size = p.value("max_size", c.poc.max_size);
        c.poc.candidate_maps = p.value("candidate_maps", c.poc.candidate_maps);
        c.poc.prevalence_target = p.value("prevalence_target", c.poc.prevalence_target);
    }
    if (doc.contains("deltas")) c.deltas = doc["deltas"].get<std::vector<double>>();
    c.delta_trials = doc.value("delta_trials", c.delta_trials);
    c.simple_attacks = doc.value("simple_attacks", c.simple_attacks);
    c.train_fraction = doc.value("train_fraction", c.train_fraction);
    c.cv_folds = doc.value("cv_folds", c.cv_folds);
    c.regrid_poc = doc.value("regrid_poc", c.regrid_poc);
    c.workers = doc.value("workers", c.workers);
    c.master_seed = doc.value("seed", c.master_seed);
    c.output_dir = doc.value("output_dir", c.output_dir);
    c.validate();
    return c;
}

std::string ExperimentConfig::to_json() const {
    nlohmann::json doc;
    doc["datasets"] = dataset_paths;
    if (!schema_path.empty()) doc["schema"] = schema_path;
    if (!attack_profiles_path.empty()) doc["attack_profiles"] = attack_profiles_path;
    doc["classifiers"] = nlohmann::json::array();
    for (Algorithm a : classifiers) doc["classifiers"].push_back(algorithm_name(a));
    doc["poc"] = {{"psi", poc.psi},
                  {"max_size", poc.max_size},
                  {"candidate_maps", poc.candidate_maps},
                  {"prevalence_target", poc.prevalence_target}};
    doc["deltas"] = deltas;
    doc["delta_trials"] = delta_trials;
    doc["simple_attacks"] = simple_attacks;
    doc["train_fraction"] = train_fraction;
    doc["cv_folds"] = cv_folds;
    doc["regrid_poc"] = regrid_poc;
    doc["workers"] = workers;
    doc["seed"] = master_seed;
    doc["output_dir"] = output_dir;
    return doc.dump(2);
}

void ExperimentConfig::validate() const {
    if (dataset_paths.empty()) raise(ErrorCode::ConfigError, "no datasets configured");
    if (classifiers.empty()) raise(ErrorCode::ConfigError, "no classifiers configured");
    if (poc.candidate_maps < 1) raise(ErrorCode::ConfigError, "candidate_maps must be >= 1");
    if (poc.psi < 1) raise(ErrorCode::ConfigError, "psi must be >= 1");
    if (poc.max_size < 1) raise(ErrorCode::ConfigError, "max_size must be >= 1");
    for (double d : deltas) {
        if (d < 0.0 || d > 100.0) raise(ErrorCode::ConfigError, "deltas must lie in [0,100]");
    }
    if (delta_trials < 1) raise(ErrorCode::ConfigError, "delta_trials must be >= 1");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        raise(ErrorCode::ConfigError, "train_fraction must lie in (0,1)");
    }
    if (cv_folds < 2) raise(ErrorCode::ConfigError, "cv_folds must be >= 2");
    if (workers < 1) raise(ErrorCode::ConfigError, "workers must be >= 1");
    if (output_dir.empty()) raise(ErrorCode::ConfigError, "output_dir must be set");
}

}  // namespace posh
