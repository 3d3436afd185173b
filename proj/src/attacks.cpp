#include "pocshield/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "pocshield/error.hpp"

namespace posh {

std::vector<AttackProfile> load_attack_profiles(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open attack profile file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
        raise(ErrorCode::ParseError, std::string("attack profiles: ") + e.what());
    }
    if (!doc.contains("profiles") || !doc["profiles"].is_object()) {
        raise(ErrorCode::ParseError, "attack profiles: missing 'profiles' object");
    }

    std::vector<AttackProfile> out;
    for (const auto& [name, edits] : doc["profiles"].items()) {
        AttackProfile p;
        p.name = name;
        for (const auto& e : edits) {
            AttackProfile::Edit edit;
            edit.feature = e.at("feature").get<std::string>();
            const auto& target = e.at("target");
            if (target.is_string()) {
                if (target.get<std::string>() != "reference") {
                    raise(ErrorCode::ParseError,
                          "attack profiles: target must be 'reference' or a number");
                }
                edit.use_reference = true;
            } else {
                edit.use_reference = false;
                edit.literal = target.get<double>();
            }
            p.edits.push_back(std::move(edit));
        }
        out.push_back(std::move(p));
    }
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.name < b.name; });
    return out;
}

const AttackProfile* find_profile(const std::vector<AttackProfile>& profiles,
                                  const std::string& name) {
    for (const auto& p : profiles) {
        if (p.name == name) return &p;
    }
    return nullptr;
}

Sample apply_profile(const AttackProfile& profile, const Sample& sample,
                     const FeatureSchema& schema, const std::vector<double>& reference) {
    if (sample.values.size() != schema.size() || reference.size() != schema.size()) {
        raise(ErrorCode::SchemaMismatch, "sample/reference does not match schema");
    }
    Sample out = sample;
    for (const auto& edit : profile.edits) {
        int idx = schema.index_of(edit.feature);
        if (idx < 0) {
            raise(ErrorCode::SchemaMismatch,
                  "attack profile '" + profile.name + "' names unknown feature '" +
                      edit.feature + "'");
        }
        out.values[static_cast<std::size_t>(idx)] =
            edit.use_reference ? reference[static_cast<std::size_t>(idx)] : edit.literal;
    }
    return out;
}

PerturbedSet simple_attack(const AttackProfile& profile,
                           const std::vector<Sample>& rows,
                           const FeatureSchema& schema,
                           const std::vector<double>& reference) {
    PerturbedSet set;
    set.attack_id = profile.name;
    std::vector<Sample> trial;
    trial.reserve(rows.size());
    for (const auto& s : rows) {
        trial.push_back(apply_profile(profile, s, schema, reference));
    }
    set.trials.push_back(std::move(trial));

    std::set<std::size_t> touched;
    for (const auto& edit : profile.edits) {
        touched.insert(static_cast<std::size_t>(schema.index_of(edit.feature)));
    }
    set.modified_features.emplace_back(touched.begin(), touched.end());
    return set;
}

PerturbedSet gba_delta(const std::vector<Sample>& rows, double delta_percent,
                       const FeatureSchema& schema, const std::vector<double>& reference,
                       std::size_t trials, std::uint64_t seed) {
    if (delta_percent < 0.0 || delta_percent > 100.0) {
        raise(ErrorCode::ConfigError, "delta must lie in [0,100]");
    }
    if (trials == 0) raise(ErrorCode::ConfigError, "trials must be >= 1");
    const std::size_t subset_size = static_cast<std::size_t>(
        std::floor(delta_percent * static_cast<double>(schema.size()) / 100.0));

    char id[32];
    std::snprintf(id, sizeof id, "gba_delta_%g", delta_percent);
    PerturbedSet set;
    set.attack_id = id;

    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng(derive_seed(seed, "gba-delta-trial-" + std::to_string(t)));
        std::vector<std::size_t> order(schema.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        rng.shuffle(order);
        std::vector<std::size_t> subset(order.begin(),
                                        order.begin() + static_cast<long>(subset_size));
        std::sort(subset.begin(), subset.end());

        std::vector<Sample> trial;
        trial.reserve(rows.size());
        for (const auto& s : rows) {
            Sample out = s;
            for (std::size_t f : subset) out.values[f] = reference[f];
            trial.push_back(std::move(out));
        }
        set.trials.push_back(std::move(trial));
        set.modified_features.push_back(std::move(subset));
    }
    return set;
}

std::vector<Sample> phishing_rows(const Dataset& dataset) {
    std::vector<Sample> out;
    for (const auto& s : dataset.samples()) {
        if (s.label == Label::Phishing) out.push_back(s);
    }
    return out;
}

}  // namespace posh
