#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pocshield/dataset.hpp"
#include "pocshield/rng.hpp"

namespace posh {

// One named feature-substitution attack: each touched feature is either
// forced to the benign reference profile or to a literal value.
struct AttackProfile {
    struct Edit {
        std::string feature;
        bool use_reference = true;
        double literal = 0.0;
    };
    std::string name;
    std::vector<Edit> edits;
};

// Loads named profiles from the attack-profile JSON document. The built-in
// gba1/gba2 profiles ship in data/attack_profiles.json.
std::vector<AttackProfile> load_attack_profiles(const std::string& path);
const AttackProfile* find_profile(const std::vector<AttackProfile>& profiles,
                                  const std::string& name);

// Applies a profile to one phishing sample: touched features move to their
// target, everything else is untouched.
Sample apply_profile(const AttackProfile& profile, const Sample& sample,
                     const FeatureSchema& schema, const std::vector<double>& reference);

struct PerturbedSet {
    std::string attack_id;
    // trial -> rows aligned with the source phishing rows
    std::vector<std::vector<Sample>> trials;
    // trial -> feature indices the attack touched
    std::vector<std::vector<std::size_t>> modified_features;
};

// Simple attacks (deterministic, single trial).
PerturbedSet simple_attack(const AttackProfile& profile,
                           const std::vector<Sample>& phishing_rows,
                           const FeatureSchema& schema,
                           const std::vector<double>& reference);

// GBA-delta: per trial one uniform subset of floor(delta * |F| / 100)
// features, shared across all samples of the trial, forced to the benign
// reference. Subsets are the prefixes of per-trial random permutations, so
// a delta sweep with the same seed draws nested subsets.
PerturbedSet gba_delta(const std::vector<Sample>& phishing_rows, double delta_percent,
                       const FeatureSchema& schema, const std::vector<double>& reference,
                       std::size_t trials, std::uint64_t seed);

// Phishing-labeled rows of a dataset, in row order.
std::vector<Sample> phishing_rows(const Dataset& dataset);

}  // namespace posh
