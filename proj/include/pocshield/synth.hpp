#pragma once

#include <cstdint>
#include <string>

#include "pocshield/dataset.hpp"

namespace posh {

struct SynthParams {
    std::size_t n_phishing = 6050;
    std::size_t n_benign = 3950;
    // fraction of rows whose label is flipped after feature generation;
    // sets the irreducible error floor
    double label_noise = 0.025;
    std::uint64_t seed = 1;
    std::string name = "synth";
};

// Seeded surrogate phishing corpus over a discrete schema. Each feature
// gets its own class-conditional distribution over {-1,0,1} with a
// per-feature signal strength, so features are informative but redundant
// and unevenly so. Deterministic for fixed params.
Dataset synth_corpus(const FeatureSchema& schema, const SynthParams& params);

}  // namespace posh
