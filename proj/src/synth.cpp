#include "pocshield/synth.hpp"

#include "pocshield/error.hpp"
#include "pocshield/rng.hpp"

namespace posh {

Dataset synth_corpus(const FeatureSchema& schema, const SynthParams& params) {
    Rng rng(derive_seed(params.seed, "synth-corpus"));
    const std::size_t nf = schema.size();

    // Per-feature signal strength in [0.35, 0.85]. The phishing class puts
    // that much mass on +1, the benign class the same mass on -1; the rest
    // is split evenly, so every benign mode is -1.
    std::vector<double> strength(nf);
    for (std::size_t f = 0; f < nf; ++f) {
        strength[f] = rng.uniform_real(0.35, 0.85);
    }

    auto draw_value = [&](std::size_t f, Label cls) -> double {
        const double s = strength[f];
        const double u = rng.uniform_real();
        if (cls == Label::Phishing) {
            if (u < s) return 1.0;
            return u < s + 0.5 * (1.0 - s) ? 0.0 : -1.0;
        }
        if (u < s) return -1.0;
        return u < s + 0.5 * (1.0 - s) ? 0.0 : 1.0;
    };

    std::vector<Sample> samples;
    samples.reserve(params.n_phishing + params.n_benign);
    const std::size_t total = params.n_phishing + params.n_benign;
    for (std::size_t i = 0; i < total; ++i) {
        Label cls = i < params.n_phishing ? Label::Phishing : Label::Benign;
        Sample s;
        s.values.resize(nf);
        for (std::size_t f = 0; f < nf; ++f) {
            if (schema.at(f).domain == FeatureDomain::Discrete) {
                s.values[f] = draw_value(f, cls);
            } else {
                double center = cls == Label::Phishing ? strength[f] : -strength[f];
                s.values[f] = center + rng.normal();
            }
        }
        // label flips after feature generation: the flipped rows keep the
        // other class's feature profile, creating the error floor
        s.label = cls;
        if (rng.uniform_real() < params.label_noise) {
            s.label = cls == Label::Phishing ? Label::Benign : Label::Phishing;
        }
        samples.push_back(std::move(s));
    }
    rng.shuffle(samples);
    return Dataset(schema, std::move(samples), params.name);
}

}  // namespace posh
