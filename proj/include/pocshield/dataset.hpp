#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pocshield/schema.hpp"

namespace posh {

enum class Label : int { Benign = 0, Phishing = 1 };

struct Sample {
    std::vector<double> values;
    Label label = Label::Benign;
};

class Dataset {
public:
    Dataset() = default;
    Dataset(FeatureSchema schema, std::vector<Sample> samples, std::string name);

    const FeatureSchema& schema() const { return schema_; }
    const std::vector<Sample>& samples() const { return samples_; }
    const std::string& name() const { return name_; }
    std::size_t size() const { return samples_.size(); }
    const Sample& row(std::size_t i) const { return samples_.at(i); }

    std::size_t count(Label l) const;

    bool operator==(const Dataset& other) const;

private:
    FeatureSchema schema_;
    std::vector<Sample> samples_;
    std::string name_;
};

// CSV interface: UTF-8, comma separated, header `<feature names...>,label`,
// labels either {0,1} or {benign,phishing} (case-insensitive).
Dataset load_csv(const std::string& path, const FeatureSchema& schema);
void write_csv(const Dataset& dataset, const std::string& path);

// Stratified shuffle split preserving per-class proportions within one
// sample. Deterministic for a fixed seed. When a class has too few rows to
// appear on both sides, its rows go to the train partition.
std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction,
                                  std::uint64_t seed);

// Per-feature benign reference: mode over benign rows for discrete
// features (ties broken toward the value closest to -1), median for real
// features.
std::vector<double> benign_reference_profile(const Dataset& train);

}  // namespace posh
