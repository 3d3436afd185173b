#include "pocshield/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "pocshield/error.hpp"
#include "pocshield/rng.hpp"

namespace posh {

namespace {

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // trim surrounding whitespace and CR
        std::size_t b = cell.find_first_not_of(" \t\r");
        std::size_t e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_number(const std::string& cell, std::size_t row, const std::string& col) {
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        raise(ErrorCode::UnparsableValue,
              "row " + std::to_string(row) + ", column '" + col +
                  "': cannot parse '" + cell + "'");
    }
    return value;
}

// Shortest decimal rendering that round-trips; keeps CSV round trips exact.
std::string format_value(double v) {
    char buf[32];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

}  // namespace

Dataset::Dataset(FeatureSchema schema, std::vector<Sample> samples, std::string name)
    : schema_(std::move(schema)), samples_(std::move(samples)), name_(std::move(name)) {
    for (std::size_t r = 0; r < samples_.size(); ++r) {
        const auto& s = samples_[r];
        if (s.values.size() != schema_.size()) {
            raise(ErrorCode::SchemaMismatch,
                  "row " + std::to_string(r) + ": expected " +
                      std::to_string(schema_.size()) + " values, got " +
                      std::to_string(s.values.size()));
        }
        for (std::size_t f = 0; f < s.values.size(); ++f) {
            if (!std::isfinite(s.values[f]) || !schema_.value_in_domain(f, s.values[f])) {
                raise(ErrorCode::DomainViolation,
                      "row " + std::to_string(r) + ", feature '" +
                          schema_.at(f).name + "': value " +
                          std::to_string(s.values[f]) + " outside domain");
            }
        }
    }
}

std::size_t Dataset::count(Label l) const {
    std::size_t n = 0;
    for (const auto& s : samples_)
        if (s.label == l) ++n;
    return n;
}

bool Dataset::operator==(const Dataset& other) const {
    if (!(schema_ == other.schema_) || samples_.size() != other.samples_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        if (samples_[i].label != other.samples_[i].label ||
            samples_[i].values != other.samples_[i].values) {
            return false;
        }
    }
    return true;
}

Dataset load_csv(const std::string& path, const FeatureSchema& schema) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open dataset file: " + path);

    std::string line;
    if (!std::getline(in, line)) {
        raise(ErrorCode::UnparsableValue, path + ": empty file");
    }
    auto header = split_line(line);

    // column index per schema feature, plus the label column
    std::vector<int> col_of(schema.size(), -1);
    int label_col = -1;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (lower(header[c]) == "label") {
            label_col = static_cast<int>(c);
            continue;
        }
        int f = schema.index_of(header[c]);
        if (f >= 0) col_of[static_cast<std::size_t>(f)] = static_cast<int>(c);
    }
    if (label_col < 0) raise(ErrorCode::MissingColumn, path + ": missing 'label' column");
    for (std::size_t f = 0; f < schema.size(); ++f) {
        if (col_of[f] < 0) {
            raise(ErrorCode::MissingColumn,
                  path + ": missing column '" + schema.at(f).name + "'");
        }
    }

    std::vector<Sample> samples;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        auto cells = split_line(line);
        if (cells.size() != header.size()) {
            raise(ErrorCode::UnparsableValue,
                  "row " + std::to_string(row) + ": expected " +
                      std::to_string(header.size()) + " cells, got " +
                      std::to_string(cells.size()));
        }
        Sample s;
        s.values.resize(schema.size());
        for (std::size_t f = 0; f < schema.size(); ++f) {
            double v = parse_number(cells[static_cast<std::size_t>(col_of[f])], row,
                                    schema.at(f).name);
            if (!schema.value_in_domain(f, v)) {
                raise(ErrorCode::DomainViolation,
                      "row " + std::to_string(row) + ", feature '" +
                          schema.at(f).name + "': value outside domain");
            }
            s.values[f] = v;
        }
        std::string lab = lower(cells[static_cast<std::size_t>(label_col)]);
        if (lab == "0" || lab == "benign") {
            s.label = Label::Benign;
        } else if (lab == "1" || lab == "phishing") {
            s.label = Label::Phishing;
        } else {
            raise(ErrorCode::UnparsableValue,
                  "row " + std::to_string(row) + ", column 'label': '" + lab + "'");
        }
        samples.push_back(std::move(s));
    }

    std::string name = path;
    if (auto slash = name.find_last_of("/\\"); slash != std::string::npos) {
        name = name.substr(slash + 1);
    }
    if (auto dot = name.find_last_of('.'); dot != std::string::npos) {
        name = name.substr(0, dot);
    }
    return Dataset(schema, std::move(samples), name);
}

void write_csv(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) raise(ErrorCode::IoError, "cannot write dataset file: " + path);
    const auto& schema = dataset.schema();
    for (std::size_t f = 0; f < schema.size(); ++f) {
        out << schema.at(f).name << ',';
    }
    out << "label\n";
    for (const auto& s : dataset.samples()) {
        for (double v : s.values) out << format_value(v) << ',';
        out << (s.label == Label::Phishing ? 1 : 0) << '\n';
    }
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction,
                                  std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        raise(ErrorCode::ConfigError, "train_fraction must lie in (0,1)");
    }
    std::vector<std::size_t> benign_rows, phishing_rows;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        (dataset.row(i).label == Label::Benign ? benign_rows : phishing_rows).push_back(i);
    }
    if (benign_rows.empty() || phishing_rows.empty()) {
        raise(ErrorCode::DegenerateSplit, "both classes required before splitting");
    }

    Rng rng(seed);
    std::vector<std::size_t> train_rows, test_rows;
    for (auto* rows : {&benign_rows, &phishing_rows}) {
        rng.shuffle(*rows);
        // singleton classes stay in train
        std::size_t n_train = static_cast<std::size_t>(
            std::llround(train_fraction * static_cast<double>(rows->size())));
        n_train = std::max<std::size_t>(n_train, 1);
        if (rows->size() == 1) n_train = 1;
        else n_train = std::min(n_train, rows->size() - 1);
        for (std::size_t i = 0; i < rows->size(); ++i) {
            (i < n_train ? train_rows : test_rows).push_back((*rows)[i]);
        }
    }
    if (test_rows.empty()) {
        raise(ErrorCode::DegenerateSplit, "test partition would be empty");
    }
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());

    auto gather = [&](const std::vector<std::size_t>& rows, const char* suffix) {
        std::vector<Sample> out;
        out.reserve(rows.size());
        for (std::size_t r : rows) out.push_back(dataset.row(r));
        return Dataset(dataset.schema(), std::move(out), dataset.name() + suffix);
    };
    return {gather(train_rows, ".train"), gather(test_rows, ".test")};
}

std::vector<double> benign_reference_profile(const Dataset& train) {
    std::vector<const Sample*> benign;
    for (const auto& s : train.samples()) {
        if (s.label == Label::Benign) benign.push_back(&s);
    }
    if (benign.empty()) {
        raise(ErrorCode::NoBenignSamples, "benign reference needs >=1 benign sample");
    }

    const auto& schema = train.schema();
    std::vector<double> ref(schema.size(), 0.0);
    for (std::size_t f = 0; f < schema.size(); ++f) {
        if (schema.at(f).domain == FeatureDomain::Discrete) {
            // mode; ties broken toward the value closest to -1
            std::size_t counts[3] = {0, 0, 0};  // -1, 0, 1
            for (const Sample* s : benign) {
                counts[static_cast<std::size_t>(s->values[f] + 1.0)]++;
            }
            std::size_t best = 0;
            for (std::size_t k = 1; k < 3; ++k) {
                if (counts[k] > counts[best]) best = k;
            }
            ref[f] = static_cast<double>(best) - 1.0;
        } else {
            std::vector<double> vals;
            vals.reserve(benign.size());
            for (const Sample* s : benign) vals.push_back(s->values[f]);
            std::sort(vals.begin(), vals.end());
            std::size_t n = vals.size();
            ref[f] = n % 2 ? vals[n / 2] : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
        }
    }
    return ref;
}

}  // namespace posh
