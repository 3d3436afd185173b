#include "pocshield/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "harness_internal.hpp"
#include "json.hpp"
#include "pocshield/error.hpp"
#include "pocshield/featextract.hpp"
#include "pocshield/rng.hpp"

namespace posh {

namespace fs = std::filesystem;

namespace {

FeatureSchema config_schema(const ExperimentConfig& config) {
    return config.schema_path.empty() ? canonical_schema()
                                      : FeatureSchema::load(config.schema_path);
}

std::string profiles_path(const ExperimentConfig& config) {
    return config.attack_profiles_path.empty() ? "data/attack_profiles.json"
                                               : config.attack_profiles_path;
}

struct LoadedDataset {
    Dataset train;
    Dataset test;
    std::string id;
    std::vector<double> reference;  // benign reference profile from train
};

LoadedDataset load_and_split(const ExperimentConfig& config, const FeatureSchema& schema,
                             const std::string& path) {
    Dataset full = load_csv(path, schema);
    auto [train, test] =
        split(full, config.train_fraction, derive_seed(config.master_seed, "split-" + full.name()));
    LoadedDataset out{std::move(train), std::move(test), full.name(), {}};
    out.reference = benign_reference_profile(out.train);
    return out;
}

struct AttackBundle {
    std::vector<std::string> ids;
    std::vector<PerturbedSet> sets;
};

AttackBundle build_attacks(const ExperimentConfig& config, const FeatureSchema& schema,
                           const LoadedDataset& data,
                           const std::vector<AttackProfile>& profiles) {
    AttackBundle bundle;
    auto malicious = phishing_rows(data.test);
    if (config.simple_attacks) {
        for (const char* name : {"gba1", "gba2", "gba3"}) {
            const AttackProfile* p = find_profile(profiles, name);
            if (!p) {
                raise(ErrorCode::ConfigError,
                      std::string("attack profile '") + name + "' not found");
            }
            bundle.sets.push_back(simple_attack(*p, malicious, schema, data.reference));
            bundle.ids.push_back(name);
        }
    }
    for (double delta : config.deltas) {
        auto set = gba_delta(malicious, delta, schema, data.reference, config.delta_trials,
                             derive_seed(config.master_seed, "gba-delta-" + data.id));
        bundle.ids.push_back(set.attack_id);
        bundle.sets.push_back(std::move(set));
    }
    return bundle;
}

PerturbedSet map_perturbed(const PerturbedSet& set, const FeatureMap& map) {
    PerturbedSet out;
    out.attack_id = set.attack_id;
    out.modified_features = set.modified_features;
    for (const auto& trial : set.trials) {
        std::vector<Sample> mapped;
        mapped.reserve(trial.size());
        for (const auto& s : trial) {
            Sample m;
            m.label = s.label;
            m.values.reserve(map.chains.size());
            for (const auto& c : map.chains) m.values.push_back(c.eval(s.values));
            mapped.push_back(std::move(m));
        }
        out.trials.push_back(std::move(mapped));
    }
    return out;
}

void run_parallel(std::size_t jobs, std::size_t workers,
                  const std::function<void(std::size_t)>& body) {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= jobs) return;
            body(i);
        }
    };
    std::vector<std::thread> pool;
    std::size_t n = std::min(workers, jobs);
    for (std::size_t t = 0; t + 1 < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
}

}  // namespace

std::uint64_t file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::IoError, "cannot open file for digest: " + path);
    std::uint64_t h = 1469598103934665603ULL;
    char buf[4096];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[static_cast<std::size_t>(i)]);
            h *= 1099511628211ULL;
        }
    }
    return h;
}

FeatureMap select_poc_map(const ClassifierSpec& spec, const Dataset& train,
                          const PocParams& params, const FeatureSchema& schema,
                          std::uint64_t seed, const std::vector<std::size_t>& pool) {
    auto [dev_train, dev_val] = split(train, 0.8, derive_seed(seed, "map-validation"));
    FmopSet fmop = FmopSet::standard();
    MapParams mp;
    mp.pool = pool;
    mp.max_size = params.max_size;
    mp.prevalence_target = params.prevalence_target;

    double best_f1 = -1.0;
    FeatureMap best;
    for (std::size_t i = 0; i < params.candidate_maps; ++i) {
        double f1 = 0.0;
        FeatureMap candidate;
        try {
            candidate = generate_map(schema, mp, params.psi, fmop,
                                     derive_seed(seed, "candidate-" + std::to_string(i)));
            Dataset mtrain = transform(dev_train, candidate);
            Dataset mval = transform(dev_val, candidate);
            TrainedModel model = posh::train(spec, mtrain);
            f1 = metrics(confusion(model, mval)).f1;
        } catch (const Error&) {
            continue;  // degenerate candidate; skip
        }
        if (f1 > best_f1) {
            best_f1 = f1;
            best = std::move(candidate);
        }
    }
    if (best.chains.empty()) {
        raise(ErrorCode::GridExhausted, "no candidate map could be scored");
    }
    return best;
}

namespace {

CellResult run_cell(const ExperimentConfig& config, const FeatureSchema& schema,
                    const LoadedDataset& data, Algorithm algorithm,
                    const AttackBundle& attacks) {
    CellResult cell;
    cell.dataset_id = data.id;
    cell.classifier_id = algorithm_name(algorithm);
    const std::string stage = data.id + "/" + cell.classifier_id;
    try {
        std::uint64_t grid_seed = derive_seed(config.master_seed, "grid-" + stage);
        cell.baseline_spec = grid_search(algorithm, data.train, default_grid(algorithm),
                                         config.cv_folds, grid_seed);
        TrainedModel baseline = train(cell.baseline_spec, data.train);
        cell.baseline_clean = metrics(confusion(baseline, data.test));

        for (const auto& set : attacks.sets) {
            ImpactReport r = attack_impact(baseline, data.test, set);
            r.classifier_id = cell.classifier_id;
            r.dataset_id = cell.dataset_id;
            cell.baseline_impacts.push_back(std::move(r));
        }

        cell.map_seed = derive_seed(config.master_seed, "map-" + stage);
        FeatureMap map =
            select_poc_map(cell.baseline_spec, data.train, config.poc, schema, cell.map_seed);
        cell.map_text = serialize_map(map);

        Dataset poc_train = transform(data.train, map);
        Dataset poc_test = transform(data.test, map);
        ClassifierSpec poc_spec = cell.baseline_spec;
        if (config.regrid_poc) {
            poc_spec = grid_search(algorithm, poc_train, default_grid(algorithm),
                                   config.cv_folds,
                                   derive_seed(config.master_seed, "poc-grid-" + stage));
        }
        TrainedModel hardened = train(poc_spec, poc_train);
        cell.poc_clean = metrics(confusion(hardened, poc_test));

        for (const auto& set : attacks.sets) {
            ImpactReport r = attack_impact(hardened, poc_test, map_perturbed(set, map));
            r.classifier_id = cell.classifier_id;
            r.dataset_id = cell.dataset_id;
            cell.poc_impacts.push_back(std::move(r));
        }
        cell.ok = true;
    } catch (const Error& e) {
        cell.ok = false;
        cell.error = e.what();
    }
    return cell;
}

}  // namespace

SweepResult run_attack_sweep(const ExperimentConfig& config) {
    config.validate();
    FeatureSchema schema = config_schema(config);
    auto profiles = load_attack_profiles(profiles_path(config));

    std::vector<LoadedDataset> datasets;
    std::vector<AttackBundle> bundles;
    for (const auto& path : config.dataset_paths) {
        datasets.push_back(load_and_split(config, schema, path));
        bundles.push_back(build_attacks(config, schema, datasets.back(), profiles));
    }

    SweepResult result;
    result.attack_ids = bundles.front().ids;

    struct Job {
        std::size_t dataset;
        Algorithm algorithm;
    };
    std::vector<Job> jobs;
    for (std::size_t d = 0; d < datasets.size(); ++d) {
        for (Algorithm a : config.classifiers) jobs.push_back({d, a});
    }
    result.cells.resize(jobs.size());
    run_parallel(jobs.size(), config.workers, [&](std::size_t i) {
        result.cells[i] = run_cell(config, schema, datasets[jobs[i].dataset],
                                   jobs[i].algorithm, bundles[jobs[i].dataset]);
    });

    write_sweep_reports(config, result);
    return result;
}

void run_baseline(const ExperimentConfig& config) {
    config.validate();
    FeatureSchema schema = config_schema(config);
    fs::create_directories(config.output_dir);

    std::ostringstream csv, md;
    csv << "dataset,classifier,f1,accuracy,fpr,tpr,seed\n";
    md << "# Baseline metrics (no attack)\n";
    for (const auto& path : config.dataset_paths) {
        LoadedDataset data = load_and_split(config, schema, path);
        md << "\n## " << data.id << "\n\n";
        md << "| Classifier | F1-score | Acc | FPR | TPR |\n";
        md << "|---|---|---|---|---|\n";
        for (Algorithm a : config.classifiers) {
            const std::string stage = data.id + "/" + algorithm_name(a);
            std::uint64_t grid_seed = derive_seed(config.master_seed, "grid-" + stage);
            try {
                ClassifierSpec spec =
                    grid_search(a, data.train, default_grid(a), config.cv_folds, grid_seed);
                Metrics m = metrics(confusion(train(spec, data.train), data.test));
                csv << data.id << ',' << algorithm_name(a) << ',' << detail::num(m.f1)
                    << ',' << detail::num(m.accuracy) << ',' << detail::num(m.fpr) << ','
                    << detail::num(m.tpr) << ',' << grid_seed << '\n';
                md << "| " << algorithm_name(a) << " | " << detail::num(m.f1, 4) << " | "
                   << detail::num(m.accuracy, 4) << " | " << detail::num(m.fpr, 4)
                   << " | " << detail::num(m.tpr, 4) << " |\n";
            } catch (const Error& e) {
                csv << data.id << ',' << algorithm_name(a) << ",error," << e.what() << ",,,"
                    << grid_seed << '\n';
                md << "| " << algorithm_name(a) << " | error | | | |\n";
            }
        }
    }
    std::ofstream(config.output_dir + "/baseline_metrics.csv") << csv.str();
    std::ofstream(config.output_dir + "/baseline_metrics.md") << md.str();
}

PrevalenceResult run_prevalence_sweep(const ExperimentConfig& config,
                                      const std::vector<double>& targets) {
    config.validate();
    FeatureSchema schema = config_schema(config);
    auto profiles = load_attack_profiles(profiles_path(config));
    LoadedDataset data = load_and_split(config, schema, config.dataset_paths.front());
    AttackBundle attacks = build_attacks(config, schema, data, profiles);
    Algorithm algorithm = config.classifiers.front();

    const std::string stage = data.id + "/" + algorithm_name(algorithm);
    ClassifierSpec spec =
        grid_search(algorithm, data.train, default_grid(algorithm), config.cv_folds,
                    derive_seed(config.master_seed, "grid-" + stage));

    PrevalenceResult result;
    result.attack_ids = attacks.ids;
    result.classifier_id = algorithm_name(algorithm);

    for (double target : targets) {
        const auto needed = static_cast<std::size_t>(
            std::ceil(target / 100.0 * static_cast<double>(schema.size())));
        // a seeded feature subset of exactly the required size
        std::vector<std::size_t> pool(schema.size());
        for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
        if (needed < schema.size()) {
            Rng rng(derive_seed(config.master_seed,
                                "prevalence-pool-" + std::to_string(target)));
            rng.shuffle(pool);
            pool.resize(needed);
            std::sort(pool.begin(), pool.end());
        }

        PocParams params = config.poc;
        params.prevalence_target = target;
        FeatureMap map = select_poc_map(
            spec, data.train, params, schema,
            derive_seed(config.master_seed, "prevalence-map-" + std::to_string(target)),
            pool);

        Dataset poc_train = transform(data.train, map);
        Dataset poc_test = transform(data.test, map);
        TrainedModel model = train(spec, poc_train);

        PrevalencePoint point;
        point.target = target;
        std::vector<std::size_t> leaves;
        for (const auto& c : map.chains) c.collect_leaves(leaves);
        point.coverage = std::set<std::size_t>(leaves.begin(), leaves.end()).size();
        Metrics clean = metrics(confusion(model, poc_test));
        point.fpr = clean.fpr;
        point.clean_recall = clean.tpr;
        for (const auto& set : attacks.sets) {
            ImpactReport r = attack_impact(model, poc_test, map_perturbed(set, map));
            point.attack_recall.push_back(r.value_under_attack);
        }
        result.points.push_back(std::move(point));
    }

    write_prevalence_reports(config, result);
    return result;
}

std::vector<StatReport> run_significance(const ExperimentConfig& config,
                                         const SweepResult& sweep, double alpha) {
    std::vector<std::string> datasets;
    for (const auto& cell : sweep.cells) {
        if (std::find(datasets.begin(), datasets.end(), cell.dataset_id) == datasets.end()) {
            datasets.push_back(cell.dataset_id);
        }
    }
    const double adjusted = bonferroni(alpha, datasets.size());

    auto run_test = [](std::vector<std::pair<double, double>> pairs, std::string id,
                       double a) {
        StatReport report;
        report.comparison_id = std::move(id);
        report.alpha_adjusted = a;
        try {
            WilcoxonResult w = wilcoxon_signed_rank(pairs);
            report.p_value = w.p_value;
            report.effect_size = w.effect_size;
            report.n = w.n;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::TooFewPairs) throw;
            // (near-)identical populations: report equivalence
            report.p_value = 1.0;
            report.effect_size = 0.0;
            report.n = 0;
        }
        return report;
    };

    std::vector<StatReport> reports;
    // per-dataset impact comparison, baseline vs POC
    for (const auto& ds : datasets) {
        std::vector<std::pair<double, double>> pairs;
        for (const auto& cell : sweep.cells) {
            if (!cell.ok || cell.dataset_id != ds) continue;
            for (std::size_t a = 0; a < cell.baseline_impacts.size(); ++a) {
                pairs.emplace_back(cell.baseline_impacts[a].impact,
                                   cell.poc_impacts[a].impact);
            }
        }
        reports.push_back(run_test(std::move(pairs), "impact_baseline_vs_poc/" + ds, adjusted));
    }
    // per-dataset pre/post-attack recall drop on the baselines
    for (const auto& ds : datasets) {
        std::vector<std::pair<double, double>> pairs;
        for (const auto& cell : sweep.cells) {
            if (!cell.ok || cell.dataset_id != ds) continue;
            for (const auto& r : cell.baseline_impacts) {
                pairs.emplace_back(r.value_no_attack, r.value_under_attack);
            }
        }
        reports.push_back(run_test(std::move(pairs), "attack_recall_drop/" + ds, adjusted));
    }
    // no-attack equivalence across every (classifier, dataset) cell
    {
        std::vector<std::pair<double, double>> recall_pairs, f1_pairs;
        for (const auto& cell : sweep.cells) {
            if (!cell.ok) continue;
            recall_pairs.emplace_back(cell.baseline_clean.tpr, cell.poc_clean.tpr);
            f1_pairs.emplace_back(cell.baseline_clean.f1, cell.poc_clean.f1);
        }
        reports.push_back(run_test(std::move(recall_pairs), "noattack_recall_equivalence", alpha));
        reports.push_back(run_test(std::move(f1_pairs), "noattack_f1_equivalence", alpha));
    }
    return reports;
}

Dataset extract_corpus(const std::string& urls_path, const std::string& snapshots_dir,
                       const FeatureSchema& schema) {
    std::map<std::string, SiteSnapshot> by_url;
    if (!snapshots_dir.empty()) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(snapshots_dir)) {
            if (entry.path().extension() == ".json") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            std::ifstream in(file);
            std::ostringstream buf;
            buf << in.rdbuf();
            SiteSnapshot snap = SiteSnapshot::from_json(buf.str(), snapshots_dir);
            by_url[snap.url] = std::move(snap);
        }
    }

    std::ifstream in(urls_path);
    if (!in) raise(ErrorCode::IoError, "cannot open urls file: " + urls_path);
    std::vector<Sample> samples;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::string url = line;
        Label label = Label::Benign;
        if (auto comma = line.find_last_of(','); comma != std::string::npos) {
            std::string lab = line.substr(comma + 1);
            url = line.substr(0, comma);
            if (lab == "1" || lab == "phishing") label = Label::Phishing;
            else if (lab == "0" || lab == "benign") label = Label::Benign;
            else raise(ErrorCode::UnparsableValue,
                       "urls file line " + std::to_string(row) + ": bad label '" + lab + "'");
        }
        SiteSnapshot snap;
        if (auto it = by_url.find(url); it != by_url.end()) {
            snap = it->second;
        } else {
            snap.url = url;
        }
        Sample s;
        s.values = extract_features(snap);
        s.label = label;
        samples.push_back(std::move(s));
    }
    return Dataset(schema, std::move(samples), "extracted");
}

}  // namespace posh
