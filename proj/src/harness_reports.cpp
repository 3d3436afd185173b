#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "harness_internal.hpp"
#include "json.hpp"
#include "pocshield/error.hpp"
#include "pocshield/harness.hpp"

namespace posh {

namespace fs = std::filesystem;

namespace {

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::IoError, "cannot write " + path);
    out << text;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::string sanitize(const std::string& s) {
    std::string out = s;
    for (char& c : out) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.') c = '_';
    }
    return out;
}

}  // namespace

void write_impacts_csv(const std::string& path, const SweepResult& sweep) {
    std::ostringstream out;
    out << "dataset,classifier,variant,attack_id,trial,value_no_attack,value_under_attack,"
           "impact,f1,accuracy,fpr,tpr,map_seed\n";
    for (const auto& cell : sweep.cells) {
        if (!cell.ok) continue;
        auto clean_row = [&](const char* variant, const Metrics& m) {
            out << cell.dataset_id << ',' << cell.classifier_id << ',' << variant
                << ",none,,,,," << detail::num(m.f1) << ',' << detail::num(m.accuracy)
                << ',' << detail::num(m.fpr) << ',' << detail::num(m.tpr) << ','
                << cell.map_seed << '\n';
        };
        clean_row("baseline", cell.baseline_clean);
        clean_row("poc", cell.poc_clean);
        auto impact_rows = [&](const char* variant, const std::vector<ImpactReport>& rs) {
            for (std::size_t a = 0; a < rs.size(); ++a) {
                const auto& r = rs[a];
                for (std::size_t t = 0; t < r.per_trial_impact.size(); ++t) {
                    // per-trial under-attack value recovered from the trial impact
                    double under = r.value_no_attack * (1.0 - r.per_trial_impact[t]);
                    out << cell.dataset_id << ',' << cell.classifier_id << ',' << variant
                        << ',' << sweep.attack_ids[a] << ',' << t << ','
                        << detail::num(r.value_no_attack, 9) << ','
                        << detail::num(under, 9) << ','
                        << detail::num(r.per_trial_impact[t], 9) << ",,,,,"
                        << cell.map_seed << '\n';
                }
            }
        };
        impact_rows("baseline", cell.baseline_impacts);
        impact_rows("poc", cell.poc_impacts);
    }
    write_file(path, out.str());
}

SweepResult load_impacts_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open " + path);
    SweepResult sweep;
    std::map<std::pair<std::string, std::string>, std::size_t> cell_index;
    std::string line;
    std::getline(in, line);  // header
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto f = split_fields(line);
        if (f.size() < 13) {
            raise(ErrorCode::UnparsableValue,
                  path + " line " + std::to_string(row) + ": expected 13 fields");
        }
        auto key = std::make_pair(f[0], f[1]);
        auto it = cell_index.find(key);
        if (it == cell_index.end()) {
            it = cell_index.emplace(key, sweep.cells.size()).first;
            CellResult cell;
            cell.dataset_id = f[0];
            cell.classifier_id = f[1];
            cell.ok = true;
            sweep.cells.push_back(std::move(cell));
        }
        CellResult& cell = sweep.cells[it->second];
        const std::string& variant = f[2];
        const std::string& attack = f[3];
        if (!f[12].empty()) cell.map_seed = std::stoull(f[12]);
        if (attack == "none") {
            Metrics m;
            m.f1 = std::stod(f[8]);
            m.accuracy = std::stod(f[9]);
            m.fpr = std::stod(f[10]);
            m.tpr = std::stod(f[11]);
            (variant == "poc" ? cell.poc_clean : cell.baseline_clean) = m;
            continue;
        }
        if (std::find(sweep.attack_ids.begin(), sweep.attack_ids.end(), attack) ==
            sweep.attack_ids.end()) {
            sweep.attack_ids.push_back(attack);
        }
        auto& reports = variant == "poc" ? cell.poc_impacts : cell.baseline_impacts;
        ImpactReport* report = nullptr;
        for (auto& r : reports) {
            if (r.attack_id == attack) report = &r;
        }
        if (!report) {
            ImpactReport r;
            r.attack_id = attack;
            r.classifier_id = cell.classifier_id;
            r.dataset_id = cell.dataset_id;
            r.metric_name = "recall";
            reports.push_back(std::move(r));
            report = &reports.back();
        }
        report->value_no_attack = std::stod(f[5]);
        report->per_trial_impact.push_back(std::stod(f[7]));
    }
    // finalize means
    for (auto& cell : sweep.cells) {
        for (auto* vec : {&cell.baseline_impacts, &cell.poc_impacts}) {
            for (auto& r : *vec) {
                double sum = 0.0, under = 0.0;
                for (double t : r.per_trial_impact) {
                    sum += t;
                    under += r.value_no_attack * (1.0 - t);
                }
                const auto n = static_cast<double>(r.per_trial_impact.size());
                r.impact = n > 0 ? sum / n : 0.0;
                r.value_under_attack = n > 0 ? under / n : 0.0;
            }
        }
    }
    // stable report order: keep attack order as written, already insertion order
    return sweep;
}

namespace {

void write_stats_files(const ExperimentConfig& config,
                       const std::vector<StatReport>& reports) {
    std::ostringstream csv, md;
    csv << "comparison,p_value,effect_size,n,alpha_adjusted,significant\n";
    md << "# Paired significance tests\n\n";
    md << "| Comparison | p-value | Effect size | n | alpha | Significant |\n";
    md << "|---|---|---|---|---|---|\n";
    for (const auto& r : reports) {
        const bool sig = r.p_value < r.alpha_adjusted;
        csv << r.comparison_id << ',' << detail::num(r.p_value, 9) << ','
            << detail::num(r.effect_size, 6) << ',' << r.n << ','
            << detail::num(r.alpha_adjusted, 6) << ',' << (sig ? "yes" : "no") << '\n';
        md << "| " << r.comparison_id << " | " << detail::num(r.p_value, 6) << " | "
           << detail::num(r.effect_size, 4) << " | " << r.n << " | "
           << detail::num(r.alpha_adjusted, 4) << " | " << (sig ? "yes" : "no")
           << " |\n";
    }
    write_file(config.output_dir + "/stats.csv", csv.str());
    write_file(config.output_dir + "/stats.md", md.str());
}

}  // namespace

void write_sweep_reports(const ExperimentConfig& config, const SweepResult& sweep) {
    fs::create_directories(config.output_dir);
    fs::create_directories(config.output_dir + "/maps");
    std::vector<std::string> written;

    // clean metric tables
    {
        std::ostringstream csv, md;
        csv << "dataset,classifier,variant,f1,accuracy,fpr,tpr\n";
        md << "# Clean-test metrics, baseline vs hardened\n";
        std::string current;
        for (const auto& cell : sweep.cells) {
            if (cell.dataset_id != current) {
                current = cell.dataset_id;
                md << "\n## " << current << "\n\n";
                md << "| Classifier | F1 base | F1 hardened | FPR base | FPR hardened |"
                      " TPR base | TPR hardened |\n";
                md << "|---|---|---|---|---|---|---|\n";
            }
            if (!cell.ok) {
                md << "| " << cell.classifier_id << " | error: " << cell.error
                   << " | | | | | |\n";
                continue;
            }
            for (auto [variant, m] :
                 {std::pair<const char*, const Metrics*>{"baseline", &cell.baseline_clean},
                  {"poc", &cell.poc_clean}}) {
                csv << cell.dataset_id << ',' << cell.classifier_id << ',' << variant
                    << ',' << detail::num(m->f1) << ',' << detail::num(m->accuracy)
                    << ',' << detail::num(m->fpr) << ',' << detail::num(m->tpr) << '\n';
            }
            md << "| " << cell.classifier_id << " | " << detail::num(cell.baseline_clean.f1, 4)
               << " | " << detail::num(cell.poc_clean.f1, 4) << " | "
               << detail::num(cell.baseline_clean.fpr, 4) << " | "
               << detail::num(cell.poc_clean.fpr, 4) << " | "
               << detail::num(cell.baseline_clean.tpr, 4) << " | "
               << detail::num(cell.poc_clean.tpr, 4) << " |\n";
        }
        write_file(config.output_dir + "/metrics.csv", csv.str());
        write_file(config.output_dir + "/metrics.md", md.str());
        written.push_back("metrics.csv");
        written.push_back("metrics.md");
    }

    write_impacts_csv(config.output_dir + "/impacts.csv", sweep);
    written.push_back("impacts.csv");

    // impact difference tables (baseline impact minus hardened impact)
    {
        std::vector<std::string> datasets;
        for (const auto& cell : sweep.cells) {
            if (std::find(datasets.begin(), datasets.end(), cell.dataset_id) ==
                datasets.end()) {
                datasets.push_back(cell.dataset_id);
            }
        }
        std::ostringstream csv, md;
        csv << "dataset,classifier,attack_id,impact_baseline,impact_poc,difference\n";
        md << "# Impact difference (positive = hardening mitigated the attack)\n";
        for (const auto& ds : datasets) {
            md << "\n## " << ds << "\n\n| Classifier |";
            for (const auto& a : sweep.attack_ids) md << ' ' << a << " |";
            md << "\n|---|";
            for (std::size_t i = 0; i < sweep.attack_ids.size(); ++i) md << "---|";
            md << '\n';
            std::vector<double> sums(sweep.attack_ids.size(), 0.0);
            std::size_t rows = 0;
            for (const auto& cell : sweep.cells) {
                if (cell.dataset_id != ds || !cell.ok) continue;
                md << "| " << cell.classifier_id << " |";
                for (std::size_t a = 0; a < sweep.attack_ids.size(); ++a) {
                    double diff =
                        impact_difference(cell.baseline_impacts[a], cell.poc_impacts[a]);
                    sums[a] += diff;
                    csv << ds << ',' << cell.classifier_id << ',' << sweep.attack_ids[a]
                        << ',' << detail::num(cell.baseline_impacts[a].impact) << ','
                        << detail::num(cell.poc_impacts[a].impact) << ','
                        << detail::num(diff) << '\n';
                    md << ' ' << detail::num(diff, 4) << " |";
                }
                md << '\n';
                ++rows;
            }
            md << "| average |";
            for (double s : sums) {
                md << ' ' << detail::num(rows ? s / static_cast<double>(rows) : 0.0, 4)
                   << " |";
            }
            md << '\n';
        }
        write_file(config.output_dir + "/impact_difference.csv", csv.str());
        write_file(config.output_dir + "/impact_difference.md", md.str());
        written.push_back("impact_difference.csv");
        written.push_back("impact_difference.md");
    }

    // per-classifier impact series for box plots
    {
        std::ostringstream csv;
        csv << "dataset,attack_id,variant,classifier,impact\n";
        for (std::size_t a = 0; a < sweep.attack_ids.size(); ++a) {
            for (const auto& cell : sweep.cells) {
                if (!cell.ok) continue;
                csv << cell.dataset_id << ',' << sweep.attack_ids[a] << ",baseline,"
                    << cell.classifier_id << ','
                    << detail::num(cell.baseline_impacts[a].impact) << '\n';
                csv << cell.dataset_id << ',' << sweep.attack_ids[a] << ",poc,"
                    << cell.classifier_id << ','
                    << detail::num(cell.poc_impacts[a].impact) << '\n';
            }
        }
        write_file(config.output_dir + "/boxplot_series.csv", csv.str());
        written.push_back("boxplot_series.csv");
    }

    // selected maps
    for (const auto& cell : sweep.cells) {
        if (!cell.ok) continue;
        std::string rel = "maps/" + sanitize(cell.dataset_id) + "_" +
                          sanitize(cell.classifier_id) + ".pocmap";
        write_file(config.output_dir + "/" + rel, cell.map_text);
        written.push_back(rel);
    }

    write_stats_files(config, run_significance(config, sweep));
    written.push_back("stats.csv");
    written.push_back("stats.md");

    // manifest: config snapshot, cell ledger, digests of every artifact
    nlohmann::json manifest;
    manifest["format_version"] = 1;
    manifest["config"] = nlohmann::json::parse(config.to_json());
    manifest["attack_ids"] = sweep.attack_ids;
    manifest["cells"] = nlohmann::json::array();
    for (const auto& cell : sweep.cells) {
        nlohmann::json c;
        c["dataset"] = cell.dataset_id;
        c["classifier"] = cell.classifier_id;
        c["ok"] = cell.ok;
        if (!cell.ok) c["error"] = cell.error;
        if (cell.ok) {
            c["map_seed"] = cell.map_seed;
            c["spec"] = cell.baseline_spec.id();
        }
        manifest["cells"].push_back(std::move(c));
    }
    std::sort(written.begin(), written.end());
    nlohmann::json digests = nlohmann::json::object();
    for (const auto& rel : written) {
        digests[rel] = file_digest(config.output_dir + "/" + rel);
    }
    manifest["digests"] = std::move(digests);
    write_file(config.output_dir + "/manifest.json", manifest.dump(2) + "\n");
}

void write_prevalence_reports(const ExperimentConfig& config,
                              const PrevalenceResult& result) {
    fs::create_directories(config.output_dir);
    std::ostringstream fpr_csv, det_csv, md;
    fpr_csv << "target,coverage,fpr,clean_recall\n";
    det_csv << "target,attack_id,recall_under_attack\n";
    md << "# Incomplete-coverage sweep (" << result.classifier_id << ")\n\n";
    md << "| Target % | Features used | FPR | Clean recall |";
    for (const auto& a : result.attack_ids) md << " recall/" << a << " |";
    md << "\n|---|---|---|---|";
    for (std::size_t i = 0; i < result.attack_ids.size(); ++i) md << "---|";
    md << '\n';
    for (const auto& p : result.points) {
        fpr_csv << detail::num(p.target, 2) << ',' << p.coverage << ','
                << detail::num(p.fpr) << ',' << detail::num(p.clean_recall) << '\n';
        md << "| " << detail::num(p.target, 0) << " | " << p.coverage << " | "
           << detail::num(p.fpr, 4) << " | " << detail::num(p.clean_recall, 4) << " |";
        for (std::size_t a = 0; a < result.attack_ids.size(); ++a) {
            det_csv << detail::num(p.target, 2) << ',' << result.attack_ids[a] << ','
                    << detail::num(p.attack_recall[a]) << '\n';
            md << ' ' << detail::num(p.attack_recall[a], 4) << " |";
        }
        md << '\n';
    }
    write_file(config.output_dir + "/prevalence_fpr.csv", fpr_csv.str());
    write_file(config.output_dir + "/prevalence_detection.csv", det_csv.str());
    write_file(config.output_dir + "/prevalence.md", md.str());
}

std::vector<StatReport> load_and_run_significance(const ExperimentConfig& config) {
    SweepResult sweep = load_impacts_csv(config.output_dir + "/impacts.csv");
    auto reports = run_significance(config, sweep);
    write_stats_files(config, reports);
    return reports;
}

}  // namespace posh
