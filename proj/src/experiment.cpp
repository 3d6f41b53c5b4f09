#include "pmad/experiment.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pmad/error.hpp"
#include "pmad/rng.hpp"

namespace pmad {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

LogTuple parse_traces_file(const std::string& path) {
    const std::string text = read_file(path);
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") return parse_csv(text);
    return parse_xes(text);
}

InjectionConfig injection_from_json(const nlohmann::json& j) {
    InjectionConfig config;
    config.p_skip = j.value("p_skip", 0.0);
    config.p_duplicate = j.value("p_duplicate", 0.0);
    config.p_swap = j.value("p_swap", 0.0);
    if (j.contains("target_activities")) {
        std::set<std::string> targets;
        for (const auto& a : j["target_activities"]) targets.insert(a.get<std::string>());
        config.target_activities = std::move(targets);
    }
    config.validate();
    return config;
}

nlohmann::json injection_to_json(const InjectionConfig& config) {
    nlohmann::json j;
    j["p_skip"] = config.p_skip;
    j["p_duplicate"] = config.p_duplicate;
    j["p_swap"] = config.p_swap;
    if (config.target_activities) {
        nlohmann::json targets = nlohmann::json::array();
        for (const auto& a : *config.target_activities) targets.push_back(a);
        j["target_activities"] = std::move(targets);
    }
    return j;
}

}  // namespace

ExperimentConfig experiment_config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("experiment config: ") + e.what());
    }
    ExperimentConfig config;
    try {
        const auto& dataset = j.at("dataset");
        if (dataset.contains("synth")) {
            const auto& s = dataset["synth"];
            ExperimentConfig::Synth synth;
            synth.net_path = s.value("net", "");
            synth.net_pnml = s.value("net_pnml", "");
            synth.n_normal = s.value("n_normal", std::size_t{1000});
            synth.n_anomalous = s.value("n_anomalous", std::size_t{1000});
            if (s.contains("normal_injection"))
                synth.normal_config = injection_from_json(s["normal_injection"]);
            else
                synth.normal_config = {0.05, 0.05, 0.05, std::nullopt};
            if (s.contains("anomalous_injection"))
                synth.anomalous_config = injection_from_json(s["anomalous_injection"]);
            else
                synth.anomalous_config = {0.25, 0.25, 0.25, std::nullopt};
            synth.max_steps = s.value("max_steps", std::size_t{1000});
            config.synth = std::move(synth);
        } else if (dataset.contains("paths")) {
            ExperimentConfig::Paths paths;
            paths.normal = dataset["paths"].at("normal").get<std::string>();
            paths.anomalous = dataset["paths"].at("anomalous").get<std::string>();
            config.paths = std::move(paths);
        } else {
            throw FormatError("experiment config: dataset needs either 'synth' or 'paths'");
        }
        config.net_path = j.value("net", "");
        config.net_pnml = j.value("net_pnml", "");
        config.extractor = extractor_from_string(j.value("extractor", "AB_CC"));
        config.ngram_n = j.value("ngram_n", std::size_t{2});
        config.technique = j.value("technique", "PCA");
        config.exhaustive_grid = j.value("exhaustive_grid", false);
        if (j.contains("cost")) {
            const auto& c = j["cost"];
            config.cost.sync_move = c.value("sync_move", 0.0);
            config.cost.log_move = c.value("log_move", 1.0);
            config.cost.model_move = c.value("model_move", 1.0);
            config.cost.silent_move = c.value("silent_move", 0.0);
        }
        config.group_size = j.value("group_size", std::size_t{5});
        config.test_fraction = j.value("test_fraction", 0.25);
        config.val_fraction = j.value("val_fraction", 0.20);
        config.seed = j.value("seed", std::uint64_t{0});
        config.repetitions = j.value("repetitions", std::size_t{5});
        config.jobs = j.value("jobs", std::size_t{1});
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("experiment config: ") + e.what());
    }
    return config;
}

std::string experiment_config_to_json(const ExperimentConfig& config) {
    nlohmann::json j;
    nlohmann::json dataset;
    if (config.synth) {
        nlohmann::json s;
        if (!config.synth->net_path.empty()) s["net"] = config.synth->net_path;
        if (!config.synth->net_pnml.empty()) s["net_pnml"] = config.synth->net_pnml;
        s["n_normal"] = config.synth->n_normal;
        s["n_anomalous"] = config.synth->n_anomalous;
        s["normal_injection"] = injection_to_json(config.synth->normal_config);
        s["anomalous_injection"] = injection_to_json(config.synth->anomalous_config);
        s["max_steps"] = config.synth->max_steps;
        dataset["synth"] = std::move(s);
    }
    if (config.paths) {
        dataset["paths"] = {{"normal", config.paths->normal},
                            {"anomalous", config.paths->anomalous}};
    }
    j["dataset"] = std::move(dataset);
    if (!config.net_path.empty()) j["net"] = config.net_path;
    if (!config.net_pnml.empty()) j["net_pnml"] = config.net_pnml;
    j["extractor"] = to_string(config.extractor);
    j["ngram_n"] = config.ngram_n;
    j["technique"] = config.technique;
    j["exhaustive_grid"] = config.exhaustive_grid;
    j["cost"] = {{"sync_move", config.cost.sync_move},
                 {"log_move", config.cost.log_move},
                 {"model_move", config.cost.model_move},
                 {"silent_move", config.cost.silent_move}};
    j["group_size"] = config.group_size;
    j["test_fraction"] = config.test_fraction;
    j["val_fraction"] = config.val_fraction;
    j["seed"] = config.seed;
    j["repetitions"] = config.repetitions;
    j["jobs"] = config.jobs;
    return j.dump(2);
}

namespace {

struct TracePools {
    std::vector<Trace> normal;
    std::vector<Trace> anomalous;
};

TracePools assemble_pools(const ExperimentConfig& config, std::uint64_t rep_seed,
                          const PetriNet* net) {
    TracePools pools;
    if (config.synth) {
        if (!net) throw ArgumentError("run_experiment: synthetic dataset requires a net");
        auto [normal, anomalous] =
            generate_corpus(*net, config.synth->n_normal, config.synth->n_anomalous,
                            config.synth->normal_config, config.synth->anomalous_config,
                            derive_seed(rep_seed, "synth"), config.synth->max_steps);
        pools.normal = std::move(normal);
        pools.anomalous = std::move(anomalous);
        return pools;
    }
    if (!config.paths) throw ArgumentError("run_experiment: no dataset configured");
    LogTuple normal_logs = parse_traces_file(config.paths->normal);
    LogTuple anomalous_logs = parse_traces_file(config.paths->anomalous);
    for (const auto& log : normal_logs.logs)
        for (const auto& trace : log.traces)
            pools.normal.emplace_back(trace.activities(), trace.case_id(), Label::Normal);
    for (const auto& log : anomalous_logs.logs)
        for (const auto& trace : log.traces)
            pools.anomalous.emplace_back(trace.activities(), trace.case_id(), Label::Anomalous);
    return pools;
}

bool is_baseline(const std::string& technique) {
    return technique == "AB_CC_B" || technique == "TB_CC_B";
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
    if (config.repetitions < 1)
        throw ArgumentError("run_experiment: repetitions must be >= 1");
    config.cost.validate();

    std::optional<PetriNet> net;
    std::string net_pnml = config.net_pnml;
    if (net_pnml.empty() && config.synth && !config.synth->net_pnml.empty())
        net_pnml = config.synth->net_pnml;
    std::string net_path = config.net_path;
    if (net_path.empty() && config.synth) net_path = config.synth->net_path;
    if (!net_pnml.empty())
        net = parse_pnml(net_pnml);
    else if (!net_path.empty())
        net = parse_pnml(read_file(net_path));

    const bool baseline = is_baseline(config.technique);
    const bool needs_net = baseline || config.extractor == ExtractorId::AB_CC ||
                           config.extractor == ExtractorId::TB_CC || config.synth.has_value();
    if (needs_net && !net)
        throw ArgumentError("run_experiment: this configuration requires a reference net");

    ExperimentReport report;
    report.config = config;
    report.reduced_grid = !config.exhaustive_grid && config.grid_override.empty();

    // Trace pools from files are loaded once; synthetic pools are
    // regenerated per repetition from the repetition seed.
    std::optional<TracePools> file_pools;
    if (config.paths) file_pools = assemble_pools(config, 0, net ? &*net : nullptr);

    for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
        RepetitionResult result;
        result.index = rep;
        const std::uint64_t rep_seed = derive_seed(config.seed, "rep_" + std::to_string(rep));
        try {
            TracePools pools = file_pools
                                   ? *file_pools
                                   : assemble_pools(config, rep_seed, net ? &*net : nullptr);

            LogTuple normal_logs = group_into_logs(pools.normal, config.group_size,
                                                   derive_seed(rep_seed, "group_normal"));
            LogTuple anomalous_logs = group_into_logs(pools.anomalous, config.group_size,
                                                      derive_seed(rep_seed, "group_anomalous"));
            DatasetSplit split =
                split_dataset(normal_logs, anomalous_logs, config.test_fraction,
                              config.val_fraction, derive_seed(rep_seed, "split"));

            std::map<std::string, Classification> verdicts;
            std::map<std::string, Label> truth;
            for (const auto& log : split.test.logs) truth[log.log_id] = log.label;

            if (baseline) {
                BaselineModel model = baseline_fit(split.validation, *net,
                                                   baseline_from_string(config.technique),
                                                   config.cost);
                for (const auto& log : split.test.logs)
                    verdicts[log.log_id] = baseline_classify(model, *net, log, config.cost);
                result.chosen_config = config.technique;
                result.threshold = model.threshold;
            } else {
                const DrVariant variant = dr_variant_from_string(config.technique);
                FeatureSchema schema = fit_schema(split.train, net ? &*net : nullptr,
                                                  config.extractor, config.ngram_n);
                if (schema.size() < 2)
                    throw ContractError("run_experiment: schema has fewer than 2 columns");
                ConformanceCache cache;
                FeatureMatrix train = extract(split.train, net ? &*net : nullptr, config.cost,
                                              schema, &cache, config.jobs);
                FeatureMatrix validation = extract(split.validation, net ? &*net : nullptr,
                                                   config.cost, schema, &cache, config.jobs);
                FeatureMatrix test = extract(split.test, net ? &*net : nullptr, config.cost,
                                             schema, &cache, config.jobs);

                std::vector<GridConfig> grid = config.grid_override;
                if (grid.empty())
                    grid = default_grid(variant, schema.size(), config.exhaustive_grid);
                if (grid.empty())
                    throw ContractError(
                        "run_experiment: no grid configuration fits f=" +
                        std::to_string(schema.size()));
                DetectorModel model = grid_search(train, validation, variant, grid,
                                                  derive_seed(rep_seed, "grid"));
                model.reduced_grid = report.reduced_grid;
                for (std::size_t i = 0; i < test.rows(); ++i)
                    verdicts[test.row_ids[i]] = classify(model, test.values.row(i));
                result.chosen_config = model.chosen.describe();
                result.threshold = model.threshold;
            }
            result.metrics = evaluate(verdicts, truth);
            result.succeeded = true;
        } catch (const Error& e) {
            result.error = e.what();
        }
        report.repetitions.push_back(std::move(result));
    }

    std::vector<double> a, r, p, f1;
    for (const auto& rep : report.repetitions) {
        if (!rep.succeeded) continue;
        a.push_back(rep.metrics.accuracy);
        r.push_back(rep.metrics.recall);
        p.push_back(rep.metrics.precision);
        f1.push_back(rep.metrics.f1);
    }
    if (a.empty()) {
        std::string causes;
        for (const auto& rep : report.repetitions)
            causes += "\n  repetition " + std::to_string(rep.index) + ": " + rep.error;
        throw NumericError("run_experiment: every repetition failed" + causes);
    }
    auto mean_std = [](const std::vector<double>& values) {
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        var /= static_cast<double>(values.size());
        return std::make_pair(mean, std::sqrt(var));
    };
    std::tie(report.mean_accuracy, report.std_accuracy) = mean_std(a);
    std::tie(report.mean_recall, report.std_recall) = mean_std(r);
    std::tie(report.mean_precision, report.std_precision) = mean_std(p);
    std::tie(report.mean_f1, report.std_f1) = mean_std(f1);
    return report;
}

std::string experiment_report_to_json(const ExperimentReport& report) {
    nlohmann::json j;
    j["config"] = nlohmann::json::parse(experiment_config_to_json(report.config));
    j["reduced_grid"] = report.reduced_grid;
    nlohmann::json reps = nlohmann::json::array();
    for (const auto& rep : report.repetitions) {
        nlohmann::json r;
        r["index"] = rep.index;
        r["succeeded"] = rep.succeeded;
        if (!rep.succeeded) {
            r["error"] = rep.error;
            reps.push_back(std::move(r));
            continue;
        }
        r["chosen_config"] = rep.chosen_config;
        r["threshold"] = rep.threshold;
        r["metrics"] = {{"accuracy", rep.metrics.accuracy}, {"recall", rep.metrics.recall},
                        {"precision", rep.metrics.precision}, {"f1", rep.metrics.f1},
                        {"tp", rep.metrics.tp}, {"tn", rep.metrics.tn},
                        {"fp", rep.metrics.fp}, {"fn", rep.metrics.fn}};
        nlohmann::json verdicts;
        for (const auto& [log_id, verdict] : rep.metrics.verdicts)
            verdicts[log_id] = {{"classification", to_string(verdict.predicted)},
                                {"value", verdict.value}};
        r["verdicts"] = std::move(verdicts);
        if (!rep.metrics.diagnostics.empty()) r["diagnostics"] = rep.metrics.diagnostics;
        reps.push_back(std::move(r));
    }
    j["repetitions"] = std::move(reps);
    j["summary"] = {{"accuracy", {{"mean", report.mean_accuracy}, {"std", report.std_accuracy}}},
                    {"recall", {{"mean", report.mean_recall}, {"std", report.std_recall}}},
                    {"precision", {{"mean", report.mean_precision}, {"std", report.std_precision}}},
                    {"f1", {{"mean", report.mean_f1}, {"std", report.std_f1}}}};
    return j.dump(2);
}

std::string experiment_report_to_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "repetition,accuracy,recall,precision,f1\n";
    char buf[128];
    for (const auto& rep : report.repetitions) {
        if (!rep.succeeded) {
            out << rep.index << ",,,,\n";
            continue;
        }
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g", rep.index,
                      rep.metrics.accuracy, rep.metrics.recall, rep.metrics.precision,
                      rep.metrics.f1);
        out << buf << "\n";
    }
    std::snprintf(buf, sizeof(buf), "mean,%.17g,%.17g,%.17g,%.17g", report.mean_accuracy,
                  report.mean_recall, report.mean_precision, report.mean_f1);
    out << buf << "\n";
    std::snprintf(buf, sizeof(buf), "std,%.17g,%.17g,%.17g,%.17g", report.std_accuracy,
                  report.std_recall, report.std_precision, report.std_f1);
    out << buf << "\n";
    return out.str();
}

}  // namespace pmad
