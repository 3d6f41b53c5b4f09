// pmad: process-mining-based control-flow anomaly detection toolkit.
// Subcommands cover corpus conversion and synthesis, conformance
// diagnostics, feature extraction, detector fitting, detection,
// explanation and full experiment runs.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pmad/conformance_align.hpp"
#include "pmad/conformance_token.hpp"
#include "pmad/error.hpp"
#include "pmad/experiment.hpp"
#include "pmad/explain.hpp"
#include "pmad/rng.hpp"
#include "pmad/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_input(const std::string& path) {
    if (path == "-") {
        std::ostringstream buffer;
        buffer << std::cin.rdbuf();
        return buffer.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw pmad::FormatError("cannot open file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_output(const std::string& path, const std::string& content) {
    if (path == "-") {
        std::cout << content;
        return;
    }
    if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw pmad::FormatError("cannot write file '" + path + "'");
    out << content;
}

std::string guess_format(const std::string& path, const std::string& explicit_format) {
    if (!explicit_format.empty()) return explicit_format;
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") return "csv";
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".xes") return "xes";
    return "";
}

pmad::LogTuple parse_traces(const std::string& text, const std::string& format) {
    if (format == "csv") return pmad::parse_csv(text);
    if (format == "xes") return pmad::parse_xes(text);
    throw pmad::ArgumentError("cannot determine the log format; pass --format csv|xes");
}

// A path names either one log file or a directory of per-log files.
pmad::LogTuple load_log_tuple(const std::string& path, const std::string& format) {
    pmad::LogTuple tuple;
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(path)) {
            if (!entry.is_regular_file()) continue;
            const std::string ext = entry.path().extension().string();
            if (ext == ".xes" || ext == ".csv") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        if (files.empty())
            throw pmad::FormatError("directory '" + path + "' holds no .xes or .csv logs");
        for (const auto& file : files) {
            auto one = parse_traces(read_input(file.string()),
                                    guess_format(file.string(), format));
            for (auto& log : one.logs) {
                if (log.log_id.empty()) log.log_id = file.stem().string();
                tuple.logs.push_back(std::move(log));
            }
        }
        return tuple;
    }
    auto one = parse_traces(read_input(path), guess_format(path, format));
    for (auto& log : one.logs) {
        if (log.log_id.empty()) log.log_id = fs::path(path).stem().string();
        tuple.logs.push_back(std::move(log));
    }
    return tuple;
}

pmad::PetriNet load_net(const std::string& path) {
    return pmad::parse_pnml(read_input(path));
}

void echo_config(const json& resolved, const std::string& out_path, bool outdir) {
    if (out_path == "-" || out_path.empty()) return;
    const std::string target = outdir ? (fs::path(out_path) / "resolved_config.json").string()
                                      : out_path + ".config.json";
    write_output(target, resolved.dump(2) + "\n");
}

void write_logs_dir(const pmad::LogTuple& logs, const fs::path& dir, const std::string& format) {
    fs::create_directories(dir);
    for (const auto& log : logs.logs) {
        pmad::LogTuple one;
        one.logs.push_back(log);
        const std::string name = log.log_id + (format == "csv" ? ".csv" : ".xes");
        const std::string payload =
            format == "csv" ? pmad::write_csv(one) : pmad::write_xes(one);
        write_output((dir / name).string(), payload);
    }
}

pmad::MoveCost cost_from_flags(double sync, double log_move, double model, double silent) {
    pmad::MoveCost cost{sync, log_move, model, silent};
    cost.validate();
    return cost;
}

json metrics_json(const pmad::MetricsReport& report) {
    json verdicts;
    for (const auto& [log_id, verdict] : report.verdicts)
        verdicts[log_id] = {{"classification", pmad::to_string(verdict.predicted)},
                            {"value", verdict.value}};
    json j{{"tp", report.tp},        {"tn", report.tn},
           {"fp", report.fp},        {"fn", report.fn},
           {"accuracy", report.accuracy}, {"recall", report.recall},
           {"precision", report.precision}, {"f1", report.f1},
           {"verdicts", std::move(verdicts)}};
    if (!report.diagnostics.empty()) j["diagnostics"] = report.diagnostics;
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"process-mining-based control-flow anomaly detection"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    app.add_option("--seed", seed, "master seed; every stage derives from it")
        ->capture_default_str();
    app.add_option("--jobs", jobs, "worker threads for per-log feature extraction")
        ->capture_default_str();

    // ---- convert ----------------------------------------------------------
    auto* convert = app.add_subcommand("convert", "convert event logs between csv and xes");
    std::string convert_in = "-", convert_out = "-", convert_from, convert_to;
    convert->add_option("--in", convert_in, "input file or - for stdin");
    convert->add_option("--out", convert_out, "output file or - for stdout");
    convert->add_option("--from", convert_from, "input format (csv|xes)");
    convert->add_option("--to", convert_to, "output format (csv|xes)");

    // ---- simulate ---------------------------------------------------------
    auto* simulate = app.add_subcommand("simulate", "random-walk a net into a trace pool");
    std::string simulate_net, simulate_out = "-", simulate_format;
    std::size_t simulate_count = 100, simulate_max_steps = 1000;
    simulate->add_option("--net", simulate_net, "reference net (pnml)")->required();
    simulate->add_option("--count", simulate_count, "number of traces")->capture_default_str();
    simulate->add_option("--max-steps", simulate_max_steps, "walk step cap")
        ->capture_default_str();
    simulate->add_option("--out", simulate_out, "output file or - for stdout");
    simulate->add_option("--format", simulate_format, "output format (csv|xes)");

    // ---- inject -----------------------------------------------------------
    auto* inject_cmd = app.add_subcommand("inject", "probabilistically corrupt traces");
    std::string inject_in, inject_out = "-", inject_format, inject_label;
    double p_skip = 0, p_duplicate = 0, p_swap = 0;
    std::vector<std::string> inject_scope;
    inject_cmd->add_option("--in", inject_in, "input trace file")->required();
    inject_cmd->add_option("--out", inject_out, "output file or - for stdout");
    inject_cmd->add_option("--format", inject_format, "log format (csv|xes)");
    inject_cmd->add_option("--p-skip", p_skip, "skip probability")->capture_default_str();
    inject_cmd->add_option("--p-duplicate", p_duplicate, "duplicate probability")
        ->capture_default_str();
    inject_cmd->add_option("--p-swap", p_swap, "swap probability")->capture_default_str();
    inject_cmd->add_option("--activities", inject_scope,
                           "restrict injection to these activities");
    inject_cmd->add_option("--label", inject_label, "relabel traces (normal|anomalous)");

    // ---- assemble ---------------------------------------------------------
    auto* assemble = app.add_subcommand(
        "assemble", "build grouped train/validation/test corpora from traces or a net");
    std::string assemble_net, assemble_normal, assemble_anomalous, assemble_outdir,
        assemble_format = "xes";
    std::size_t n_normal = 1000, n_anomalous = 1000, group_size = 5,
                assemble_max_steps = 1000;
    double test_fraction = 0.25, val_fraction = 0.20;
    double normal_p = 0.05, anomalous_p = 0.25;
    assemble->add_option("--net", assemble_net, "net to simulate (synthetic corpus)");
    assemble->add_option("--normal", assemble_normal, "file with normal traces");
    assemble->add_option("--anomalous", assemble_anomalous, "file with anomalous traces");
    assemble->add_option("--n-normal", n_normal, "synthetic normal trace count")
        ->capture_default_str();
    assemble->add_option("--n-anomalous", n_anomalous, "synthetic anomalous trace count")
        ->capture_default_str();
    assemble->add_option("--normal-p", normal_p, "per-type injection probability, normal pool")
        ->capture_default_str();
    assemble
        ->add_option("--anomalous-p", anomalous_p,
                     "per-type injection probability, anomalous pool")
        ->capture_default_str();
    assemble->add_option("--max-steps", assemble_max_steps, "walk step cap")
        ->capture_default_str();
    assemble->add_option("--group-size", group_size, "traces per event log")
        ->capture_default_str();
    assemble->add_option("--test-fraction", test_fraction, "normal logs held out for test")
        ->capture_default_str();
    assemble->add_option("--val-fraction", val_fraction, "training logs held out for validation")
        ->capture_default_str();
    assemble->add_option("--outdir", assemble_outdir, "output directory")->required();
    assemble->add_option("--format", assemble_format, "log format (csv|xes)")
        ->capture_default_str();

    // ---- replay / align ---------------------------------------------------
    auto* replay_cmd = app.add_subcommand("replay", "token-replay diagnostics per log");
    std::string replay_net, replay_log_path, replay_out = "-", replay_format;
    replay_cmd->add_option("--net", replay_net, "reference net (pnml)")->required();
    replay_cmd->add_option("--log", replay_log_path, "log file or directory")->required();
    replay_cmd->add_option("--format", replay_format, "log format (csv|xes)");
    replay_cmd->add_option("--out", replay_out, "output file or - for stdout");

    auto* align_cmd = app.add_subcommand("align", "optimal alignments per trace");
    std::string align_net, align_log_path, align_out = "-", align_format;
    bool align_json = false;
    double cost_sync = 0.0, cost_log = 1.0, cost_model = 1.0, cost_silent = 0.0;
    align_cmd->add_option("--net", align_net, "reference net (pnml)")->required();
    align_cmd->add_option("--log", align_log_path, "log file or directory")->required();
    align_cmd->add_option("--format", align_format, "log format (csv|xes)");
    align_cmd->add_option("--out", align_out, "output file or - for stdout");
    align_cmd->add_flag("--json", align_json, "machine-readable output");
    for (auto* cmd : {replay_cmd, align_cmd}) {
        cmd->add_option("--cost-sync", cost_sync, "synchronous move cost");
        cmd->add_option("--cost-log", cost_log, "log move cost");
        cmd->add_option("--cost-model", cost_model, "model move cost");
        cmd->add_option("--cost-silent", cost_silent, "silent move cost");
    }

    // ---- extract ----------------------------------------------------------
    auto* extract_cmd = app.add_subcommand("extract", "feature matrices from event logs");
    std::string extract_net, extract_logs, extract_schema_in, extract_schema_out,
        extract_out, extract_format, extractor_name = "AB_CC";
    std::size_t ngram_n = 2;
    extract_cmd->add_option("--net", extract_net, "reference net (AB_CC/TB_CC)");
    extract_cmd->add_option("--logs", extract_logs, "log file or directory")->required();
    extract_cmd->add_option("--extractor", extractor_name, "AB_CC|TB_CC|NG|DF")
        ->capture_default_str();
    extract_cmd->add_option("--ngram-n", ngram_n, "N for the NG extractor")
        ->capture_default_str();
    extract_cmd->add_option("--schema-in", extract_schema_in,
                            "frozen schema json (fit on these logs when absent)");
    extract_cmd->add_option("--schema-out", extract_schema_out, "write the schema json here");
    extract_cmd->add_option("--out", extract_out, "feature matrix csv")->required();
    extract_cmd->add_option("--format", extract_format, "log format (csv|xes)");
    extract_cmd->add_option("--cost-sync", cost_sync, "synchronous move cost");
    extract_cmd->add_option("--cost-log", cost_log, "log move cost");
    extract_cmd->add_option("--cost-model", cost_model, "model move cost");
    extract_cmd->add_option("--cost-silent", cost_silent, "silent move cost");

    // ---- fit --------------------------------------------------------------
    auto* fit_cmd = app.add_subcommand("fit", "grid-search a detector on feature matrices");
    std::string fit_train, fit_validation, fit_schema, fit_dr = "PCA", fit_out;
    bool fit_exhaustive = false;
    fit_cmd->add_option("--train", fit_train, "training matrix csv")->required();
    fit_cmd->add_option("--validation", fit_validation, "validation matrix csv")->required();
    fit_cmd->add_option("--schema", fit_schema, "schema json")->required();
    fit_cmd->add_option("--dr", fit_dr, "PCA|SPCA|KPCA|AE")->capture_default_str();
    fit_cmd->add_flag("--exhaustive", fit_exhaustive, "full AE grid instead of the reduced one");
    fit_cmd->add_option("--out", fit_out, "detector model json")->required();

    // ---- detect -----------------------------------------------------------
    auto* detect_cmd = app.add_subcommand("detect", "classify feature rows with a detector");
    std::string detect_model, detect_test, detect_out;
    detect_cmd->add_option("--model", detect_model, "detector model json")->required();
    detect_cmd->add_option("--test", detect_test, "test matrix csv")->required();
    detect_cmd->add_option("--out", detect_out, "verdicts/metrics json")->required();

    // ---- explain ----------------------------------------------------------
    auto* explain_cmd = app.add_subcommand("explain", "additive per-feature explanations");
    std::string explain_model, explain_test, explain_out, explain_csv,
        explain_mode = "sampled";
    std::size_t explain_samples = 2000;
    explain_cmd->add_option("--model", explain_model, "detector model json")->required();
    explain_cmd->add_option("--test", explain_test, "test matrix csv")->required();
    explain_cmd->add_option("--mode", explain_mode, "exact|sampled")->capture_default_str();
    explain_cmd->add_option("--samples", explain_samples, "permutations in sampled mode")
        ->capture_default_str();
    explain_cmd->add_option("--out", explain_out, "report json")->required();
    explain_cmd->add_option("--csv", explain_csv, "optional csv for plotting");

    // ---- baseline ---------------------------------------------------------
    auto* baseline_cmd =
        app.add_subcommand("baseline", "fitness-threshold baseline (AB_CC_B / TB_CC_B)");
    std::string baseline_net, baseline_validation, baseline_test, baseline_out,
        baseline_variant = "AB_CC_B", baseline_format;
    baseline_cmd->add_option("--net", baseline_net, "reference net (pnml)")->required();
    baseline_cmd->add_option("--validation", baseline_validation, "validation logs")
        ->required();
    baseline_cmd->add_option("--test", baseline_test, "test logs")->required();
    baseline_cmd->add_option("--variant", baseline_variant, "AB_CC_B|TB_CC_B")
        ->capture_default_str();
    baseline_cmd->add_option("--format", baseline_format, "log format (csv|xes)");
    baseline_cmd->add_option("--out", baseline_out, "model + metrics json")->required();
    baseline_cmd->add_option("--cost-sync", cost_sync, "synchronous move cost");
    baseline_cmd->add_option("--cost-log", cost_log, "log move cost");
    baseline_cmd->add_option("--cost-model", cost_model, "model move cost");
    baseline_cmd->add_option("--cost-silent", cost_silent, "silent move cost");

    // ---- experiment -------------------------------------------------------
    auto* experiment_cmd =
        app.add_subcommand("experiment", "repeated end-to-end runs from a config file");
    std::string experiment_config_path, experiment_outdir;
    bool experiment_csv = false;
    experiment_cmd->add_option("--config", experiment_config_path, "experiment config json")
        ->required();
    experiment_cmd->add_option("--outdir", experiment_outdir, "output directory")->required();
    experiment_cmd->add_flag("--csv", experiment_csv, "also write a metric table csv");

    for (auto* subcommand : app.get_subcommands(nullptr)) subcommand->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << json{{"error", {{"type", "usage"}, {"message", e.what()}, {"exit", 1}}}}
                         .dump()
                  << "\n";
        return 1;
    }

    try {
        if (*convert) {
            const std::string text = read_input(convert_in);
            const std::string from = guess_format(convert_in, convert_from);
            const std::string to = guess_format(convert_out, convert_to);
            pmad::LogTuple logs = parse_traces(text, from);
            if (to == "csv")
                write_output(convert_out, pmad::write_csv(logs));
            else if (to == "xes")
                write_output(convert_out, pmad::write_xes(logs));
            else
                throw pmad::ArgumentError("cannot determine the output format; pass --to");
            echo_config(json{{"command", "convert"}, {"in", convert_in}, {"out", convert_out},
                             {"from", from}, {"to", to}},
                        convert_out, false);
        } else if (*simulate) {
            pmad::PetriNet net = load_net(simulate_net);
            pmad::LogTuple tuple;
            pmad::EventLog log;
            for (std::size_t i = 0; i < simulate_count; ++i) {
                pmad::Trace walk = pmad::random_walk(
                    net, pmad::derive_seed(seed, "walk_" + std::to_string(i)),
                    simulate_max_steps);
                log.traces.emplace_back(walk.activities(), "t" + std::to_string(i),
                                        pmad::Label::Unlabeled);
            }
            tuple.logs.push_back(std::move(log));
            const std::string format = guess_format(simulate_out, simulate_format);
            write_output(simulate_out, format == "csv" ? pmad::write_csv(tuple)
                                                       : pmad::write_xes(tuple));
            echo_config(json{{"command", "simulate"}, {"net", simulate_net},
                             {"count", simulate_count}, {"max_steps", simulate_max_steps},
                             {"seed", seed}, {"out", simulate_out}},
                        simulate_out, false);
        } else if (*inject_cmd) {
            pmad::LogTuple tuple =
                parse_traces(read_input(inject_in), guess_format(inject_in, inject_format));
            pmad::InjectionConfig config;
            config.p_skip = p_skip;
            config.p_duplicate = p_duplicate;
            config.p_swap = p_swap;
            if (!inject_scope.empty())
                config.target_activities =
                    std::set<std::string>(inject_scope.begin(), inject_scope.end());
            std::size_t index = 0;
            for (auto& log : tuple.logs) {
                for (auto& trace : log.traces) {
                    pmad::Trace source = trace;
                    if (!inject_label.empty())
                        source = pmad::Trace(trace.activities(), trace.case_id(),
                                             pmad::label_from_string(inject_label));
                    trace = pmad::inject(
                        source, config,
                        pmad::derive_seed(seed, "inject_" + std::to_string(index++)));
                }
            }
            const std::string format = guess_format(inject_out, inject_format);
            write_output(inject_out, format == "csv" ? pmad::write_csv(tuple)
                                                     : pmad::write_xes(tuple));
            echo_config(json{{"command", "inject"}, {"in", inject_in}, {"out", inject_out},
                             {"p_skip", p_skip}, {"p_duplicate", p_duplicate},
                             {"p_swap", p_swap}, {"seed", seed}},
                        inject_out, false);
        } else if (*assemble) {
            std::vector<pmad::Trace> normal_pool, anomalous_pool;
            if (!assemble_net.empty()) {
                pmad::PetriNet net = load_net(assemble_net);
                pmad::InjectionConfig mild{normal_p, normal_p, normal_p, std::nullopt};
                pmad::InjectionConfig strong{anomalous_p, anomalous_p, anomalous_p,
                                             std::nullopt};
                auto [normal, anomalous] =
                    pmad::generate_corpus(net, n_normal, n_anomalous, mild, strong,
                                          pmad::derive_seed(seed, "synth"),
                                          assemble_max_steps);
                normal_pool = std::move(normal);
                anomalous_pool = std::move(anomalous);
            } else {
                if (assemble_normal.empty() || assemble_anomalous.empty())
                    throw pmad::ArgumentError(
                        "assemble needs either --net or both --normal and --anomalous");
                for (const auto& log :
                     load_log_tuple(assemble_normal, assemble_format).logs)
                    for (const auto& trace : log.traces)
                        normal_pool.emplace_back(trace.activities(), trace.case_id(),
                                                 pmad::Label::Normal);
                for (const auto& log :
                     load_log_tuple(assemble_anomalous, assemble_format).logs)
                    for (const auto& trace : log.traces)
                        anomalous_pool.emplace_back(trace.activities(), trace.case_id(),
                                                    pmad::Label::Anomalous);
            }
            pmad::LogTuple normal_logs = pmad::group_into_logs(
                normal_pool, group_size, pmad::derive_seed(seed, "group_normal"));
            pmad::LogTuple anomalous_logs = pmad::group_into_logs(
                anomalous_pool, group_size, pmad::derive_seed(seed, "group_anomalous"));
            pmad::DatasetSplit split =
                pmad::split_dataset(normal_logs, anomalous_logs, test_fraction, val_fraction,
                                    pmad::derive_seed(seed, "split"));
            write_logs_dir(split.train, fs::path(assemble_outdir) / "train", assemble_format);
            write_logs_dir(split.validation, fs::path(assemble_outdir) / "validation",
                           assemble_format);
            write_logs_dir(split.test, fs::path(assemble_outdir) / "test", assemble_format);
            echo_config(json{{"command", "assemble"}, {"net", assemble_net},
                             {"normal", assemble_normal}, {"anomalous", assemble_anomalous},
                             {"n_normal", n_normal}, {"n_anomalous", n_anomalous},
                             {"normal_p", normal_p}, {"anomalous_p", anomalous_p},
                             {"group_size", group_size}, {"test_fraction", test_fraction},
                             {"val_fraction", val_fraction}, {"seed", seed},
                             {"format", assemble_format}},
                        assemble_outdir, true);
        } else if (*replay_cmd) {
            pmad::PetriNet net = load_net(replay_net);
            pmad::LogTuple logs = load_log_tuple(replay_log_path, replay_format);
            json out = json::array();
            for (const auto& log : logs.logs) {
                pmad::ReplayResult r = pmad::replay_log(net, log);
                json fired;
                for (const auto& [activity, count] : r.fired_per_activity)
                    fired[activity] = count;
                out.push_back({{"log_id", log.log_id}, {"fitness", r.fitness},
                               {"produced", r.produced}, {"consumed", r.consumed},
                               {"missing", r.missing}, {"remaining", r.remaining},
                               {"unknown_activities", r.unknown_activities},
                               {"fired_per_activity", std::move(fired)}});
            }
            write_output(replay_out, out.dump(2) + "\n");
            echo_config(json{{"command", "replay"}, {"net", replay_net},
                             {"log", replay_log_path}},
                        replay_out, false);
        } else if (*align_cmd) {
            pmad::PetriNet net = load_net(align_net);
            pmad::MoveCost cost = cost_from_flags(cost_sync, cost_log, cost_model, cost_silent);
            pmad::LogTuple logs = load_log_tuple(align_log_path, align_format);
            std::ostringstream text;
            json machine = json::array();
            for (const auto& log : logs.logs) {
                double fitness_sum = 0.0;
                for (std::size_t i = 0; i < log.traces.size(); ++i) {
                    const pmad::Trace& trace = log.traces[i];
                    pmad::Alignment alignment = pmad::optimal_alignment(net, trace, cost);
                    const double fitness = pmad::alignment_fitness_trace(net, trace, cost);
                    fitness_sum += fitness;
                    if (align_json) {
                        json moves = json::array();
                        for (const auto& move : alignment.moves) {
                            const char* kind =
                                move.kind == pmad::Move::Kind::Sync           ? "sync"
                                : move.kind == pmad::Move::Kind::LogOnly      ? "log"
                                : move.kind == pmad::Move::Kind::ModelVisible ? "model"
                                                                              : "silent";
                            moves.push_back({{"kind", kind}, {"activity", move.activity},
                                             {"transition", move.transition_id}});
                        }
                        machine.push_back({{"log_id", log.log_id}, {"trace", i},
                                           {"cost", alignment.cost}, {"fitness", fitness},
                                           {"moves", std::move(moves)}});
                    } else {
                        text << log.log_id << " trace " << i << " cost " << alignment.cost
                             << " fitness " << fitness << "\n"
                             << pmad::render(alignment);
                    }
                }
                if (!align_json)
                    text << log.log_id << " fitness "
                         << fitness_sum / static_cast<double>(log.traces.size()) << "\n\n";
            }
            write_output(align_out, align_json ? machine.dump(2) + "\n" : text.str());
            echo_config(json{{"command", "align"}, {"net", align_net},
                             {"log", align_log_path}},
                        align_out, false);
        } else if (*extract_cmd) {
            std::optional<pmad::PetriNet> net;
            if (!extract_net.empty()) net = load_net(extract_net);
            pmad::MoveCost cost = cost_from_flags(cost_sync, cost_log, cost_model, cost_silent);
            pmad::LogTuple logs = load_log_tuple(extract_logs, extract_format);
            pmad::FeatureSchema schema;
            if (!extract_schema_in.empty()) {
                schema = pmad::schema_from_json(read_input(extract_schema_in));
            } else {
                schema = pmad::fit_schema(logs, net ? &*net : nullptr,
                                          pmad::extractor_from_string(extractor_name), ngram_n);
            }
            pmad::FeatureMatrix matrix =
                pmad::extract(logs, net ? &*net : nullptr, cost, schema, nullptr, jobs);
            write_output(extract_out, pmad::write_matrix_csv(matrix));
            if (!extract_schema_out.empty())
                write_output(extract_schema_out, pmad::schema_to_json(schema) + "\n");
            echo_config(json{{"command", "extract"}, {"net", extract_net},
                             {"logs", extract_logs}, {"extractor", extractor_name},
                             {"ngram_n", ngram_n}, {"schema_in", extract_schema_in},
                             {"out", extract_out}, {"jobs", jobs}},
                        extract_out, false);
        } else if (*fit_cmd) {
            pmad::FeatureSchema schema = pmad::schema_from_json(read_input(fit_schema));
            pmad::FeatureMatrix train =
                pmad::parse_matrix_csv(read_input(fit_train), schema);
            pmad::FeatureMatrix validation =
                pmad::parse_matrix_csv(read_input(fit_validation), schema);
            const pmad::DrVariant variant = pmad::dr_variant_from_string(fit_dr);
            auto grid = pmad::default_grid(variant, schema.size(), fit_exhaustive);
            if (grid.empty())
                throw pmad::ContractError("no grid configuration fits f=" +
                                          std::to_string(schema.size()));
            pmad::DetectorModel model = pmad::grid_search(
                train, validation, variant, grid, pmad::derive_seed(seed, "grid"));
            model.reduced_grid = !fit_exhaustive;
            write_output(fit_out, pmad::detector_to_json(model) + "\n");
            echo_config(json{{"command", "fit"}, {"train", fit_train},
                             {"validation", fit_validation}, {"dr", fit_dr},
                             {"exhaustive", fit_exhaustive}, {"seed", seed},
                             {"out", fit_out}},
                        fit_out, false);
        } else if (*detect_cmd) {
            pmad::DetectorModel model = pmad::detector_from_json(read_input(detect_model));
            pmad::FeatureMatrix test =
                pmad::parse_matrix_csv(read_input(detect_test), model.schema);
            std::map<std::string, pmad::Classification> verdicts;
            bool all_labeled = true;
            std::map<std::string, pmad::Label> truth;
            for (std::size_t i = 0; i < test.rows(); ++i) {
                verdicts[test.row_ids[i]] = pmad::classify(model, test.values.row(i));
                truth[test.row_ids[i]] = test.row_labels[i];
                if (test.row_labels[i] == pmad::Label::Unlabeled) all_labeled = false;
            }
            json out{{"threshold", model.threshold}};
            if (all_labeled && !verdicts.empty()) {
                out["metrics"] = metrics_json(pmad::evaluate(verdicts, truth));
            } else {
                json v;
                for (const auto& [log_id, classification] : verdicts)
                    v[log_id] = {{"classification", pmad::to_string(classification.label)},
                                 {"value", classification.error}};
                out["verdicts"] = std::move(v);
            }
            write_output(detect_out, out.dump(2) + "\n");
            echo_config(json{{"command", "detect"}, {"model", detect_model},
                             {"test", detect_test}, {"out", detect_out}},
                        detect_out, false);
        } else if (*explain_cmd) {
            pmad::DetectorModel model = pmad::detector_from_json(read_input(explain_model));
            pmad::FeatureMatrix test =
                pmad::parse_matrix_csv(read_input(explain_test), model.schema);
            pmad::ExplanationReport report = pmad::explain_testset(
                model, test, pmad::shap_mode_from_string(explain_mode), explain_samples,
                pmad::derive_seed(seed, "explain"));
            write_output(explain_out, pmad::explanation_to_json(report) + "\n");
            if (!explain_csv.empty())
                write_output(explain_csv, pmad::explanation_to_csv(report));
            echo_config(json{{"command", "explain"}, {"model", explain_model},
                             {"test", explain_test}, {"mode", explain_mode},
                             {"samples", explain_samples}, {"seed", seed}},
                        explain_out, false);
        } else if (*baseline_cmd) {
            pmad::PetriNet net = load_net(baseline_net);
            pmad::MoveCost cost = cost_from_flags(cost_sync, cost_log, cost_model, cost_silent);
            pmad::LogTuple validation = load_log_tuple(baseline_validation, baseline_format);
            pmad::LogTuple test = load_log_tuple(baseline_test, baseline_format);
            pmad::BaselineModel model = pmad::baseline_fit(
                validation, net, pmad::baseline_from_string(baseline_variant), cost);
            std::map<std::string, pmad::Classification> verdicts;
            std::map<std::string, pmad::Label> truth;
            bool all_labeled = true;
            for (const auto& log : test.logs) {
                verdicts[log.log_id] = pmad::baseline_classify(model, net, log, cost);
                truth[log.log_id] = log.label;
                if (log.label == pmad::Label::Unlabeled) all_labeled = false;
            }
            json out{{"variant", pmad::to_string(model.variant)},
                     {"threshold", model.threshold}};
            if (all_labeled && !verdicts.empty()) {
                out["metrics"] = metrics_json(pmad::evaluate(verdicts, truth));
            } else {
                json v;
                for (const auto& [log_id, classification] : verdicts)
                    v[log_id] = {{"classification", pmad::to_string(classification.label)},
                                 {"value", classification.error}};
                out["verdicts"] = std::move(v);
            }
            write_output(baseline_out, out.dump(2) + "\n");
            echo_config(json{{"command", "baseline"}, {"net", baseline_net},
                             {"validation", baseline_validation}, {"test", baseline_test},
                             {"variant", baseline_variant}},
                        baseline_out, false);
        } else if (*experiment_cmd) {
            pmad::ExperimentConfig config =
                pmad::experiment_config_from_json(read_input(experiment_config_path));
            if (app.count("--seed")) config.seed = seed;
            if (app.count("--jobs")) config.jobs = jobs;
            pmad::ExperimentReport report = pmad::run_experiment(config);
            fs::create_directories(experiment_outdir);
            write_output((fs::path(experiment_outdir) / "report.json").string(),
                         pmad::experiment_report_to_json(report) + "\n");
            if (experiment_csv)
                write_output((fs::path(experiment_outdir) / "metrics.csv").string(),
                             pmad::experiment_report_to_csv(report));
            echo_config(json::parse(pmad::experiment_config_to_json(config)),
                        experiment_outdir, true);
            std::cout << "technique " << config.technique << " mean F1 " << report.mean_f1
                      << " (std " << report.std_f1 << ")\n";
        }
    } catch (const pmad::Error& e) {
        int code = 3;
        switch (e.kind()) {
            case pmad::Error::Kind::Usage: code = 1; break;
            case pmad::Error::Kind::Data: code = 2; break;
            case pmad::Error::Kind::Numeric: code = 3; break;
        }
        const char* type = code == 1 ? "usage" : code == 2 ? "data" : "numeric";
        std::cerr << json{{"error", {{"type", type}, {"message", e.what()}, {"exit", code}}}}
                         .dump()
                  << "\n";
        return code;
    } catch (const std::exception& e) {
        std::cerr << json{{"error",
                           {{"type", "internal"}, {"message", e.what()}, {"exit", 3}}}}
                         .dump()
                  << "\n";
        return 3;
    }
    return 0;
}
