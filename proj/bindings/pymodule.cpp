// Python bindings for the pmad core: event logs, nets, conformance
// checking, feature extraction, detection and explanation.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pmad/conformance_align.hpp"
#include "pmad/conformance_token.hpp"
#include "pmad/error.hpp"
#include "pmad/experiment.hpp"
#include "pmad/explain.hpp"
#include "pmad/rng.hpp"
#include "pmad/synth.hpp"

namespace py = pybind11;
using namespace pmad;

namespace {

std::vector<std::vector<double>> matrix_rows(const Matrix& m) {
    std::vector<std::vector<double>> rows(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        rows[i].assign(m.row(i).begin(), m.row(i).end());
    return rows;
}

}  // namespace

PYBIND11_MODULE(_pmad, m) {
    m.doc() = "process-mining-based control-flow anomaly detection";

    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
    py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
    py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
    py::register_exception<Error>(m, "PmadError", PyExc_RuntimeError);

    py::enum_<Label>(m, "Label")
        .value("NORMAL", Label::Normal)
        .value("ANOMALOUS", Label::Anomalous)
        .value("UNLABELED", Label::Unlabeled);

    py::class_<Trace>(m, "Trace")
        .def(py::init<std::vector<std::string>, std::string, Label>(), py::arg("activities"),
             py::arg("case_id") = "", py::arg("label") = Label::Unlabeled)
        .def_property_readonly("activities", &Trace::activities)
        .def_property_readonly("case_id", &Trace::case_id)
        .def_property_readonly("label", &Trace::label)
        .def("__len__", &Trace::size)
        .def("__repr__", [](const Trace& t) {
            std::string out = "Trace([";
            for (std::size_t i = 0; i < t.activities().size(); ++i) {
                if (i) out += ", ";
                out += "'" + t.activities()[i] + "'";
            }
            return out + "])";
        });

    py::class_<EventLog>(m, "EventLog")
        .def(py::init([](std::vector<Trace> traces, Label label, std::string log_id) {
                 EventLog log;
                 log.traces = std::move(traces);
                 log.label = label;
                 log.log_id = std::move(log_id);
                 return log;
             }),
             py::arg("traces"), py::arg("label") = Label::Unlabeled, py::arg("log_id") = "")
        .def_readwrite("traces", &EventLog::traces)
        .def_readwrite("label", &EventLog::label)
        .def_readwrite("log_id", &EventLog::log_id)
        .def("__len__", &EventLog::size);

    py::class_<LogTuple>(m, "LogTuple")
        .def(py::init([](std::vector<EventLog> logs) {
                 LogTuple tuple;
                 tuple.logs = std::move(logs);
                 return tuple;
             }),
             py::arg("logs"))
        .def_readwrite("logs", &LogTuple::logs)
        .def("__len__", &LogTuple::size);

    py::class_<DatasetSplit>(m, "DatasetSplit")
        .def_readonly("train", &DatasetSplit::train)
        .def_readonly("validation", &DatasetSplit::validation)
        .def_readonly("test", &DatasetSplit::test);

    m.def("parse_csv", &parse_csv, py::arg("text"));
    m.def("write_csv", &write_csv, py::arg("logs"));
    m.def("parse_xes", &parse_xes, py::arg("text"));
    m.def("write_xes", &write_xes, py::arg("logs"));
    m.def("group_into_logs", &group_into_logs, py::arg("traces"), py::arg("group_size"),
          py::arg("rng_seed"));
    m.def("split_dataset", &split_dataset, py::arg("normal"), py::arg("anomalous"),
          py::arg("test_fraction"), py::arg("val_fraction"), py::arg("rng_seed"));

    py::class_<PetriNet>(m, "PetriNet")
        .def_property_readonly("places", &PetriNet::places)
        .def_property_readonly("initial_marking", &PetriNet::initial_marking)
        .def_property_readonly("final_marking", &PetriNet::final_marking)
        .def_property_readonly("visible_labels", &PetriNet::visible_labels)
        .def_property_readonly("transitions", [](const PetriNet& net) {
            std::vector<std::pair<std::string, std::string>> out;
            for (const auto& t : net.transitions()) out.emplace_back(t.id, t.label);
            return out;
        });

    py::class_<MoveCost>(m, "MoveCost")
        .def(py::init([](double sync, double log_move, double model, double silent) {
                 return MoveCost{sync, log_move, model, silent};
             }),
             py::arg("sync_move") = 0.0, py::arg("log_move") = 1.0,
             py::arg("model_move") = 1.0, py::arg("silent_move") = 0.0)
        .def_readwrite("sync_move", &MoveCost::sync_move)
        .def_readwrite("log_move", &MoveCost::log_move)
        .def_readwrite("model_move", &MoveCost::model_move)
        .def_readwrite("silent_move", &MoveCost::silent_move);

    m.def("parse_pnml", &parse_pnml, py::arg("text"));
    m.def("enabled", &enabled, py::arg("net"), py::arg("marking"));
    m.def("fire", &fire, py::arg("net"), py::arg("marking"), py::arg("transition_id"));
    m.def("random_walk", &random_walk, py::arg("net"), py::arg("rng_seed"),
          py::arg("max_steps") = 1000);
    m.def("min_model_path_cost", &min_model_path_cost, py::arg("net"),
          py::arg("cost") = MoveCost{}, py::arg("state_cap") = std::size_t{50000});

    py::class_<ReplayResult>(m, "ReplayResult")
        .def_readonly("produced", &ReplayResult::produced)
        .def_readonly("consumed", &ReplayResult::consumed)
        .def_readonly("missing", &ReplayResult::missing)
        .def_readonly("remaining", &ReplayResult::remaining)
        .def_readonly("fired_per_activity", &ReplayResult::fired_per_activity)
        .def_readonly("unknown_activities", &ReplayResult::unknown_activities)
        .def_readonly("fitness", &ReplayResult::fitness);

    m.def("replay_trace", &replay_trace, py::arg("net"), py::arg("trace"),
          py::arg("max_bridge") = std::size_t{8});
    m.def("replay_log", &replay_log, py::arg("net"), py::arg("log"),
          py::arg("max_bridge") = std::size_t{8});

    py::enum_<Move::Kind>(m, "MoveKind")
        .value("SYNC", Move::Kind::Sync)
        .value("LOG_ONLY", Move::Kind::LogOnly)
        .value("MODEL_VISIBLE", Move::Kind::ModelVisible)
        .value("MODEL_SILENT", Move::Kind::ModelSilent);

    py::class_<Move>(m, "Move")
        .def_readonly("kind", &Move::kind)
        .def_readonly("activity", &Move::activity)
        .def_readonly("transition_id", &Move::transition_id);

    py::class_<Alignment>(m, "Alignment")
        .def_readonly("moves", &Alignment::moves)
        .def_readonly("cost", &Alignment::cost)
        .def("render", [](const Alignment& a) { return render(a); });

    m.def("optimal_alignment", &optimal_alignment, py::arg("net"), py::arg("trace"),
          py::arg("cost") = MoveCost{}, py::arg("state_cap") = std::size_t{50000});
    m.def("worst_case_cost", &worst_case_cost, py::arg("net"), py::arg("trace"),
          py::arg("cost") = MoveCost{});
    m.def("alignment_fitness_trace", &alignment_fitness_trace, py::arg("net"),
          py::arg("trace"), py::arg("cost") = MoveCost{});
    m.def("alignment_fitness_log", &alignment_fitness_log, py::arg("net"), py::arg("log"),
          py::arg("cost") = MoveCost{});
    m.def("per_activity_cost_trace", &per_activity_cost_trace, py::arg("alignment"),
          py::arg("cost"), py::arg("activity_set"));
    m.def("per_activity_cost_log", &per_activity_cost_log, py::arg("net"), py::arg("log"),
          py::arg("cost") = MoveCost{});

    py::enum_<ExtractorId>(m, "Extractor")
        .value("AB_CC", ExtractorId::AB_CC)
        .value("TB_CC", ExtractorId::TB_CC)
        .value("NG", ExtractorId::NG)
        .value("DF", ExtractorId::DF);

    py::class_<FeatureSchema>(m, "FeatureSchema")
        .def_property_readonly("extractor",
                               [](const FeatureSchema& s) { return to_string(s.extractor); })
        .def_property_readonly("columns", [](const FeatureSchema& s) {
            std::vector<std::pair<std::string, std::string>> out;
            for (const auto& c : s.columns) out.emplace_back(to_string(c.kind), c.key);
            return out;
        })
        .def("__len__", &FeatureSchema::size)
        .def("to_json", &schema_to_json);
    m.def("schema_from_json", &schema_from_json, py::arg("text"));

    py::class_<FeatureMatrix>(m, "FeatureMatrix")
        .def_readonly("schema", &FeatureMatrix::schema)
        .def_readonly("row_ids", &FeatureMatrix::row_ids)
        .def_readonly("row_labels", &FeatureMatrix::row_labels)
        .def_property_readonly("values",
                               [](const FeatureMatrix& m) { return matrix_rows(m.values); })
        .def("to_csv", &write_matrix_csv);

    m.def("fit_schema", &fit_schema, py::arg("train"), py::arg("net") = nullptr,
          py::arg("extractor") = ExtractorId::AB_CC, py::arg("ngram_n") = std::size_t{2});
    m.def(
        "extract",
        [](const LogTuple& logs, const PetriNet* net, const MoveCost& cost,
           const FeatureSchema& schema, std::size_t jobs) {
            return extract(logs, net, cost, schema, nullptr, jobs);
        },
        py::arg("logs"), py::arg("net") = nullptr, py::arg("cost") = MoveCost{},
        py::arg("schema"), py::arg("jobs") = std::size_t{1});
    m.def("parse_matrix_csv", &parse_matrix_csv, py::arg("text"), py::arg("schema"));

    py::class_<GridConfig>(m, "GridConfig")
        .def(py::init<>())
        .def("describe", &GridConfig::describe);

    py::class_<DetectorModel>(m, "DetectorModel")
        .def_readonly("schema", &DetectorModel::schema)
        .def_readonly("threshold", &DetectorModel::threshold)
        .def_property_readonly("chosen",
                               [](const DetectorModel& m) { return m.chosen.describe(); })
        .def("error_of",
             [](const DetectorModel& m, const std::vector<double>& row) {
                 return m.error_of(row);
             })
        .def("to_json", &detector_to_json);
    m.def("detector_from_json", &detector_from_json, py::arg("text"));

    m.def(
        "grid_search",
        [](const FeatureMatrix& train, const FeatureMatrix& validation,
           const std::string& variant, bool exhaustive, std::uint64_t rng_seed) {
            const DrVariant v = dr_variant_from_string(variant);
            auto grid = default_grid(v, train.schema.size(), exhaustive);
            if (grid.empty())
                throw ContractError("no grid configuration fits f=" +
                                    std::to_string(train.schema.size()));
            DetectorModel model = grid_search(train, validation, v, grid, rng_seed);
            model.reduced_grid = !exhaustive;
            return model;
        },
        py::arg("train"), py::arg("validation"), py::arg("variant") = "PCA",
        py::arg("exhaustive") = false, py::arg("rng_seed") = std::uint64_t{0});

    m.def(
        "classify",
        [](const DetectorModel& model, const std::vector<double>& row) {
            Classification c = classify(model, row);
            return py::make_tuple(to_string(c.label), c.error);
        },
        py::arg("model"), py::arg("row"));

    py::class_<MetricsReport>(m, "MetricsReport")
        .def_readonly("tp", &MetricsReport::tp)
        .def_readonly("tn", &MetricsReport::tn)
        .def_readonly("fp", &MetricsReport::fp)
        .def_readonly("fn", &MetricsReport::fn)
        .def_readonly("accuracy", &MetricsReport::accuracy)
        .def_readonly("recall", &MetricsReport::recall)
        .def_readonly("precision", &MetricsReport::precision)
        .def_readonly("f1", &MetricsReport::f1);

    py::class_<BaselineModel>(m, "BaselineModel")
        .def_property_readonly("variant",
                               [](const BaselineModel& m) { return to_string(m.variant); })
        .def_readonly("threshold", &BaselineModel::threshold);

    m.def(
        "baseline_fit",
        [](const LogTuple& validation, const PetriNet& net, const std::string& variant,
           const MoveCost& cost) {
            return baseline_fit(validation, net, baseline_from_string(variant), cost);
        },
        py::arg("validation"), py::arg("net"), py::arg("variant") = "AB_CC_B",
        py::arg("cost") = MoveCost{});
    m.def(
        "baseline_classify",
        [](const BaselineModel& model, const PetriNet& net, const EventLog& log,
           const MoveCost& cost) {
            Classification c = baseline_classify(model, net, log, cost);
            return py::make_tuple(to_string(c.label), c.error);
        },
        py::arg("model"), py::arg("net"), py::arg("log"), py::arg("cost") = MoveCost{});

    py::class_<Attribution>(m, "Attribution")
        .def_readonly("base", &Attribution::base)
        .def_readonly("contributions", &Attribution::contributions)
        .def_readonly("explained", &Attribution::explained);

    m.def(
        "shapley_attribution",
        [](const DetectorModel& model, const std::vector<double>& row,
           const std::string& mode, std::size_t samples, std::uint64_t rng_seed) {
            return shapley_attribution(model, row, shap_mode_from_string(mode), samples,
                                       rng_seed);
        },
        py::arg("model"), py::arg("row"), py::arg("mode") = "exact",
        py::arg("samples") = std::size_t{2000}, py::arg("rng_seed") = std::uint64_t{0});

    py::class_<ExplanationReport>(m, "ExplanationReport")
        .def_readonly("feature_keys", &ExplanationReport::feature_keys)
        .def_readonly("normal_mean_abs", &ExplanationReport::normal_mean_abs)
        .def_readonly("anomalous_mean_abs", &ExplanationReport::anomalous_mean_abs)
        .def("to_json", &explanation_to_json)
        .def("to_csv", &explanation_to_csv);

    m.def(
        "explain_testset",
        [](const DetectorModel& model, const FeatureMatrix& test, const std::string& mode,
           std::size_t samples, std::uint64_t rng_seed) {
            return explain_testset(model, test, shap_mode_from_string(mode), samples,
                                   rng_seed);
        },
        py::arg("model"), py::arg("test"), py::arg("mode") = "sampled",
        py::arg("samples") = std::size_t{2000}, py::arg("rng_seed") = std::uint64_t{0});

    py::class_<InjectionConfig>(m, "InjectionConfig")
        .def(py::init([](double p_skip, double p_duplicate, double p_swap,
                         std::optional<std::set<std::string>> targets) {
                 InjectionConfig c{p_skip, p_duplicate, p_swap, std::move(targets)};
                 c.validate();
                 return c;
             }),
             py::arg("p_skip") = 0.0, py::arg("p_duplicate") = 0.0, py::arg("p_swap") = 0.0,
             py::arg("target_activities") = std::nullopt)
        .def_readwrite("p_skip", &InjectionConfig::p_skip)
        .def_readwrite("p_duplicate", &InjectionConfig::p_duplicate)
        .def_readwrite("p_swap", &InjectionConfig::p_swap);

    m.def("inject", &inject, py::arg("trace"), py::arg("config"), py::arg("rng_seed"));
    m.def("generate_corpus", &generate_corpus, py::arg("net"), py::arg("n_normal"),
          py::arg("n_anomalous"), py::arg("normal_config"), py::arg("anomalous_config"),
          py::arg("rng_seed"), py::arg("max_steps") = std::size_t{1000});

    m.def(
        "run_experiment",
        [](const std::string& config_json) {
            ExperimentReport report = run_experiment(experiment_config_from_json(config_json));
            return experiment_report_to_json(report);
        },
        py::arg("config_json"), "runs the full protocol and returns the report as json");

    m.def("derive_seed", &derive_seed, py::arg("master"), py::arg("label"));
}
