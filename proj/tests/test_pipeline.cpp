#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "pmad/error.hpp"
#include "pmad/experiment.hpp"
#include "pmad/pipeline.hpp"

using namespace pmad;
using namespace pmad::testing;

namespace {

FeatureMatrix matrix_from(const std::vector<std::vector<double>>& rows,
                          Label label = Label::Normal) {
    FeatureMatrix m;
    m.schema.extractor = ExtractorId::NG;
    for (std::size_t j = 0; j < rows[0].size(); ++j)
        m.schema.columns.push_back({ColumnKey::Kind::Ngram, "f" + std::to_string(j)});
    m.values = Matrix(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        m.row_ids.push_back("row_" + std::to_string(i));
        m.row_labels.push_back(label);
        for (std::size_t j = 0; j < rows[0].size(); ++j) m.values(i, j) = rows[i][j];
    }
    return m;
}

Standardizer identity_standardizer(std::size_t f) {
    Standardizer s;
    s.mean.assign(f, 0.0);
    s.stddev.assign(f, 1.0);
    s.constant_mask.assign(f, false);
    return s;
}

// PCA detector whose loadings are the first axis; rows (0, y) have error y^2.
DetectorModel axis_detector(double threshold) {
    DetectorModel model;
    model.schema.extractor = ExtractorId::NG;
    model.schema.columns = {{ColumnKey::Kind::Ngram, "x"}, {ColumnKey::Kind::Ngram, "y"}};
    model.standardizer = identity_standardizer(2);
    model.dr.variant = DrVariant::PCA;
    model.dr.f = 2;
    model.dr.f_r = 1;
    model.dr.loadings = Matrix(2, 1);
    model.dr.loadings(0, 0) = 1.0;
    model.threshold = threshold;
    return model;
}

}  // namespace

TEST_CASE("a single-config grid selects that config") {
    Rng rng(3);
    Matrix data(12, 4);
    for (double& v : data.data()) v = 2.0 * rng.next_unit() - 1.0;
    FeatureMatrix train = matrix_from({{0, 0, 0, 0}});
    train.values = data;
    train.row_ids.assign(12, "t");
    train.row_labels.assign(12, Label::Normal);
    FeatureMatrix validation = train;

    GridConfig config;
    config.variant = DrVariant::PCA;
    config.f_r = 2;
    DetectorModel model = grid_search(train, validation, DrVariant::PCA, {config}, 1);
    CHECK(model.chosen.f_r == 2);
    CHECK(model.dr.variant == DrVariant::PCA);
}

TEST_CASE("exact validation ties break by grid order") {
    // rows on the first axis: the second principal direction carries zero
    // signal, so f_R=1 and f_R=2 reconstruct identically
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 8; ++i)
        rows.push_back({static_cast<double>(i - 4) + (i >= 4 ? 1.0 : 0.0), 0.0, 0.0});
    FeatureMatrix train = matrix_from(rows);
    FeatureMatrix validation = train;

    GridConfig one, two;
    one.variant = two.variant = DrVariant::PCA;
    one.f_r = 1;
    two.f_r = 2;
    DetectorModel model = grid_search(train, validation, DrVariant::PCA, {one, two}, 0);
    CHECK(model.chosen.f_r == 1);

    DetectorModel reversed = grid_search(train, validation, DrVariant::PCA, {two, one}, 0);
    CHECK(reversed.chosen.f_r == 2);
}

TEST_CASE("the selected config attains the minimal validation error") {
    Rng rng(9);
    Matrix data(20, 6);
    for (double& v : data.data()) v = 2.0 * rng.next_unit() - 1.0;
    FeatureMatrix train = matrix_from({{0, 0, 0, 0, 0, 0}});
    train.values = data;
    train.row_ids.assign(20, "t");
    train.row_labels.assign(20, Label::Normal);
    Matrix vdata(10, 6);
    for (double& v : vdata.data()) v = 2.0 * rng.next_unit() - 1.0;
    FeatureMatrix validation = train;
    validation.values = vdata;
    validation.row_ids.assign(10, "v");
    validation.row_labels.assign(10, Label::Normal);

    std::vector<GridConfig> grid;
    for (std::size_t f_r : {1, 2, 3, 4}) {
        GridConfig c;
        c.variant = DrVariant::PCA;
        c.f_r = f_r;
        grid.push_back(c);
    }
    DetectorModel model = grid_search(train, validation, DrVariant::PCA, grid, 0);
    for (const auto& diag : model.diagnostics) {
        REQUIRE(diag.mean_validation_error.has_value());
        CHECK(model.threshold <= *diag.mean_validation_error + 1e-15);
    }
}

TEST_CASE("failing configs are recorded; an all-failed grid throws") {
    FeatureMatrix train = matrix_from({{1, 2}, {3, 4}, {0, 1}});
    FeatureMatrix validation = train;
    GridConfig too_big;
    too_big.variant = DrVariant::PCA;
    too_big.f_r = 16;  // f = 2
    CHECK_THROWS_AS(grid_search(train, validation, DrVariant::PCA, {too_big}, 0), NumericError);

    GridConfig good;
    good.variant = DrVariant::PCA;
    good.f_r = 1;
    DetectorModel model = grid_search(train, validation, DrVariant::PCA, {too_big, good}, 0);
    CHECK(model.chosen.f_r == 1);
    REQUIRE(model.diagnostics.size() == 2);
    CHECK_FALSE(model.diagnostics[0].error.empty());
}

TEST_CASE("compute_threshold is the mean of squared validation errors") {
    DetectorModel model = axis_detector(0.0);
    Matrix validation(3, 2);
    validation(0, 1) = 1.0;
    validation(1, 1) = 2.0;
    validation(2, 1) = 3.0;
    const double threshold = compute_threshold(model.standardizer, model.dr, validation);
    CHECK(threshold == 14.0 / 3.0);  // exact

    SUBCASE("all-zero errors give a zero threshold") {
        Matrix flat(2, 2);
        flat(0, 0) = 5.0;
        flat(1, 0) = -3.0;
        CHECK(compute_threshold(model.standardizer, model.dr, flat) == 0.0);
    }

    SUBCASE("threshold is permutation-invariant") {
        Matrix shuffled(3, 2);
        shuffled(0, 1) = 3.0;
        shuffled(1, 1) = 1.0;
        shuffled(2, 1) = 2.0;
        CHECK(compute_threshold(model.standardizer, model.dr, shuffled) == threshold);
    }

    CHECK_THROWS_AS(compute_threshold(model.standardizer, model.dr, Matrix(0, 2)),
                    ContractError);
}

TEST_CASE("classification honors the strict inequality of the threshold") {
    DetectorModel model = axis_detector(4.0);
    CHECK(classify(model, std::vector<double>{5.0, 0.0}).label == Label::Normal);   // error 0
    CHECK(classify(model, std::vector<double>{0.0, 2.0}).label == Label::Anomalous);  // error 4 = th
    CHECK(classify(model, std::vector<double>{0.0, 1.9}).label == Label::Normal);
    CHECK_THROWS_AS(classify(model, std::vector<double>{1.0}), ContractError);
}

TEST_CASE("low-error training rows of a near-rank-1 detector classify normal") {
    Rng rng(15);
    Matrix z(16, 1);
    for (double& v : z.data()) v = 2.0 * rng.next_unit() - 1.0;
    Matrix w(1, 3);
    w(0, 0) = 1.0;
    w(0, 1) = -2.0;
    w(0, 2) = 0.5;
    Matrix data = matmul(z, w);
    for (double& v : data.data()) v += 0.01 * (2.0 * rng.next_unit() - 1.0);
    FeatureMatrix train = matrix_from({{0, 0, 0}});
    train.values = data;
    train.row_ids.assign(16, "t");
    train.row_labels.assign(16, Label::Normal);

    GridConfig config;
    config.variant = DrVariant::PCA;
    config.f_r = 1;
    DetectorModel model = grid_search(train, train, DrVariant::PCA, {config}, 0);
    CHECK(model.threshold > 0.0);
    // the threshold is the mean residual, so sub-mean rows must be normal
    std::size_t best_row = 0;
    double best_error = 1e300;
    for (std::size_t i = 0; i < 16; ++i) {
        const double error = model.error_of(data.row(i));
        if (error < best_error) {
            best_error = error;
            best_row = i;
        }
    }
    CHECK(classify(model, data.row(best_row)).label == Label::Normal);
}

TEST_CASE("evaluate computes the confusion metrics with normal as positive") {
    std::map<std::string, Classification> verdicts;
    std::map<std::string, Label> truth;

    SUBCASE("all correct on a balanced set") {
        for (int i = 0; i < 10; ++i) {
            verdicts["n" + std::to_string(i)] = {Label::Normal, 0.1};
            truth["n" + std::to_string(i)] = Label::Normal;
            verdicts["a" + std::to_string(i)] = {Label::Anomalous, 9.0};
            truth["a" + std::to_string(i)] = Label::Anomalous;
        }
        MetricsReport report = evaluate(verdicts, truth);
        CHECK(report.accuracy == doctest::Approx(1.0));
        CHECK(report.recall == doctest::Approx(1.0));
        CHECK(report.precision == doctest::Approx(1.0));
        CHECK(report.f1 == doctest::Approx(1.0));
    }

    SUBCASE("hand-computed confusion counts") {
        int id = 0;
        auto add = [&](Label predicted, Label actual) {
            const std::string key = "log" + std::to_string(id++);
            verdicts[key] = {predicted, 0.0};
            truth[key] = actual;
        };
        for (int i = 0; i < 9; ++i) add(Label::Normal, Label::Normal);     // TP
        for (int i = 0; i < 1; ++i) add(Label::Anomalous, Label::Normal);  // FN
        for (int i = 0; i < 8; ++i) add(Label::Anomalous, Label::Anomalous);  // TN
        for (int i = 0; i < 2; ++i) add(Label::Normal, Label::Anomalous);     // FP
        MetricsReport report = evaluate(verdicts, truth);
        CHECK(report.tp == 9);
        CHECK(report.fn == 1);
        CHECK(report.tn == 8);
        CHECK(report.fp == 2);
        CHECK(std::fabs(report.accuracy - 0.85) <= 1e-12);
        CHECK(std::fabs(report.recall - 0.9) <= 1e-12);
        CHECK(std::fabs(report.precision - 9.0 / 11.0) <= 1e-12);
        CHECK(std::fabs(report.f1 - 6.0 / 7.0) <= 1e-12);
        // identity: F1 = 2RP/(R+P)
        CHECK(std::fabs(report.f1 - 2.0 * report.recall * report.precision /
                                        (report.recall + report.precision)) <= 1e-12);
    }

    SUBCASE("predict-all-normal on a balanced set") {
        for (int i = 0; i < 5; ++i) {
            verdicts["n" + std::to_string(i)] = {Label::Normal, 0.0};
            truth["n" + std::to_string(i)] = Label::Normal;
            verdicts["a" + std::to_string(i)] = {Label::Normal, 0.0};
            truth["a" + std::to_string(i)] = Label::Anomalous;
        }
        MetricsReport report = evaluate(verdicts, truth);
        CHECK(report.recall == doctest::Approx(1.0));
        CHECK(report.precision == doctest::Approx(0.5));
        CHECK(report.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    }

    SUBCASE("zero denominators report zero with a diagnostic") {
        verdicts["a"] = {Label::Anomalous, 1.0};
        truth["a"] = Label::Anomalous;
        MetricsReport report = evaluate(verdicts, truth);
        CHECK(report.recall == 0.0);
        CHECK(report.precision == 0.0);
        CHECK_FALSE(report.diagnostics.empty());
    }

    SUBCASE("unlabeled truth is rejected") {
        verdicts["u"] = {Label::Normal, 0.0};
        truth["u"] = Label::Unlabeled;
        CHECK_THROWS_AS(evaluate(verdicts, truth), ContractError);
    }
}

namespace {

LogTuple validation_logs_with_fitness() {
    // on the sequence net: {abc} -> 1.0, {abc, ac} -> 0.9, {ac} -> 0.8
    LogTuple tuple;
    EventLog perfect;
    perfect.log_id = "v0";
    perfect.label = Label::Normal;
    perfect.traces = {Trace({"a", "b", "c"})};
    EventLog mixed;
    mixed.log_id = "v1";
    mixed.label = Label::Normal;
    mixed.traces = {Trace({"a", "b", "c"}), Trace({"a", "c"})};
    EventLog poor;
    poor.log_id = "v2";
    poor.label = Label::Normal;
    poor.traces = {Trace({"a", "c"})};
    tuple.logs = {perfect, mixed, poor};
    return tuple;
}

}  // namespace

TEST_CASE("baseline threshold is the minimum validation fitness") {
    PetriNet net = seq_net();
    LogTuple validation = validation_logs_with_fitness();
    BaselineModel model = baseline_fit(validation, net, BaselineVariant::AB_CC_B);
    CHECK(model.threshold == doctest::Approx(0.8).epsilon(1e-12));

    SUBCASE("an all-fitting validation set pushes the threshold to one") {
        LogTuple perfect;
        perfect.logs = {validation.logs[0]};
        BaselineModel strict = baseline_fit(perfect, net, BaselineVariant::AB_CC_B);
        CHECK(strict.threshold == doctest::Approx(1.0));
        EventLog imperfect;
        imperfect.label = Label::Anomalous;
        imperfect.traces = {Trace({"a", "c"})};
        CHECK(baseline_classify(strict, net, imperfect).label == Label::Anomalous);
    }

    SUBCASE("alignment and token thresholds differ on the same logs") {
        BaselineModel token = baseline_fit(validation, net, BaselineVariant::TB_CC_B);
        CHECK(token.threshold == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
        CHECK(token.threshold != model.threshold);
    }

    SUBCASE("every validation log classifies normal under the fitted threshold") {
        for (const auto& log : validation.logs)
            CHECK(baseline_classify(model, net, log).label == Label::Normal);
    }

    CHECK_THROWS_AS(baseline_fit(LogTuple{}, net, BaselineVariant::AB_CC_B), ContractError);
}

TEST_CASE("baseline classification uses the at-least rule") {
    PetriNet net = seq_net();
    BaselineModel model;
    model.variant = BaselineVariant::AB_CC_B;
    model.threshold = 0.8;

    EventLog fitting;
    fitting.traces = {Trace({"a", "b", "c"})};
    CHECK(baseline_classify(model, net, fitting).label == Label::Normal);  // 1.0 >= 0.8

    EventLog at_threshold;
    at_threshold.traces = {Trace({"a", "c"})};  // fitness exactly 0.8
    CHECK(baseline_classify(model, net, at_threshold).label == Label::Normal);

    model.threshold = 0.81;
    CHECK(baseline_classify(model, net, at_threshold).label == Label::Anomalous);
}

TEST_CASE("detector models persist through json") {
    Rng rng(77);
    Matrix data(14, 4);
    for (double& v : data.data()) v = 2.0 * rng.next_unit() - 1.0;
    FeatureMatrix train = matrix_from({{0, 0, 0, 0}});
    train.values = data;
    train.row_ids.assign(14, "t");
    train.row_labels.assign(14, Label::Normal);
    GridConfig config;
    config.variant = DrVariant::PCA;
    config.f_r = 2;
    DetectorModel model = grid_search(train, train, DrVariant::PCA, {config}, 0);

    DetectorModel back = detector_from_json(detector_to_json(model));
    CHECK(back.threshold == model.threshold);
    for (std::size_t i = 0; i < 5; ++i) {
        const auto lhs = classify(model, data.row(i));
        const auto rhs = classify(back, data.row(i));
        CHECK(lhs.label == rhs.label);
        CHECK(lhs.error == doctest::Approx(rhs.error).epsilon(1e-12));
    }
}

namespace {

const char* kTinyNetPnml = R"(<pnml><net id="n">
  <place id="p0"><initialMarking><text>1</text></initialMarking></place>
  <place id="p1"/><place id="p2"/><place id="p3"/><place id="p4"/>
  <transition id="t1"><name><text>start</text></name></transition>
  <transition id="t2"><name><text>left</text></name></transition>
  <transition id="t3"><name><text>right</text></name></transition>
  <transition id="t4"><name><text>mid</text></name></transition>
  <transition id="t5"><name><text>finish</text></name></transition>
  <arc id="a1" source="p0" target="t1"/>
  <arc id="a2" source="t1" target="p1"/>
  <arc id="a3" source="p1" target="t2"/>
  <arc id="a4" source="p1" target="t3"/>
  <arc id="a5" source="t2" target="p2"/>
  <arc id="a6" source="t3" target="p2"/>
  <arc id="a7" source="p2" target="t4"/>
  <arc id="a8" source="t4" target="p3"/>
  <arc id="a9" source="p3" target="t5"/>
  <arc id="a10" source="t5" target="p4"/>
</net></pnml>)";

ExperimentConfig tiny_experiment(const std::string& technique) {
    ExperimentConfig config;
    ExperimentConfig::Synth synth;
    synth.net_pnml = kTinyNetPnml;
    synth.n_normal = 150;
    synth.n_anomalous = 150;
    synth.normal_config = {0.05, 0.05, 0.05, std::nullopt};
    synth.anomalous_config = {0.4, 0.4, 0.4, std::nullopt};
    config.synth = synth;
    config.extractor = ExtractorId::AB_CC;
    config.technique = technique;
    config.group_size = 5;
    config.seed = 21;
    config.repetitions = 2;
    GridConfig c;
    c.variant = DrVariant::PCA;
    c.f_r = 2;
    config.grid_override = {c};
    return config;
}

}  // namespace

TEST_CASE("run_experiment is deterministic and aggregates repetitions") {
    ExperimentConfig config = tiny_experiment("PCA");
    ExperimentReport first = run_experiment(config);
    ExperimentReport second = run_experiment(config);
    CHECK(experiment_report_to_json(first) == experiment_report_to_json(second));
    REQUIRE(first.repetitions.size() == 2);
    for (const auto& rep : first.repetitions) CHECK(rep.succeeded);
    CHECK(first.mean_f1 >= 0.0);
    CHECK(first.mean_f1 <= 1.0);

    SUBCASE("constant metrics have zero std") {
        ExperimentConfig single = config;
        single.repetitions = 1;
        ExperimentReport report = run_experiment(single);
        CHECK(report.std_f1 == 0.0);
        CHECK(report.std_accuracy == 0.0);
    }
}

TEST_CASE("run_experiment evaluates baselines on the same protocol") {
    ExperimentConfig config = tiny_experiment("AB_CC_B");
    ExperimentReport report = run_experiment(config);
    for (const auto& rep : report.repetitions) {
        CHECK(rep.succeeded);
        CHECK(rep.threshold >= 0.0);
        CHECK(rep.threshold <= 1.0);
    }
}

TEST_CASE("experiment config json round-trips") {
    ExperimentConfig config = tiny_experiment("KPCA");
    config.grid_override.clear();
    ExperimentConfig back = experiment_config_from_json(experiment_config_to_json(config));
    CHECK(back.technique == "KPCA");
    CHECK(back.synth.has_value());
    CHECK(back.synth->n_normal == 150);
    CHECK(back.seed == 21);
    CHECK(experiment_config_to_json(back) == experiment_config_to_json(config));
}

TEST_CASE("an experiment whose repetitions all fail reports the causes") {
    ExperimentConfig config = tiny_experiment("PCA");
    config.synth->n_normal = 3;  // too few traces to form a single group
    config.synth->n_anomalous = 3;
    try {
        run_experiment(config);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("repetition 0") != std::string::npos);
    }
}
