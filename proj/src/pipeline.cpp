#include "pmad/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "pmad/conformance_align.hpp"
#include "pmad/conformance_token.hpp"
#include "pmad/error.hpp"
#include "pmad/rng.hpp"

namespace pmad {

namespace {

template <class T>
bool in_set(const T& value, std::initializer_list<T> allowed) {
    for (const auto& v : allowed)
        if (v == value) return true;
    return false;
}

}  // namespace

void GridConfig::validate(bool allow_override) const {
    if (allow_override) return;
    if (!in_set(f_r, {std::size_t{2}, std::size_t{4}, std::size_t{8}, std::size_t{16}}))
        throw ArgumentError("grid config: f_R " + std::to_string(f_r) +
                            " outside the canonical set {2,4,8,16}");
    switch (variant) {
        case DrVariant::PCA:
            break;
        case DrVariant::SPCA:
            if (!in_set(ridge, {0.01, 0.1, 0.25, 0.5, 0.75, 1.0}))
                throw ArgumentError("grid config: SPCA regularization outside the canonical set");
            if (!in_set(sparsity, {0.1, 0.5, 1.0, 2.0, 3.0}))
                throw ArgumentError("grid config: SPCA sparsity outside the canonical set");
            break;
        case DrVariant::KPCA:
            if (!in_set(ridge, {0.01, 0.1, 0.25, 0.5, 0.75, 1.0}))
                throw ArgumentError("grid config: KPCA regularization outside the canonical set");
            if (!in_set(kernel.coefficient, {0.01, 0.05, 0.1}))
                throw ArgumentError("grid config: kernel coefficient outside the canonical set");
            if (kernel.kind == KernelKind::Poly && !in_set(kernel.degree, {3, 4, 5, 6}))
                throw ArgumentError("grid config: polynomial degree outside the canonical set");
            break;
        case DrVariant::AE:
            if (!in_set(hidden, {std::size_t{32}, std::size_t{64}, std::size_t{128},
                                 std::size_t{256}}))
                throw ArgumentError("grid config: hidden width outside the canonical set");
            if (optimizer != "adam" && optimizer != "rmsprop" && optimizer != "sgd")
                throw ArgumentError("grid config: optimizer outside the canonical set");
            if (!in_set(batch, {std::size_t{8}, std::size_t{16}, std::size_t{32}, std::size_t{64}}))
                throw ArgumentError("grid config: batch size outside the canonical set");
            if (!in_set(epochs, {std::size_t{100}, std::size_t{250}, std::size_t{500}}))
                throw ArgumentError("grid config: epochs outside the canonical set");
            if (activation != "relu")
                throw ArgumentError("grid config: activation outside the canonical set");
            break;
    }
}

std::string GridConfig::describe() const {
    std::ostringstream out;
    out << to_string(variant) << " f_R=" << f_r;
    switch (variant) {
        case DrVariant::PCA:
            break;
        case DrVariant::SPCA:
            out << " ridge=" << ridge << " sparsity=" << sparsity;
            break;
        case DrVariant::KPCA:
            out << " ridge=" << ridge << " kernel=" << to_string(kernel.kind)
                << " coefficient=" << kernel.coefficient;
            if (kernel.kind == KernelKind::Poly) out << " degree=" << kernel.degree;
            break;
        case DrVariant::AE:
            out << " hidden=" << hidden << " optimizer=" << optimizer << " batch=" << batch
                << " epochs=" << epochs << " activation=" << activation;
            break;
    }
    return out.str();
}

std::vector<GridConfig> default_grid(DrVariant variant, std::size_t f, bool exhaustive) {
    const std::vector<std::size_t> f_r_values = {2, 4, 8, 16};
    const std::vector<double> regularizations = {0.01, 0.1, 0.25, 0.5, 0.75, 1.0};
    std::vector<GridConfig> grid;
    for (std::size_t f_r : f_r_values) {
        if (f_r >= f) continue;
        GridConfig base;
        base.variant = variant;
        base.f_r = f_r;
        switch (variant) {
            case DrVariant::PCA:
                grid.push_back(base);
                break;
            case DrVariant::SPCA:
                for (double ridge : regularizations)
                    for (double sparsity : {0.1, 0.5, 1.0, 2.0, 3.0}) {
                        GridConfig c = base;
                        c.ridge = ridge;
                        c.sparsity = sparsity;
                        grid.push_back(c);
                    }
                break;
            case DrVariant::KPCA:
                for (double ridge : regularizations)
                    for (KernelKind kind : {KernelKind::Poly, KernelKind::Rbf, KernelKind::Sigmoid})
                        for (double coefficient : {0.01, 0.05, 0.1}) {
                            if (kind == KernelKind::Poly) {
                                for (int degree : {3, 4, 5, 6}) {
                                    GridConfig c = base;
                                    c.ridge = ridge;
                                    c.kernel = {kind, coefficient, degree};
                                    grid.push_back(c);
                                }
                            } else {
                                GridConfig c = base;
                                c.ridge = ridge;
                                c.kernel = {kind, coefficient, 3};
                                grid.push_back(c);
                            }
                        }
                break;
            case DrVariant::AE:
                if (exhaustive) {
                    for (std::size_t hidden : {32, 64, 128, 256})
                        for (const char* optimizer : {"adam", "rmsprop", "sgd"})
                            for (std::size_t batch : {8, 16, 32, 64})
                                for (std::size_t epochs : {100, 250, 500}) {
                                    GridConfig c = base;
                                    c.hidden = hidden;
                                    c.optimizer = optimizer;
                                    c.batch = batch;
                                    c.epochs = epochs;
                                    grid.push_back(c);
                                }
                } else {
                    grid.push_back(base);  // hidden 64, adam, batch 16, epochs 250
                }
                break;
        }
    }
    return grid;
}

namespace {

DRModel fit_config(const Matrix& train_std, const GridConfig& config, std::uint64_t seed) {
    switch (config.variant) {
        case DrVariant::PCA:
            return pca_fit(train_std, config.f_r);
        case DrVariant::SPCA:
            return spca_fit(train_std, config.f_r, config.ridge, config.sparsity);
        case DrVariant::KPCA:
            return kpca_fit(train_std, config.f_r, config.kernel, config.ridge);
        case DrVariant::AE:
            return ae_fit(train_std, config.f_r, config.hidden, config.optimizer, config.batch,
                          config.epochs, config.activation, seed);
    }
    throw ArgumentError("fit_config: unknown variant");
}

}  // namespace

double DetectorModel::error_of(std::span<const double> raw_row) const {
    std::vector<double> standardized = standardizer.apply(raw_row);
    return dr.reconstruction_error(standardized);
}

double compute_threshold(const Standardizer& standardizer, const DRModel& dr,
                         const Matrix& validation_raw) {
    if (validation_raw.rows() < 1) throw ContractError("compute_threshold: empty validation set");
    double sum = 0.0;
    for (std::size_t i = 0; i < validation_raw.rows(); ++i) {
        std::vector<double> standardized = standardizer.apply(validation_raw.row(i));
        sum += dr.reconstruction_error(standardized);
    }
    return sum / static_cast<double>(validation_raw.rows());
}

DetectorModel grid_search(const FeatureMatrix& train, const FeatureMatrix& validation,
                          DrVariant variant, const std::vector<GridConfig>& grid,
                          std::uint64_t rng_seed) {
    if (grid.empty()) throw ContractError("grid_search: empty grid");
    if (!(train.schema.columns == validation.schema.columns))
        throw ContractError("grid_search: train and validation schemas differ");

    DetectorModel model;
    model.schema = train.schema;
    model.standardizer = standardize_fit(train.values);
    Matrix train_std = model.standardizer.apply(train.values);

    std::optional<std::size_t> best;
    std::optional<double> best_error;
    std::optional<DRModel> best_model;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const GridConfig& config = grid[i];
        ConfigDiagnostic diag;
        diag.config = config;
        if (config.variant != variant) {
            diag.error = "config variant differs from the requested variant";
            model.diagnostics.push_back(std::move(diag));
            continue;
        }
        try {
            DRModel candidate =
                fit_config(train_std, config, derive_seed(rng_seed, "config_" + std::to_string(i)));
            const double error = compute_threshold(model.standardizer, candidate, validation.values);
            diag.mean_validation_error = error;
            if (!best_error || error < *best_error) {
                best_error = error;
                best = i;
                best_model = std::move(candidate);
            }
        } catch (const Error& e) {
            diag.error = e.what();
        }
        model.diagnostics.push_back(std::move(diag));
    }
    if (!best) {
        std::string causes;
        for (const auto& diag : model.diagnostics)
            if (!diag.error.empty()) causes += "\n  " + diag.config.describe() + ": " + diag.error;
        throw NumericError("grid_search: every configuration failed" + causes);
    }
    model.chosen = grid[*best];
    model.dr = std::move(*best_model);
    model.threshold = *best_error;
    return model;
}

Classification classify(const DetectorModel& model, std::span<const double> raw_row) {
    if (raw_row.size() != model.schema.size())
        throw ContractError("classify: row length does not match the schema");
    const double error = model.error_of(raw_row);
    return {error < model.threshold ? Label::Normal : Label::Anomalous, error};
}

MetricsReport evaluate(const std::map<std::string, Classification>& verdicts,
                       const std::map<std::string, Label>& truth) {
    if (verdicts.size() != truth.size())
        throw ContractError("evaluate: verdict and label key sets differ in size");
    MetricsReport report;
    for (const auto& [log_id, classification] : verdicts) {
        auto it = truth.find(log_id);
        if (it == truth.end())
            throw ContractError("evaluate: no label for log '" + log_id + "'");
        const Label actual = it->second;
        if (actual == Label::Unlabeled)
            throw ContractError("evaluate: log '" + log_id + "' is unlabeled");
        const Label predicted = classification.label;
        if (actual == Label::Normal) {
            if (predicted == Label::Normal) ++report.tp;
            else ++report.fn;
        } else {
            if (predicted == Label::Normal) ++report.fp;
            else ++report.tn;
        }
        report.verdicts[log_id] = {predicted, classification.error};
    }
    const auto ratio = [&report](double numerator, double denominator, const char* name) {
        if (denominator == 0.0) {
            report.diagnostics.push_back(std::string(name) + " has zero denominator, reported as 0");
            return 0.0;
        }
        return numerator / denominator;
    };
    const double tp = static_cast<double>(report.tp);
    const double tn = static_cast<double>(report.tn);
    const double fp = static_cast<double>(report.fp);
    const double fn = static_cast<double>(report.fn);
    report.accuracy = ratio(tp + tn, tp + tn + fp + fn, "accuracy");
    report.recall = ratio(tp, tp + fn, "recall");
    report.precision = ratio(tp, tp + fp, "precision");
    report.f1 = ratio(2.0 * report.recall * report.precision, report.recall + report.precision,
                      "f1");
    return report;
}

std::string to_string(BaselineVariant variant) {
    return variant == BaselineVariant::AB_CC_B ? "AB_CC_B" : "TB_CC_B";
}

BaselineVariant baseline_from_string(const std::string& text) {
    if (text == "AB_CC_B") return BaselineVariant::AB_CC_B;
    if (text == "TB_CC_B") return BaselineVariant::TB_CC_B;
    throw ArgumentError("unknown baseline variant '" + text + "'");
}

namespace {

double baseline_fitness(BaselineVariant variant, const PetriNet& net, const EventLog& log,
                        const MoveCost& cost) {
    if (variant == BaselineVariant::AB_CC_B) return alignment_fitness_log(net, log, cost);
    return replay_log(net, log).fitness;
}

}  // namespace

BaselineModel baseline_fit(const LogTuple& validation, const PetriNet& net,
                           BaselineVariant variant, const MoveCost& cost) {
    if (validation.empty()) throw ContractError("baseline_fit: empty validation set");
    for (const auto& log : validation.logs)
        if (log.label != Label::Normal)
            throw ContractError("baseline_fit: validation log '" + log.log_id + "' is not normal");
    BaselineModel model;
    model.variant = variant;
    double minimum = 1.0;
    bool first = true;
    for (const auto& log : validation.logs) {
        const double fitness = baseline_fitness(variant, net, log, cost);
        if (first || fitness < minimum) minimum = fitness;
        first = false;
    }
    model.threshold = minimum;
    return model;
}

Classification baseline_classify(const BaselineModel& model, const PetriNet& net,
                                 const EventLog& log, const MoveCost& cost) {
    const double fitness = baseline_fitness(model.variant, net, log, cost);
    return {fitness >= model.threshold ? Label::Normal : Label::Anomalous, fitness};
}

namespace {

nlohmann::json grid_config_to_json(const GridConfig& config) {
    nlohmann::json j;
    j["variant"] = to_string(config.variant);
    j["f_r"] = config.f_r;
    switch (config.variant) {
        case DrVariant::PCA:
            break;
        case DrVariant::SPCA:
            j["ridge"] = config.ridge;
            j["sparsity"] = config.sparsity;
            break;
        case DrVariant::KPCA:
            j["ridge"] = config.ridge;
            j["kernel"] = to_string(config.kernel.kind);
            j["kernel_coefficient"] = config.kernel.coefficient;
            j["degree"] = config.kernel.degree;
            break;
        case DrVariant::AE:
            j["hidden"] = config.hidden;
            j["optimizer"] = config.optimizer;
            j["batch"] = config.batch;
            j["epochs"] = config.epochs;
            j["activation"] = config.activation;
            break;
    }
    return j;
}

GridConfig grid_config_from_json(const nlohmann::json& j) {
    GridConfig config;
    config.variant = dr_variant_from_string(j.at("variant").get<std::string>());
    config.f_r = j.at("f_r").get<std::size_t>();
    config.ridge = j.value("ridge", config.ridge);
    config.sparsity = j.value("sparsity", config.sparsity);
    if (j.contains("kernel")) config.kernel.kind = kernel_from_string(j["kernel"].get<std::string>());
    config.kernel.coefficient = j.value("kernel_coefficient", config.kernel.coefficient);
    config.kernel.degree = j.value("degree", config.kernel.degree);
    config.hidden = j.value("hidden", config.hidden);
    config.optimizer = j.value("optimizer", config.optimizer);
    config.batch = j.value("batch", config.batch);
    config.epochs = j.value("epochs", config.epochs);
    config.activation = j.value("activation", config.activation);
    return config;
}

}  // namespace

std::string detector_to_json(const DetectorModel& model) {
    nlohmann::json j;
    j["schema"] = nlohmann::json::parse(schema_to_json(model.schema));
    j["standardizer"] = nlohmann::json::parse(standardizer_to_json(model.standardizer));
    j["dr"] = nlohmann::json::parse(dr_model_to_json(model.dr));
    j["threshold"] = model.threshold;
    j["chosen"] = grid_config_to_json(model.chosen);
    j["reduced_grid"] = model.reduced_grid;
    nlohmann::json diags = nlohmann::json::array();
    for (const auto& diag : model.diagnostics) {
        nlohmann::json d;
        d["config"] = grid_config_to_json(diag.config);
        if (diag.mean_validation_error) d["mean_validation_error"] = *diag.mean_validation_error;
        if (!diag.error.empty()) d["error"] = diag.error;
        diags.push_back(std::move(d));
    }
    j["validation_diagnostics"] = std::move(diags);
    return j.dump(2);
}

DetectorModel detector_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("detector json: ") + e.what());
    }
    DetectorModel model;
    try {
        model.schema = schema_from_json(j.at("schema").dump());
        model.standardizer = standardizer_from_json(j.at("standardizer").dump());
        model.dr = dr_model_from_json(j.at("dr").dump());
        model.threshold = j.at("threshold").get<double>();
        model.chosen = grid_config_from_json(j.at("chosen"));
        model.reduced_grid = j.value("reduced_grid", false);
        if (j.contains("validation_diagnostics")) {
            for (const auto& d : j["validation_diagnostics"]) {
                ConfigDiagnostic diag;
                diag.config = grid_config_from_json(d.at("config"));
                if (d.contains("mean_validation_error"))
                    diag.mean_validation_error = d["mean_validation_error"].get<double>();
                diag.error = d.value("error", "");
                model.diagnostics.push_back(std::move(diag));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("detector json: ") + e.what());
    }
    if (model.standardizer.dim() != model.schema.size() || model.dr.f != model.schema.size())
        throw FormatError("detector json: schema, standardizer and model dimensions inconsistent");
    return model;
}

}  // namespace pmad
