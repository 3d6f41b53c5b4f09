#include "pmad/explain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "pmad/error.hpp"
#include "pmad/rng.hpp"

namespace pmad {

std::string to_string(ShapMode mode) { return mode == ShapMode::Exact ? "exact" : "sampled"; }

ShapMode shap_mode_from_string(const std::string& text) {
    if (text == "exact") return ShapMode::Exact;
    if (text == "sampled") return ShapMode::Sampled;
    throw ArgumentError("unknown explanation mode '" + text + "'");
}

namespace {

constexpr std::size_t kExactLimit = 15;

}  // namespace

Attribution shapley_attribution(const DetectorModel& model, std::span<const double> raw_row,
                                ShapMode mode, std::size_t samples, std::uint64_t rng_seed,
                                const std::vector<double>* background_std) {
    const std::size_t f = model.schema.size();
    if (raw_row.size() != f)
        throw ContractError("shapley_attribution: row length does not match the schema");
    if (mode == ShapMode::Exact && f > kExactLimit)
        throw ArgumentError("shapley_attribution: exact mode supports at most " +
                            std::to_string(kExactLimit) +
                            " features (2^f coalitions); use sampled mode");
    if (mode == ShapMode::Sampled && samples < 1)
        throw ArgumentError("shapley_attribution: sampled mode needs samples >= 1");

    std::vector<double> row_std = model.standardizer.apply(raw_row);
    std::vector<double> background(f, 0.0);
    if (background_std) {
        if (background_std->size() != f)
            throw ContractError("shapley_attribution: background length mismatch");
        background = *background_std;
    }

    Attribution attribution;
    attribution.mode = mode;
    attribution.seed = rng_seed;
    attribution.contributions.assign(f, 0.0);
    attribution.base = model.dr.reconstruction_error(background);
    attribution.explained = model.dr.reconstruction_error(row_std);

    if (mode == ShapMode::Exact) {
        std::vector<double> hybrid(f);
        auto value_of_mask = [&](std::size_t mask) {
            for (std::size_t i = 0; i < f; ++i)
                hybrid[i] = (mask >> i) & 1u ? row_std[i] : background[i];
            return model.dr.reconstruction_error(hybrid);
        };
        const std::size_t n_masks = std::size_t{1} << f;
        std::vector<double> value(n_masks);
        for (std::size_t mask = 0; mask < n_masks; ++mask) value[mask] = value_of_mask(mask);

        // weight[s] = s! (f-1-s)! / f!
        std::vector<long double> weight(f);
        for (std::size_t s = 0; s < f; ++s) {
            long double w = 1.0L;
            for (std::size_t k = 1; k <= s; ++k) w *= k;
            for (std::size_t k = 1; k <= f - 1 - s; ++k) w *= k;
            for (std::size_t k = 1; k <= f; ++k) w /= k;
            weight[s] = w;
        }
        for (std::size_t i = 0; i < f; ++i) {
            const std::size_t bit = std::size_t{1} << i;
            long double acc = 0.0L;
            for (std::size_t mask = 0; mask < n_masks; ++mask) {
                if (mask & bit) continue;
                const std::size_t s = static_cast<std::size_t>(std::popcount(mask));
                acc += weight[s] * (value[mask | bit] - value[mask]);
            }
            attribution.contributions[i] = static_cast<double>(acc);
        }
        attribution.samples = n_masks;
        return attribution;
    }

    // Sampled: antithetic permutation pairs; the hybrid row is grown
    // feature by feature along each permutation.
    Rng rng(rng_seed);
    attribution.samples = samples;
    std::vector<std::size_t> perm;
    std::vector<double> hybrid(f);
    std::size_t processed = 0;
    auto process_permutation = [&](const std::vector<std::size_t>& order) {
        hybrid = background;
        double previous = attribution.base;
        for (std::size_t index : order) {
            hybrid[index] = row_std[index];
            const double current = model.dr.reconstruction_error(hybrid);
            attribution.contributions[index] += current - previous;
            previous = current;
        }
        ++processed;
    };
    while (processed < samples) {
        perm = rng.permutation(f);
        process_permutation(perm);
        if (processed < samples) {
            std::reverse(perm.begin(), perm.end());
            process_permutation(perm);
        }
    }
    for (double& c : attribution.contributions) c /= static_cast<double>(processed);
    return attribution;
}

ExplanationReport explain_testset(const DetectorModel& model, const FeatureMatrix& test,
                                  ShapMode mode, std::size_t samples, std::uint64_t rng_seed) {
    const std::size_t f = model.schema.size();
    ExplanationReport report;
    report.feature_keys.reserve(f);
    for (const auto& column : model.schema.columns) report.feature_keys.push_back(column.key);
    report.normal_mean_abs.assign(f, 0.0);
    report.anomalous_mean_abs.assign(f, 0.0);

    for (std::size_t i = 0; i < test.rows(); ++i) {
        const Label label = test.row_labels[i];
        if (label == Label::Unlabeled)
            throw ContractError("explain_testset: row '" + test.row_ids[i] + "' is unlabeled");
        Attribution attribution =
            shapley_attribution(model, test.values.row(i), mode, samples,
                                derive_seed(rng_seed, "row_" + std::to_string(i)));
        auto& bucket =
            label == Label::Normal ? report.normal_mean_abs : report.anomalous_mean_abs;
        for (std::size_t j = 0; j < f; ++j) bucket[j] += std::fabs(attribution.contributions[j]);
        if (label == Label::Normal)
            ++report.normal_rows;
        else
            ++report.anomalous_rows;
    }
    if (report.normal_rows)
        for (double& v : report.normal_mean_abs) v /= static_cast<double>(report.normal_rows);
    if (report.anomalous_rows)
        for (double& v : report.anomalous_mean_abs) v /= static_cast<double>(report.anomalous_rows);
    return report;
}

std::string explanation_to_json(const ExplanationReport& report) {
    nlohmann::json j;
    j["normal_rows"] = report.normal_rows;
    j["anomalous_rows"] = report.anomalous_rows;
    nlohmann::json features = nlohmann::json::array();
    for (std::size_t i = 0; i < report.feature_keys.size(); ++i) {
        features.push_back({{"feature", report.feature_keys[i]},
                            {"normal_mean_abs", report.normal_mean_abs[i]},
                            {"anomalous_mean_abs", report.anomalous_mean_abs[i]}});
    }
    j["features"] = std::move(features);
    return j.dump(2);
}

std::string explanation_to_csv(const ExplanationReport& report) {
    std::ostringstream out;
    out << "feature,normal_mean_abs,anomalous_mean_abs\n";
    for (std::size_t i = 0; i < report.feature_keys.size(); ++i) {
        std::string key = report.feature_keys[i];
        if (key.find_first_of(",\"\n") != std::string::npos) {
            std::string quoted = "\"";
            for (char c : key) {
                if (c == '"') quoted += "\"\"";
                else quoted.push_back(c);
            }
            quoted += "\"";
            key = quoted;
        }
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g", report.normal_mean_abs[i],
                      report.anomalous_mean_abs[i]);
        out << key << "," << buf << "\n";
    }
    return out.str();
}

}  // namespace pmad
