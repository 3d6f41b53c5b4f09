#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pmad/features.hpp"
#include "pmad/pipeline.hpp"

namespace pmad {

enum class ShapMode { Exact, Sampled };
std::string to_string(ShapMode mode);
ShapMode shap_mode_from_string(const std::string& text);

// Additive decomposition of one row's reconstruction error. base + the sum
// of contributions equals the explained value (exactly for both modes:
// permutation marginals telescope).
struct Attribution {
    double base = 0.0;                   // value of the empty coalition
    std::vector<double> contributions;   // per-feature Shapley values
    double explained = 0.0;              // reconstruction error of the row
    ShapMode mode = ShapMode::Exact;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
};

// Shapley values of the coalition game v(S) = reconstruction error of the
// hybrid row taking coalition features from the row and the rest from the
// background (standardized space; default background is the zero vector,
// i.e. the training column means). Exact mode enumerates all 2^f
// coalitions and requires f <= 15; sampled mode averages marginal
// contributions over antithetic permutation pairs.
Attribution shapley_attribution(const DetectorModel& model, std::span<const double> raw_row,
                                ShapMode mode, std::size_t samples = 2000,
                                std::uint64_t rng_seed = 0,
                                const std::vector<double>* background_std = nullptr);

// Per-feature mean |contribution| grouped by true row label.
struct ExplanationReport {
    std::vector<std::string> feature_keys;
    std::vector<double> normal_mean_abs;
    std::vector<double> anomalous_mean_abs;
    std::size_t normal_rows = 0;
    std::size_t anomalous_rows = 0;
};

ExplanationReport explain_testset(const DetectorModel& model, const FeatureMatrix& test,
                                  ShapMode mode, std::size_t samples = 2000,
                                  std::uint64_t rng_seed = 0);

std::string explanation_to_json(const ExplanationReport& report);
std::string explanation_to_csv(const ExplanationReport& report);

}  // namespace pmad
