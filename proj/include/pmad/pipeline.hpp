#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pmad/dimred.hpp"
#include "pmad/eventlog.hpp"
#include "pmad/features.hpp"
#include "pmad/movecost.hpp"
#include "pmad/petrinet.hpp"

namespace pmad {

// One parameter assignment from the per-technique search grids. Values
// outside the canonical sets are rejected unless allow_override is set.
struct GridConfig {
    DrVariant variant = DrVariant::PCA;
    std::size_t f_r = 2;
    // SPCA / KPCA
    double ridge = 0.01;
    double sparsity = 0.1;
    KernelSpec kernel;
    // AE
    std::size_t hidden = 64;
    std::string optimizer = "adam";
    std::size_t batch = 16;
    std::size_t epochs = 250;
    std::string activation = "relu";

    void validate(bool allow_override = false) const;
    std::string describe() const;
};

// Full canonical grid for a variant, filtered to f_R < f. The AE grid is
// the reduced default (hidden 64, adam, batch 16, epochs 250) unless
// exhaustive is set, which expands to the full 576-config grid.
std::vector<GridConfig> default_grid(DrVariant variant, std::size_t f, bool exhaustive = false);

struct ConfigDiagnostic {
    GridConfig config;
    std::optional<double> mean_validation_error;  // empty when the fit failed
    std::string error;
};

// The deployable classifier: schema + standardizer + fitted DR model +
// reconstruction-error threshold.
struct DetectorModel {
    FeatureSchema schema;
    Standardizer standardizer;
    DRModel dr;
    double threshold = 0.0;
    GridConfig chosen;
    std::vector<ConfigDiagnostic> diagnostics;
    bool reduced_grid = false;

    // Squared reconstruction error of a raw schema row.
    double error_of(std::span<const double> raw_row) const;
};

// Fits every grid config on the training matrix, scores it by mean squared
// reconstruction error over the validation rows, keeps the argmin (ties:
// first in grid order) and computes the threshold on validation.
DetectorModel grid_search(const FeatureMatrix& train, const FeatureMatrix& validation,
                          DrVariant variant, const std::vector<GridConfig>& grid,
                          std::uint64_t rng_seed);

// Mean over validation rows of the squared reconstruction error.
double compute_threshold(const Standardizer& standardizer, const DRModel& dr,
                         const Matrix& validation_raw);

struct Classification {
    Label label;
    double error;
};

// normal iff error < threshold; the boundary itself is anomalous.
Classification classify(const DetectorModel& model, std::span<const double> raw_row);

struct MetricsReport {
    long long tp = 0, tn = 0, fp = 0, fn = 0;
    double accuracy = 0.0, recall = 0.0, precision = 0.0, f1 = 0.0;
    struct Verdict {
        Label predicted;
        double value;  // reconstruction error or fitness
    };
    std::map<std::string, Verdict> verdicts;
    std::vector<std::string> diagnostics;
};

// Confusion counts with NORMAL as the positive class. Ratios with a zero
// denominator are reported as 0 with a diagnostic.
MetricsReport evaluate(const std::map<std::string, Classification>& verdicts,
                       const std::map<std::string, Label>& truth);

enum class BaselineVariant { AB_CC_B, TB_CC_B };
std::string to_string(BaselineVariant variant);
BaselineVariant baseline_from_string(const std::string& text);

struct BaselineModel {
    BaselineVariant variant = BaselineVariant::AB_CC_B;
    double threshold = 1.0;  // minimum validation fitness
};

// Threshold = minimum per-log fitness over the all-normal validation set
// (alignment-based for AB_CC_B, token-based for TB_CC_B).
BaselineModel baseline_fit(const LogTuple& validation, const PetriNet& net,
                           BaselineVariant variant, const MoveCost& cost = {});

// normal iff fitness >= threshold, so the least fitting validation log
// still classifies normal.
Classification baseline_classify(const BaselineModel& model, const PetriNet& net,
                                 const EventLog& log, const MoveCost& cost = {});

std::string detector_to_json(const DetectorModel& model);
DetectorModel detector_from_json(const std::string& text);

}  // namespace pmad
