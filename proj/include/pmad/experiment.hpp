#pragma once

#include <optional>
#include <string>

#include "pmad/pipeline.hpp"
#include "pmad/synth.hpp"

namespace pmad {

// One technique evaluated over seeded repetitions: either a framework
// technique (extractor x DR variant) or a fitness-threshold baseline.
struct ExperimentConfig {
    // dataset: either a synthetic corpus spec or trace-pool files
    struct Synth {
        std::string net_path;  // may be empty when net_pnml is inline
        std::string net_pnml;
        std::size_t n_normal = 1000;
        std::size_t n_anomalous = 1000;
        InjectionConfig normal_config;     // default 5% per type
        InjectionConfig anomalous_config;  // default 25% per type
        std::size_t max_steps = 1000;
    };
    struct Paths {
        std::string normal;     // file with normal traces (xes/csv)
        std::string anomalous;  // file with anomalous traces
    };
    std::optional<Synth> synth;
    std::optional<Paths> paths;

    std::string net_path;  // reference net for CC extractors and baselines
    std::string net_pnml;  // inline alternative

    ExtractorId extractor = ExtractorId::AB_CC;
    std::size_t ngram_n = 2;
    std::string technique = "PCA";  // PCA|SPCA|KPCA|AE|AB_CC_B|TB_CC_B
    bool exhaustive_grid = false;
    std::vector<GridConfig> grid_override;
    MoveCost cost;

    std::size_t group_size = 5;
    double test_fraction = 0.25;
    double val_fraction = 0.20;
    std::uint64_t seed = 0;
    std::size_t repetitions = 5;
    std::size_t jobs = 1;
};

ExperimentConfig experiment_config_from_json(const std::string& text);
std::string experiment_config_to_json(const ExperimentConfig& config);

struct RepetitionResult {
    std::size_t index = 0;
    bool succeeded = false;
    std::string error;
    MetricsReport metrics;
    std::string chosen_config;
    double threshold = 0.0;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<RepetitionResult> repetitions;
    // population mean / std over the successful repetitions
    double mean_accuracy = 0, std_accuracy = 0;
    double mean_recall = 0, std_recall = 0;
    double mean_precision = 0, std_precision = 0;
    double mean_f1 = 0, std_f1 = 0;
    bool reduced_grid = false;
};

// The full protocol: per repetition, reseeded assembly and split, schema
// fit on train, extraction, grid search (or baseline fit), test
// classification and metrics. At least one repetition must succeed.
ExperimentReport run_experiment(const ExperimentConfig& config);

std::string experiment_report_to_json(const ExperimentReport& report);
// Metric table: one row per repetition plus the mean/std summary.
std::string experiment_report_to_csv(const ExperimentReport& report);

}  // namespace pmad
