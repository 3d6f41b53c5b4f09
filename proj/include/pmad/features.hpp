#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pmad/conformance_align.hpp"
#include "pmad/eventlog.hpp"
#include "pmad/linalg.hpp"
#include "pmad/movecost.hpp"
#include "pmad/petrinet.hpp"

namespace pmad {

enum class ExtractorId { AB_CC, TB_CC, NG, DF };
std::string to_string(ExtractorId id);
ExtractorId extractor_from_string(const std::string& text);

struct ColumnKey {
    enum class Kind {
        Fitness,
        PerActivityCost,
        TokenStat,
        ActivityCount,
        Ngram,
        DfPair,
        Overflow
    };
    Kind kind;
    std::string key;  // activity name, stat name, or separator-joined tuple

    bool operator==(const ColumnKey&) const = default;
};
std::string to_string(ColumnKey::Kind kind);

// Column contract frozen at training time so train/validation/test share f.
// AB_CC: one cost column per training activity, a fitness column, and an
// overflow column collecting costs of unseen-at-test activities.
// TB_CC: fitness, missing, remaining, one fired-count column per training
// activity, overflow. NG/DF: one count column per training gram/pair.
struct FeatureSchema {
    ExtractorId extractor = ExtractorId::AB_CC;
    std::vector<ColumnKey> columns;
    std::size_t ngram_n = 2;

    std::size_t size() const { return columns.size(); }
    // Index of the variable-part column for a key, -1 when absent.
    long column_of(ColumnKey::Kind kind, const std::string& key) const;
};

struct FeatureMatrix {
    FeatureSchema schema;
    std::vector<std::string> row_ids;
    std::vector<Label> row_labels;
    Matrix values;  // n x f

    std::size_t rows() const { return values.rows(); }
};

// Enumerates columns from the training logs (united with the net's visible
// labels for the conformance extractors), sorted lexicographically.
FeatureSchema fit_schema(const LogTuple& train, const PetriNet* net, ExtractorId extractor,
                         std::size_t ngram_n = 2);

// Memo for per-trace alignment results, shared across extraction calls of
// one experiment repetition. Keyed by the activity sequence.
class ConformanceCache {
public:
    struct TraceConformance {
        double optimal_cost = 0.0;
        double fitness = 0.0;
        std::map<std::string, double> per_activity;  // includes off-schema activities
    };
    const TraceConformance& align(const PetriNet& net, const Trace& trace, const MoveCost& cost);
    void adopt(const std::vector<std::string>& activities, const TraceConformance& value);

private:
    std::map<std::vector<std::string>, TraceConformance> memo_;
    std::optional<double> min_model_cost_;
};

FeatureMatrix extract_abcc(const LogTuple& logs, const PetriNet& net, const MoveCost& cost,
                           const FeatureSchema& schema, ConformanceCache* cache = nullptr,
                           std::size_t jobs = 1);
FeatureMatrix extract_tbcc(const LogTuple& logs, const PetriNet& net,
                           const FeatureSchema& schema);
FeatureMatrix extract_ngrams(const LogTuple& logs, const FeatureSchema& schema);
FeatureMatrix extract_df(const LogTuple& logs, const FeatureSchema& schema);

// Dispatch on schema.extractor. net required for AB_CC/TB_CC.
FeatureMatrix extract(const LogTuple& logs, const PetriNet* net, const MoveCost& cost,
                      const FeatureSchema& schema, ConformanceCache* cache = nullptr,
                      std::size_t jobs = 1);

// CSV: header log_id,label,<stringified column keys>; one row per log.
std::string write_matrix_csv(const FeatureMatrix& matrix);
FeatureMatrix parse_matrix_csv(const std::string& text, const FeatureSchema& schema);

std::string schema_to_json(const FeatureSchema& schema);
FeatureSchema schema_from_json(const std::string& text);

}  // namespace pmad
