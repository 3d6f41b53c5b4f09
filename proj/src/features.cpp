#include "pmad/features.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "pmad/conformance_token.hpp"
#include "pmad/error.hpp"

namespace pmad {

namespace {

constexpr const char* kTupleSeparator = "|";

std::string join_tuple(const std::vector<std::string>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += kTupleSeparator;
        out += parts[i];
    }
    return out;
}

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string to_string(ExtractorId id) {
    switch (id) {
        case ExtractorId::AB_CC: return "AB_CC";
        case ExtractorId::TB_CC: return "TB_CC";
        case ExtractorId::NG: return "NG";
        case ExtractorId::DF: return "DF";
    }
    return "AB_CC";
}

ExtractorId extractor_from_string(const std::string& text) {
    if (text == "AB_CC") return ExtractorId::AB_CC;
    if (text == "TB_CC") return ExtractorId::TB_CC;
    if (text == "NG") return ExtractorId::NG;
    if (text == "DF") return ExtractorId::DF;
    throw ArgumentError("unknown extractor id '" + text + "'");
}

std::string to_string(ColumnKey::Kind kind) {
    switch (kind) {
        case ColumnKey::Kind::Fitness: return "fitness";
        case ColumnKey::Kind::PerActivityCost: return "per_activity_cost";
        case ColumnKey::Kind::TokenStat: return "token_stat";
        case ColumnKey::Kind::ActivityCount: return "activity_count";
        case ColumnKey::Kind::Ngram: return "ngram";
        case ColumnKey::Kind::DfPair: return "df_pair";
        case ColumnKey::Kind::Overflow: return "other_overflow";
    }
    return "fitness";
}

namespace {

ColumnKey::Kind column_kind_from_string(const std::string& text) {
    if (text == "fitness") return ColumnKey::Kind::Fitness;
    if (text == "per_activity_cost") return ColumnKey::Kind::PerActivityCost;
    if (text == "token_stat") return ColumnKey::Kind::TokenStat;
    if (text == "activity_count") return ColumnKey::Kind::ActivityCount;
    if (text == "ngram") return ColumnKey::Kind::Ngram;
    if (text == "df_pair") return ColumnKey::Kind::DfPair;
    if (text == "other_overflow") return ColumnKey::Kind::Overflow;
    throw FormatError("unknown column kind '" + text + "'");
}

}  // namespace

long FeatureSchema::column_of(ColumnKey::Kind kind, const std::string& key) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i].kind == kind && columns[i].key == key) return static_cast<long>(i);
    return -1;
}

FeatureSchema fit_schema(const LogTuple& train, const PetriNet* net, ExtractorId extractor,
                         std::size_t ngram_n) {
    FeatureSchema schema;
    schema.extractor = extractor;
    schema.ngram_n = ngram_n;

    const bool needs_net = extractor == ExtractorId::AB_CC || extractor == ExtractorId::TB_CC;
    if (needs_net && !net)
        throw ArgumentError("fit_schema: a reference net is required for " + to_string(extractor));
    if (extractor == ExtractorId::NG && ngram_n < 1)
        throw ArgumentError("fit_schema: ngram_n must be >= 1");

    if (needs_net) {
        std::set<std::string> activities;
        for (const std::string& label : net->visible_labels()) activities.insert(label);
        for (const auto& log : train.logs)
            for (const auto& trace : log.traces)
                for (const auto& activity : trace.activities()) activities.insert(activity);
        if (extractor == ExtractorId::AB_CC) {
            for (const auto& activity : activities)
                schema.columns.push_back({ColumnKey::Kind::PerActivityCost, activity});
            schema.columns.push_back({ColumnKey::Kind::Fitness, "fitness"});
            schema.columns.push_back({ColumnKey::Kind::Overflow, "overflow"});
        } else {
            schema.columns.push_back({ColumnKey::Kind::Fitness, "fitness"});
            schema.columns.push_back({ColumnKey::Kind::TokenStat, "missing"});
            schema.columns.push_back({ColumnKey::Kind::TokenStat, "remaining"});
            for (const auto& activity : activities)
                schema.columns.push_back({ColumnKey::Kind::ActivityCount, activity});
            schema.columns.push_back({ColumnKey::Kind::Overflow, "overflow"});
        }
        return schema;
    }

    if (extractor == ExtractorId::NG) {
        std::set<std::vector<std::string>> grams;
        for (const auto& log : train.logs)
            for (const auto& trace : log.traces) {
                const auto& acts = trace.activities();
                if (acts.size() < ngram_n) continue;
                for (std::size_t i = 0; i + ngram_n <= acts.size(); ++i)
                    grams.insert({acts.begin() + i, acts.begin() + i + ngram_n});
            }
        for (const auto& gram : grams)
            schema.columns.push_back({ColumnKey::Kind::Ngram, join_tuple(gram)});
        return schema;
    }

    // DF: ordered adjacent pairs, self-pairs excluded.
    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& log : train.logs)
        for (const auto& trace : log.traces) {
            const auto& acts = trace.activities();
            for (std::size_t i = 0; i + 1 < acts.size(); ++i)
                if (acts[i] != acts[i + 1]) pairs.insert({acts[i], acts[i + 1]});
        }
    for (const auto& [x, y] : pairs)
        schema.columns.push_back({ColumnKey::Kind::DfPair, join_tuple({x, y})});
    return schema;
}

const ConformanceCache::TraceConformance& ConformanceCache::align(const PetriNet& net,
                                                                  const Trace& trace,
                                                                  const MoveCost& cost) {
    auto it = memo_.find(trace.activities());
    if (it != memo_.end()) return it->second;

    if (!min_model_cost_) min_model_cost_ = min_model_path_cost(net, cost);

    TraceConformance result;
    Alignment alignment = optimal_alignment(net, trace, cost);
    result.optimal_cost = alignment.cost;
    const double worst =
        static_cast<double>(trace.size()) * cost.log_move + *min_model_cost_;
    if (worst == 0.0) {
        std::fprintf(stderr,
                     "[pmad] warning: worst-case alignment cost is 0 (empty trace, zero-cost "
                     "model path); fitness defined as 1.0\n");
        result.fitness = 1.0;
    } else {
        result.fitness = std::clamp(1.0 - alignment.cost / worst, 0.0, 1.0);
    }

    std::set<std::string> activity_set;
    for (const std::string& label : net.visible_labels()) activity_set.insert(label);
    for (const std::string& activity : trace.activities()) activity_set.insert(activity);
    result.per_activity = per_activity_cost_trace(alignment, cost, activity_set);

    return memo_.emplace(trace.activities(), std::move(result)).first->second;
}

void ConformanceCache::adopt(const std::vector<std::string>& activities,
                             const TraceConformance& value) {
    memo_.emplace(activities, value);
}

namespace {

FeatureMatrix make_matrix(const LogTuple& logs, const FeatureSchema& schema) {
    FeatureMatrix matrix;
    matrix.schema = schema;
    matrix.values = Matrix(logs.size(), schema.size());
    matrix.row_ids.reserve(logs.size());
    matrix.row_labels.reserve(logs.size());
    for (const auto& log : logs.logs) {
        matrix.row_ids.push_back(log.log_id);
        matrix.row_labels.push_back(log.label);
    }
    return matrix;
}

void check_extractor(const FeatureSchema& schema, ExtractorId expected) {
    if (schema.extractor != expected)
        throw ContractError("feature extraction: schema was fitted for " +
                            to_string(schema.extractor) + ", not " + to_string(expected));
}

}  // namespace

FeatureMatrix extract_abcc(const LogTuple& logs, const PetriNet& net, const MoveCost& cost,
                           const FeatureSchema& schema, ConformanceCache* cache,
                           std::size_t jobs) {
    check_extractor(schema, ExtractorId::AB_CC);
    cost.validate();
    FeatureMatrix matrix = make_matrix(logs, schema);

    const long fitness_col = schema.column_of(ColumnKey::Kind::Fitness, "fitness");
    const long overflow_col = schema.column_of(ColumnKey::Kind::Overflow, "overflow");

    ConformanceCache local_cache;
    ConformanceCache& memo = cache ? *cache : local_cache;

    // Warm the memo in parallel when asked; rows are then assembled in
    // tuple order, so the output is independent of the job count.
    if (jobs > 1) {
        std::set<std::vector<std::string>> distinct;
        for (const auto& log : logs.logs)
            for (const auto& trace : log.traces) distinct.insert(trace.activities());
        std::vector<const std::vector<std::string>*> work;
        work.reserve(distinct.size());
        for (const auto& acts : distinct) work.push_back(&acts);
        std::vector<ConformanceCache> partial(jobs);
        std::vector<std::thread> threads;
        for (std::size_t w = 0; w < jobs; ++w) {
            threads.emplace_back([&, w]() {
                for (std::size_t i = w; i < work.size(); i += jobs)
                    partial[w].align(net, Trace(*work[i]), cost);
            });
        }
        for (auto& t : threads) t.join();
        for (std::size_t w = 0; w < jobs; ++w)
            for (std::size_t i = w; i < work.size(); i += jobs)
                memo.adopt(*work[i], partial[w].align(net, Trace(*work[i]), cost));
    }

    for (std::size_t row = 0; row < logs.size(); ++row) {
        const EventLog& log = logs.logs[row];
        if (log.traces.empty())
            throw ContractError("extract_abcc: empty event log '" + log.log_id + "'");
        double fitness_sum = 0.0;
        try {
            for (const Trace& trace : log.traces) {
                const auto& tc = memo.align(net, trace, cost);
                fitness_sum += tc.fitness;
                for (const auto& [activity, value] : tc.per_activity) {
                    const long col =
                        schema.column_of(ColumnKey::Kind::PerActivityCost, activity);
                    if (col >= 0)
                        matrix.values(row, col) += value;
                    else
                        matrix.values(row, overflow_col) += value;
                }
            }
        } catch (const Error& e) {
            throw Error(e.kind(),
                        "extract_abcc: log '" + log.log_id + "': " + e.what());
        }
        matrix.values(row, fitness_col) = fitness_sum / static_cast<double>(log.traces.size());
    }
    return matrix;
}

FeatureMatrix extract_tbcc(const LogTuple& logs, const PetriNet& net,
                           const FeatureSchema& schema) {
    check_extractor(schema, ExtractorId::TB_CC);
    FeatureMatrix matrix = make_matrix(logs, schema);

    const long fitness_col = schema.column_of(ColumnKey::Kind::Fitness, "fitness");
    const long missing_col = schema.column_of(ColumnKey::Kind::TokenStat, "missing");
    const long remaining_col = schema.column_of(ColumnKey::Kind::TokenStat, "remaining");
    const long overflow_col = schema.column_of(ColumnKey::Kind::Overflow, "overflow");

    for (std::size_t row = 0; row < logs.size(); ++row) {
        const EventLog& log = logs.logs[row];
        ReplayResult replay;
        try {
            replay = replay_log(net, log);
        } catch (const Error& e) {
            throw Error(e.kind(), "extract_tbcc: log '" + log.log_id + "': " + e.what());
        }
        matrix.values(row, fitness_col) = replay.fitness;
        matrix.values(row, missing_col) = static_cast<double>(replay.missing);
        matrix.values(row, remaining_col) = static_cast<double>(replay.remaining);
        for (const auto& [activity, count] : replay.fired_per_activity) {
            const long col = schema.column_of(ColumnKey::Kind::ActivityCount, activity);
            if (col >= 0)
                matrix.values(row, col) += static_cast<double>(count);
            else
                matrix.values(row, overflow_col) += static_cast<double>(count);
        }
    }
    return matrix;
}

FeatureMatrix extract_ngrams(const LogTuple& logs, const FeatureSchema& schema) {
    check_extractor(schema, ExtractorId::NG);
    FeatureMatrix matrix = make_matrix(logs, schema);
    const std::size_t n = schema.ngram_n;

    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < schema.columns.size(); ++i)
        index[schema.columns[i].key] = i;

    for (std::size_t row = 0; row < logs.size(); ++row) {
        for (const Trace& trace : logs.logs[row].traces) {
            const auto& acts = trace.activities();
            if (acts.size() < n) continue;
            for (std::size_t i = 0; i + n <= acts.size(); ++i) {
                const std::string key =
                    join_tuple({acts.begin() + i, acts.begin() + i + n});
                auto it = index.find(key);
                if (it != index.end()) matrix.values(row, it->second) += 1.0;
            }
        }
    }
    return matrix;
}

FeatureMatrix extract_df(const LogTuple& logs, const FeatureSchema& schema) {
    check_extractor(schema, ExtractorId::DF);
    FeatureMatrix matrix = make_matrix(logs, schema);

    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < schema.columns.size(); ++i)
        index[schema.columns[i].key] = i;

    for (std::size_t row = 0; row < logs.size(); ++row) {
        for (const Trace& trace : logs.logs[row].traces) {
            const auto& acts = trace.activities();
            for (std::size_t i = 0; i + 1 < acts.size(); ++i) {
                if (acts[i] == acts[i + 1]) continue;
                auto it = index.find(join_tuple({acts[i], acts[i + 1]}));
                if (it != index.end()) matrix.values(row, it->second) += 1.0;
            }
        }
    }
    return matrix;
}

FeatureMatrix extract(const LogTuple& logs, const PetriNet* net, const MoveCost& cost,
                      const FeatureSchema& schema, ConformanceCache* cache, std::size_t jobs) {
    switch (schema.extractor) {
        case ExtractorId::AB_CC:
            if (!net) throw ArgumentError("extract: AB_CC requires a reference net");
            return extract_abcc(logs, *net, cost, schema, cache, jobs);
        case ExtractorId::TB_CC:
            if (!net) throw ArgumentError("extract: TB_CC requires a reference net");
            return extract_tbcc(logs, *net, schema);
        case ExtractorId::NG:
            return extract_ngrams(logs, schema);
        case ExtractorId::DF:
            return extract_df(logs, schema);
    }
    throw ArgumentError("extract: unknown extractor");
}

std::string write_matrix_csv(const FeatureMatrix& matrix) {
    std::ostringstream out;
    out << "log_id,label";
    for (const auto& column : matrix.schema.columns) {
        std::string key = column.key;
        bool quote = key.find_first_of(",\"\n") != std::string::npos;
        if (quote) {
            std::string q = "\"";
            for (char c : key) {
                if (c == '"') q += "\"\"";
                else q.push_back(c);
            }
            q += "\"";
            key = q;
        }
        out << "," << key;
    }
    out << "\n";
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        out << matrix.row_ids[i] << "," << to_string(matrix.row_labels[i]);
        for (std::size_t j = 0; j < matrix.schema.size(); ++j)
            out << "," << format_value(matrix.values(i, j));
        out << "\n";
    }
    return out.str();
}

FeatureMatrix parse_matrix_csv(const std::string& text, const FeatureSchema& schema) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw FormatError("feature matrix csv: empty document");

    FeatureMatrix matrix;
    matrix.schema = schema;
    std::vector<std::vector<double>> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        {
            std::string cur;
            bool quoted = false;
            for (std::size_t i = 0; i < line.size(); ++i) {
                char c = line[i];
                if (quoted) {
                    if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                        cur.push_back('"');
                        ++i;
                    } else if (c == '"') {
                        quoted = false;
                    } else {
                        cur.push_back(c);
                    }
                } else if (c == '"') {
                    quoted = true;
                } else if (c == ',') {
                    fields.push_back(std::move(cur));
                    cur.clear();
                } else {
                    cur.push_back(c);
                }
            }
            fields.push_back(std::move(cur));
        }
        if (fields.size() != schema.size() + 2)
            throw FormatError("feature matrix csv: line " + std::to_string(line_no) + " has " +
                              std::to_string(fields.size()) + " fields, expected " +
                              std::to_string(schema.size() + 2));
        matrix.row_ids.push_back(fields[0]);
        matrix.row_labels.push_back(label_from_string(fields[1]));
        std::vector<double> row(schema.size());
        for (std::size_t j = 0; j < schema.size(); ++j) {
            try {
                row[j] = std::stod(fields[j + 2]);
            } catch (const std::exception&) {
                throw FormatError("feature matrix csv: line " + std::to_string(line_no) +
                                  ": value '" + fields[j + 2] + "' is not a number");
            }
        }
        rows.push_back(std::move(row));
    }
    matrix.values = Matrix(rows.size(), schema.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < schema.size(); ++j) matrix.values(i, j) = rows[i][j];
    return matrix;
}

std::string schema_to_json(const FeatureSchema& schema) {
    nlohmann::json j;
    j["extractor"] = to_string(schema.extractor);
    j["ngram_n"] = schema.ngram_n;
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& column : schema.columns)
        cols.push_back({{"kind", to_string(column.kind)}, {"key", column.key}});
    j["columns"] = std::move(cols);
    return j.dump(2);
}

FeatureSchema schema_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("schema json: ") + e.what());
    }
    FeatureSchema schema;
    try {
        schema.extractor = extractor_from_string(j.at("extractor").get<std::string>());
        schema.ngram_n = j.value("ngram_n", std::size_t{2});
        for (const auto& col : j.at("columns")) {
            schema.columns.push_back({column_kind_from_string(col.at("kind").get<std::string>()),
                                      col.at("key").get<std::string>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("schema json: ") + e.what());
    }
    return schema;
}

}  // namespace pmad
