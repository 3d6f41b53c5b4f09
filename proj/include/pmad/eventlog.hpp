#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pmad {

enum class Label { Normal, Anomalous, Unlabeled };

std::string to_string(Label label);
// Strict vocabulary: "normal", "anomalous", "unlabeled" or empty (unlabeled).
// Anything else is a format error; corrupt corpora fail loudly.
Label label_from_string(const std::string& text);

// One process execution as an ordered activity sequence. Immutable.
class Trace {
public:
    Trace() = default;
    explicit Trace(std::vector<std::string> activities, std::string case_id = "",
                   Label label = Label::Unlabeled)
        : activities_(std::move(activities)), case_id_(std::move(case_id)), label_(label) {}

    const std::vector<std::string>& activities() const { return activities_; }
    const std::string& case_id() const { return case_id_; }
    Label label() const { return label_; }
    std::size_t size() const { return activities_.size(); }
    bool empty() const { return activities_.empty(); }

    bool operator==(const Trace& other) const = default;

private:
    std::vector<std::string> activities_;
    std::string case_id_;
    Label label_ = Label::Unlabeled;
};

// Multiset of traces; duplicates are distinct members.
struct EventLog {
    std::vector<Trace> traces;
    Label label = Label::Unlabeled;
    std::string log_id;

    std::size_t size() const { return traces.size(); }
};

// Ordered tuple of event logs; row i of any derived feature matrix
// corresponds to logs[i].
struct LogTuple {
    std::vector<EventLog> logs;

    std::size_t size() const { return logs.size(); }
    bool empty() const { return logs.empty(); }
};

// train/validation hold only normal logs; test holds every anomalous log.
struct DatasetSplit {
    LogTuple train;
    LogTuple validation;
    LogTuple test;
};

// CSV columns: case_id, activity[, order, label]. Rows sharing a case_id
// form one trace, ordered by the integer order column when present, else
// by row position. Returns a single-log tuple.
LogTuple parse_csv(const std::string& text);
std::string write_csv(const LogTuple& logs);

// XES subset: log/trace/event elements, event string attribute
// key="concept:name", optional trace string attributes "concept:name"
// (case id) and "label". Other attributes are parsed and ignored.
LogTuple parse_xes(const std::string& text);
std::string write_xes(const LogTuple& logs);

// Shuffles the pool with the seeded RNG and chunks it into logs of exactly
// group_size; leftovers are dropped. The pool must be label-uniform.
LogTuple group_into_logs(const std::vector<Trace>& traces, std::size_t group_size,
                         std::uint64_t rng_seed);

// round(test_fraction * |normal|) normal logs join all anomalous logs in
// test; of the remainder, round(val_fraction * remainder) go to validation.
DatasetSplit split_dataset(const LogTuple& normal, const LogTuple& anomalous,
                           double test_fraction, double val_fraction, std::uint64_t rng_seed);

}  // namespace pmad
