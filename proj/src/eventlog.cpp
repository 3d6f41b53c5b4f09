#include "pmad/eventlog.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "pmad/error.hpp"
#include "pmad/rng.hpp"
#include "pmad/xml.hpp"

namespace pmad {

std::string to_string(Label label) {
    switch (label) {
        case Label::Normal: return "normal";
        case Label::Anomalous: return "anomalous";
        case Label::Unlabeled: return "unlabeled";
    }
    return "unlabeled";
}

Label label_from_string(const std::string& text) {
    if (text == "normal") return Label::Normal;
    if (text == "anomalous") return Label::Anomalous;
    if (text == "unlabeled" || text.empty()) return Label::Unlabeled;
    throw FormatError("unknown label value '" + text + "'");
}

namespace {

Label uniform_label(const std::vector<Trace>& traces) {
    if (traces.empty()) return Label::Unlabeled;
    Label l = traces.front().label();
    for (const auto& t : traces)
        if (t.label() != l) return Label::Unlabeled;
    return l;
}

// RFC-4180-ish row splitter: quoted fields, doubled quotes, CRLF.
std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
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
    return fields;
}

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

}  // namespace

LogTuple parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw FormatError("csv: empty document");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    auto header = split_csv_row(line);
    auto find_col = [&](const std::string& name) -> long {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<long>(i);
        return -1;
    };
    const long col_case = find_col("case_id");
    const long col_act = find_col("activity");
    const long col_order = find_col("order");
    const long col_label = find_col("label");
    if (col_case < 0) throw FormatError("csv: missing mandatory column 'case_id'");
    if (col_act < 0) throw FormatError("csv: missing mandatory column 'activity'");

    struct Row {
        std::string activity;
        long long order;
        std::size_t position;
    };
    struct Case {
        std::vector<Row> rows;
        bool has_label = false;
        Label label = Label::Unlabeled;
    };
    std::map<std::string, Case> cases;
    std::vector<std::string> case_order;

    std::size_t position = 0;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_row(line);
        if (fields.size() < header.size())
            throw FormatError("csv: line " + std::to_string(line_no) + " has " +
                              std::to_string(fields.size()) + " fields, expected " +
                              std::to_string(header.size()));
        const std::string& case_id = fields[col_case];
        auto [it, inserted] = cases.try_emplace(case_id);
        if (inserted) case_order.push_back(case_id);
        Case& c = it->second;

        Row row;
        row.activity = fields[col_act];
        row.position = position++;
        row.order = static_cast<long long>(row.position);
        if (col_order >= 0 && !fields[col_order].empty()) {
            try {
                row.order = std::stoll(fields[col_order]);
            } catch (const std::exception&) {
                throw FormatError("csv: line " + std::to_string(line_no) +
                                  ": order value '" + fields[col_order] + "' is not an integer");
            }
        }
        if (col_label >= 0) {
            Label l = label_from_string(fields[col_label]);
            if (l != Label::Unlabeled) {
                if (c.has_label && c.label != l)
                    throw FormatError("csv: conflicting labels within case '" + case_id + "'");
                c.has_label = true;
                c.label = l;
            }
        }
        // An empty activity field marks a case with zero events.
        if (!row.activity.empty()) c.rows.push_back(std::move(row));
    }

    if (case_order.empty()) throw FormatError("csv: document contains no traces");

    EventLog log;
    for (const auto& id : case_order) {
        Case& c = cases[id];
        std::stable_sort(c.rows.begin(), c.rows.end(), [](const Row& a, const Row& b) {
            return a.order < b.order;
        });
        std::vector<std::string> activities;
        activities.reserve(c.rows.size());
        for (auto& r : c.rows) activities.push_back(std::move(r.activity));
        log.traces.emplace_back(std::move(activities), id, c.label);
    }
    log.label = uniform_label(log.traces);

    LogTuple out;
    out.logs.push_back(std::move(log));
    return out;
}

std::string write_csv(const LogTuple& logs) {
    std::ostringstream out;
    out << "case_id,activity,order,label\n";
    std::size_t auto_id = 0;
    for (const auto& log : logs.logs) {
        for (const auto& trace : log.traces) {
            std::string case_id = trace.case_id();
            if (case_id.empty()) case_id = "c" + std::to_string(auto_id);
            ++auto_id;
            const std::string label =
                trace.label() == Label::Unlabeled ? std::string() : to_string(trace.label());
            if (trace.empty()) {
                out << csv_quote(case_id) << ",,0," << label << "\n";
                continue;
            }
            for (std::size_t i = 0; i < trace.size(); ++i) {
                out << csv_quote(case_id) << "," << csv_quote(trace.activities()[i]) << ","
                    << (i + 1) << "," << label << "\n";
            }
        }
    }
    return out.str();
}

namespace {

const std::string* xes_string_attribute(const xml::Node& element, const std::string& key) {
    for (const auto& child : element.children) {
        if (child.name != "string") continue;
        const std::string* k = child.attribute("key");
        if (k && *k == key) return child.attribute("value");
    }
    return nullptr;
}

}  // namespace

LogTuple parse_xes(const std::string& text) {
    xml::Node root = xml::parse(text);
    const xml::Node* log_el = nullptr;
    if (root.name == "log") {
        log_el = &root;
    } else {
        log_el = root.first_child("log");
    }
    if (!log_el) throw FormatError("xes: document has no log element");

    EventLog log;
    std::size_t trace_index = 0;
    for (const auto* trace_el : log_el->children_named("trace")) {
        std::vector<std::string> activities;
        std::size_t event_index = 0;
        for (const auto* event_el : trace_el->children_named("event")) {
            const std::string* name = xes_string_attribute(*event_el, "concept:name");
            if (!name)
                throw FormatError("xes: trace " + std::to_string(trace_index) + ", event " +
                                  std::to_string(event_index) + " has no concept:name");
            activities.push_back(*name);
            ++event_index;
        }
        std::string case_id;
        if (const std::string* cn = xes_string_attribute(*trace_el, "concept:name")) case_id = *cn;
        Label label = Label::Unlabeled;
        if (const std::string* lv = xes_string_attribute(*trace_el, "label"))
            label = label_from_string(*lv);
        log.traces.emplace_back(std::move(activities), case_id, label);
        ++trace_index;
    }
    if (log.traces.empty()) throw FormatError("xes: log contains no traces");
    log.label = uniform_label(log.traces);
    if (const std::string* lid = xes_string_attribute(*log_el, "concept:name")) log.log_id = *lid;

    LogTuple out;
    out.logs.push_back(std::move(log));
    return out;
}

std::string write_xes(const LogTuple& logs) {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<log xes.version=\"1.0\">\n";
    if (logs.logs.size() == 1 && !logs.logs[0].log_id.empty())
        out << "  <string key=\"concept:name\" value=\"" << xml::escape(logs.logs[0].log_id)
            << "\"/>\n";
    for (const auto& log : logs.logs) {
        for (const auto& trace : log.traces) {
            out << "  <trace>\n";
            if (!trace.case_id().empty())
                out << "    <string key=\"concept:name\" value=\"" << xml::escape(trace.case_id())
                    << "\"/>\n";
            if (trace.label() != Label::Unlabeled)
                out << "    <string key=\"label\" value=\"" << to_string(trace.label())
                    << "\"/>\n";
            for (const auto& activity : trace.activities()) {
                out << "    <event><string key=\"concept:name\" value=\""
                    << xml::escape(activity) << "\"/></event>\n";
            }
            out << "  </trace>\n";
        }
    }
    out << "</log>\n";
    return out.str();
}

LogTuple group_into_logs(const std::vector<Trace>& traces, std::size_t group_size,
                         std::uint64_t rng_seed) {
    if (group_size < 1) throw ArgumentError("group_into_logs: group_size must be >= 1");
    if (traces.empty()) throw ContractError("group_into_logs: empty trace pool");
    const Label pool_label = traces.front().label();
    for (const auto& t : traces)
        if (t.label() != pool_label)
            throw ContractError("group_into_logs: mixed labels in input pool");

    std::vector<std::size_t> order(traces.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(rng_seed);
    rng.shuffle(order);

    const std::size_t n_logs = traces.size() / group_size;
    LogTuple out;
    out.logs.reserve(n_logs);
    char id_buf[64];
    for (std::size_t g = 0; g < n_logs; ++g) {
        EventLog log;
        log.label = pool_label;
        std::snprintf(id_buf, sizeof(id_buf), "%s_%05zu", to_string(pool_label).c_str(), g);
        log.log_id = id_buf;
        log.traces.reserve(group_size);
        for (std::size_t k = 0; k < group_size; ++k)
            log.traces.push_back(traces[order[g * group_size + k]]);
        out.logs.push_back(std::move(log));
    }
    return out;
}

DatasetSplit split_dataset(const LogTuple& normal, const LogTuple& anomalous,
                           double test_fraction, double val_fraction, std::uint64_t rng_seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ArgumentError("split_dataset: test_fraction must be in (0,1)");
    if (!(val_fraction > 0.0 && val_fraction < 1.0))
        throw ArgumentError("split_dataset: val_fraction must be in (0,1)");
    for (const auto& log : normal.logs)
        if (log.label != Label::Normal)
            throw ContractError("split_dataset: non-normal log '" + log.log_id +
                                "' in normal tuple");
    for (const auto& log : anomalous.logs)
        if (log.label != Label::Anomalous)
            throw ContractError("split_dataset: non-anomalous log '" + log.log_id +
                                "' in anomalous tuple");

    const std::size_t n = normal.size();
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
    const std::size_t remainder = n - std::min(n_test, n);
    const auto n_val =
        static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(remainder)));

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(rng_seed);
    rng.shuffle(order);

    DatasetSplit split;
    for (std::size_t i = 0; i < n; ++i) {
        const EventLog& log = normal.logs[order[i]];
        if (i < n_test)
            split.test.logs.push_back(log);
        else if (i < n_test + n_val)
            split.validation.logs.push_back(log);
        else
            split.train.logs.push_back(log);
    }
    for (const auto& log : anomalous.logs) split.test.logs.push_back(log);

    if (split.train.empty()) throw ContractError("split_dataset: train partition is empty");
    if (split.validation.empty())
        throw ContractError("split_dataset: validation partition is empty");
    if (split.test.empty()) throw ContractError("split_dataset: test partition is empty");
    return split;
}

}  // namespace pmad
