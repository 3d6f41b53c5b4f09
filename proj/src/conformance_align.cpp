#include "pmad/conformance_align.hpp"

#include <algorithm>
#include <cstdio>
#include <queue>
#include <sstream>
#include <unordered_map>

#include "pmad/error.hpp"

namespace pmad {

namespace {

// Move preference codes for tie-breaking; lower is preferred.
constexpr std::uint32_t kPrefSync = 0;
constexpr std::uint32_t kPrefSilent = 1;
constexpr std::uint32_t kPrefModel = 2;
constexpr std::uint32_t kPrefLog = 3;

std::uint32_t move_code(std::uint32_t pref, std::size_t transition_index) {
    return (pref << 24) | static_cast<std::uint32_t>(transition_index & 0xFFFFFF);
}

struct State {
    std::size_t pos;
    std::vector<int> marking;
    bool operator==(const State& other) const = default;
};

struct StateHash {
    std::size_t operator()(const State& s) const {
        std::uint64_t h = 0xcbf29ce484222325ULL ^ s.pos;
        for (int x : s.marking) {
            h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(x));
            h *= 0x100000001b3ULL;
        }
        return static_cast<std::size_t>(h);
    }
};

struct QueueEntry {
    double cost;
    std::vector<std::uint32_t> key;  // move codes along the path
    std::size_t node;                // index into the node arena
};

struct EntryGreater {
    bool operator()(const QueueEntry& a, const QueueEntry& b) const {
        if (a.cost != b.cost) return a.cost > b.cost;
        return a.key > b.key;
    }
};

struct Node {
    State state;
    long parent;            // arena index, -1 for the root
    std::uint32_t code;     // move leading here
    std::size_t transition; // valid unless the move is log-only
};

}  // namespace

Alignment optimal_alignment(const PetriNet& net, const Trace& trace, const MoveCost& cost,
                            std::size_t state_cap) {
    cost.validate();
    const std::size_t len = trace.size();

    std::vector<Node> arena;
    std::priority_queue<QueueEntry, std::vector<QueueEntry>, EntryGreater> queue;
    std::unordered_map<State, double, StateHash> settled;

    arena.push_back({{0, net.dense_initial()}, -1, 0, 0});
    queue.push({0.0, {}, 0});

    while (!queue.empty()) {
        QueueEntry entry = queue.top();
        queue.pop();
        // copy: expansion below appends to the arena and may reallocate it
        const State state = arena[entry.node].state;
        if (settled.count(state)) continue;
        settled.emplace(state, entry.cost);

        if (state.pos == len && state.marking == net.dense_final()) {
            // reconstruct
            Alignment alignment;
            alignment.cost = entry.cost;
            for (long n = static_cast<long>(entry.node); arena[n].parent >= 0;
                 n = arena[n].parent) {
                const Node& node = arena[n];
                Move move;
                const std::uint32_t pref = node.code >> 24;
                switch (pref) {
                    case kPrefSync:
                        move.kind = Move::Kind::Sync;
                        move.activity = net.transitions()[node.transition].label;
                        move.transition_id = net.transitions()[node.transition].id;
                        break;
                    case kPrefSilent:
                        move.kind = Move::Kind::ModelSilent;
                        move.transition_id = net.transitions()[node.transition].id;
                        break;
                    case kPrefModel:
                        move.kind = Move::Kind::ModelVisible;
                        move.activity = net.transitions()[node.transition].label;
                        move.transition_id = net.transitions()[node.transition].id;
                        break;
                    default:
                        move.kind = Move::Kind::LogOnly;
                        move.activity = trace.activities()[arena[node.parent].state.pos];
                        break;
                }
                alignment.moves.push_back(std::move(move));
            }
            std::reverse(alignment.moves.begin(), alignment.moves.end());
            return alignment;
        }

        if (settled.size() > state_cap)
            throw SearchError("optimal_alignment: state cap of " + std::to_string(state_cap) +
                              " states exceeded");

        auto push = [&](State next, double step, std::uint32_t code, std::size_t transition) {
            if (settled.count(next)) return;
            arena.push_back({std::move(next), static_cast<long>(entry.node), code, transition});
            QueueEntry e;
            e.cost = entry.cost + step;
            e.key = entry.key;
            e.key.push_back(code);
            e.node = arena.size() - 1;
            queue.push(std::move(e));
        };

        for (std::size_t t = 0; t < net.transitions().size(); ++t) {
            if (!net.dense_enabled(state.marking, t)) continue;
            const Transition& tr = net.transitions()[t];
            std::vector<int> fired = state.marking;
            net.dense_fire(fired, t);
            if (tr.silent()) {
                push({state.pos, fired}, cost.silent_move, move_code(kPrefSilent, t), t);
            } else {
                if (state.pos < len && trace.activities()[state.pos] == tr.label)
                    push({state.pos + 1, fired}, cost.sync_move, move_code(kPrefSync, t), t);
                push({state.pos, std::move(fired)}, cost.model_move, move_code(kPrefModel, t), t);
            }
        }
        if (state.pos < len)
            push({state.pos + 1, state.marking}, cost.log_move, move_code(kPrefLog, 0), 0);
    }
    throw ModelError("optimal_alignment: final marking unreachable from initial marking");
}

double worst_case_cost(const PetriNet& net, const Trace& trace, const MoveCost& cost) {
    cost.validate();
    return static_cast<double>(trace.size()) * cost.log_move + min_model_path_cost(net, cost);
}

double alignment_fitness_trace(const PetriNet& net, const Trace& trace, const MoveCost& cost) {
    const double worst = worst_case_cost(net, trace, cost);
    if (worst == 0.0) {
        std::fprintf(stderr,
                     "[pmad] warning: worst-case alignment cost is 0 (empty trace, zero-cost "
                     "model path); fitness defined as 1.0\n");
        return 1.0;
    }
    const double best = optimal_alignment(net, trace, cost).cost;
    const double fitness = 1.0 - best / worst;
    return std::clamp(fitness, 0.0, 1.0);
}

double alignment_fitness_log(const PetriNet& net, const EventLog& log, const MoveCost& cost) {
    if (log.traces.empty()) throw ContractError("alignment_fitness_log: empty event log");
    double sum = 0.0;
    for (const Trace& trace : log.traces) sum += alignment_fitness_trace(net, trace, cost);
    return sum / static_cast<double>(log.traces.size());
}

std::map<std::string, double> per_activity_cost_trace(const Alignment& alignment,
                                                      const MoveCost& cost,
                                                      const std::set<std::string>& activity_set) {
    std::map<std::string, double> out;
    for (const std::string& activity : activity_set) out[activity] = 0.0;
    for (const Move& move : alignment.moves) {
        double step = 0.0;
        const std::string* activity = nullptr;
        switch (move.kind) {
            case Move::Kind::Sync:
                step = cost.sync_move;
                activity = &move.activity;
                break;
            case Move::Kind::LogOnly:
                step = cost.log_move;
                activity = &move.activity;
                break;
            case Move::Kind::ModelVisible:
                step = cost.model_move;
                activity = &move.activity;
                break;
            case Move::Kind::ModelSilent:
                // tau is never an activity
                continue;
        }
        auto it = out.find(*activity);
        if (it != out.end()) it->second += step;
    }
    return out;
}

std::map<std::string, double> per_activity_cost_log(const PetriNet& net, const EventLog& log,
                                                    const MoveCost& cost) {
    if (log.traces.empty()) throw ContractError("per_activity_cost_log: empty event log");
    std::set<std::string> activity_set;
    for (const std::string& label : net.visible_labels()) activity_set.insert(label);
    for (const Trace& trace : log.traces)
        for (const std::string& activity : trace.activities()) activity_set.insert(activity);

    std::map<std::string, double> out;
    for (const std::string& activity : activity_set) out[activity] = 0.0;
    for (const Trace& trace : log.traces) {
        Alignment alignment = optimal_alignment(net, trace, cost);
        auto per_trace = per_activity_cost_trace(alignment, cost, activity_set);
        for (const auto& [activity, value] : per_trace) out[activity] += value;
    }
    return out;
}

std::string render(const Alignment& alignment) {
    static const std::string kSkip = ">>";
    std::vector<std::string> log_row, model_row;
    for (const Move& move : alignment.moves) {
        switch (move.kind) {
            case Move::Kind::Sync:
                log_row.push_back(move.activity);
                model_row.push_back(move.activity);
                break;
            case Move::Kind::LogOnly:
                log_row.push_back(move.activity);
                model_row.push_back(kSkip);
                break;
            case Move::Kind::ModelVisible:
                log_row.push_back(kSkip);
                model_row.push_back(move.activity);
                break;
            case Move::Kind::ModelSilent:
                log_row.push_back(kSkip);
                model_row.push_back("tau");
                break;
        }
    }
    std::ostringstream out;
    for (std::size_t row = 0; row < 2; ++row) {
        const auto& cells = row == 0 ? log_row : model_row;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const std::size_t width = std::max(log_row[i].size(), model_row[i].size());
            if (i) out << " | ";
            out << cells[i] << std::string(width - cells[i].size(), ' ');
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace pmad
