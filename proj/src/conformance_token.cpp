#include "pmad/conformance_token.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <unordered_map>
#include <unordered_set>

#include "pmad/error.hpp"

namespace pmad {

namespace {

struct DenseHash {
    std::size_t operator()(const std::vector<int>& v) const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (int x : v) {
            h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(x));
            h *= 0x100000001b3ULL;
        }
        return static_cast<std::size_t>(h);
    }
};

constexpr std::size_t kBridgeNodeCap = 100000;

// Shortest sequence of silent firings (BFS, transitions tried id-sorted)
// after which `goal` holds. Empty result plus `found=false` when none
// exists within max_depth firings.
bool silent_bridge(const PetriNet& net, const std::vector<int>& marking, std::size_t max_depth,
                   const std::function<bool(const std::vector<int>&)>& goal,
                   std::vector<std::size_t>& sequence) {
    sequence.clear();
    if (goal(marking)) return true;
    if (max_depth == 0 || net.silent_transitions().empty()) return false;

    struct NodeInfo {
        long parent;
        std::size_t via;
        std::size_t depth;
    };
    std::deque<std::pair<std::vector<int>, long>> frontier;  // marking, node index
    std::vector<NodeInfo> nodes;
    std::unordered_set<std::vector<int>, DenseHash> seen;

    frontier.push_back({marking, -1});
    seen.insert(marking);

    while (!frontier.empty()) {
        auto [current, parent] = frontier.front();
        frontier.pop_front();
        const std::size_t depth = parent < 0 ? 0 : nodes[parent].depth;
        if (depth >= max_depth) continue;
        for (std::size_t t : net.silent_transitions()) {
            if (!net.dense_enabled(current, t)) continue;
            std::vector<int> next = current;
            net.dense_fire(next, t);
            if (seen.count(next)) continue;
            nodes.push_back({parent, t, depth + 1});
            const long node_index = static_cast<long>(nodes.size()) - 1;
            if (goal(next)) {
                for (long n = node_index; n >= 0; n = nodes[n].parent)
                    sequence.push_back(nodes[n].via);
                std::reverse(sequence.begin(), sequence.end());
                return true;
            }
            if (seen.size() >= kBridgeNodeCap) return false;
            seen.insert(next);
            frontier.push_back({std::move(next), node_index});
        }
    }
    return false;
}

}  // namespace

ReplayResult replay_trace(const PetriNet& net, const Trace& trace, std::size_t max_bridge) {
    ReplayResult result;
    std::vector<int> marking = net.dense_initial();
    for (int tokens : marking) result.produced += tokens;

    auto fire_counted = [&](std::size_t t) {
        result.consumed += static_cast<long long>(net.inputs(t).size());
        result.produced += static_cast<long long>(net.outputs(t).size());
        net.dense_fire(marking, t);
    };

    std::vector<std::size_t> bridge;
    for (const std::string& activity : trace.activities()) {
        const std::vector<std::size_t>* candidates = net.transitions_with_label(activity);
        if (!candidates) {
            ++result.unknown_activities;
            continue;
        }
        std::size_t chosen = candidates->front();
        bool enabled_found = false;
        for (std::size_t t : *candidates) {
            if (net.dense_enabled(marking, t)) {
                chosen = t;
                enabled_found = true;
                break;
            }
        }
        if (!enabled_found) {
            const bool bridged = silent_bridge(
                net, marking, max_bridge,
                [&](const std::vector<int>& m) {
                    for (std::size_t t : *candidates)
                        if (net.dense_enabled(m, t)) return true;
                    return false;
                },
                bridge);
            if (bridged) {
                for (std::size_t t : bridge) fire_counted(t);
                for (std::size_t t : *candidates) {
                    if (net.dense_enabled(marking, t)) {
                        chosen = t;
                        break;
                    }
                }
            } else {
                // Inject the missing tokens. Each injected token is credited
                // as a forced firing of the visible transition producing the
                // place (id-sorted tie-break), so skipped activities still
                // show up in the execution counts.
                for (std::size_t p : net.inputs(chosen)) {
                    if (marking[p] >= 1) continue;
                    result.missing += 1 - marking[p];
                    marking[p] = 1;
                    for (std::size_t producer = 0; producer < net.transitions().size();
                         ++producer) {
                        if (net.transitions()[producer].silent()) continue;
                        const auto& outs = net.outputs(producer);
                        if (std::find(outs.begin(), outs.end(), p) != outs.end()) {
                            ++result.fired_per_activity[net.transitions()[producer].label];
                            break;
                        }
                    }
                }
            }
        }
        fire_counted(chosen);
        ++result.fired_per_activity[activity];
    }

    // Cover the final marking via silent routing transitions if needed.
    const std::vector<int>& final_dense = net.dense_final();
    {
        auto covers_final = [&](const std::vector<int>& m) {
            for (std::size_t p = 0; p < final_dense.size(); ++p)
                if (m[p] < final_dense[p]) return false;
            return true;
        };
        if (!covers_final(marking) &&
            silent_bridge(net, marking, max_bridge, covers_final, bridge)) {
            for (std::size_t t : bridge) fire_counted(t);
        }
    }

    for (std::size_t p = 0; p < final_dense.size(); ++p) {
        const int want = final_dense[p];
        if (want == 0) continue;
        const int have = marking[p];
        result.consumed += want;
        if (have < want) {
            result.missing += want - have;
            marking[p] = 0;
        } else {
            marking[p] = have - want;
        }
    }
    for (int tokens : marking) result.remaining += tokens;

    const double m = static_cast<double>(result.missing);
    const double c = static_cast<double>(result.consumed);
    const double r = static_cast<double>(result.remaining);
    const double p = static_cast<double>(result.produced);
    result.fitness = 0.5 * (1.0 - m / c) + 0.5 * (1.0 - r / p);
    return result;
}

ReplayResult replay_log(const PetriNet& net, const EventLog& log, std::size_t max_bridge) {
    if (log.traces.empty()) throw ContractError("replay_log: empty event log");
    ReplayResult total;
    double fitness_sum = 0.0;
    for (const Trace& trace : log.traces) {
        ReplayResult r = replay_trace(net, trace, max_bridge);
        total.produced += r.produced;
        total.consumed += r.consumed;
        total.missing += r.missing;
        total.remaining += r.remaining;
        total.unknown_activities += r.unknown_activities;
        for (const auto& [activity, count] : r.fired_per_activity)
            total.fired_per_activity[activity] += count;
        fitness_sum += r.fitness;
    }
    total.fitness = fitness_sum / static_cast<double>(log.traces.size());
    return total;
}

}  // namespace pmad
