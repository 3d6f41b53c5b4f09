#pragma once

#include <map>
#include <string>
#include <vector>

#include "pmad/conformance_align.hpp"
#include "pmad/petrinet.hpp"
#include "pmad/rng.hpp"

namespace pmad::testing {

using Arc = std::pair<std::string, std::string>;

// p0 --a--> p1 --b--> p2 --c--> p3
inline PetriNet seq_net() {
    return PetriNet({"p0", "p1", "p2", "p3"},
                    {{"ta", "a"}, {"tb", "b"}, {"tc", "c"}},
                    {{"p0", "ta"}, {"ta", "p1"}, {"p1", "tb"}, {"tb", "p2"}, {"p2", "tc"},
                     {"tc", "p3"}},
                    {{"p0", 1}}, {{"p3", 1}});
}

// a then (b xor c) then d
inline PetriNet xor_net() {
    return PetriNet({"p0", "p1", "p2", "p3"},
                    {{"ta", "a"}, {"tb", "b"}, {"tc", "c"}, {"td", "d"}},
                    {{"p0", "ta"}, {"ta", "p1"}, {"p1", "tb"}, {"p1", "tc"}, {"tb", "p2"},
                     {"tc", "p2"}, {"p2", "td"}, {"td", "p3"}},
                    {{"p0", 1}}, {{"p3", 1}});
}

// a then (b and c in parallel) then d
inline PetriNet parallel_net() {
    return PetriNet({"p0", "pb1", "pb2", "pc1", "pc2", "p3"},
                    {{"ta", "a"}, {"tb", "b"}, {"tc", "c"}, {"td", "d"}},
                    {{"p0", "ta"}, {"ta", "pb1"}, {"ta", "pc1"}, {"pb1", "tb"}, {"tb", "pb2"},
                     {"pc1", "tc"}, {"tc", "pc2"}, {"pb2", "td"}, {"pc2", "td"}, {"td", "p3"}},
                    {{"p0", 1}}, {{"p3", 1}});
}

// a then (b xor tau-skip) then c: the silent transition skips b
inline PetriNet silent_skip_net() {
    return PetriNet({"p0", "p1", "p2", "p3"},
                    {{"ta", "a"}, {"tb", "b"}, {"tskip", ""}, {"tc", "c"}},
                    {{"p0", "ta"}, {"ta", "p1"}, {"p1", "tb"}, {"tb", "p2"}, {"p1", "tskip"},
                     {"tskip", "p2"}, {"p2", "tc"}, {"tc", "p3"}},
                    {{"p0", 1}}, {{"p3", 1}});
}

// Brute-force minimum alignment cost: value iteration over
// (trace position, marking) with exhaustive move interleavings. Kept
// independent of the production search.
inline double brute_force_alignment_cost(const PetriNet& net, const Trace& trace,
                                         const MoveCost& cost) {
    // enumerate reachable markings (model moves ignore the position)
    std::vector<std::vector<int>> markings;
    std::map<std::vector<int>, std::size_t> index;
    markings.push_back(net.dense_initial());
    index[markings[0]] = 0;
    for (std::size_t head = 0; head < markings.size(); ++head) {
        for (std::size_t t = 0; t < net.transitions().size(); ++t) {
            if (!net.dense_enabled(markings[head], t)) continue;
            std::vector<int> next = markings[head];
            net.dense_fire(next, t);
            if (!index.count(next)) {
                index[next] = markings.size();
                markings.push_back(next);
                if (markings.size() > 200000)
                    throw SearchError("brute_force_alignment_cost: marking space too large");
            }
        }
    }

    const std::size_t len = trace.size();
    const std::size_t n_markings = markings.size();
    const double inf = 1e300;
    // dist[pos][marking]
    std::vector<std::vector<double>> dist(len + 1, std::vector<double>(n_markings, inf));
    dist[0][0] = 0.0;

    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t pos = 0; pos <= len; ++pos) {
            for (std::size_t m = 0; m < n_markings; ++m) {
                const double d = dist[pos][m];
                if (d >= inf) continue;
                auto relax = [&](std::size_t npos, std::size_t nm, double step) {
                    if (d + step < dist[npos][nm] - 1e-15) {
                        dist[npos][nm] = d + step;
                        changed = true;
                    }
                };
                for (std::size_t t = 0; t < net.transitions().size(); ++t) {
                    if (!net.dense_enabled(markings[m], t)) continue;
                    std::vector<int> next = markings[m];
                    net.dense_fire(next, t);
                    const std::size_t nm = index.at(next);
                    const Transition& tr = net.transitions()[t];
                    if (tr.silent()) {
                        relax(pos, nm, cost.silent_move);
                    } else {
                        relax(pos, nm, cost.model_move);
                        if (pos < len && trace.activities()[pos] == tr.label)
                            relax(pos + 1, nm, cost.sync_move);
                    }
                }
                if (pos < len) relax(pos + 1, m, cost.log_move);
            }
        }
    }
    const std::size_t goal = index.at(net.dense_final());
    return dist[len][goal];
}

// Small random block-structured workflow nets: a chain of blocks, each a
// visible activity, an xor of two activities, an xor with a silent skip,
// or a two-branch parallel split. Every net has at least one silent
// transition and one xor split, and at most max_transitions transitions.
inline PetriNet random_block_net(Rng& rng, std::size_t max_transitions = 8) {
    std::vector<std::string> places;
    std::vector<Transition> transitions;
    std::vector<Arc> arcs;
    int place_counter = 0;
    int transition_counter = 0;
    char label = 'a';

    auto new_place = [&]() {
        places.push_back("p" + std::to_string(place_counter++));
        return places.back();
    };
    auto new_transition = [&](const std::string& lbl) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "t%02d", transition_counter++);
        transitions.push_back({buf, lbl});
        return transitions.back().id;
    };
    auto next_label = [&]() { return std::string(1, label++); };

    std::string current = new_place();
    const std::string source = current;

    bool have_silent = false;
    bool have_xor = false;
    while (true) {
        const std::size_t used = transitions.size();
        const std::size_t left = max_transitions - used;
        // ensure the mandatory blocks still fit
        std::size_t kind;
        if (!have_xor && left <= 2) {
            kind = have_silent ? 1 : 2;  // xor of activities / xor with skip
        } else if (!have_silent && left <= 2) {
            kind = 2;
        } else {
            kind = rng.next_below(4);
            if (kind == 1 && left < 2) kind = 0;
            if (kind == 2 && left < 2) kind = 0;
            if (kind == 3 && left < 2) kind = 0;
        }
        std::string out = new_place();
        switch (kind) {
            case 0: {  // atomic activity
                const std::string t = new_transition(next_label());
                arcs.push_back({current, t});
                arcs.push_back({t, out});
                break;
            }
            case 1: {  // xor of two activities
                const std::string t1 = new_transition(next_label());
                const std::string t2 = new_transition(next_label());
                arcs.push_back({current, t1});
                arcs.push_back({t1, out});
                arcs.push_back({current, t2});
                arcs.push_back({t2, out});
                have_xor = true;
                break;
            }
            case 2: {  // xor with a silent skip
                const std::string t1 = new_transition(next_label());
                const std::string t2 = new_transition("");
                arcs.push_back({current, t1});
                arcs.push_back({t1, out});
                arcs.push_back({current, t2});
                arcs.push_back({t2, out});
                have_xor = true;
                have_silent = true;
                break;
            }
            default: {  // two parallel activities between silent fork/join
                if (transitions.size() + 4 > max_transitions) {
                    const std::string t = new_transition(next_label());
                    arcs.push_back({current, t});
                    arcs.push_back({t, out});
                    break;
                }
                const std::string fork = new_transition("");
                const std::string join = new_transition("");
                have_silent = true;
                const std::string b1 = new_place();
                const std::string b2 = new_place();
                const std::string e1 = new_place();
                const std::string e2 = new_place();
                const std::string t1 = new_transition(next_label());
                const std::string t2 = new_transition(next_label());
                arcs.push_back({current, fork});
                arcs.push_back({fork, b1});
                arcs.push_back({fork, b2});
                arcs.push_back({b1, t1});
                arcs.push_back({t1, e1});
                arcs.push_back({b2, t2});
                arcs.push_back({t2, e2});
                arcs.push_back({e1, join});
                arcs.push_back({e2, join});
                arcs.push_back({join, out});
                break;
            }
        }
        current = out;
        if (transitions.size() >= max_transitions || (have_silent && have_xor && rng.next_unit() < 0.4))
            break;
    }
    return PetriNet(std::move(places), std::move(transitions), std::move(arcs),
                    {{source, 1}}, {{current, 1}});
}

// Random trace for the oracle tests: a walk, optionally corrupted by
// dropping/duplicating/appending an unknown activity, truncated to
// max_events.
inline Trace random_trace_for(const PetriNet& net, Rng& rng, double corruption_rate = 0.2,
                              std::size_t max_events = 8) {
    Trace walk = random_walk(net, rng.next_u64(), 200);
    std::vector<std::string> acts = walk.activities();
    if (rng.next_unit() < corruption_rate && !acts.empty()) {
        switch (rng.next_below(4)) {
            case 0:
                acts.erase(acts.begin() + static_cast<long>(rng.next_below(acts.size())));
                break;
            case 1: {
                const std::size_t i = rng.next_below(acts.size());
                acts.insert(acts.begin() + static_cast<long>(i), acts[i]);
                break;
            }
            case 2: {
                const std::size_t i = rng.next_below(acts.size());
                acts.insert(acts.begin() + static_cast<long>(i), "zz");
                break;
            }
            default:
                if (acts.size() >= 2) {
                    const std::size_t i = rng.next_below(acts.size() - 1);
                    std::swap(acts[i], acts[i + 1]);
                }
        }
    }
    if (acts.size() > max_events) acts.resize(max_events);
    return Trace(std::move(acts));
}

}  // namespace pmad::testing
