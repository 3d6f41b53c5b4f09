#pragma once

#include <map>
#include <string>

#include "pmad/eventlog.hpp"
#include "pmad/petrinet.hpp"

namespace pmad {

// Token-based replay counters. Initial-marking tokens count as produced
// and final-marking tokens as consumed, so p >= 1 and c >= 1 always.
struct ReplayResult {
    long long produced = 0;
    long long consumed = 0;
    long long missing = 0;
    long long remaining = 0;
    std::map<std::string, long long> fired_per_activity;
    long long unknown_activities = 0;
    double fitness = 0.0;
};

// Forces the trace through the net. Unknown activities are tallied apart
// and leave the token counters untouched. Before declaring tokens missing,
// a breadth-first search over at most max_bridge silent firings tries to
// enable the target transition; the same bridging runs once more at trace
// end to cover the final marking.
ReplayResult replay_trace(const PetriNet& net, const Trace& trace, std::size_t max_bridge = 8);

// Counters summed over traces; fitness is the mean of per-trace fitness.
ReplayResult replay_log(const PetriNet& net, const EventLog& log, std::size_t max_bridge = 8);

}  // namespace pmad
