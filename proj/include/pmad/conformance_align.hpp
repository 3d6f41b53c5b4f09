#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "pmad/eventlog.hpp"
#include "pmad/movecost.hpp"
#include "pmad/petrinet.hpp"

namespace pmad {

// One column of the two-row alignment matrix. (skip, skip) never occurs.
struct Move {
    enum class Kind { Sync, LogOnly, ModelVisible, ModelSilent };
    Kind kind;
    std::string activity;       // log activity, or model label for visible model moves
    std::string transition_id;  // set for moves with a model part

    bool has_log_part() const { return kind == Kind::Sync || kind == Kind::LogOnly; }
    bool has_model_part() const { return kind != Kind::LogOnly; }
};

struct Alignment {
    std::vector<Move> moves;
    double cost = 0.0;
};

// Minimum-cost alignment by uniform-cost search over (trace position,
// marking) states. Equal-cost ties are broken lexicographically over the
// move sequence, preferring synchronous > silent > model > log moves and
// then the id-sorted transition order, so the result is deterministic.
Alignment optimal_alignment(const PetriNet& net, const Trace& trace, const MoveCost& cost = {},
                            std::size_t state_cap = 50000);

// |trace| * log_move plus the cheapest model path, i.e. the cost of
// aligning every event as a log move and walking the cheapest full path.
double worst_case_cost(const PetriNet& net, const Trace& trace, const MoveCost& cost = {});

// 1 - best/worst cost ratio, clamped to [0,1]. A zero worst-case cost
// (empty trace against a zero-cost model path) yields 1.0 with a warning.
double alignment_fitness_trace(const PetriNet& net, const Trace& trace,
                               const MoveCost& cost = {});

double alignment_fitness_log(const PetriNet& net, const EventLog& log, const MoveCost& cost = {});

// Total move cost attributed to each activity of activity_set; a
// synchronous move is counted once; silent moves belong to no activity.
std::map<std::string, double> per_activity_cost_trace(const Alignment& alignment,
                                                      const MoveCost& cost,
                                                      const std::set<std::string>& activity_set);

// Summed per-trace costs over the activity set of the log united with the
// net's visible labels.
std::map<std::string, double> per_activity_cost_log(const PetriNet& net, const EventLog& log,
                                                    const MoveCost& cost = {});

// Two-row rendering: log row over model row, ">>" marks a skipped side.
std::string render(const Alignment& alignment);

}  // namespace pmad
