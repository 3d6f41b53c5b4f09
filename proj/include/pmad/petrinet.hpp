#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pmad/eventlog.hpp"
#include "pmad/movecost.hpp"

namespace pmad {

// Token multiset over place ids; stored entries are strictly positive,
// an absent place means zero tokens.
using Marking = std::map<std::string, int>;

struct Transition {
    std::string id;
    std::string label;  // empty = silent
    bool silent() const { return label.empty(); }
};

// Labeled Petri net with ordinary (weight-1) arcs. Immutable after
// construction; places and transitions are kept id-sorted so every
// algorithm has a stable iteration order.
class PetriNet {
public:
    PetriNet(std::vector<std::string> places, std::vector<Transition> transitions,
             std::vector<std::pair<std::string, std::string>> arcs, Marking initial,
             Marking final_marking);

    const std::vector<std::string>& places() const { return places_; }
    const std::vector<Transition>& transitions() const { return transitions_; }
    const Marking& initial_marking() const { return initial_; }
    const Marking& final_marking() const { return final_; }

    std::size_t place_index(const std::string& id) const;
    std::size_t transition_index(const std::string& id) const;

    // Input/output place indexes per transition index.
    const std::vector<std::size_t>& inputs(std::size_t t) const { return inputs_[t]; }
    const std::vector<std::size_t>& outputs(std::size_t t) const { return outputs_[t]; }

    // Sorted distinct visible labels.
    std::vector<std::string> visible_labels() const;
    // Transition indexes carrying a given label, id-sorted.
    const std::vector<std::size_t>* transitions_with_label(const std::string& label) const;
    // Silent transition indexes, id-sorted.
    const std::vector<std::size_t>& silent_transitions() const { return silent_; }

    std::vector<int> to_dense(const Marking& m) const;
    Marking from_dense(const std::vector<int>& dense) const;
    std::vector<int> dense_initial() const { return dense_initial_; }
    const std::vector<int>& dense_final() const { return dense_final_; }

    bool dense_enabled(const std::vector<int>& dense, std::size_t t) const;
    void dense_fire(std::vector<int>& dense, std::size_t t) const;

private:
    std::vector<std::string> places_;
    std::vector<Transition> transitions_;
    std::vector<std::vector<std::size_t>> inputs_;
    std::vector<std::vector<std::size_t>> outputs_;
    std::map<std::string, std::vector<std::size_t>> by_label_;
    std::vector<std::size_t> silent_;
    Marking initial_;
    Marking final_;
    std::vector<int> dense_initial_;
    std::vector<int> dense_final_;
};

// PNML subset: net/page/place/transition/arc, place initialMarking counts,
// transition name text as the label (empty or "$invisible$" means silent),
// optional finalmarkings section. Without one, the final marking is
// inferred as one token on each sink place.
PetriNet parse_pnml(const std::string& text);

// Transitions whose every input place holds at least one token.
std::set<std::string> enabled(const PetriNet& net, const Marking& m);

// Consumes one token per input place, produces one per output place.
Marking fire(const PetriNet& net, const Marking& m, const std::string& transition_id);

// Fires uniformly random enabled transitions until the final marking is
// reached; silent transitions fire but emit nothing.
Trace random_walk(const PetriNet& net, std::uint64_t rng_seed, std::size_t max_steps = 1000);

// Minimal total model-move cost of any initial -> final firing sequence,
// by uniform-cost search over markings. Expanding more than state_cap
// markings is a hard error.
double min_model_path_cost(const PetriNet& net, const MoveCost& cost = {},
                           std::size_t state_cap = 50000);

}  // namespace pmad
