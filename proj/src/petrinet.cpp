#include "pmad/petrinet.hpp"

#include <algorithm>
#include <queue>
#include <unordered_map>

#include "pmad/error.hpp"
#include "pmad/rng.hpp"
#include "pmad/xml.hpp"

namespace pmad {

PetriNet::PetriNet(std::vector<std::string> places, std::vector<Transition> transitions,
                   std::vector<std::pair<std::string, std::string>> arcs, Marking initial,
                   Marking final_marking)
    : places_(std::move(places)),
      transitions_(std::move(transitions)),
      initial_(std::move(initial)),
      final_(std::move(final_marking)) {
    std::sort(places_.begin(), places_.end());
    if (std::adjacent_find(places_.begin(), places_.end()) != places_.end())
        throw FormatError("petri net: duplicate place id");
    std::sort(transitions_.begin(), transitions_.end(),
              [](const Transition& a, const Transition& b) { return a.id < b.id; });
    for (std::size_t i = 0; i + 1 < transitions_.size(); ++i)
        if (transitions_[i].id == transitions_[i + 1].id)
            throw FormatError("petri net: duplicate transition id '" + transitions_[i].id + "'");
    for (const auto& p : places_)
        for (const auto& t : transitions_)
            if (p == t.id) throw FormatError("petri net: node '" + p + "' is both place and transition");

    inputs_.resize(transitions_.size());
    outputs_.resize(transitions_.size());
    auto is_place = [&](const std::string& id) {
        return std::binary_search(places_.begin(), places_.end(), id);
    };
    auto find_transition = [&](const std::string& id) -> long {
        auto it = std::lower_bound(transitions_.begin(), transitions_.end(), id,
                                   [](const Transition& t, const std::string& v) { return t.id < v; });
        if (it == transitions_.end() || it->id != id) return -1;
        return it - transitions_.begin();
    };
    for (const auto& [source, target] : arcs) {
        const bool sp = is_place(source);
        const bool tp = is_place(target);
        const long st = find_transition(source);
        const long tt = find_transition(target);
        if (sp && tt >= 0) {
            inputs_[tt].push_back(place_index(source));
        } else if (st >= 0 && tp) {
            outputs_[st].push_back(place_index(target));
        } else if (sp && tp) {
            throw FormatError("petri net: arc " + source + " -> " + target +
                              " connects two places");
        } else if (st >= 0 && tt >= 0) {
            throw FormatError("petri net: arc " + source + " -> " + target +
                              " connects two transitions");
        } else {
            throw FormatError("petri net: dangling arc " + source + " -> " + target);
        }
    }
    for (auto& v : inputs_) std::sort(v.begin(), v.end());
    for (auto& v : outputs_) std::sort(v.begin(), v.end());

    for (std::size_t t = 0; t < transitions_.size(); ++t) {
        if (transitions_[t].silent())
            silent_.push_back(t);
        else
            by_label_[transitions_[t].label].push_back(t);
    }

    auto check_marking = [&](const Marking& m, const char* which) {
        if (m.empty()) throw FormatError(std::string("petri net: empty ") + which + " marking");
        for (const auto& [place, count] : m) {
            if (!is_place(place))
                throw FormatError(std::string("petri net: ") + which + " marking references unknown place '" +
                                  place + "'");
            if (count <= 0)
                throw FormatError(std::string("petri net: ") + which +
                                  " marking has non-positive count on '" + place + "'");
        }
    };
    check_marking(initial_, "initial");
    check_marking(final_, "final");
    dense_initial_ = to_dense(initial_);
    dense_final_ = to_dense(final_);
}

std::size_t PetriNet::place_index(const std::string& id) const {
    auto it = std::lower_bound(places_.begin(), places_.end(), id);
    if (it == places_.end() || *it != id)
        throw ContractError("petri net: unknown place '" + id + "'");
    return static_cast<std::size_t>(it - places_.begin());
}

std::size_t PetriNet::transition_index(const std::string& id) const {
    auto it = std::lower_bound(transitions_.begin(), transitions_.end(), id,
                               [](const Transition& t, const std::string& v) { return t.id < v; });
    if (it == transitions_.end() || it->id != id)
        throw ContractError("petri net: unknown transition '" + id + "'");
    return static_cast<std::size_t>(it - transitions_.begin());
}

std::vector<std::string> PetriNet::visible_labels() const {
    std::vector<std::string> out;
    out.reserve(by_label_.size());
    for (const auto& [label, _] : by_label_) out.push_back(label);
    return out;
}

const std::vector<std::size_t>* PetriNet::transitions_with_label(const std::string& label) const {
    auto it = by_label_.find(label);
    if (it == by_label_.end()) return nullptr;
    return &it->second;
}

std::vector<int> PetriNet::to_dense(const Marking& m) const {
    std::vector<int> dense(places_.size(), 0);
    for (const auto& [place, count] : m) dense[place_index(place)] = count;
    return dense;
}

Marking PetriNet::from_dense(const std::vector<int>& dense) const {
    Marking m;
    for (std::size_t i = 0; i < dense.size(); ++i)
        if (dense[i] > 0) m[places_[i]] = dense[i];
    return m;
}

bool PetriNet::dense_enabled(const std::vector<int>& dense, std::size_t t) const {
    for (std::size_t p : inputs_[t])
        if (dense[p] < 1) return false;
    return true;
}

void PetriNet::dense_fire(std::vector<int>& dense, std::size_t t) const {
    for (std::size_t p : inputs_[t]) --dense[p];
    for (std::size_t p : outputs_[t]) ++dense[p];
}

namespace {

void collect_net_children(const xml::Node& node, std::vector<const xml::Node*>& places,
                          std::vector<const xml::Node*>& transitions,
                          std::vector<const xml::Node*>& arcs) {
    for (const auto& child : node.children) {
        if (child.name == "place")
            places.push_back(&child);
        else if (child.name == "transition")
            transitions.push_back(&child);
        else if (child.name == "arc")
            arcs.push_back(&child);
        else if (child.name == "page")
            collect_net_children(child, places, transitions, arcs);
    }
}

std::string element_text(const xml::Node& node) {
    // trim whitespace
    std::string t = node.text;
    const auto begin = t.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    const auto end = t.find_last_not_of(" \t\r\n");
    return t.substr(begin, end - begin + 1);
}

}  // namespace

PetriNet parse_pnml(const std::string& text) {
    xml::Node root = xml::parse(text);
    const xml::Node* net = root.name == "net" ? &root : root.first_child("net");
    if (!net) throw FormatError("pnml: document has no net element");

    std::vector<const xml::Node*> place_els, transition_els, arc_els;
    collect_net_children(*net, place_els, transition_els, arc_els);

    std::vector<std::string> places;
    Marking initial;
    for (const auto* el : place_els) {
        const std::string* id = el->attribute("id");
        if (!id) throw FormatError("pnml: place without id");
        places.push_back(*id);
        if (const xml::Node* im = el->first_child("initialMarking")) {
            const xml::Node* text_el = im->first_child("text");
            int count = 1;
            if (text_el) {
                try {
                    count = std::stoi(element_text(*text_el));
                } catch (const std::exception&) {
                    throw FormatError("pnml: initialMarking of '" + *id + "' is not an integer");
                }
            }
            if (count > 0) initial[*id] = count;
        }
    }

    std::vector<Transition> transitions;
    for (const auto* el : transition_els) {
        const std::string* id = el->attribute("id");
        if (!id) throw FormatError("pnml: transition without id");
        std::string label;
        if (const xml::Node* name = el->first_child("name")) {
            if (const xml::Node* text_el = name->first_child("text")) label = element_text(*text_el);
        }
        // invisibility conventions seen in the wild
        if (label == "$invisible$") label.clear();
        if (const std::string* inv = el->attribute("invisible"))
            if (*inv == "true") label.clear();
        for (const auto& child : el->children) {
            if (child.name != "toolspecific") continue;
            if (const std::string* act = child.attribute("activity"))
                if (*act == "$invisible$") label.clear();
        }
        transitions.push_back({*id, label});
    }

    std::vector<std::pair<std::string, std::string>> arcs;
    for (const auto* el : arc_els) {
        const std::string* source = el->attribute("source");
        const std::string* target = el->attribute("target");
        if (!source || !target) {
            const std::string* id = el->attribute("id");
            throw FormatError("pnml: arc '" + (id ? *id : std::string("?")) +
                              "' lacks source or target");
        }
        arcs.emplace_back(*source, *target);
    }

    if (initial.empty()) throw FormatError("pnml: no initial marking derivable");

    // surface dangling arcs here, ahead of final-marking inference
    {
        std::set<std::string> node_ids(places.begin(), places.end());
        for (const auto& t : transitions) node_ids.insert(t.id);
        for (const auto& [source, target] : arcs) {
            if (!node_ids.count(source) || !node_ids.count(target))
                throw FormatError("pnml: dangling arc " + source + " -> " + target);
        }
    }

    Marking final_marking;
    const xml::Node* finals = net->first_child("finalmarkings");
    if (finals) {
        const xml::Node* marking_el = finals->first_child("marking");
        if (!marking_el) throw FormatError("pnml: finalmarkings without marking element");
        for (const auto* place_el : marking_el->children_named("place")) {
            const std::string* idref = place_el->attribute("idref");
            if (!idref) throw FormatError("pnml: finalmarkings place without idref");
            int count = 1;
            if (const xml::Node* text_el = place_el->first_child("text")) {
                try {
                    count = std::stoi(element_text(*text_el));
                } catch (const std::exception&) {
                    throw FormatError("pnml: final marking count of '" + *idref +
                                      "' is not an integer");
                }
            }
            if (count > 0) final_marking[*idref] = count;
        }
    } else {
        // Sink places: no outgoing arc (place -> transition).
        std::set<std::string> with_outgoing;
        for (const auto& [source, target] : arcs) {
            (void)target;
            with_outgoing.insert(source);
        }
        for (const auto& p : places)
            if (!with_outgoing.count(p)) final_marking[p] = 1;
    }
    if (final_marking.empty()) throw FormatError("pnml: no final marking derivable");

    return PetriNet(std::move(places), std::move(transitions), std::move(arcs),
                    std::move(initial), std::move(final_marking));
}

std::set<std::string> enabled(const PetriNet& net, const Marking& m) {
    std::vector<int> dense = net.to_dense(m);
    std::set<std::string> out;
    for (std::size_t t = 0; t < net.transitions().size(); ++t)
        if (net.dense_enabled(dense, t)) out.insert(net.transitions()[t].id);
    return out;
}

Marking fire(const PetriNet& net, const Marking& m, const std::string& transition_id) {
    const std::size_t t = net.transition_index(transition_id);
    std::vector<int> dense = net.to_dense(m);
    for (std::size_t p : net.inputs(t)) {
        if (dense[p] < 1)
            throw ContractError("fire: transition '" + transition_id +
                                "' not enabled, place '" + net.places()[p] + "' lacks a token");
    }
    net.dense_fire(dense, t);
    return net.from_dense(dense);
}

Trace random_walk(const PetriNet& net, std::uint64_t rng_seed, std::size_t max_steps) {
    Rng rng(rng_seed);
    std::vector<int> marking = net.dense_initial();
    const std::vector<int>& goal = net.dense_final();
    std::vector<std::string> visible;
    std::vector<std::size_t> enabled_now;

    for (std::size_t step = 0; step < max_steps; ++step) {
        if (marking == goal) return Trace(std::move(visible));
        enabled_now.clear();
        for (std::size_t t = 0; t < net.transitions().size(); ++t)
            if (net.dense_enabled(marking, t)) enabled_now.push_back(t);
        if (enabled_now.empty())
            throw SimulationError("random_walk: deadlock before reaching the final marking",
                                  std::move(visible));
        const std::size_t t = enabled_now[rng.next_below(enabled_now.size())];
        net.dense_fire(marking, t);
        if (!net.transitions()[t].silent()) visible.push_back(net.transitions()[t].label);
    }
    if (marking == goal) return Trace(std::move(visible));
    throw SimulationError("random_walk: max_steps exhausted before reaching the final marking",
                          std::move(visible));
}

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

}  // namespace

double min_model_path_cost(const PetriNet& net, const MoveCost& cost, std::size_t state_cap) {
    cost.validate();
    using Entry = std::pair<double, std::uint64_t>;  // cost, tiebreak counter
    std::priority_queue<std::pair<Entry, std::vector<int>>,
                        std::vector<std::pair<Entry, std::vector<int>>>, std::greater<>>
        queue;
    std::unordered_map<std::vector<int>, double, DenseHash> best;
    std::uint64_t counter = 0;

    std::vector<int> start = net.dense_initial();
    const std::vector<int>& goal = net.dense_final();
    queue.push({{0.0, counter++}, start});
    best[start] = 0.0;
    std::size_t expanded = 0;

    while (!queue.empty()) {
        auto [entry, marking] = queue.top();
        queue.pop();
        const double c = entry.first;
        auto it = best.find(marking);
        if (it != best.end() && c > it->second) continue;
        if (marking == goal) return c;
        if (++expanded > state_cap)
            throw SearchError("min_model_path_cost: state cap of " + std::to_string(state_cap) +
                              " markings exceeded");
        for (std::size_t t = 0; t < net.transitions().size(); ++t) {
            if (!net.dense_enabled(marking, t)) continue;
            std::vector<int> next = marking;
            net.dense_fire(next, t);
            const double step = net.transitions()[t].silent() ? cost.silent_move : cost.model_move;
            const double nc = c + step;
            auto found = best.find(next);
            if (found == best.end() || nc < found->second) {
                best[next] = nc;
                queue.push({{nc, counter++}, std::move(next)});
            }
        }
    }
    throw ModelError("min_model_path_cost: final marking unreachable from initial marking");
}

}  // namespace pmad
