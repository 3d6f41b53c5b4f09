#include "pmad/synth.hpp"

#include <algorithm>

#include "pmad/error.hpp"
#include "pmad/rng.hpp"

namespace pmad {

void InjectionConfig::validate() const {
    for (double p : {p_skip, p_duplicate, p_swap})
        if (!(p >= 0.0 && p <= 1.0))
            throw ArgumentError("injection config: probabilities must be in [0,1]");
}

namespace {

bool eligible(const InjectionConfig& config, const std::string& activity) {
    return !config.target_activities || config.target_activities->count(activity) > 0;
}

std::vector<std::size_t> eligible_positions(const InjectionConfig& config,
                                            const std::vector<std::string>& acts) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < acts.size(); ++i)
        if (eligible(config, acts[i])) out.push_back(i);
    return out;
}

}  // namespace

InjectionOutcome inject_with_stats(const Trace& trace, const InjectionConfig& config,
                                   std::uint64_t rng_seed) {
    config.validate();
    Rng rng(rng_seed);
    std::vector<std::string> acts = trace.activities();
    int applied = 0;

    // skip
    if (rng.next_unit() < config.p_skip) {
        auto positions = eligible_positions(config, acts);
        if (!positions.empty()) {
            acts.erase(acts.begin() +
                       static_cast<long>(positions[rng.next_below(positions.size())]));
            ++applied;
        }
    }
    // duplicate
    if (rng.next_unit() < config.p_duplicate) {
        auto positions = eligible_positions(config, acts);
        if (!positions.empty()) {
            const std::size_t pos = positions[rng.next_below(positions.size())];
            acts.insert(acts.begin() + static_cast<long>(pos), acts[pos]);
            ++applied;
        }
    }
    // swap adjacent eligible pair
    if (rng.next_unit() < config.p_swap) {
        std::vector<std::size_t> pairs;
        for (std::size_t i = 0; i + 1 < acts.size(); ++i)
            if (eligible(config, acts[i]) && eligible(config, acts[i + 1])) pairs.push_back(i);
        if (!pairs.empty()) {
            const std::size_t i = pairs[rng.next_below(pairs.size())];
            std::swap(acts[i], acts[i + 1]);
            ++applied;
        }
    }

    return {Trace(std::move(acts), trace.case_id(), trace.label()), applied};
}

Trace inject(const Trace& trace, const InjectionConfig& config, std::uint64_t rng_seed) {
    return inject_with_stats(trace, config, rng_seed).trace;
}

std::pair<std::vector<Trace>, std::vector<Trace>> generate_corpus(
    const PetriNet& net, std::size_t n_normal, std::size_t n_anomalous,
    const InjectionConfig& normal_config, const InjectionConfig& anomalous_config,
    std::uint64_t rng_seed, std::size_t max_steps) {
    if (n_normal < 1 || n_anomalous < 1)
        throw ArgumentError("generate_corpus: trace counts must be >= 1");
    normal_config.validate();
    anomalous_config.validate();

    std::vector<Trace> normal, anomalous;
    normal.reserve(n_normal);
    anomalous.reserve(n_anomalous);
    for (std::size_t i = 0; i < n_normal + n_anomalous; ++i) {
        const bool is_normal = i < n_normal;
        Trace walked;
        try {
            walked = random_walk(net, derive_seed(rng_seed, "walk_" + std::to_string(i)),
                                 max_steps);
        } catch (const SimulationError& e) {
            throw SimulationError("generate_corpus: walk " + std::to_string(i) + ": " + e.what(),
                                  e.partial_trace());
        }
        const InjectionConfig& config = is_normal ? normal_config : anomalous_config;
        Trace injected = inject(
            Trace(walked.activities(), "t" + std::to_string(i),
                  is_normal ? Label::Normal : Label::Anomalous),
            config, derive_seed(rng_seed, "inject_" + std::to_string(i)));
        (is_normal ? normal : anomalous).push_back(std::move(injected));
    }
    return {std::move(normal), std::move(anomalous)};
}

}  // namespace pmad
