#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pmad/eventlog.hpp"
#include "pmad/petrinet.hpp"

namespace pmad {

// Probabilistic control-flow corruption. Operators run in the fixed order
// skip, duplicate, swap with independent coin flips, so the chance of at
// least one anomaly is 1 - (1-p_skip)(1-p_duplicate)(1-p_swap) when each
// operator is applicable. Eligibility can be scoped to an activity subset.
struct InjectionConfig {
    double p_skip = 0.0;
    double p_duplicate = 0.0;
    double p_swap = 0.0;
    std::optional<std::set<std::string>> target_activities;

    void validate() const;
};

struct InjectionOutcome {
    Trace trace;
    int operators_applied = 0;
};

// skip removes one uniformly chosen eligible occurrence; duplicate copies
// one next to itself; swap exchanges an adjacent eligible pair.
// Inapplicable operators are skipped silently.
InjectionOutcome inject_with_stats(const Trace& trace, const InjectionConfig& config,
                                   std::uint64_t rng_seed);
Trace inject(const Trace& trace, const InjectionConfig& config, std::uint64_t rng_seed);

// n_normal + n_anomalous random walks, injected with the pool's config and
// labeled by pool. Walk and injection seeds derive from rng_seed per index.
std::pair<std::vector<Trace>, std::vector<Trace>> generate_corpus(
    const PetriNet& net, std::size_t n_normal, std::size_t n_anomalous,
    const InjectionConfig& normal_config, const InjectionConfig& anomalous_config,
    std::uint64_t rng_seed, std::size_t max_steps = 1000);

}  // namespace pmad
