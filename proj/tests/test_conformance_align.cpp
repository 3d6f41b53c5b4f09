#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "pmad/conformance_align.hpp"
#include "pmad/error.hpp"

using namespace pmad;
using namespace pmad::testing;

TEST_CASE("a fitting trace aligns with synchronous moves only") {
    Alignment a = optimal_alignment(seq_net(), Trace({"a", "b", "c"}));
    CHECK(a.cost == doctest::Approx(0.0));
    REQUIRE(a.moves.size() == 3);
    for (const auto& move : a.moves) CHECK(move.kind == Move::Kind::Sync);
}

TEST_CASE("a skipped activity becomes a model move") {
    Alignment a = optimal_alignment(seq_net(), Trace({"a", "c"}));
    CHECK(a.cost == doctest::Approx(1.0));
    REQUIRE(a.moves.size() == 3);
    CHECK(a.moves[0].kind == Move::Kind::Sync);
    CHECK(a.moves[0].activity == "a");
    CHECK(a.moves[1].kind == Move::Kind::ModelVisible);
    CHECK(a.moves[1].activity == "b");
    CHECK(a.moves[2].kind == Move::Kind::Sync);
    CHECK(a.moves[2].activity == "c");
}

TEST_CASE("an unknown activity becomes a log move") {
    Alignment a = optimal_alignment(seq_net(), Trace({"a", "b", "c", "d"}));
    CHECK(a.cost == doctest::Approx(1.0));
    REQUIRE(a.moves.size() == 4);
    CHECK(a.moves[3].kind == Move::Kind::LogOnly);
    CHECK(a.moves[3].activity == "d");
}

TEST_CASE("worst_case_cost adds log moves to the cheapest model path") {
    PetriNet net = seq_net();
    CHECK(worst_case_cost(net, Trace({"a", "c"})) == doctest::Approx(5.0));
    CHECK(worst_case_cost(net, Trace(std::vector<std::string>{})) == doctest::Approx(3.0));
    CHECK(worst_case_cost(net, Trace({"a", "b", "c", "d"})) == doctest::Approx(7.0));
}

TEST_CASE("alignment fitness matches the best/worst ratio") {
    PetriNet net = seq_net();
    CHECK(alignment_fitness_trace(net, Trace({"a", "b", "c"})) == doctest::Approx(1.0));
    CHECK(alignment_fitness_trace(net, Trace({"a", "c"})) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(alignment_fitness_trace(net, Trace({"a", "b", "c", "d"})) ==
          doctest::Approx(1.0 - 1.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("log fitness is the trace mean and permutation-invariant") {
    PetriNet net = seq_net();
    EventLog log;
    log.traces = {Trace({"a", "b", "c"}), Trace({"a", "c"})};
    CHECK(alignment_fitness_log(net, log) == doctest::Approx(0.9).epsilon(1e-12));
    EventLog reversed;
    reversed.traces = {log.traces[1], log.traces[0]};
    CHECK(alignment_fitness_log(net, reversed) == alignment_fitness_log(net, log));
    CHECK_THROWS_AS(alignment_fitness_log(net, EventLog{}), ContractError);
}

TEST_CASE("per-activity costs attribute each mismatch to its activity") {
    PetriNet net = seq_net();
    MoveCost cost;
    Alignment skip_b = optimal_alignment(net, Trace({"a", "c"}), cost);
    auto costs = per_activity_cost_trace(skip_b, cost, {"a", "b", "c"});
    CHECK(costs["a"] == doctest::Approx(0.0));
    CHECK(costs["b"] == doctest::Approx(1.0));
    CHECK(costs["c"] == doctest::Approx(0.0));

    Alignment unknown = optimal_alignment(net, Trace({"a", "b", "c", "d"}), cost);
    auto costs2 = per_activity_cost_trace(unknown, cost, {"a", "b", "c", "d"});
    CHECK(costs2["a"] == doctest::Approx(0.0));
    CHECK(costs2["b"] == doctest::Approx(0.0));
    CHECK(costs2["c"] == doctest::Approx(0.0));
    CHECK(costs2["d"] == doctest::Approx(1.0));
}

TEST_CASE("per-activity log costs add up over traces and cover net labels") {
    PetriNet net = seq_net();
    EventLog log;
    log.traces = {Trace({"a", "c"}), Trace({"a", "c"})};
    auto costs = per_activity_cost_log(net, log);
    CHECK(costs["a"] == doctest::Approx(0.0));
    CHECK(costs["b"] == doctest::Approx(2.0));
    CHECK(costs["c"] == doctest::Approx(0.0));

    EventLog fitting;
    fitting.traces = {Trace({"a", "b", "c"})};
    auto zero = per_activity_cost_log(net, fitting);
    for (const auto& [activity, value] : zero) CHECK(value == doctest::Approx(0.0));
    CHECK(zero.count("b") == 1);  // net label present even if unproblematic
}

TEST_CASE("alignments satisfy both projection invariants") {
    Rng rng(17);
    for (int i = 0; i < 40; ++i) {
        PetriNet net = random_block_net(rng);
        Trace trace = random_trace_for(net, rng, 0.5);
        Alignment a = optimal_alignment(net, trace);

        std::vector<std::string> log_projection;
        for (const auto& move : a.moves)
            if (move.has_log_part()) log_projection.push_back(move.activity);
        CHECK(log_projection == trace.activities());

        std::vector<int> marking = net.dense_initial();
        for (const auto& move : a.moves) {
            if (!move.has_model_part()) continue;
            const std::size_t t = net.transition_index(move.transition_id);
            REQUIRE(net.dense_enabled(marking, t));
            net.dense_fire(marking, t);
        }
        CHECK(marking == net.dense_final());
    }
}

TEST_CASE("optimal costs match the brute-force oracle on random nets") {
    Rng rng(91);
    MoveCost cost;
    for (int i = 0; i < 60; ++i) {
        PetriNet net = random_block_net(rng);
        Trace trace = random_trace_for(net, rng, 0.4);
        const double expected = brute_force_alignment_cost(net, trace, cost);
        const double actual = optimal_alignment(net, trace, cost).cost;
        CHECK(actual == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("per-activity costs decompose the optimal cost when silent moves are free") {
    Rng rng(123);
    MoveCost cost;  // silent_move = 0
    for (int i = 0; i < 50; ++i) {
        PetriNet net = random_block_net(rng);
        Trace trace = random_trace_for(net, rng, 0.5);
        Alignment a = optimal_alignment(net, trace, cost);
        std::set<std::string> activity_set;
        for (const auto& label : net.visible_labels()) activity_set.insert(label);
        for (const auto& activity : trace.activities()) activity_set.insert(activity);
        auto costs = per_activity_cost_trace(a, cost, activity_set);
        double total = 0.0;
        for (const auto& [activity, value] : costs) total += value;
        CHECK(total == doctest::Approx(a.cost).epsilon(1e-12));
    }
}

TEST_CASE("the optimal cost never exceeds the worst case") {
    Rng rng(204);
    for (int i = 0; i < 40; ++i) {
        PetriNet net = random_block_net(rng);
        Trace trace = random_trace_for(net, rng, 0.6);
        const double best = optimal_alignment(net, trace).cost;
        const double worst = worst_case_cost(net, trace);
        CHECK(best <= worst + 1e-12);
        const double fitness = alignment_fitness_trace(net, trace);
        CHECK(fitness >= 0.0);
        CHECK(fitness <= 1.0);
    }
}

TEST_CASE("appending an unknown activity strictly drops fitness from 1.0") {
    PetriNet net = seq_net();
    Trace fitting({"a", "b", "c"});
    CHECK(alignment_fitness_trace(net, fitting) == doctest::Approx(1.0));
    Trace extended({"a", "b", "c", "zz"});
    CHECK(alignment_fitness_trace(net, extended) < 1.0);
}

TEST_CASE("the two-row rendering matches the matrix layout") {
    Alignment a = optimal_alignment(seq_net(), Trace({"a", "c"}));
    const std::string text = render(a);
    CHECK(text == "a | >> | c\na | b  | c\n");
}

TEST_CASE("costs with a zero log or model move are rejected") {
    MoveCost bad;
    bad.log_move = 0.0;
    CHECK_THROWS_AS(optimal_alignment(seq_net(), Trace({"a"}), bad), ContractError);
}

TEST_CASE("the state cap aborts oversized alignment searches") {
    PetriNet net = parallel_net();
    CHECK_THROWS_AS(optimal_alignment(net, Trace({"a", "b", "c", "d"}), MoveCost{}, 2),
                    SearchError);
}
