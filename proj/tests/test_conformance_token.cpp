#include "doctest.h"
#include "helpers.hpp"
#include "pmad/conformance_token.hpp"
#include "pmad/error.hpp"

using namespace pmad;
using namespace pmad::testing;

TEST_CASE("replay of a fitting trace scores a perfect fitness") {
    auto r = replay_trace(seq_net(), Trace({"a", "b", "c"}));
    CHECK(r.produced == 4);
    CHECK(r.consumed == 4);
    CHECK(r.missing == 0);
    CHECK(r.remaining == 0);
    CHECK(r.fitness == doctest::Approx(1.0));
}

TEST_CASE("replay tracks missing and remaining tokens on a skipped activity") {
    auto r = replay_trace(seq_net(), Trace({"a", "c"}));
    CHECK(r.produced == 3);
    CHECK(r.consumed == 3);
    CHECK(r.missing == 1);
    CHECK(r.remaining == 1);
    CHECK(r.fitness == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("replay of the empty trace consumes nothing but the conventions") {
    auto r = replay_trace(seq_net(), Trace(std::vector<std::string>{}));
    CHECK(r.produced == 1);
    CHECK(r.consumed == 1);
    CHECK(r.missing == 1);
    CHECK(r.remaining == 1);
    CHECK(r.fitness == doctest::Approx(0.0));
}

TEST_CASE("unknown activities are tallied apart and leave tokens alone") {
    auto r = replay_trace(seq_net(), Trace({"a", "zz", "b", "c"}));
    CHECK(r.unknown_activities == 1);
    CHECK(r.missing == 0);
    CHECK(r.remaining == 0);
    CHECK(r.fitness == doctest::Approx(1.0));
    CHECK(r.fired_per_activity.count("zz") == 0);
}

TEST_CASE("silent bridging routes around tau transitions") {
    // a, tau, b in sequence: trace <a,b> must replay cleanly
    PetriNet net({"p0", "p1", "p2", "p3"}, {{"ta", "a"}, {"tx", ""}, {"tb", "b"}},
                 {{"p0", "ta"}, {"ta", "p1"}, {"p1", "tx"}, {"tx", "p2"}, {"p2", "tb"},
                  {"tb", "p3"}},
                 {{"p0", 1}}, {{"p3", 1}});
    auto r = replay_trace(net, Trace({"a", "b"}));
    CHECK(r.missing == 0);
    CHECK(r.remaining == 0);
    CHECK(r.fitness == doctest::Approx(1.0));
}

TEST_CASE("silent bridging also covers the final marking") {
    // a then tau to the sink
    PetriNet net({"p0", "p1", "p2"}, {{"ta", "a"}, {"tx", ""}},
                 {{"p0", "ta"}, {"ta", "p1"}, {"p1", "tx"}, {"tx", "p2"}},
                 {{"p0", 1}}, {{"p2", 1}});
    auto r = replay_trace(net, Trace({"a"}));
    CHECK(r.missing == 0);
    CHECK(r.remaining == 0);
    CHECK(r.fitness == doctest::Approx(1.0));
}

TEST_CASE("replay_log averages per-trace fitness and sums counters") {
    EventLog log;
    log.traces = {Trace({"a", "b", "c"}), Trace({"a", "c"})};
    auto r = replay_log(seq_net(), log);
    CHECK(r.fitness == doctest::Approx((1.0 + 2.0 / 3.0) / 2.0).epsilon(1e-12));
    CHECK(r.missing == 1);
    CHECK(r.remaining == 1);
    CHECK(r.fired_per_activity["a"] == 2);
    CHECK(r.fired_per_activity["b"] == 2);  // once natural, once forced
    CHECK(r.fired_per_activity["c"] == 2);
}

TEST_CASE("replay_log on fitting traces is perfect") {
    EventLog log;
    log.traces = {Trace({"a", "b", "c"}), Trace({"a", "b", "c"})};
    auto r = replay_log(seq_net(), log);
    CHECK(r.fitness == doctest::Approx(1.0));
    CHECK(r.missing == 0);
    CHECK(r.remaining == 0);
}

TEST_CASE("replay_log rejects the empty log") {
    CHECK_THROWS_AS(replay_log(seq_net(), EventLog{}), ContractError);
}

TEST_CASE("replay counters are additive over traces") {
    EventLog log;
    log.traces = {Trace({"a"}), Trace({"a", "c"}), Trace({"b", "b", "c"})};
    auto total = replay_log(seq_net(), log);
    long long p = 0, c = 0, m = 0, r = 0;
    double fitness = 0;
    for (const auto& trace : log.traces) {
        auto one = replay_trace(seq_net(), trace);
        p += one.produced;
        c += one.consumed;
        m += one.missing;
        r += one.remaining;
        fitness += one.fitness;
    }
    CHECK(total.produced == p);
    CHECK(total.consumed == c);
    CHECK(total.missing == m);
    CHECK(total.remaining == r);
    CHECK(total.fitness == doctest::Approx(fitness / 3.0));
}

TEST_CASE("a firing sequence replays with zero missing and remaining") {
    Rng rng(21);
    for (int i = 0; i < 30; ++i) {
        PetriNet net = random_block_net(rng);
        Trace walk = random_walk(net, rng.next_u64(), 200);
        auto r = replay_trace(net, walk);
        CHECK(r.missing == 0);
        CHECK(r.remaining == 0);
        CHECK(r.fitness == doctest::Approx(1.0));
    }
}

TEST_CASE("deleting a required activity strictly decreases token fitness") {
    Rng rng(33);
    for (int i = 0; i < 25; ++i) {
        // random pure sequence net of 3..6 activities
        const std::size_t n = 3 + rng.next_below(4);
        std::vector<std::string> places;
        std::vector<Transition> transitions;
        std::vector<Arc> arcs;
        std::vector<std::string> labels;
        for (std::size_t k = 0; k <= n; ++k) places.push_back("p" + std::to_string(k));
        for (std::size_t k = 0; k < n; ++k) {
            const std::string label(1, static_cast<char>('a' + k));
            labels.push_back(label);
            const std::string id = "t" + std::to_string(k);
            transitions.push_back({id, label});
            arcs.push_back({"p" + std::to_string(k), id});
            arcs.push_back({id, "p" + std::to_string(k + 1)});
        }
        PetriNet net(places, transitions, arcs, {{"p0", 1}}, {{"p" + std::to_string(n), 1}});

        const double fit = replay_trace(net, Trace(labels)).fitness;
        CHECK(fit == doctest::Approx(1.0));
        std::vector<std::string> corrupted = labels;
        corrupted.erase(corrupted.begin() + static_cast<long>(rng.next_below(corrupted.size())));
        CHECK(replay_trace(net, Trace(corrupted)).fitness < fit);
    }
}
