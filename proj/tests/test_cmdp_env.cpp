#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "swarmcc/cmdp_env.hpp"

using namespace swarmcc;

namespace {

// Finds a seed whose Phase I leaves exactly `holders` message holders.
std::uint64_t seed_with_holders(const ScenarioConfig& cfg, CncEnv& env, SwarmState& state,
                                RandomStream& pos_rng, int holders) {
    for (std::uint64_t seed = 1; seed < 100000; ++seed) {
        RandomStream rng(seed);
        state = sample_initial_positions(cfg, pos_rng);
        env.begin_round(state, rng);
        if (static_cast<int>(env.trace().phase1_success.size()) == holders) return seed;
    }
    FAIL("no seed produced the requested holder count");
    return 0;
}

}  // namespace

TEST_CASE("scheme action space sizes") {
    CHECK(SchemeSpec{Scheme::Unicast, 5}.action_count() == 5);
    CHECK(SchemeSpec{Scheme::Broadcast, 5}.action_count() == 2);
    CHECK(SchemeSpec{Scheme::Hybrid, 5}.action_count() == 6);
}

TEST_CASE("decode_action mapping") {
    const SchemeSpec uni{Scheme::Unicast, 5};
    const SchemeSpec b{Scheme::Broadcast, 5};
    const SchemeSpec hyb{Scheme::Hybrid, 5};

    SECTION("unicast indices enumerate the other UAVs in ascending order") {
        const SlotAction a = decode_action(2, 0, uni);
        CHECK(a.mode == SlotMode::Unicast);
        CHECK(a.target == 0);
        CHECK(decode_action(2, 1, uni).target == 1);
        CHECK(decode_action(2, 2, uni).target == 3);
        CHECK(decode_action(2, 3, uni).target == 4);
        CHECK(decode_action(2, 4, uni).mode == SlotMode::Idle);
    }
    SECTION("broadcast scheme") {
        CHECK(decode_action(0, 0, b).mode == SlotMode::Broadcast);
        CHECK(decode_action(0, 1, b).mode == SlotMode::Idle);
    }
    SECTION("hybrid scheme") {
        CHECK(decode_action(1, 0, hyb).target == 0);
        CHECK(decode_action(1, 3, hyb).target == 4);
        CHECK(decode_action(1, 4, hyb).mode == SlotMode::Broadcast);
        CHECK(decode_action(1, 5, hyb).mode == SlotMode::Idle);
    }
    SECTION("out of range index") {
        CHECK_THROWS_AS(decode_action(0, 6, hyb), std::out_of_range);
        CHECK_THROWS_AS(decode_action(0, 2, b), std::out_of_range);
    }
    SECTION("decode is a bijection onto the declared action set") {
        for (int agent = 0; agent < 5; ++agent) {
            for (const SchemeSpec& spec : {uni, b, hyb}) {
                std::set<std::pair<int, int>> seen;
                for (int idx = 0; idx < spec.action_count(); ++idx) {
                    const SlotAction a = decode_action(agent, idx, spec);
                    if (a.mode == SlotMode::Unicast) REQUIRE(a.target != agent);
                    seen.insert({static_cast<int>(a.mode), a.target});
                }
                REQUIRE(seen.size() == static_cast<std::size_t>(spec.action_count()));
            }
        }
    }
}

TEST_CASE("observation normalization") {
    ScenarioConfig cfg;
    CncEnv env(cfg, Scheme::Broadcast, 3.0);
    RandomStream pos_rng(50);
    SwarmState state = sample_initial_positions(cfg, pos_rng);
    state.positions[1] = {60.0, 0.0, 300.0};
    RandomStream rng(1);
    env.begin_round(state, rng);
    const Observation obs = env.observation();
    REQUIRE(obs.n_nodes == 5);
    CHECK(obs.at(1, 0) == 1.0);  // node id
    CHECK(obs.at(1, 1) == Catch::Approx(1.0));
    CHECK(obs.at(1, 2) == Catch::Approx(0.0));
    CHECK(obs.at(1, 3) == Catch::Approx(1.0));
    // nothing spent yet: headroom is the full budget on every node
    for (int n = 0; n < 5; ++n) CHECK(obs.at(n, 5) == Catch::Approx(3.0));
}

TEST_CASE("round with empty phase1 set is a no-op") {
    ScenarioConfig cfg;
    cfg.gamma1 = 1e30;
    CncEnv env(cfg, Scheme::Broadcast, 3.0);
    RandomStream pos_rng(51), rng(52);
    SwarmState state = sample_initial_positions(cfg, pos_rng);
    CHECK_FALSE(env.begin_round(state, rng));
    CHECK(env.terminal());
    CHECK_THROWS_AS(env.actors(), std::logic_error);
}

TEST_CASE("all-idle slot charges only the listeners") {
    ScenarioConfig cfg;
    CncEnv env(cfg, Scheme::Broadcast, 3.0);
    RandomStream pos_rng(60);
    SwarmState state;
    const std::uint64_t seed = seed_with_holders(cfg, env, state, pos_rng, 2);
    INFO("seed " << seed);
    RandomStream rng(seed + 1000000);
    std::map<int, int> idle_actions;
    for (int a : env.actors()) idle_actions[a] = 1;  // broadcast scheme: 1 = idle
    const StepResult sr = env.step(idle_actions, rng);
    CHECK(sr.reward == 0.0);
    // three UAVs still listening: 3 * E_r / E_b
    CHECK(sr.cost == Catch::Approx(3.0 * 12.5 / 155.0116).epsilon(1e-4));
    CHECK(sr.cost == Catch::Approx(0.242).margin(0.001));
    CHECK(sr.slot_index == 1);
    CHECK_FALSE(sr.terminal);
}

TEST_CASE("terminal fires at the final slot even with failures left") {
    ScenarioConfig cfg;
    CncEnv env(cfg, Scheme::Broadcast, 3.0);
    RandomStream pos_rng(61);
    SwarmState state;
    seed_with_holders(cfg, env, state, pos_rng, 1);
    RandomStream rng(7);
    int steps = 0;
    while (!env.terminal()) {
        std::map<int, int> idle;
        for (int a : env.actors()) idle[a] = 1;
        const StepResult sr = env.step(idle, rng);
        ++steps;
        if (steps < cfg.n_slots) CHECK_FALSE(sr.terminal);
    }
    CHECK(steps == cfg.n_slots);
}

TEST_CASE("reward counts newly delivered UAVs and is shared") {
    ScenarioConfig cfg;
    CncEnv env(cfg, Scheme::Broadcast, 3.0);
    RandomStream pos_rng(62);
    // Search for a seed where a first-slot broadcast delivers at least one UAV.
    for (std::uint64_t seed = 1; seed < 100000; ++seed) {
        SwarmState state = sample_initial_positions(cfg, pos_rng);
        RandomStream rng(seed);
        if (!env.begin_round(state, rng)) continue;
        const std::vector<int> actors = env.actors();
        std::map<int, int> act;
        for (int a : actors) act[a] = 0;  // broadcast
        const StepResult sr = env.step(act, rng);
        if (sr.newly_successful.empty()) continue;
        CHECK(sr.reward == static_cast<double>(sr.newly_successful.size()));
        // newly delivered UAVs join the actor set of the next slot
        if (!sr.terminal) {
            for (int fresh : sr.newly_successful)
                CHECK(std::find(sr.next_actors.begin(), sr.next_actors.end(), fresh) !=
                      sr.next_actors.end());
        }
        return;
    }
    FAIL("no delivering broadcast found");
}

TEST_CASE("reward and cost telescope over random rounds") {
    ScenarioConfig cfg;
    CncEnv env(cfg, Scheme::Hybrid, 3.0);
    const SchemeSpec spec{Scheme::Hybrid, cfg.n_uavs};
    RandomStream pos_rng(63), rng(64), act_rng(65);
    SwarmState state = sample_initial_positions(cfg, pos_rng);
    const double e_b = broadcast_slot_energy(cfg);
    for (int round = 0; round < 1000; ++round) {
        if (env.begin_round(state, rng)) {
            const int initial = static_cast<int>(env.trace().phase1_success.size());
            double reward_sum = 0.0, cost_sum = 0.0;
            while (!env.terminal()) {
                std::map<int, int> act;
                for (int a : env.actors()) act[a] = act_rng.uniform_int(spec.action_count());
                const StepResult sr = env.step(act, rng);
                reward_sum += sr.reward;
                cost_sum += sr.cost;
            }
            const int final_holders = static_cast<int>(message_holders(state).size());
            REQUIRE(reward_sum == static_cast<double>(final_holders - initial));
            REQUIRE(cost_sum * e_b ==
                    Catch::Approx(env.trace().cumulative_cost.back()).epsilon(1e-12));
            REQUIRE(cost_sum == Catch::Approx(env.round_cost_normalized()).epsilon(1e-12));
        }
        state = rwp_advance(std::move(state), 1.0, cfg, pos_rng);
    }
}

TEST_CASE("energy headroom in the observation tracks the spent energy") {
    ScenarioConfig cfg;
    CncEnv env(cfg, Scheme::Broadcast, 3.0);
    RandomStream pos_rng(66);
    SwarmState state;
    seed_with_holders(cfg, env, state, pos_rng, 1);
    RandomStream rng(9);
    std::map<int, int> act;
    for (int a : env.actors()) act[a] = 0;  // broadcast
    const StepResult sr = env.step(act, rng);
    CHECK(sr.next_observation.at(0, 5) == Catch::Approx(3.0 - sr.cost));
}
