#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>

#include "swarmcc/agent.hpp"
#include "swarmcc/io.hpp"

using namespace swarmcc;

namespace {

NetConfig tiny_net(int actions) {
    NetConfig nc;
    nc.feat = 8;
    nc.heads = 2;
    nc.head_hidden = 8;
    nc.actions = actions;
    return nc;
}

Agent make_agent(int id, Scheme scheme, std::uint64_t seed) {
    const SchemeSpec spec{scheme, 5};
    return Agent(id, spec, tiny_net(spec.action_count()), 2000, pid_init(0.05, 0.005, 0.1),
                 RandomStream(seed));
}

Observation random_obs(RandomStream& rng, int n = 5) {
    Observation obs;
    obs.n_nodes = n;
    obs.node_features.resize(static_cast<std::size_t>(n) * Observation::kFeatDim);
    for (int i = 0; i < n; ++i) {
        double* row = obs.node_features.data() + i * Observation::kFeatDim;
        row[0] = i;
        row[1] = rng.uniform(-1, 1);
        row[2] = rng.uniform(-1, 1);
        row[3] = 1.0;
        row[4] = rng.uniform_int(2);
        row[5] = rng.uniform(0, 3);
    }
    return obs;
}

}  // namespace

TEST_CASE("replay memory is a strict ring") {
    ReplayMemory mem(5);
    RandomStream rng(1);
    for (int i = 0; i < 8; ++i) {
        Transition t;
        t.action = i;
        mem.push(t);
        REQUIRE(mem.size() <= 5);
    }
    // after 8 pushes into capacity 5, entries 0..2 were evicted oldest-first
    std::vector<int> actions;
    for (std::size_t i = 0; i < mem.size(); ++i) actions.push_back(mem[i].action);
    std::sort(actions.begin(), actions.end());
    CHECK(actions == std::vector<int>{3, 4, 5, 6, 7});
}

TEST_CASE("epsilon-greedy selection") {
    RandomStream rng(2);
    SECTION("epsilon 1 is uniform over the action space") {
        Agent agent = make_agent(0, Scheme::Hybrid, 7);
        const Observation obs = random_obs(rng);
        const int n_actions = agent.scheme.action_count();
        std::vector<int> counts(n_actions, 0);
        const int draws = 10000;
        for (int i = 0; i < draws; ++i) ++counts[select_action(agent, obs, 1.0)];
        const double p = 1.0 / n_actions;
        const double sigma = std::sqrt(p * (1.0 - p) / draws);
        for (int a = 0; a < n_actions; ++a) {
            const double freq = static_cast<double>(counts[a]) / draws;
            REQUIRE(std::abs(freq - p) <= 3.0 * sigma);
        }
    }
    SECTION("epsilon 0 is the deterministic argmax") {
        Agent agent = make_agent(1, Scheme::Unicast, 8);
        const Observation obs = random_obs(rng);
        const int first = select_action(agent, obs, 0.0);
        for (int i = 0; i < 10; ++i) REQUIRE(select_action(agent, obs, 0.0) == first);
        const std::vector<double>& q = q_forward(agent.q_params, obs, 1, agent.ws);
        CHECK(q[first] == *std::max_element(q.begin(), q.end()));
    }
    SECTION("ties break to the lowest index") {
        const SchemeSpec spec{Scheme::Broadcast, 5};
        Agent agent(2, spec, tiny_net(2), 2000, pid_init(0, 0, 0), RandomStream(3));
        agent.q_params.data.assign(agent.q_params.data.size(), 0.0);  // all Q equal
        const Observation obs = random_obs(rng);
        CHECK(select_action(agent, obs, 0.0) == 0);
    }
}

TEST_CASE("td target") {
    RandomStream rng(4);
    Agent agent = make_agent(0, Scheme::Broadcast, 9);
    NetWorkspace ws;

    SECTION("terminal transitions ignore bootstrap and cost") {
        Transition t;
        t.reward = 2.0;
        t.terminal = true;
        t.cost = 123.0;
        CHECK(td_target(t, agent.target_params, 0, 5.0, 0.98, ws) == 2.0);
    }
    SECTION("hand-computed non-terminal target") {
        // y = R + gamma * maxQ - lambda * c with R=1, gamma=0.98, maxQ=2, lambda=0.5, c=0.4
        const SchemeSpec spec{Scheme::Broadcast, 5};
        Agent a2(0, spec, tiny_net(2), 2000, pid_init(0, 0, 0), RandomStream(5));
        a2.target_params.data.assign(a2.target_params.data.size(), 0.0);
        a2.target_params.data[a2.target_params.layout.head_b2 + 0] = 2.0;
        a2.target_params.data[a2.target_params.layout.head_b2 + 1] = -1.0;
        Transition t;
        t.reward = 1.0;
        t.cost = 0.4;
        t.terminal = false;
        t.next_obs = random_obs(rng);
        const double y = td_target(t, a2.target_params, 0, 0.5, 0.98, ws);
        CHECK(y == Catch::Approx(2.76).epsilon(1e-12));
    }
    SECTION("lambda 0 reduces to the plain DQN target and the slope is -c") {
        for (int i = 0; i < 1000; ++i) {
            Transition t;
            t.reward = rng.uniform(0, 3);
            t.cost = rng.uniform(0, 2);
            t.terminal = rng.uniform() < 0.3;
            t.next_obs = random_obs(rng);
            const double y0 = td_target(t, agent.target_params, 0, 0.0, 0.98, ws);
            const double y1 = td_target(t, agent.target_params, 0, 1.0, 0.98, ws);
            if (t.terminal) {
                REQUIRE(y0 == t.reward);
                REQUIRE(y1 == t.reward);
            } else {
                const std::vector<double>& q = q_forward(agent.target_params, t.next_obs, 0, ws);
                const double plain = t.reward + 0.98 * *std::max_element(q.begin(), q.end());
                REQUIRE(y0 == Catch::Approx(plain).epsilon(1e-12));
                REQUIRE(y1 - y0 == Catch::Approx(-t.cost).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("learn step") {
    RandomStream rng(6);
    const LearnSettings settings{0.001, 0.98, 0.01, 32};

    SECTION("insufficient replay is a reported no-op") {
        Agent agent = make_agent(0, Scheme::Broadcast, 11);
        CHECK_FALSE(learn_step(agent, settings).has_value());
    }
    SECTION("a fixed point has zero loss and unchanged parameters") {
        Agent agent = make_agent(0, Scheme::Broadcast, 12);
        agent.q_params.data.assign(agent.q_params.data.size(), 0.0);   // Q == 0 everywhere
        agent.target_params.data = agent.q_params.data;
        for (int i = 0; i < 40; ++i) {
            Transition t;
            t.obs = random_obs(rng);
            t.next_obs = random_obs(rng);
            t.action = i % 2;
            t.reward = 0.0;
            t.cost = 1.0;
            t.terminal = true;  // y = 0 = Q
            agent.replay.push(t);
        }
        const std::vector<double> before = agent.q_params.data;
        const auto loss = learn_step(agent, settings);
        REQUIRE(loss.has_value());
        CHECK(*loss == 0.0);
        CHECK(agent.q_params.data == before);
    }
    SECTION("single-transition batch gives the exact squared error") {
        const SchemeSpec spec{Scheme::Broadcast, 5};
        Agent agent(0, spec, tiny_net(2), 2000, pid_init(0, 0, 0), RandomStream(13));
        LearnSettings s1 = settings;
        s1.batch = 1;
        Transition t;
        t.obs = random_obs(rng);
        t.action = 1;
        t.reward = 1.7;
        t.terminal = true;
        agent.replay.push(t);
        const double q = q_forward(agent.q_params, t.obs, 0, agent.ws)[1];
        const auto loss = learn_step(agent, s1);
        REQUIRE(loss.has_value());
        CHECK(*loss == Catch::Approx((1.7 - q) * (1.7 - q)).epsilon(1e-12));
    }
    SECTION("loss on a frozen single-sample batch decays to a tiny plateau") {
        Agent agent = make_agent(0, Scheme::Broadcast, 14);
        Transition t;
        t.obs = random_obs(rng);
        t.action = 0;
        t.reward = 2.0;
        t.terminal = true;
        for (int i = 0; i < 32; ++i) agent.replay.push(t);  // every minibatch is identical
        std::vector<double> losses;
        for (int step = 0; step < 100; ++step) {
            const auto loss = learn_step(agent, settings);
            REQUIRE(loss.has_value());
            losses.push_back(*loss);
        }
        for (int step = 1; step < 100; ++step) REQUIRE(losses[step] < losses[step - 1]);
        REQUIRE(losses.back() < 0.5 * losses.front());
    }
}

TEST_CASE("agents never share parameters") {
    RandomStream rng(7);
    Agent a = make_agent(0, Scheme::Broadcast, 20);
    Agent b = make_agent(1, Scheme::Broadcast, 21);
    const Observation obs = random_obs(rng);
    const std::vector<double> q_before = q_forward(b.q_params, obs, 1, b.ws);
    for (double& v : a.q_params.data) v += 0.5;  // clobber agent a
    const std::vector<double> q_after = q_forward(b.q_params, obs, 1, b.ws);
    REQUIRE(std::memcmp(q_before.data(), q_after.data(), q_before.size() * sizeof(double)) == 0);
}

TEST_CASE("agent-level soft update moves the target by beta") {
    Agent agent = make_agent(0, Scheme::Broadcast, 22);
    const std::vector<double> target_before = agent.target_params.data;
    for (double& v : agent.q_params.data) v += 1.0;
    soft_update(agent, 0.01);
    for (std::size_t i = 0; i < target_before.size(); ++i)
        REQUIRE(agent.target_params.data[i] ==
                Catch::Approx(target_before[i] + 0.01).epsilon(1e-12));
}

TEST_CASE("checkpoints round-trip bit-exactly") {
    const std::string dir = std::filesystem::temp_directory_path() / "swarmcc_ckpt_test";
    std::filesystem::create_directories(dir);
    const std::string path = dir + "/agents.ckpt";

    RandomStream rng(8);
    std::vector<Agent> agents;
    for (int i = 0; i < 5; ++i) {
        agents.push_back(make_agent(i, Scheme::Hybrid, 30 + i));
        // make the optimizer and lagrange state non-trivial
        agents.back().optimizer.step = 17 + i;
        for (double& v : agents.back().optimizer.m) v = rng.uniform(-1, 1);
        agents.back().lagrange.lambda = 0.25 * i;
        agents.back().lagrange.integral = 1.5 * i;
        agents.back().lagrange.prev_cost = 0.77;
    }
    save_checkpoint(path, agents, 42, 0.3);

    std::vector<Agent> loaded;
    const CheckpointInfo info = load_checkpoint(path, loaded, 999);
    CHECK(info.scheme == Scheme::Hybrid);
    CHECK(info.episode == 42);
    CHECK(info.epsilon == 0.3);
    REQUIRE(loaded.size() == 5);
    for (int i = 0; i < 5; ++i) {
        REQUIRE(loaded[i].q_params.data == agents[i].q_params.data);
        REQUIRE(loaded[i].target_params.data == agents[i].target_params.data);
        REQUIRE(loaded[i].optimizer.m == agents[i].optimizer.m);
        REQUIRE(loaded[i].optimizer.v == agents[i].optimizer.v);
        REQUIRE(loaded[i].optimizer.step == agents[i].optimizer.step);
        REQUIRE(loaded[i].lagrange.lambda == agents[i].lagrange.lambda);
        REQUIRE(loaded[i].lagrange.integral == agents[i].lagrange.integral);
        REQUIRE(loaded[i].lagrange.prev_cost == agents[i].lagrange.prev_cost);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("restoring a checkpoint and a seed resumes training bit-exactly") {
    const std::string dir = std::filesystem::temp_directory_path() / "swarmcc_resume_test";
    std::filesystem::create_directories(dir);
    const std::string path = dir + "/agents.ckpt";

    RandomStream rng(9);
    std::vector<Agent> agents;
    for (int i = 0; i < 5; ++i) agents.push_back(make_agent(i, Scheme::Broadcast, 50 + i));
    // give the first agent some history, then checkpoint
    for (int i = 0; i < 40; ++i) {
        Transition t;
        t.obs = random_obs(rng);
        t.next_obs = random_obs(rng);
        t.action = i % 2;
        t.reward = 1.0;
        t.cost = 0.5;
        t.terminal = (i % 3 == 0);
        agents[0].replay.push(t);
    }
    learn_step(agents[0], LearnSettings{});
    save_checkpoint(path, agents, 7, 0.2);

    auto resume = [&](std::uint64_t seed) {
        std::vector<Agent> loaded;
        load_checkpoint(path, loaded, seed);
        RandomStream data_rng(77);
        for (int i = 0; i < 40; ++i) {
            Transition t;
            t.obs = random_obs(data_rng);
            t.next_obs = random_obs(data_rng);
            t.action = i % 2;
            t.reward = 2.0;
            t.cost = 0.25;
            t.terminal = (i % 4 == 0);
            loaded[0].replay.push(t);
        }
        for (int i = 0; i < 5; ++i) {
            learn_step(loaded[0], LearnSettings{});
            soft_update(loaded[0], 0.01);
        }
        return loaded[0].q_params.data;
    };
    REQUIRE(resume(4242) == resume(4242));
    std::filesystem::remove_all(dir);
}
