#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "swarmcc/agent.hpp"
#include "swarmcc/cmdp_env.hpp"
#include "swarmcc/config.hpp"
#include "swarmcc/protocol.hpp"

namespace swarmcc {

struct MetricsRecord {
    int episode = 0;
    double mean_success = 0.0;  // mean over rounds of |N_s| after the last slot
    double mean_energy = 0.0;   // mean normalized round cost over all rounds
    double lambda_mean = 0.0;   // mean over agents at episode end
    double loss = 0.0;          // mean TD loss over the episode's learn steps
    double epsilon = 0.0;
};

inline double epsilon_schedule(int episode, const TrainConfig& cfg) {
    if (episode < 0) throw std::invalid_argument("epsilon_schedule: episode must be >= 0");
    return std::max(cfg.epsilon_min,
                    cfg.epsilon_start * std::pow(cfg.epsilon_decay, static_cast<double>(episode)));
}

inline NetConfig make_net_config(const TrainConfig& cfg) {
    NetConfig net;
    net.in_dim = Observation::kFeatDim;
    net.feat = cfg.learning.feat;
    net.heads = cfg.learning.heads;
    net.head_hidden = cfg.learning.head_hidden;
    net.actions = SchemeSpec{cfg.scheme, cfg.scenario.n_uavs}.action_count();
    net.scale_sqrt_dk = cfg.learning.scale_sqrt_dk;
    return net;
}

inline std::vector<Agent> make_agents(const TrainConfig& cfg, RandomStream& seeder) {
    const SchemeSpec spec{cfg.scheme, cfg.scenario.n_uavs};
    const NetConfig net = make_net_config(cfg);
    const LagrangeState pid = pid_init(cfg.pid.kp, cfg.pid.ki, cfg.pid.kd);
    std::vector<Agent> agents;
    agents.reserve(cfg.scenario.n_uavs);
    for (int i = 0; i < cfg.scenario.n_uavs; ++i)
        agents.emplace_back(i, spec, net, cfg.learning.replay_capacity, pid, seeder.derive());
    return agents;
}

struct TrainResult {
    std::vector<MetricsRecord> metrics;
    std::vector<std::vector<double>> lambda_series;  // [episode][agent], end of episode
    std::vector<Agent> agents;
    SwarmState state;
};

// Invoked every checkpoint_every episodes and once more at the end.
using CheckpointSink = std::function<void(int episode, double epsilon, const std::vector<Agent>&)>;

// Full training loop: episodes of C&C rounds, one constrained DQN per UAV,
// epsilon decayed per episode, PID multiplier updates fed with the round-end
// swarm cost. Single-threaded and bit-reproducible for a given config.
inline TrainResult train(const TrainConfig& cfg, const CheckpointSink& sink = nullptr) {
    cfg.validate();
    std::uint64_t master = cfg.seed;
    RandomStream env_rng(splitmix64(master));
    RandomStream mobility_rng(splitmix64(master));
    RandomStream agent_seeder(splitmix64(master));

    TrainResult result;
    result.agents = make_agents(cfg, agent_seeder);
    result.state = sample_initial_positions(cfg.scenario, mobility_rng);

    CncEnv env(cfg.scenario, cfg.scheme, cfg.e_c);
    const LearnSettings learn{cfg.learning.lr, cfg.learning.gamma, cfg.learning.beta,
                              cfg.learning.batch};

    for (int ep = 0; ep < cfg.episodes; ++ep) {
        const double eps = epsilon_schedule(ep, cfg);
        double success_sum = 0.0, energy_sum = 0.0, loss_sum = 0.0;
        long loss_count = 0;
        double active_cost_sum = 0.0;
        int active_rounds = 0;

        for (int round = 0; round < cfg.rounds_per_episode; ++round) {
            const bool active = env.begin_round(result.state, env_rng);
            if (active) {
                while (!env.terminal()) {
                    const std::vector<int> actors = env.actors();
                    const Observation obs = env.observation();
                    std::map<int, int> chosen;
                    for (int a : actors) chosen[a] = select_action(result.agents[a], obs, eps);
                    const StepResult sr = env.step(chosen, env_rng);
                    for (int a : actors) {
                        Agent& agent = result.agents[a];
                        agent.replay.push({obs, chosen[a], sr.reward, sr.next_observation,
                                           sr.cost, sr.terminal});
                        if (const auto l = learn_step(agent, learn)) {
                            loss_sum += *l;
                            ++loss_count;
                        }
                        soft_update(agent, learn.beta);
                    }
                }
                const double round_cost = env.round_cost_normalized();
                energy_sum += round_cost;
                active_cost_sum += round_cost;
                ++active_rounds;
                if (!cfg.pid.per_episode)
                    for (Agent& agent : result.agents)
                        pid_update(agent.lagrange, round_cost, cfg.e_c);
            }
            success_sum += static_cast<double>(message_holders(result.state).size());
            result.state =
                rwp_advance(std::move(result.state), cfg.scenario.round_interval, cfg.scenario,
                            mobility_rng);
        }
        if (cfg.pid.per_episode && active_rounds > 0) {
            const double mean_cost = active_cost_sum / active_rounds;
            for (Agent& agent : result.agents) pid_update(agent.lagrange, mean_cost, cfg.e_c);
        }

        MetricsRecord rec;
        rec.episode = ep;
        rec.mean_success = success_sum / cfg.rounds_per_episode;
        rec.mean_energy = energy_sum / cfg.rounds_per_episode;
        double lambda_sum = 0.0;
        std::vector<double> lambdas;
        lambdas.reserve(result.agents.size());
        for (const Agent& agent : result.agents) {
            lambdas.push_back(agent.lagrange.lambda);
            lambda_sum += agent.lagrange.lambda;
        }
        rec.lambda_mean = lambda_sum / static_cast<double>(result.agents.size());
        rec.loss = loss_count > 0 ? loss_sum / static_cast<double>(loss_count) : 0.0;
        rec.epsilon = eps;
        result.metrics.push_back(rec);
        result.lambda_series.push_back(std::move(lambdas));

        if (sink && ((ep + 1) % cfg.checkpoint_every == 0 || ep + 1 == cfg.episodes))
            sink(ep, eps, result.agents);
    }
    return result;
}

struct EvalSummary {
    int episodes = 0;
    int rounds_per_episode = 0;
    double mean_success = 0.0;
    double ci95_success = 0.0;  // over per-episode means
    double mean_energy = 0.0;
    double ci95_energy = 0.0;
};

// Greedy-policy evaluation: epsilon = 0, no learning, no PID updates, fresh
// mobility. Never touches the agents' parameters.
inline EvalSummary evaluate(std::vector<Agent>& agents, const TrainConfig& cfg, int episodes,
                            std::uint64_t seed) {
    if (agents.size() != static_cast<std::size_t>(cfg.scenario.n_uavs))
        throw std::invalid_argument("evaluate: agent count does not match scenario");
    for (const Agent& a : agents)
        if (a.scheme.scheme != cfg.scheme || a.scheme.n_uavs != cfg.scenario.n_uavs)
            throw std::invalid_argument("evaluate: checkpoint scheme does not match config");

    std::uint64_t master = seed;
    RandomStream env_rng(splitmix64(master));
    RandomStream mobility_rng(splitmix64(master));
    SwarmState state = sample_initial_positions(cfg.scenario, mobility_rng);
    CncEnv env(cfg.scenario, cfg.scheme, cfg.e_c);

    std::vector<double> ep_success, ep_energy;
    for (int ep = 0; ep < episodes; ++ep) {
        double success_sum = 0.0, energy_sum = 0.0;
        for (int round = 0; round < cfg.rounds_per_episode; ++round) {
            if (env.begin_round(state, env_rng)) {
                while (!env.terminal()) {
                    const std::vector<int> actors = env.actors();
                    const Observation obs = env.observation();
                    std::map<int, int> chosen;
                    for (int a : actors) chosen[a] = select_action(agents[a], obs, 0.0);
                    env.step(chosen, env_rng);
                }
                energy_sum += env.round_cost_normalized();
            }
            success_sum += static_cast<double>(message_holders(state).size());
            state = rwp_advance(std::move(state), cfg.scenario.round_interval, cfg.scenario,
                                mobility_rng);
        }
        ep_success.push_back(success_sum / cfg.rounds_per_episode);
        ep_energy.push_back(energy_sum / cfg.rounds_per_episode);
    }

    auto mean_ci = [](const std::vector<double>& xs) {
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        if (xs.size() < 2) return std::pair<double, double>{mean, 0.0};
        double var = 0.0;
        for (double x : xs) var += (x - mean) * (x - mean);
        var /= static_cast<double>(xs.size() - 1);
        const double ci = 1.96 * std::sqrt(var / static_cast<double>(xs.size()));
        return std::pair<double, double>{mean, ci};
    };
    EvalSummary s;
    s.episodes = episodes;
    s.rounds_per_episode = cfg.rounds_per_episode;
    std::tie(s.mean_success, s.ci95_success) = mean_ci(ep_success);
    std::tie(s.mean_energy, s.ci95_energy) = mean_ci(ep_energy);
    return s;
}

enum class BaselineKind { AlwaysBroadcast, Random, GreedyNearestUnicast };

// Scripted action sources used as comparison anchors and in tests.
inline Policy baseline_policy(BaselineKind kind, const SchemeSpec& spec, RandomStream& rng) {
    switch (kind) {
        case BaselineKind::AlwaysBroadcast:
            return [](const SwarmState&, const std::vector<int>& holders, int) {
                SlotActions actions;
                for (int i : holders) actions[i] = SlotAction::broadcast();
                return actions;
            };
        case BaselineKind::Random:
            return [spec, &rng](const SwarmState&, const std::vector<int>& holders, int) {
                SlotActions actions;
                for (int i : holders)
                    actions[i] = decode_action(i, rng.uniform_int(spec.action_count()), spec);
                return actions;
            };
        case BaselineKind::GreedyNearestUnicast:
            return [](const SwarmState& state, const std::vector<int>& holders, int) {
                SlotActions actions;
                for (int i : holders) {
                    int best = -1;
                    double best_d = std::numeric_limits<double>::infinity();
                    for (int n = 0; n < state.size(); ++n) {
                        if (state.has_message[n]) continue;
                        const double d = distance(state.positions[i], state.positions[n]);
                        if (d < best_d) {
                            best_d = d;
                            best = n;
                        }
                    }
                    actions[i] = best >= 0 ? SlotAction::unicast(best) : SlotAction::idle();
                }
                return actions;
            };
    }
    throw std::invalid_argument("baseline_policy: unknown kind");
}

}  // namespace swarmcc
