#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <vector>

#include "swarmcc/cmdp_env.hpp"
#include "swarmcc/lagrange_pid.hpp"
#include "swarmcc/neural.hpp"
#include "swarmcc/rng.hpp"

namespace swarmcc {

struct Transition {
    Observation obs;
    int action = 0;
    double reward = 0.0;
    Observation next_obs;
    double cost = 0.0;  // normalized slot energy
    bool terminal = false;
};

// Fixed-capacity ring buffer, strictly oldest-first eviction.
class ReplayMemory {
  public:
    explicit ReplayMemory(std::size_t capacity = 2000) : capacity_(capacity) {
        if (capacity_ == 0) throw std::invalid_argument("ReplayMemory: capacity must be > 0");
    }

    void push(Transition t) {
        if (buf_.size() < capacity_) {
            buf_.push_back(std::move(t));
        } else {
            buf_[next_] = std::move(t);
        }
        next_ = (next_ + 1) % capacity_;
    }

    std::size_t size() const { return buf_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& operator[](std::size_t i) const { return buf_[i]; }

  private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<Transition> buf_;
};

struct LearnSettings {
    double lr = 0.001;
    double gamma = 0.98;
    double beta = 0.01;  // target-network interpolation
    int batch = 32;
};

// One decentralized constrained DQN. Parameters are never shared between
// agents; each agent owns its exploration stream.
struct Agent {
    int id = 0;
    SchemeSpec scheme;
    QNetworkParams q_params;
    QNetworkParams target_params;
    AdamState optimizer;
    ReplayMemory replay;
    LagrangeState lagrange;
    RandomStream rng;

    mutable NetWorkspace ws;
    std::vector<double> grad;

    Agent(int agent_id, const SchemeSpec& spec, const NetConfig& net, std::size_t replay_capacity,
          const LagrangeState& pid, RandomStream stream)
        : id(agent_id), scheme(spec), q_params(net), target_params(net),
          optimizer(q_params.data.size()), replay(replay_capacity), lagrange(pid),
          rng(std::move(stream)), grad(q_params.data.size(), 0.0) {
        q_params.init_uniform_fan_in(rng);
        target_params.data = q_params.data;  // start tracking from the same point
    }
};

// Epsilon-greedy over the online Q-network; argmax ties break to the lowest
// index.
inline int select_action(Agent& agent, const Observation& obs, double epsilon) {
    if (epsilon < 0.0 || epsilon > 1.0)
        throw std::invalid_argument("select_action: epsilon must be in [0, 1]");
    if (epsilon > 0.0 && agent.rng.uniform() < epsilon)
        return agent.rng.uniform_int(agent.scheme.action_count());
    const std::vector<double>& q = q_forward(agent.q_params, obs, agent.id, agent.ws);
    int best = 0;
    for (int a = 1; a < static_cast<int>(q.size()); ++a)
        if (q[a] > q[best]) best = a;
    return best;
}

// Lagrangian TD target: y = R for terminal transitions, otherwise
// y = R + gamma * max_a' Qhat(O', a') - lambda * c.
inline double td_target(const Transition& t, const QNetworkParams& target, int self,
                        double lambda, double gamma, NetWorkspace& ws) {
    if (t.terminal) return t.reward;
    const std::vector<double>& q = q_forward(target, t.next_obs, self, ws);
    const double max_q = *std::max_element(q.begin(), q.end());
    return t.reward + gamma * max_q - lambda * t.cost;
}

// One minibatch update: mean squared TD error on the taken actions, one Adam
// step, gradients flow only through the taken action's Q-value. Returns the
// loss, or nothing when the replay is still too small.
inline std::optional<double> learn_step(Agent& agent, const LearnSettings& s) {
    if (agent.replay.size() < static_cast<std::size_t>(s.batch)) return std::nullopt;
    std::fill(agent.grad.begin(), agent.grad.end(), 0.0);
    double loss = 0.0;
    std::vector<double> d_q(agent.scheme.action_count(), 0.0);
    const double inv_batch = 1.0 / static_cast<double>(s.batch);
    for (int b = 0; b < s.batch; ++b) {
        const Transition& t = agent.replay[agent.rng.uniform_int(static_cast<int>(agent.replay.size()))];
        const double y = td_target(t, agent.target_params, agent.id, agent.lagrange.lambda,
                                   s.gamma, agent.ws);
        const double q_taken = q_forward(agent.q_params, t.obs, agent.id, agent.ws)[t.action];
        const double err = q_taken - y;
        loss += err * err * inv_batch;
        std::fill(d_q.begin(), d_q.end(), 0.0);
        d_q[t.action] = 2.0 * err * inv_batch;
        q_backward(agent.q_params, agent.id, d_q, agent.ws, agent.grad);
    }
    adam_step(agent.q_params.data, agent.grad, s.lr, agent.optimizer);
    return loss;
}

inline void soft_update(Agent& agent, double beta) {
    soft_update(agent.target_params.data, agent.q_params.data, beta);
}

}  // namespace swarmcc
