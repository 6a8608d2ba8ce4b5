#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarmcc/protocol.hpp"

namespace swarmcc {

enum class Scheme { Unicast, Broadcast, Hybrid };

inline std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::Unicast: return "unicast";
        case Scheme::Broadcast: return "broadcast";
        case Scheme::Hybrid: return "hybrid";
    }
    return "unicast";
}

inline Scheme scheme_from_string(const std::string& s) {
    if (s == "unicast") return Scheme::Unicast;
    if (s == "broadcast") return Scheme::Broadcast;
    if (s == "hybrid") return Scheme::Hybrid;
    throw std::invalid_argument("unknown scheme: " + s);
}

struct SchemeSpec {
    Scheme scheme = Scheme::Broadcast;
    int n_uavs = 5;

    int action_count() const {
        switch (scheme) {
            case Scheme::Unicast: return n_uavs;
            case Scheme::Broadcast: return 2;
            case Scheme::Hybrid: return n_uavs + 1;
        }
        return 0;
    }
};

// Maps a Q-head index to a concrete slot action for the given agent. Unicast
// targets enumerate the other UAVs in ascending id order.
inline SlotAction decode_action(int agent, int action_index, const SchemeSpec& spec) {
    const int n = spec.n_uavs;
    if (action_index < 0 || action_index >= spec.action_count())
        throw std::out_of_range("decode_action: index out of range");
    switch (spec.scheme) {
        case Scheme::Unicast:
            if (action_index == n - 1) return SlotAction::idle();
            return SlotAction::unicast(action_index < agent ? action_index : action_index + 1);
        case Scheme::Broadcast:
            return action_index == 0 ? SlotAction::broadcast() : SlotAction::idle();
        case Scheme::Hybrid:
            if (action_index == n) return SlotAction::idle();
            if (action_index == n - 1) return SlotAction::broadcast();
            return SlotAction::unicast(action_index < agent ? action_index : action_index + 1);
    }
    return SlotAction::idle();
}

// Global-view observation: one row per UAV, ordered by id. Every acting agent
// in a slot sees the identical matrix; the Q-network selects its own row at
// the dense head.
struct Observation {
    static constexpr int kFeatDim = 6;  // id, x', y', z', message bit, energy headroom
    int n_nodes = 0;
    std::vector<double> node_features;  // row-major n_nodes x kFeatDim

    double at(int node, int f) const { return node_features[node * kFeatDim + f]; }
    bool operator==(const Observation& other) const = default;
};

struct StepResult {
    Observation next_observation;
    double reward = 0.0;    // UAVs newly delivered this slot
    double cost = 0.0;      // slot energy of the whole swarm, units of E_b
    bool terminal = false;
    std::vector<int> newly_successful;
    std::vector<int> next_actors;  // holders eligible to act in the next slot
    int n_success = 0;      // |N_s| after the slot
    int slot_index = 0;     // 1-based slot just executed
    double raw_energy_j = 0.0;
};

// UAVs delivered in slot t observe and act from slot t+1 on.
inline std::vector<int> newly_eligible_agents(const SlotOutcome& outcome) {
    return outcome.newly_successful;
}

// Multi-agent constrained-MDP view of one C&C round. The environment borrows
// the swarm state for the duration of the round; mobility between rounds is
// the caller's business.
class CncEnv {
  public:
    CncEnv(const ScenarioConfig& scenario, Scheme scheme, double energy_budget)
        : cfg_(scenario), spec_{scheme, scenario.n_uavs}, e_c_(energy_budget),
          e_b_(broadcast_slot_energy(scenario)) {}

    const ScenarioConfig& scenario() const { return cfg_; }
    const SchemeSpec& scheme_spec() const { return spec_; }
    double energy_budget() const { return e_c_; }
    double energy_unit() const { return e_b_; }

    // Runs Phase I on the given state. Returns true if any UAV decoded the
    // message (otherwise the round is a no-op: no relay exists, no Phase II).
    bool begin_round(SwarmState& state, RandomStream& rng) {
        state_ = &state;
        std::tie(trace_.phase1_success, trace_.phase1_fail) = run_phase1(state, cfg_, rng);
        trace_.slots.clear();
        trace_.cumulative_cost.clear();
        slot_ = 0;
        cum_cost_j_ = 0.0;
        active_ = !trace_.phase1_success.empty();
        // Terminal right away when nobody decoded (no relay exists) or when
        // everybody did (nothing left to deliver).
        terminal_ = !active_ || trace_.phase1_fail.empty();
        return active_;
    }

    bool round_active() const { return active_ && !terminal_; }
    bool terminal() const { return terminal_; }
    int slots_executed() const { return slot_; }
    const RoundTrace& trace() const { return trace_; }

    // Message holders that act in the coming slot.
    std::vector<int> actors() const {
        if (!round_active()) throw std::logic_error("CncEnv: no active round");
        return message_holders(*state_);
    }

    Observation observation() const {
        if (state_ == nullptr) throw std::logic_error("CncEnv: observation before Phase I");
        Observation obs;
        obs.n_nodes = state_->size();
        obs.node_features.resize(static_cast<std::size_t>(obs.n_nodes) * Observation::kFeatDim);
        const double rx = cfg_.r_swarm > 0.0 ? cfg_.r_swarm : 1.0;
        const double headroom = e_c_ - cum_cost_j_ / e_b_;
        for (int n = 0; n < obs.n_nodes; ++n) {
            double* row = obs.node_features.data() + n * Observation::kFeatDim;
            row[0] = static_cast<double>(n);
            row[1] = state_->positions[n].x / rx;
            row[2] = state_->positions[n].y / rx;
            row[3] = state_->positions[n].z / cfg_.height;
            row[4] = state_->has_message[n] ? 1.0 : 0.0;
            row[5] = headroom;
        }
        return obs;
    }

    // Executes one slot from per-agent action indices (one per current holder).
    StepResult step(const std::map<int, int>& action_indices, RandomStream& rng) {
        if (!round_active()) throw std::logic_error("CncEnv: step on finished round");
        SlotActions actions;
        for (const auto& [agent, index] : action_indices)
            actions[agent] = decode_action(agent, index, spec_);

        const FadingDraw fading = sample_fading(cfg_, rng);
        ++slot_;
        const SlotOutcome outcome = execute_slot(*state_, actions, cfg_, fading, slot_);
        trace_.slots.push_back(outcome);
        cum_cost_j_ += outcome.total_energy();
        trace_.cumulative_cost.push_back(cum_cost_j_);

        StepResult result;
        result.slot_index = slot_;
        result.newly_successful = outcome.newly_successful;
        result.reward = static_cast<double>(outcome.newly_successful.size());
        result.raw_energy_j = outcome.total_energy();
        result.cost = result.raw_energy_j / e_b_;
        result.n_success = static_cast<int>(message_holders(*state_).size());
        terminal_ = slot_ >= cfg_.n_slots || result.n_success == state_->size();
        result.terminal = terminal_;
        result.next_observation = observation();
        if (!terminal_) result.next_actors = message_holders(*state_);
        return result;
    }

    double round_cost_normalized() const { return cum_cost_j_ / e_b_; }

  private:
    ScenarioConfig cfg_;
    SchemeSpec spec_;
    double e_c_;
    double e_b_;
    SwarmState* state_ = nullptr;
    RoundTrace trace_;
    int slot_ = 0;
    double cum_cost_j_ = 0.0;
    bool active_ = false;
    bool terminal_ = true;
};

}  // namespace swarmcc
