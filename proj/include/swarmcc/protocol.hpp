#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include "swarmcc/channel.hpp"
#include "swarmcc/scenario.hpp"

namespace swarmcc {

enum class SlotMode { Unicast, Broadcast, Idle };

// One UAV's choice for one D2D slot.
struct SlotAction {
    SlotMode mode = SlotMode::Idle;
    int target = -1;  // unicast receiver, valid iff mode == Unicast

    static SlotAction unicast(int target) { return {SlotMode::Unicast, target}; }
    static SlotAction broadcast() { return {SlotMode::Broadcast, -1}; }
    static SlotAction idle() { return {SlotMode::Idle, -1}; }
};

// Keyed by UAV id; must cover exactly the current message holders.
using SlotActions = std::map<int, SlotAction>;

struct AckRecord {
    int tx = -1;
    int rx = -1;
    bool success = false;
};

struct SlotOutcome {
    std::vector<int> newly_successful;    // delivered this slot, ascending id
    std::vector<double> per_uav_energy;   // J, one entry per UAV
    std::vector<AckRecord> acks;          // one record per unicast link
    std::vector<int> theta_u, theta_b, theta_idle;

    double total_energy() const {
        double s = 0.0;
        for (double e : per_uav_energy) s += e;
        return s;
    }
};

struct RoundTrace {
    std::vector<int> phase1_success;      // N_s^0
    std::vector<int> phase1_fail;         // N_f^0
    std::vector<SlotOutcome> slots;
    std::vector<double> cumulative_cost;  // J, running sum per slot

    double total_cost() const { return cumulative_cost.empty() ? 0.0 : cumulative_cost.back(); }
};

// Energy of one broadcast slot, the normalization unit for all reported costs.
inline double broadcast_slot_energy(const ScenarioConfig& cfg) {
    return (cfg.kappa * cfg.p_uav_max + cfg.p_overhead) * cfg.slot_duration;
}

// Eq.-style power control: compensate the path loss up to the hardware cap.
inline double unicast_power(double d, const ScenarioConfig& cfg) {
    if (d <= 0.0) throw std::domain_error("unicast_power: d must be > 0");
    return std::min(cfg.xi * std::pow(d, cfg.alpha2), cfg.p_uav_max);
}

// Phase I: the control center broadcasts, each UAV decodes independently.
// Resets the round ledger, sets has_message, returns (N_s^0, N_f^0).
inline std::pair<std::vector<int>, std::vector<int>> run_phase1(SwarmState& state,
                                                                const ScenarioConfig& cfg,
                                                                RandomStream& rng) {
    const FadingDraw fading = sample_fading(cfg, rng);
    std::vector<int> success, fail;
    std::fill(state.round_energy.begin(), state.round_energy.end(), 0.0);
    for (int n = 0; n < state.size(); ++n) {
        const LinkBudget lb = phase1_sinr(cfg, state.positions, fading, n);
        state.has_message[n] = lb.sinr >= cfg.gamma1 ? 1 : 0;
        (state.has_message[n] ? success : fail).push_back(n);
    }
    return {success, fail};
}

// One D2D cycle. Evaluates every unicast link, then the coherent broadcast for
// the untargeted members of N_f, charges the per-state energies of every UAV,
// and promotes the newly delivered ones.
inline SlotOutcome execute_slot(SwarmState& state, const SlotActions& actions,
                                const ScenarioConfig& cfg, const FadingDraw& fading,
                                int slot_index) {
    (void)slot_index;
    const int n_uavs = state.size();

    std::size_t holder_count = 0;
    for (int i = 0; i < n_uavs; ++i) {
        if (!state.has_message[i]) continue;
        ++holder_count;
        if (!actions.count(i))
            throw std::invalid_argument("execute_slot: missing action for message holder");
    }
    if (actions.size() != holder_count)
        throw std::invalid_argument("execute_slot: action for UAV outside the holder set");

    SlotOutcome out;
    out.per_uav_energy.assign(n_uavs, 0.0);

    for (const auto& [i, action] : actions) {
        switch (action.mode) {
            case SlotMode::Unicast:
                if (action.target == i || action.target < 0 || action.target >= n_uavs)
                    throw std::invalid_argument("execute_slot: invalid unicast target");
                out.theta_u.push_back(i);
                break;
            case SlotMode::Broadcast: out.theta_b.push_back(i); break;
            case SlotMode::Idle: out.theta_idle.push_back(i); break;
        }
    }

    std::vector<std::uint8_t> targeted(n_uavs, 0);
    std::vector<std::uint8_t> delivered(n_uavs, 0);

    // Unicast links, each on its own subchannel.
    for (int i : out.theta_u) {
        const int rx = actions.at(i).target;
        targeted[rx] = 1;
        const double d = distance(state.positions[i], state.positions[rx]);
        const double p_tx = unicast_power(d, cfg);
        const bool link_ok = unicast_sinr(cfg, state.positions, fading, i, rx, p_tx).sinr >= cfg.gamma2;
        out.acks.push_back({i, rx, link_ok});
        if (link_ok && !state.has_message[rx]) delivered[rx] = 1;
        out.per_uav_energy[i] = (cfg.kappa * p_tx + cfg.p_overhead) * cfg.slot_duration;
    }

    // Shared-subchannel broadcast for everyone not tuned to a unicast.
    if (!out.theta_b.empty()) {
        for (int n = 0; n < n_uavs; ++n) {
            if (state.has_message[n] || targeted[n]) continue;
            const bool ok =
                broadcast_sinr(cfg, state.positions, fading, out.theta_b, n).sinr >= cfg.gamma2;
            if (ok) delivered[n] = 1;
        }
        const double e_b = broadcast_slot_energy(cfg);
        for (int i : out.theta_b) out.per_uav_energy[i] = e_b;
    }

    // Receive/idle charges for the non-transmitters.
    for (int n = 0; n < n_uavs; ++n) {
        if (!state.has_message[n]) {
            out.per_uav_energy[n] = cfg.p_rx * cfg.slot_duration;
        } else if (actions.count(n) && actions.at(n).mode == SlotMode::Idle) {
            out.per_uav_energy[n] = cfg.p_idle * cfg.slot_duration;
        }
    }

    for (int n = 0; n < n_uavs; ++n) {
        if (delivered[n]) {
            state.has_message[n] = 1;
            out.newly_successful.push_back(n);
        }
        state.round_energy[n] += out.per_uav_energy[n];
    }
    return out;
}

inline std::vector<int> message_holders(const SwarmState& state) {
    std::vector<int> holders;
    for (int i = 0; i < state.size(); ++i)
        if (state.has_message[i]) holders.push_back(i);
    return holders;
}

// Action source for one round: (state, holders, slot index) -> actions.
using Policy = std::function<SlotActions(const SwarmState&, const std::vector<int>&, int)>;

// One full C&C round: Phase I, then L D2D slots. Slots after N_f empties are
// forced idle so the ledger keeps a uniform shape. A round whose Phase I
// delivers nobody never enters Phase II (no relay exists to run it).
inline RoundTrace run_round(SwarmState& state, const Policy& policy, const ScenarioConfig& cfg,
                            RandomStream& rng) {
    RoundTrace trace;
    std::tie(trace.phase1_success, trace.phase1_fail) = run_phase1(state, cfg, rng);
    if (trace.phase1_success.empty()) return trace;

    double cumulative = 0.0;
    bool saturated = false;
    for (int t = 1; t <= cfg.n_slots; ++t) {
        const std::vector<int> holders = message_holders(state);
        saturated = saturated || static_cast<int>(holders.size()) == state.size();
        SlotActions actions;
        if (saturated) {
            for (int i : holders) actions[i] = SlotAction::idle();
        } else {
            actions = policy(state, holders, t);
        }
        const FadingDraw fading = sample_fading(cfg, rng);
        trace.slots.push_back(execute_slot(state, actions, cfg, fading, t));
        cumulative += trace.slots.back().total_energy();
        trace.cumulative_cost.push_back(cumulative);
    }
    return trace;
}

}  // namespace swarmcc
