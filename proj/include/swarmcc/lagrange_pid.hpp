#pragma once

#include <algorithm>
#include <stdexcept>

namespace swarmcc {

// PID state for one agent's Lagrange multiplier. Costs are in normalized
// energy units (one broadcast slot = 1).
struct LagrangeState {
    double kp = 0.05;
    double ki = 0.005;
    double kd = 0.1;
    double integral = 0.0;
    double prev_cost = 0.0;
    double lambda = 0.0;
};

inline LagrangeState pid_init(double kp, double ki, double kd) {
    if (kp < 0.0 || ki < 0.0 || kd < 0.0)
        throw std::invalid_argument("pid_init: gains must be >= 0");
    return {kp, ki, kd, 0.0, 0.0, 0.0};
}

// One controller step on the round-end cost. The derivative term only reacts
// to cost increases and the integral and multiplier are projected to >= 0.
inline double pid_update(LagrangeState& state, double cost, double energy_budget) {
    const double delta = cost - energy_budget;
    const double deriv = std::max(cost - state.prev_cost, 0.0);
    state.integral = std::max(state.integral + delta, 0.0);
    state.lambda =
        std::max(state.kp * delta + state.ki * state.integral + state.kd * deriv, 0.0);
    state.prev_cost = cost;
    return state.lambda;
}

}  // namespace swarmcc
