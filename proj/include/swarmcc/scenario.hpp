#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "swarmcc/geometry.hpp"
#include "swarmcc/rng.hpp"

namespace swarmcc {

struct RwpConfig {
    double speed_min = 5.0;   // m/s
    double speed_max = 15.0;  // m/s
    double pause = 2.0;       // s
};

// Physical constants and geometry for one deployment. Defaults reproduce the
// reference parameter set (Table-of-parameters values); anything can be
// overridden from the config file.
struct ScenarioConfig {
    int n_uavs = 5;         // N
    int n_interferers = 4;  // M
    int n_antennas = 4;     // K

    double r_ground = 300.0;  // m, GBS disk radius
    double r_swarm = 60.0;    // m, swarm disk radius
    double height = 300.0;    // m, swarm altitude

    // gbs_positions[0] is the control center, the rest interfere.
    std::vector<Vec3> gbs_positions = {
        {0.0, 0.0, 0.0},
        {105.0, 105.0, 0.0},
        {105.0, -105.0, 0.0},
        {-105.0, 105.0, 0.0},
        {-105.0, -105.0, 0.0},
    };

    double p_gbs = 19.952623149688797;      // W  (43 dBm)
    double p_uav_max = 0.19952623149688797; // W  (23 dBm)
    double p_rx = 0.050;                    // W
    double p_overhead = 0.050;              // W
    double p_idle = 0.0;                    // W
    double xi = 1e-6;                       // W * m^(-alpha2), power-control coefficient
    double kappa = 2.857;                   // amplifier conversion factor

    double alpha1 = -2.0;  // Phase I path-loss exponent (applied to 4*pi*d*f_c/c)
    double alpha2 = 4.0;   // D2D path-loss exponent
    double f_c = 2e9;      // Hz
    double eta_los = 0.7943282347242815;  // 10^-0.1
    double eta_nlos = 0.01;
    double los_a = 9.61;
    double los_b = 0.16;

    double gamma1 = 1.0;        // linear SINR threshold, Phase I
    double gamma2 = 1.0;        // linear SINR threshold, Phase II
    double noise_power = 1e-12; // W  (-90 dBm)

    double tau = 1e-3;            // s
    double tau1 = 0.125e-3;       // s
    double tau2 = 0.875e-3;       // s
    double slot_duration = 0.25e-3;  // s
    int n_slots = 3;              // L = floor(tau2 / slot_duration)

    RwpConfig rwp;
    double round_interval = 1.0;  // s of mobility simulated between C&C rounds

    void validate() const {
        auto require = [](bool ok, const char* what) {
            if (!ok) throw std::invalid_argument(std::string("scenario: ") + what);
        };
        require(n_uavs >= 1, "n_uavs must be >= 1");
        require(n_interferers >= 0, "n_interferers must be >= 0");
        require(n_antennas >= 1, "n_antennas must be >= 1");
        require(static_cast<int>(gbs_positions.size()) == n_interferers + 1,
                "gbs_positions must hold control center plus n_interferers entries");
        require(horizontal_radius(gbs_positions[0]) == 0.0 && gbs_positions[0].z == 0.0,
                "gbs_positions[0] must be the ground-disk center below the swarm axis");
        require(r_ground > 0.0, "r_ground must be > 0");
        require(r_swarm >= 0.0, "r_swarm must be >= 0");
        require(height > 0.0, "height must be > 0");
        require(p_gbs > 0.0 && p_uav_max > 0.0 && p_rx > 0.0 && p_overhead > 0.0,
                "powers must be > 0");
        require(p_idle >= 0.0, "p_idle must be >= 0");
        require(xi > 0.0, "xi must be > 0");
        require(kappa > 0.0, "kappa must be > 0");
        require(f_c > 0.0, "f_c must be > 0");
        require(eta_los > 0.0 && eta_nlos > 0.0, "eta coefficients must be > 0");
        require(los_a > 0.0 && los_b > 0.0, "LoS constants a, b must be > 0");
        require(gamma1 >= 0.0 && gamma2 >= 0.0, "SINR thresholds must be >= 0");
        require(noise_power > 0.0, "noise_power must be > 0");
        require(tau > 0.0 && tau1 > 0.0 && tau2 > 0.0 && slot_duration > 0.0,
                "durations must be > 0");
        require(std::abs(tau1 + tau2 - tau) < 1e-12, "tau1 + tau2 must equal tau");
        require(n_slots == static_cast<int>(std::floor(tau2 / slot_duration)),
                "n_slots must equal floor(tau2 / slot_duration)");
        require(n_slots >= 1, "n_slots must be >= 1");
        require(rwp.speed_min > 0.0 && rwp.speed_max >= rwp.speed_min, "invalid RWP speed range");
        require(rwp.pause >= 0.0, "RWP pause must be >= 0");
        require(round_interval > 0.0, "round_interval must be > 0");
    }
};

// Per-UAV mutable state: kinematics plus the per-round message/energy ledger.
struct SwarmState {
    std::vector<Vec3> positions;
    std::vector<Vec3> waypoints;
    std::vector<double> speeds;           // m/s, 0 while pausing
    std::vector<double> pause_remaining;  // s
    std::vector<std::uint8_t> has_message;
    std::vector<double> round_energy;     // J consumed in the current round

    int size() const { return static_cast<int>(positions.size()); }
};

namespace detail {

inline Vec3 sample_disk_point(const ScenarioConfig& cfg, RandomStream& rng) {
    const double r = cfg.r_swarm * std::sqrt(rng.uniform());
    const double phi = 2.0 * M_PI * rng.uniform();
    return {r * std::cos(phi), r * std::sin(phi), cfg.height};
}

}  // namespace detail

// Uniform draw of N positions on the swarm disk. Every UAV starts in the RWP
// pause period, without a message and with an empty energy ledger.
inline SwarmState sample_initial_positions(const ScenarioConfig& cfg, RandomStream& rng) {
    SwarmState s;
    const int n = cfg.n_uavs;
    s.positions.reserve(n);
    for (int i = 0; i < n; ++i) s.positions.push_back(detail::sample_disk_point(cfg, rng));
    s.waypoints = s.positions;
    s.speeds.assign(n, 0.0);
    s.pause_remaining.assign(n, cfg.rwp.pause);
    s.has_message.assign(n, 0);
    s.round_energy.assign(n, 0.0);
    return s;
}

// Random-waypoint step: pause, travel toward the waypoint, re-draw on arrival.
// Handles several pause/arrival boundaries inside one dt.
inline SwarmState rwp_advance(SwarmState state, double dt, const ScenarioConfig& cfg,
                              RandomStream& rng) {
    if (dt <= 0.0) throw std::invalid_argument("rwp_advance: dt must be > 0");
    for (int i = 0; i < state.size(); ++i) {
        double remaining = dt;
        while (remaining > 0.0) {
            if (state.pause_remaining[i] > 0.0) {
                const double used = std::min(state.pause_remaining[i], remaining);
                state.pause_remaining[i] -= used;
                remaining -= used;
                if (state.pause_remaining[i] <= 0.0) {
                    state.pause_remaining[i] = 0.0;
                    state.waypoints[i] = detail::sample_disk_point(cfg, rng);
                    state.speeds[i] = rng.uniform(cfg.rwp.speed_min, cfg.rwp.speed_max);
                }
                continue;
            }
            const Vec3 to_wp = state.waypoints[i] - state.positions[i];
            const double dist = norm(to_wp);
            const double speed = state.speeds[i];
            if (dist <= 1e-12 || speed <= 0.0) {
                // Arrived: stop and enter the pause period.
                state.positions[i] = state.waypoints[i];
                state.speeds[i] = 0.0;
                state.pause_remaining[i] = cfg.rwp.pause;
                if (cfg.rwp.pause <= 0.0) {
                    state.waypoints[i] = detail::sample_disk_point(cfg, rng);
                    state.speeds[i] = rng.uniform(cfg.rwp.speed_min, cfg.rwp.speed_max);
                }
                continue;
            }
            const double time_to_wp = dist / speed;
            if (time_to_wp <= remaining) {
                state.positions[i] = state.waypoints[i];
                state.speeds[i] = 0.0;
                state.pause_remaining[i] = cfg.rwp.pause;
                remaining -= time_to_wp;
            } else {
                const double step = speed * remaining;
                state.positions[i] = state.positions[i] + (step / dist) * to_wp;
                remaining = 0.0;
            }
        }
    }
    return state;
}

// Elevation of the UAV as seen from the GBS, in degrees.
inline double elevation_angle_deg(const Vec3& gbs_pos, const Vec3& uav_pos) {
    const double d = distance(gbs_pos, uav_pos);
    if (d <= 0.0) throw std::domain_error("elevation_angle: coincident positions");
    const double h_rel = uav_pos.z - gbs_pos.z;
    return (180.0 / M_PI) * std::asin(h_rel / d);
}

}  // namespace swarmcc
