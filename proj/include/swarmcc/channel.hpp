#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "swarmcc/geometry.hpp"
#include "swarmcc/rng.hpp"
#include "swarmcc/scenario.hpp"

namespace swarmcc {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

// One block-fading realization: ground-to-air coefficients for every
// (GBS, antenna, UAV) triple and UAV-to-UAV coefficients for every ordered
// pair. All entries are CN(0,1).
struct FadingDraw {
    int n_gbs = 0;       // M + 1
    int n_antennas = 0;  // K
    int n_uavs = 0;      // N
    std::vector<std::complex<double>> g2a;  // [(m * K + k) * N + n]
    std::vector<std::complex<double>> u2u;  // [i * N + n], i != n meaningful

    std::complex<double> ground_to_air(int m, int k, int n) const {
        return g2a[(static_cast<std::size_t>(m) * n_antennas + k) * n_uavs + n];
    }
    std::complex<double> uav_to_uav(int i, int n) const {
        return u2u[static_cast<std::size_t>(i) * n_uavs + n];
    }
};

inline FadingDraw sample_fading(const ScenarioConfig& cfg, RandomStream& rng) {
    FadingDraw f;
    f.n_gbs = cfg.n_interferers + 1;
    f.n_antennas = cfg.n_antennas;
    f.n_uavs = cfg.n_uavs;
    f.g2a.resize(static_cast<std::size_t>(f.n_gbs) * f.n_antennas * f.n_uavs);
    f.u2u.resize(static_cast<std::size_t>(f.n_uavs) * f.n_uavs);
    for (auto& c : f.g2a) c = rng.complex_gaussian();
    for (auto& c : f.u2u) c = rng.complex_gaussian();
    return f;
}

// Signal, interference and noise of one link, all in watts.
struct LinkBudget {
    double signal_power = 0.0;
    double interference_power = 0.0;
    double noise_power = 0.0;
    double sinr = 0.0;
};

inline LinkBudget make_link_budget(double signal, double interference, double noise) {
    return {signal, interference, noise, signal / (interference + noise)};
}

// Sigmoid LoS probability in the elevation angle (degrees).
inline double los_probability(double theta_deg, double a, double b) {
    if (a <= 0.0 || b <= 0.0) throw std::invalid_argument("los_probability: a, b must be > 0");
    return 1.0 / (1.0 + a * std::exp(-b * (theta_deg - a)));
}

// Deterministic ground-to-air power gain: LoS/NLoS-weighted attenuation times
// the free-space factor (4 pi d f_c / c)^alpha1. The Rayleigh coefficient
// multiplies the amplitude, so E|h|^2 equals this prefactor.
inline double phase1_power_prefactor(const ScenarioConfig& cfg, const Vec3& gbs_pos,
                                     const Vec3& uav_pos) {
    const double d = distance(gbs_pos, uav_pos);
    if (d <= 0.0) throw std::domain_error("phase1 channel: zero distance");
    const double theta = elevation_angle_deg(gbs_pos, uav_pos);
    const double p_los = los_probability(theta, cfg.los_a, cfg.los_b);
    const double eta = p_los * cfg.eta_los + (1.0 - p_los) * cfg.eta_nlos;
    const double fs = std::pow(4.0 * M_PI * d * cfg.f_c / kSpeedOfLight, cfg.alpha1);
    return eta * fs;
}

// Complex channel from antenna k of GBS m to UAV n.
inline std::complex<double> phase1_channel(const ScenarioConfig& cfg,
                                           std::span<const Vec3> uav_positions,
                                           const FadingDraw& fading, int m, int n, int k) {
    const double pre = phase1_power_prefactor(cfg, cfg.gbs_positions[m], uav_positions[n]);
    return std::sqrt(pre) * fading.ground_to_air(m, k, n);
}

// Aggregate co-channel power from the interfering GBSs at UAV n:
// sum_m P * |sum_k h_{m,n}^k|^2. Appears in every Phase I and Phase II SINR.
inline double gbs_interference_power(const ScenarioConfig& cfg,
                                     std::span<const Vec3> uav_positions,
                                     const FadingDraw& fading, int n) {
    double total = 0.0;
    for (int m = 1; m <= cfg.n_interferers; ++m) {
        std::complex<double> sum{0.0, 0.0};
        for (int k = 0; k < cfg.n_antennas; ++k) sum += phase1_channel(cfg, uav_positions, fading, m, n, k);
        total += cfg.p_gbs * std::norm(sum);
    }
    return total;
}

// SINR of the control-center broadcast at UAV n.
inline LinkBudget phase1_sinr(const ScenarioConfig& cfg, std::span<const Vec3> uav_positions,
                              const FadingDraw& fading, int n) {
    std::complex<double> sum{0.0, 0.0};
    for (int k = 0; k < cfg.n_antennas; ++k) sum += phase1_channel(cfg, uav_positions, fading, 0, n, k);
    const double signal = cfg.p_gbs * std::norm(sum);
    const double interference = gbs_interference_power(cfg, uav_positions, fading, n);
    return make_link_budget(signal, interference, cfg.noise_power);
}

// D2D channel amplitude from UAV i to UAV n: d^(-alpha2/2) * beta, so that
// |h|^2 = d^(-alpha2) * |beta|^2.
inline std::complex<double> d2d_channel(const ScenarioConfig& cfg,
                                        std::span<const Vec3> uav_positions,
                                        const FadingDraw& fading, int i, int n) {
    if (i == n) throw std::domain_error("d2d_channel: i == n");
    const double d = distance(uav_positions[i], uav_positions[n]);
    if (d <= 0.0) throw std::domain_error("d2d_channel: zero distance");
    return std::pow(d, -0.5 * cfg.alpha2) * fading.uav_to_uav(i, n);
}

// SINR of a power-controlled unicast from UAV i at UAV n.
inline LinkBudget unicast_sinr(const ScenarioConfig& cfg, std::span<const Vec3> uav_positions,
                               const FadingDraw& fading, int i, int n, double tx_power) {
    const double signal = tx_power * std::norm(d2d_channel(cfg, uav_positions, fading, i, n));
    const double interference = gbs_interference_power(cfg, uav_positions, fading, n);
    return make_link_budget(signal, interference, cfg.noise_power);
}

// SINR of the shared-subchannel broadcast at UAV n. The broadcasters are
// GNSS-synchronized, so their amplitudes combine coherently.
inline LinkBudget broadcast_sinr(const ScenarioConfig& cfg, std::span<const Vec3> uav_positions,
                                 const FadingDraw& fading, std::span<const int> tx_set, int n) {
    if (tx_set.empty()) throw std::domain_error("broadcast_sinr: empty tx_set");
    std::complex<double> sum{0.0, 0.0};
    for (int i : tx_set) {
        if (i == n) throw std::domain_error("broadcast_sinr: receiver in tx_set");
        sum += d2d_channel(cfg, uav_positions, fading, i, n);
    }
    const double signal = cfg.p_uav_max * std::norm(sum);
    const double interference = gbs_interference_power(cfg, uav_positions, fading, n);
    return make_link_budget(signal, interference, cfg.noise_power);
}

}  // namespace swarmcc
