#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "swarmcc/cmdp_env.hpp"
#include "swarmcc/scenario.hpp"

namespace swarmcc {

inline constexpr const char* kCodeVersion = "swarmcc 0.1.0";

struct LearningConfig {
    double lr = 0.001;
    double gamma = 0.98;
    double beta = 0.01;
    int batch = 32;
    int replay_capacity = 2000;
    int feat = 32;
    int heads = 8;
    int head_hidden = 64;
    bool scale_sqrt_dk = false;  // attention scale convention
};

struct PidConfig {
    double kp = 0.05;
    double ki = 0.005;
    double kd = 0.1;
    bool per_episode = false;  // false: update after every round with a Phase II
};

struct TrainConfig {
    Scheme scheme = Scheme::Broadcast;
    int episodes = 2000;
    int rounds_per_episode = 200;
    double e_c = 3.0;  // normalized energy budget per round
    double epsilon_start = 0.6;
    double epsilon_decay = 0.996;
    double epsilon_min = 0.01;
    std::uint64_t seed = 1;
    int checkpoint_every = 100;
    ScenarioConfig scenario;
    LearningConfig learning;
    PidConfig pid;

    void validate() const {
        scenario.validate();
        auto require = [](bool ok, const char* what) {
            if (!ok) throw std::invalid_argument(std::string("config: ") + what);
        };
        require(episodes >= 1, "episodes must be >= 1");
        require(rounds_per_episode >= 1, "rounds_per_episode must be >= 1");
        require(e_c > 0.0, "e_c must be > 0");
        require(epsilon_start >= 0.0 && epsilon_start <= 1.0, "epsilon_start in [0, 1]");
        require(epsilon_decay > 0.0 && epsilon_decay <= 1.0, "epsilon_decay in (0, 1]");
        require(epsilon_min >= 0.0 && epsilon_min <= 1.0, "epsilon_min in [0, 1]");
        require(checkpoint_every >= 1, "checkpoint_every must be >= 1");
        require(learning.lr > 0.0, "learning.lr must be > 0");
        require(learning.gamma >= 0.0 && learning.gamma < 1.0, "learning.gamma in [0, 1)");
        require(learning.beta > 0.0 && learning.beta <= 1.0, "learning.beta in (0, 1]");
        require(learning.batch >= 1, "learning.batch must be >= 1");
        require(learning.replay_capacity >= learning.batch,
                "learning.replay_capacity must be >= batch");
        require(learning.feat >= 1 && learning.heads >= 1 &&
                    learning.feat % learning.heads == 0,
                "learning.feat must be a positive multiple of learning.heads");
        require(learning.head_hidden >= 1, "learning.head_hidden must be >= 1");
        require(pid.kp >= 0.0 && pid.ki >= 0.0 && pid.kd >= 0.0, "pid gains must be >= 0");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& v) {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("not a number: '" + v + "'");
    return x;
}

inline int parse_int(const std::string& v) {
    std::size_t used = 0;
    const long x = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument("not an integer: '" + v + "'");
    return static_cast<int>(x);
}

inline std::uint64_t parse_u64(const std::string& v) {
    std::size_t used = 0;
    const unsigned long long x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument("not an integer: '" + v + "'");
    return static_cast<std::uint64_t>(x);
}

inline bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("not a bool: '" + v + "'");
}

inline std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

using Setter = std::function<void(TrainConfig&, const std::string&)>;

inline const std::map<std::string, Setter>& config_setters() {
    static const std::map<std::string, Setter> setters = [] {
        std::map<std::string, Setter> m;
        auto d = [](double TrainConfig::* f) {
            return [f](TrainConfig& c, const std::string& v) { c.*f = parse_double(v); };
        };
        m["scheme"] = [](TrainConfig& c, const std::string& v) { c.scheme = scheme_from_string(v); };
        m["episodes"] = [](TrainConfig& c, const std::string& v) { c.episodes = parse_int(v); };
        m["rounds_per_episode"] = [](TrainConfig& c, const std::string& v) {
            c.rounds_per_episode = parse_int(v);
        };
        m["e_c"] = d(&TrainConfig::e_c);
        m["epsilon_start"] = d(&TrainConfig::epsilon_start);
        m["epsilon_decay"] = d(&TrainConfig::epsilon_decay);
        m["epsilon_min"] = d(&TrainConfig::epsilon_min);
        m["seed"] = [](TrainConfig& c, const std::string& v) { c.seed = parse_u64(v); };
        m["checkpoint_every"] = [](TrainConfig& c, const std::string& v) {
            c.checkpoint_every = parse_int(v);
        };

        auto sd = [](double ScenarioConfig::* f) {
            return [f](TrainConfig& c, const std::string& v) { c.scenario.*f = parse_double(v); };
        };
        auto si = [](int ScenarioConfig::* f) {
            return [f](TrainConfig& c, const std::string& v) { c.scenario.*f = parse_int(v); };
        };
        m["scenario.n_uavs"] = si(&ScenarioConfig::n_uavs);
        m["scenario.n_interferers"] = si(&ScenarioConfig::n_interferers);
        m["scenario.n_antennas"] = si(&ScenarioConfig::n_antennas);
        m["scenario.r_ground"] = sd(&ScenarioConfig::r_ground);
        m["scenario.r_swarm"] = sd(&ScenarioConfig::r_swarm);
        m["scenario.height"] = sd(&ScenarioConfig::height);
        m["scenario.p_gbs"] = sd(&ScenarioConfig::p_gbs);
        m["scenario.p_uav_max"] = sd(&ScenarioConfig::p_uav_max);
        m["scenario.p_rx"] = sd(&ScenarioConfig::p_rx);
        m["scenario.p_overhead"] = sd(&ScenarioConfig::p_overhead);
        m["scenario.p_idle"] = sd(&ScenarioConfig::p_idle);
        m["scenario.xi"] = sd(&ScenarioConfig::xi);
        m["scenario.kappa"] = sd(&ScenarioConfig::kappa);
        m["scenario.alpha1"] = sd(&ScenarioConfig::alpha1);
        m["scenario.alpha2"] = sd(&ScenarioConfig::alpha2);
        m["scenario.f_c"] = sd(&ScenarioConfig::f_c);
        m["scenario.eta_los"] = sd(&ScenarioConfig::eta_los);
        m["scenario.eta_nlos"] = sd(&ScenarioConfig::eta_nlos);
        m["scenario.los_a"] = sd(&ScenarioConfig::los_a);
        m["scenario.los_b"] = sd(&ScenarioConfig::los_b);
        m["scenario.gamma1"] = sd(&ScenarioConfig::gamma1);
        m["scenario.gamma2"] = sd(&ScenarioConfig::gamma2);
        m["scenario.noise_power"] = sd(&ScenarioConfig::noise_power);
        m["scenario.tau"] = sd(&ScenarioConfig::tau);
        m["scenario.tau1"] = sd(&ScenarioConfig::tau1);
        m["scenario.tau2"] = sd(&ScenarioConfig::tau2);
        m["scenario.slot_duration"] = sd(&ScenarioConfig::slot_duration);
        m["scenario.rwp_speed_min"] = [](TrainConfig& c, const std::string& v) {
            c.scenario.rwp.speed_min = parse_double(v);
        };
        m["scenario.rwp_speed_max"] = [](TrainConfig& c, const std::string& v) {
            c.scenario.rwp.speed_max = parse_double(v);
        };
        m["scenario.rwp_pause"] = [](TrainConfig& c, const std::string& v) {
            c.scenario.rwp.pause = parse_double(v);
        };
        m["scenario.round_interval"] = sd(&ScenarioConfig::round_interval);
        m["scenario.interferer_radius"] = [](TrainConfig&, const std::string&) {
            // handled after all keys are read (needs n_interferers)
        };

        auto ld = [](double LearningConfig::* f) {
            return [f](TrainConfig& c, const std::string& v) { c.learning.*f = parse_double(v); };
        };
        auto li = [](int LearningConfig::* f) {
            return [f](TrainConfig& c, const std::string& v) { c.learning.*f = parse_int(v); };
        };
        m["learning.lr"] = ld(&LearningConfig::lr);
        m["learning.gamma"] = ld(&LearningConfig::gamma);
        m["learning.beta"] = ld(&LearningConfig::beta);
        m["learning.batch"] = li(&LearningConfig::batch);
        m["learning.replay_capacity"] = li(&LearningConfig::replay_capacity);
        m["learning.feat"] = li(&LearningConfig::feat);
        m["learning.heads"] = li(&LearningConfig::heads);
        m["learning.head_hidden"] = li(&LearningConfig::head_hidden);
        m["learning.attn_scale"] = [](TrainConfig& c, const std::string& v) {
            if (v == "inv_sqrt_dk") c.learning.scale_sqrt_dk = false;
            else if (v == "sqrt_dk") c.learning.scale_sqrt_dk = true;
            else throw std::invalid_argument("attn_scale must be inv_sqrt_dk or sqrt_dk");
        };

        m["pid.kp"] = [](TrainConfig& c, const std::string& v) { c.pid.kp = parse_double(v); };
        m["pid.ki"] = [](TrainConfig& c, const std::string& v) { c.pid.ki = parse_double(v); };
        m["pid.kd"] = [](TrainConfig& c, const std::string& v) { c.pid.kd = parse_double(v); };
        m["pid.per_episode"] = [](TrainConfig& c, const std::string& v) {
            c.pid.per_episode = parse_bool(v);
        };
        return m;
    }();
    return setters;
}

}  // namespace detail

// Interferers sit evenly spaced on a ground circle, first one at 45 degrees;
// the default radius reproduces the (+-105, +-105) layout.
inline void rebuild_gbs_layout(ScenarioConfig& sc, double interferer_radius) {
    sc.gbs_positions.assign(1, Vec3{0.0, 0.0, 0.0});
    for (int j = 0; j < sc.n_interferers; ++j) {
        const double ang = M_PI / 4.0 + 2.0 * M_PI * j / std::max(sc.n_interferers, 1);
        sc.gbs_positions.push_back(
            {interferer_radius * std::cos(ang), interferer_radius * std::sin(ang), 0.0});
    }
}

// Parses the flat key-value config format. Every field defaults to the
// reference parameter set; unknown keys and malformed values are rejected
// with the line number.
inline TrainConfig parse_config_text(const std::string& text) {
    TrainConfig cfg;
    double interferer_radius = 105.0 * std::sqrt(2.0);
    bool layout_dirty = false;

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        const auto& setters = detail::config_setters();
        const auto it = setters.find(key);
        if (it == setters.end())
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": unknown key '" + key + "'");
        try {
            if (key == "scenario.interferer_radius") {
                interferer_radius = detail::parse_double(value);
                layout_dirty = true;
            } else {
                if (key == "scenario.n_interferers") layout_dirty = true;
                it->second(cfg, value);
            }
        } catch (const std::exception& e) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": " +
                                        e.what());
        }
    }
    if (layout_dirty) rebuild_gbs_layout(cfg.scenario, interferer_radius);
    cfg.scenario.n_slots =
        static_cast<int>(std::floor(cfg.scenario.tau2 / cfg.scenario.slot_duration));
    cfg.validate();
    return cfg;
}

inline TrainConfig parse_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_config_text(buf.str());
}

// Normalized snapshot of every setting; parse_config_text() round-trips it.
inline std::string config_to_text(const TrainConfig& c) {
    using detail::fmt;
    std::ostringstream o;
    o << "scheme = " << to_string(c.scheme) << "\n";
    o << "episodes = " << c.episodes << "\n";
    o << "rounds_per_episode = " << c.rounds_per_episode << "\n";
    o << "e_c = " << fmt(c.e_c) << "\n";
    o << "epsilon_start = " << fmt(c.epsilon_start) << "\n";
    o << "epsilon_decay = " << fmt(c.epsilon_decay) << "\n";
    o << "epsilon_min = " << fmt(c.epsilon_min) << "\n";
    o << "seed = " << c.seed << "\n";
    o << "checkpoint_every = " << c.checkpoint_every << "\n";
    const ScenarioConfig& s = c.scenario;
    o << "scenario.n_uavs = " << s.n_uavs << "\n";
    o << "scenario.n_interferers = " << s.n_interferers << "\n";
    o << "scenario.n_antennas = " << s.n_antennas << "\n";
    o << "scenario.r_ground = " << fmt(s.r_ground) << "\n";
    o << "scenario.r_swarm = " << fmt(s.r_swarm) << "\n";
    o << "scenario.height = " << fmt(s.height) << "\n";
    o << "scenario.p_gbs = " << fmt(s.p_gbs) << "\n";
    o << "scenario.p_uav_max = " << fmt(s.p_uav_max) << "\n";
    o << "scenario.p_rx = " << fmt(s.p_rx) << "\n";
    o << "scenario.p_overhead = " << fmt(s.p_overhead) << "\n";
    o << "scenario.p_idle = " << fmt(s.p_idle) << "\n";
    o << "scenario.xi = " << fmt(s.xi) << "\n";
    o << "scenario.kappa = " << fmt(s.kappa) << "\n";
    o << "scenario.alpha1 = " << fmt(s.alpha1) << "\n";
    o << "scenario.alpha2 = " << fmt(s.alpha2) << "\n";
    o << "scenario.f_c = " << fmt(s.f_c) << "\n";
    o << "scenario.eta_los = " << fmt(s.eta_los) << "\n";
    o << "scenario.eta_nlos = " << fmt(s.eta_nlos) << "\n";
    o << "scenario.los_a = " << fmt(s.los_a) << "\n";
    o << "scenario.los_b = " << fmt(s.los_b) << "\n";
    o << "scenario.gamma1 = " << fmt(s.gamma1) << "\n";
    o << "scenario.gamma2 = " << fmt(s.gamma2) << "\n";
    o << "scenario.noise_power = " << fmt(s.noise_power) << "\n";
    o << "scenario.tau = " << fmt(s.tau) << "\n";
    o << "scenario.tau1 = " << fmt(s.tau1) << "\n";
    o << "scenario.tau2 = " << fmt(s.tau2) << "\n";
    o << "scenario.slot_duration = " << fmt(s.slot_duration) << "\n";
    o << "scenario.rwp_speed_min = " << fmt(s.rwp.speed_min) << "\n";
    o << "scenario.rwp_speed_max = " << fmt(s.rwp.speed_max) << "\n";
    o << "scenario.rwp_pause = " << fmt(s.rwp.pause) << "\n";
    o << "scenario.round_interval = " << fmt(s.round_interval) << "\n";
    if (s.n_interferers > 0)
        o << "scenario.interferer_radius = " << fmt(horizontal_radius(s.gbs_positions[1])) << "\n";
    const LearningConfig& l = c.learning;
    o << "learning.lr = " << fmt(l.lr) << "\n";
    o << "learning.gamma = " << fmt(l.gamma) << "\n";
    o << "learning.beta = " << fmt(l.beta) << "\n";
    o << "learning.batch = " << l.batch << "\n";
    o << "learning.replay_capacity = " << l.replay_capacity << "\n";
    o << "learning.feat = " << l.feat << "\n";
    o << "learning.heads = " << l.heads << "\n";
    o << "learning.head_hidden = " << l.head_hidden << "\n";
    o << "learning.attn_scale = " << (l.scale_sqrt_dk ? "sqrt_dk" : "inv_sqrt_dk") << "\n";
    o << "pid.kp = " << fmt(c.pid.kp) << "\n";
    o << "pid.ki = " << fmt(c.pid.ki) << "\n";
    o << "pid.kd = " << fmt(c.pid.kd) << "\n";
    o << "pid.per_episode = " << (c.pid.per_episode ? "true" : "false") << "\n";
    return o.str();
}

}  // namespace swarmcc
