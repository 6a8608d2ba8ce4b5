#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmcc/agent.hpp"
#include "swarmcc/trainer.hpp"

namespace swarmcc {

namespace detail {

inline std::string csv_num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace detail

inline constexpr const char* kMetricsHeader =
    "episode,mean_success,mean_energy,lambda_mean,loss,epsilon";

inline void write_metrics_csv(const std::string& path, const std::vector<MetricsRecord>& records) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << kMetricsHeader << "\n";
    for (const MetricsRecord& r : records) {
        f << r.episode << ',' << detail::csv_num(r.mean_success) << ','
          << detail::csv_num(r.mean_energy) << ',' << detail::csv_num(r.lambda_mean) << ','
          << detail::csv_num(r.loss) << ',' << detail::csv_num(r.epsilon) << "\n";
    }
}

inline std::vector<MetricsRecord> read_metrics_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(f, line) || line != kMetricsHeader)
        throw std::runtime_error("bad metrics header in " + path);
    std::vector<MetricsRecord> out;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        MetricsRecord r;
        std::istringstream row(line);
        std::string cell;
        auto next = [&]() {
            if (!std::getline(row, cell, ',')) throw std::runtime_error("short row in " + path);
            return cell;
        };
        r.episode = std::stoi(next());
        r.mean_success = std::stod(next());
        r.mean_energy = std::stod(next());
        r.lambda_mean = std::stod(next());
        r.loss = std::stod(next());
        r.epsilon = std::stod(next());
        out.push_back(r);
    }
    return out;
}

// Per-agent multiplier trajectories, one row per episode.
inline void write_lambda_csv(const std::string& path,
                             const std::vector<std::vector<double>>& series) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    const std::size_t n = series.empty() ? 0 : series.front().size();
    f << "episode";
    for (std::size_t i = 0; i < n; ++i) f << ",lambda_" << i;
    f << "\n";
    for (std::size_t ep = 0; ep < series.size(); ++ep) {
        f << ep;
        for (double v : series[ep]) f << ',' << detail::csv_num(v);
        f << "\n";
    }
}

inline std::vector<std::vector<double>> read_lambda_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("empty lambda csv " + path);
    std::vector<std::vector<double>> out;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');  // episode index
        std::vector<double> vals;
        while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
        out.push_back(std::move(vals));
    }
    return out;
}

inline constexpr const char* kCheckpointMagic = "SWARMCC-CKPT-1";

// Self-describing agent bundle: a JSON header with the full tensor table
// (names, shapes, offsets) followed by the raw little-endian doubles.
// Round-trips bit-exactly.
inline void save_checkpoint(const std::string& path, const std::vector<Agent>& agents,
                            int episode, double epsilon) {
    if (agents.empty()) throw std::invalid_argument("save_checkpoint: no agents");
    const NetConfig& net = agents.front().q_params.cfg;
    const ParamLayout& layout = agents.front().q_params.layout;

    nlohmann::json header;
    header["code"] = kCodeVersion;
    header["scheme"] = to_string(agents.front().scheme.scheme);
    header["n_uavs"] = agents.front().scheme.n_uavs;
    header["episode"] = episode;
    header["epsilon"] = epsilon;
    header["replay_capacity"] = agents.front().replay.capacity();
    header["net"] = {{"in_dim", net.in_dim},        {"feat", net.feat},
                     {"heads", net.heads},          {"head_hidden", net.head_hidden},
                     {"actions", net.actions},      {"scale_sqrt_dk", net.scale_sqrt_dk}};

    nlohmann::json shapes = nlohmann::json::array();
    auto add = [&](const char* name, std::size_t off, int rows, int cols) {
        shapes.push_back({{"name", name}, {"offset", off}, {"rows", rows}, {"cols", cols}});
    };
    const int f = net.feat;
    add("enc_w1", layout.enc_w1, f, net.in_dim);
    add("enc_b1", layout.enc_b1, f, 1);
    add("enc_w2", layout.enc_w2, f, f);
    add("enc_b2", layout.enc_b2, f, 1);
    for (int l = 0; l < 2; ++l) {
        const std::string p = "gat" + std::to_string(l + 1) + "_";
        add((p + "wq").c_str(), layout.gat[l].wq, f, f);
        add((p + "wk").c_str(), layout.gat[l].wk, f, f);
        add((p + "wv").c_str(), layout.gat[l].wv, f, f);
        add((p + "wp").c_str(), layout.gat[l].wp, f, f);
        add((p + "bp").c_str(), layout.gat[l].bp, f, 1);
    }
    add("head_w1", layout.head_w1, net.head_hidden, 3 * f);
    add("head_b1", layout.head_b1, net.head_hidden, 1);
    add("head_w2", layout.head_w2, net.actions, net.head_hidden);
    add("head_b2", layout.head_b2, net.actions, 1);
    header["tensor_shapes"] = shapes;
    header["tensor_count"] = layout.total;
    header["blobs_per_agent"] = {"q_params", "target_params", "adam_m", "adam_v"};

    nlohmann::json agent_meta = nlohmann::json::array();
    for (const Agent& a : agents) {
        agent_meta.push_back({{"id", a.id},
                              {"adam_step", a.optimizer.step},
                              {"lagrange",
                               {{"kp", a.lagrange.kp},
                                {"ki", a.lagrange.ki},
                                {"kd", a.lagrange.kd},
                                {"integral", a.lagrange.integral},
                                {"prev_cost", a.lagrange.prev_cost},
                                {"lambda", a.lagrange.lambda}}}});
    }
    header["agents"] = agent_meta;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint " + path);
    out << kCheckpointMagic << "\n" << header.dump() << "\nBINARY\n";
    for (const Agent& a : agents) {
        auto blob = [&](const std::vector<double>& v) {
            out.write(reinterpret_cast<const char*>(v.data()),
                      static_cast<std::streamsize>(v.size() * sizeof(double)));
        };
        blob(a.q_params.data);
        blob(a.target_params.data);
        blob(a.optimizer.m);
        blob(a.optimizer.v);
    }
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

struct CheckpointInfo {
    Scheme scheme = Scheme::Broadcast;
    int n_uavs = 0;
    int episode = 0;
    double epsilon = 0.0;
    NetConfig net;
    std::size_t replay_capacity = 2000;
};

inline CheckpointInfo load_checkpoint(const std::string& path, std::vector<Agent>& agents,
                                      std::uint64_t agent_stream_seed) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint " + path);
    std::string magic, header_line, marker;
    std::getline(in, magic);
    if (magic != kCheckpointMagic) throw std::runtime_error("bad checkpoint magic in " + path);
    std::getline(in, header_line);
    std::getline(in, marker);
    if (marker != "BINARY") throw std::runtime_error("bad checkpoint layout in " + path);
    const nlohmann::json header = nlohmann::json::parse(header_line);

    CheckpointInfo info;
    info.scheme = scheme_from_string(header.at("scheme").get<std::string>());
    info.n_uavs = header.at("n_uavs").get<int>();
    info.episode = header.at("episode").get<int>();
    info.epsilon = header.at("epsilon").get<double>();
    info.replay_capacity = header.at("replay_capacity").get<std::size_t>();
    const auto& net = header.at("net");
    info.net.in_dim = net.at("in_dim").get<int>();
    info.net.feat = net.at("feat").get<int>();
    info.net.heads = net.at("heads").get<int>();
    info.net.head_hidden = net.at("head_hidden").get<int>();
    info.net.actions = net.at("actions").get<int>();
    info.net.scale_sqrt_dk = net.at("scale_sqrt_dk").get<bool>();

    const SchemeSpec spec{info.scheme, info.n_uavs};
    if (spec.action_count() != info.net.actions)
        throw std::runtime_error("checkpoint action count inconsistent in " + path);

    std::uint64_t s = agent_stream_seed;
    agents.clear();
    const LagrangeState default_pid;
    for (const auto& meta : header.at("agents")) {
        RandomStream stream(splitmix64(s));
        Agent a(meta.at("id").get<int>(), spec, info.net, info.replay_capacity, default_pid,
                std::move(stream));
        auto blob = [&](std::vector<double>& v) {
            in.read(reinterpret_cast<char*>(v.data()),
                    static_cast<std::streamsize>(v.size() * sizeof(double)));
        };
        blob(a.q_params.data);
        blob(a.target_params.data);
        blob(a.optimizer.m);
        blob(a.optimizer.v);
        a.optimizer.step = meta.at("adam_step").get<long>();
        const auto& lg = meta.at("lagrange");
        a.lagrange = {lg.at("kp").get<double>(),       lg.at("ki").get<double>(),
                      lg.at("kd").get<double>(),       lg.at("integral").get<double>(),
                      lg.at("prev_cost").get<double>(), lg.at("lambda").get<double>()};
        agents.push_back(std::move(a));
    }
    if (!in) throw std::runtime_error("truncated checkpoint " + path);
    if (static_cast<int>(agents.size()) != info.n_uavs)
        throw std::runtime_error("checkpoint agent count inconsistent in " + path);
    return info;
}

// Run manifest: config snapshot plus provenance. A completed run directory
// always holds manifest + metrics + final checkpoint.
inline void write_manifest(const std::string& dir, const TrainConfig& cfg,
                           const std::string& started_utc, const std::string& finished_utc) {
    const std::string config_text = config_to_text(cfg);
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(detail::fnv1a64(config_text)));
    nlohmann::json m;
    m["code"] = kCodeVersion;
    m["scheme"] = to_string(cfg.scheme);
    m["seed"] = cfg.seed;
    m["started_utc"] = started_utc;
    m["finished_utc"] = finished_utc;
    m["config_fnv1a64"] = hash;
    m["config"] = config_text;
    m["outputs"] = {{"metrics", "metrics.csv"},
                    {"lambda", "lambda.csv"},
                    {"checkpoint", "checkpoint_final.ckpt"}};
    std::ofstream f(dir + "/manifest.json", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write manifest in " + dir);
    f << m.dump(2) << "\n";
}

inline TrainConfig config_from_manifest(const std::string& dir) {
    std::ifstream f(dir + "/manifest.json");
    if (!f) throw std::runtime_error("cannot open manifest in " + dir);
    nlohmann::json m;
    f >> m;
    return parse_config_text(m.at("config").get<std::string>());
}

}  // namespace swarmcc
