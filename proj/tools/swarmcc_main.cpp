// Command-line driver: train / eval / sweep / plot.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "swarmcc/io.hpp"
#include "swarmcc/plot.hpp"
#include "swarmcc/trainer.hpp"

namespace fs = std::filesystem;
using namespace swarmcc;

namespace {

int log_level() {
    const char* v = std::getenv("SWARMCC_LOG");
    return v ? std::atoi(v) : 1;
}

struct TrainArgs {
    std::string config_path;
    std::string scheme;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> episodes;
    std::optional<int> rounds;
    std::optional<double> e_c;
};

TrainConfig resolve_config(const TrainArgs& a) {
    TrainConfig cfg = a.config_path.empty() ? TrainConfig{} : parse_config(a.config_path);
    if (!a.scheme.empty()) cfg.scheme = scheme_from_string(a.scheme);
    if (a.seed) cfg.seed = *a.seed;
    if (a.episodes) cfg.episodes = *a.episodes;
    if (a.rounds) cfg.rounds_per_episode = *a.rounds;
    if (a.e_c) cfg.e_c = *a.e_c;
    cfg.validate();
    return cfg;
}

void run_training(const TrainConfig& cfg, const std::string& out_dir) {
    fs::create_directories(out_dir);
    const std::string started = detail::utc_now();
    int last_logged = -1;
    const CheckpointSink sink = [&](int episode, double epsilon,
                                    const std::vector<Agent>& agents) {
        const bool final = episode + 1 == cfg.episodes;
        const std::string name =
            final ? "checkpoint_final.ckpt" : "checkpoint_ep" + std::to_string(episode + 1) + ".ckpt";
        save_checkpoint(out_dir + "/" + name, agents, episode, epsilon);
        if (log_level() >= 1 && episode != last_logged) {
            std::printf("[train] episode %d/%d checkpoint -> %s\n", episode + 1, cfg.episodes,
                        name.c_str());
            std::fflush(stdout);
            last_logged = episode;
        }
    };
    const TrainResult result = train(cfg, sink);
    write_metrics_csv(out_dir + "/metrics.csv", result.metrics);
    write_lambda_csv(out_dir + "/lambda.csv", result.lambda_series);
    write_manifest(out_dir, cfg, started, detail::utc_now());
    if (log_level() >= 1) {
        const MetricsRecord& last = result.metrics.back();
        std::printf("[train] done: scheme=%s e_c=%g seed=%llu mean_success=%.3f mean_energy=%.3f\n",
                    to_string(cfg.scheme).c_str(), cfg.e_c,
                    static_cast<unsigned long long>(cfg.seed), last.mean_success,
                    last.mean_energy);
    }
}

int cmd_train(const TrainArgs& args) {
    const TrainConfig cfg = resolve_config(args);
    run_training(cfg, args.out_dir);
    return 0;
}

int cmd_eval(const std::string& run_dir, int episodes, std::uint64_t seed) {
    const TrainConfig cfg = config_from_manifest(run_dir);
    std::vector<Agent> agents;
    const CheckpointInfo info = load_checkpoint(run_dir + "/checkpoint_final.ckpt", agents, seed);
    if (info.scheme != cfg.scheme || info.n_uavs != cfg.scenario.n_uavs)
        throw std::runtime_error("checkpoint does not match the run's config");
    const EvalSummary s = evaluate(agents, cfg, episodes, seed);
    std::printf("eval: episodes=%d rounds=%d\n", s.episodes, s.rounds_per_episode);
    std::printf("eval: mean_success=%.4f +-%.4f\n", s.mean_success, s.ci95_success);
    std::printf("eval: mean_energy=%.4f +-%.4f\n", s.mean_energy, s.ci95_energy);
    std::ofstream f(run_dir + "/eval.csv", std::ios::binary);
    f << "episodes,mean_success,ci95_success,mean_energy,ci95_energy\n";
    f << s.episodes << ',' << s.mean_success << ',' << s.ci95_success << ',' << s.mean_energy
      << ',' << s.ci95_energy << "\n";
    return 0;
}

// Final value of the window-50 rolling mean of a metrics column.
double final_rolling(const std::vector<MetricsRecord>& m, double MetricsRecord::* field) {
    std::vector<double> xs;
    xs.reserve(m.size());
    for (const auto& r : m) xs.push_back(r.*field);
    return rolling_mean(xs, 50).back();
}

int cmd_sweep(const std::string& config_path, const std::string& axis, const std::string& scheme,
              std::uint64_t base_seed, const std::string& out_dir) {
    const auto eq = axis.find('=');
    if (eq == std::string::npos) throw std::runtime_error("sweep axis must be key=v1,v2,...");
    const std::string key = axis.substr(0, eq);
    std::vector<std::string> values;
    {
        std::istringstream vs(axis.substr(eq + 1));
        std::string v;
        while (std::getline(vs, v, ',')) values.push_back(v);
    }
    if (values.empty()) throw std::runtime_error("sweep axis has no values");

    TrainConfig base = config_path.empty() ? TrainConfig{} : parse_config(config_path);
    if (!scheme.empty()) base.scheme = scheme_from_string(scheme);
    base.seed = base_seed;

    fs::create_directories(out_dir);
    std::ofstream summary(out_dir + "/summary.csv", std::ios::binary);
    summary << "axis,value,run_dir,final_success_rolling50,final_energy_rolling50,final_lambda_"
               "mean\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::string text = config_to_text(base);
        text += key + " = " + values[i] + "\n";
        text += "seed = " + std::to_string(base_seed + i) + "\n";
        const TrainConfig cfg = parse_config_text(text);
        std::string dir_key = key;
        for (char& c : dir_key)
            if (c == '.') c = '_';
        const std::string run_dir = out_dir + "/" + dir_key + "_" + values[i];
        if (log_level() >= 1)
            std::printf("[sweep] %s = %s -> %s\n", key.c_str(), values[i].c_str(),
                        run_dir.c_str());
        run_training(cfg, run_dir);
        const auto metrics = read_metrics_csv(run_dir + "/metrics.csv");
        summary << key << ',' << values[i] << ',' << run_dir << ','
                << final_rolling(metrics, &MetricsRecord::mean_success) << ','
                << final_rolling(metrics, &MetricsRecord::mean_energy) << ','
                << final_rolling(metrics, &MetricsRecord::lambda_mean) << "\n";
    }
    return 0;
}

int cmd_plot(const std::vector<std::string>& run_dirs, std::string out_dir) {
    if (run_dirs.empty()) throw std::runtime_error("plot: at least one --run directory required");
    if (out_dir.empty()) out_dir = run_dirs.size() == 1 ? run_dirs.front() : ".";
    fs::create_directories(out_dir);

    std::vector<Series> success, energy, lambda;
    std::optional<double> e_c;
    std::ofstream data(out_dir + "/plot_data.csv", std::ios::binary);
    data << "run,episode,success_rolling50,energy_rolling50,lambda_mean\n";
    for (const std::string& dir : run_dirs) {
        const auto metrics = read_metrics_csv(dir + "/metrics.csv");
        const TrainConfig cfg = config_from_manifest(dir);
        if (!e_c) e_c = cfg.e_c;
        const std::string label =
            to_string(cfg.scheme) + " e_c=" + detail::csv_num(cfg.e_c) +
            " seed=" + std::to_string(cfg.seed);
        Series s{label, {}, {}}, e{label, {}, {}}, l{label, {}, {}};
        std::vector<double> su, en, la;
        for (const auto& r : metrics) {
            s.x.push_back(r.episode);
            su.push_back(r.mean_success);
            en.push_back(r.mean_energy);
            la.push_back(r.lambda_mean);
        }
        e.x = s.x;
        l.x = s.x;
        s.y = rolling_mean(su, 50);
        e.y = rolling_mean(en, 50);
        l.y = la;
        for (std::size_t i = 0; i < s.x.size(); ++i)
            data << fs::path(dir).filename().string() << ',' << s.x[i] << ',' << s.y[i] << ','
                 << e.y[i] << ',' << l.y[i] << "\n";
        success.push_back(std::move(s));
        energy.push_back(std::move(e));
        lambda.push_back(std::move(l));
    }
    render_line_chart(out_dir + "/success_rolling.svg",
                      "Mean UAVs delivered per round (rolling 50)", "episode", "mean success",
                      success);
    render_line_chart(out_dir + "/energy_rolling.svg",
                      "Normalized round energy (rolling 50)", "episode", "energy / E_b", energy,
                      e_c);
    render_line_chart(out_dir + "/lambda.svg", "Lagrange multiplier", "episode", "lambda",
                      lambda);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"UAV swarm C&C dissemination: simulator and constrained MARL trainer"};
    app.require_subcommand(1);

    TrainArgs train_args;
    CLI::App* train_cmd = app.add_subcommand("train", "train agents and write a run directory");
    train_cmd->add_option("--config", train_args.config_path, "config file (defaults if omitted)");
    train_cmd->add_option("--scheme", train_args.scheme, "unicast|broadcast|hybrid");
    train_cmd->add_option("--seed", train_args.seed, "master seed");
    train_cmd->add_option("--episodes", train_args.episodes, "episode count");
    train_cmd->add_option("--rounds", train_args.rounds, "rounds per episode");
    train_cmd->add_option("--e-c", train_args.e_c, "normalized energy budget");
    train_cmd->add_option("--out", train_args.out_dir, "output run directory")->required();

    std::string eval_run;
    int eval_episodes = 10;
    std::uint64_t eval_seed = 12345;
    CLI::App* eval_cmd = app.add_subcommand("eval", "greedy evaluation of a trained run");
    eval_cmd->add_option("--run", eval_run, "run directory")->required();
    eval_cmd->add_option("--episodes", eval_episodes, "evaluation episodes");
    eval_cmd->add_option("--seed", eval_seed, "evaluation seed");

    std::string sweep_config, sweep_axis, sweep_scheme, sweep_out;
    std::uint64_t sweep_seed = 1;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "grid of training runs along one axis");
    sweep_cmd->add_option("--config", sweep_config, "base config file");
    sweep_cmd->add_option("--axis", sweep_axis, "key=v1,v2,... (e.g. e_c=1,3,5 or pid.kp=...)")
        ->required();
    sweep_cmd->add_option("--scheme", sweep_scheme, "unicast|broadcast|hybrid");
    sweep_cmd->add_option("--seed", sweep_seed, "base seed, incremented per grid point");
    sweep_cmd->add_option("--out", sweep_out, "output directory")->required();

    std::vector<std::string> plot_runs;
    std::string plot_out;
    CLI::App* plot_cmd = app.add_subcommand("plot", "render charts for one or more runs");
    plot_cmd->add_option("--run", plot_runs, "run directory (repeatable)")->required();
    plot_cmd->add_option("--out", plot_out, "chart output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train_cmd) return cmd_train(train_args);
        if (*eval_cmd) return cmd_eval(eval_run, eval_episodes, eval_seed);
        if (*sweep_cmd)
            return cmd_sweep(sweep_config, sweep_axis, sweep_scheme, sweep_seed, sweep_out);
        if (*plot_cmd) return cmd_plot(plot_runs, plot_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
