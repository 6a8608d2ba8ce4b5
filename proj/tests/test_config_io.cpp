#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "swarmcc/config.hpp"
#include "swarmcc/io.hpp"
#include "swarmcc/plot.hpp"

using namespace swarmcc;

TEST_CASE("empty config text yields the full default parameter set") {
    const TrainConfig cfg = parse_config_text("");
    CHECK(cfg.scenario.n_uavs == 5);
    CHECK(cfg.scenario.n_antennas == 4);
    CHECK(cfg.scenario.n_interferers == 4);
    CHECK(cfg.scenario.p_gbs == Catch::Approx(19.9526).epsilon(1e-4));
    CHECK(cfg.scenario.p_uav_max == Catch::Approx(0.199526).epsilon(1e-4));
    CHECK(cfg.scenario.n_slots == 3);
    CHECK(cfg.learning.gamma == 0.98);
    CHECK(cfg.learning.batch == 32);
    CHECK(cfg.learning.replay_capacity == 2000);
    CHECK(cfg.learning.heads == 8);
    CHECK(cfg.learning.lr == 0.001);
    CHECK(cfg.learning.beta == 0.01);
    CHECK(cfg.episodes == 2000);
    CHECK(cfg.rounds_per_episode == 200);
    CHECK(cfg.epsilon_start == 0.6);
    CHECK(cfg.epsilon_decay == 0.996);
    CHECK(cfg.epsilon_min == 0.01);
    CHECK(cfg.scenario.gbs_positions.size() == 5);
    CHECK(cfg.scenario.gbs_positions[1].x == Catch::Approx(105.0));
    CHECK(cfg.scenario.gbs_positions[1].y == Catch::Approx(105.0));
}

TEST_CASE("config parsing errors carry line information") {
    SECTION("unknown key") {
        try {
            parse_config_text("episodes = 10\nbogus.key = 1\n");
            FAIL("expected a throw");
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
            CHECK(std::string(e.what()).find("bogus.key") != std::string::npos);
        }
    }
    SECTION("malformed number") {
        CHECK_THROWS_AS(parse_config_text("e_c = banana\n"), std::invalid_argument);
    }
    SECTION("missing equals sign") {
        CHECK_THROWS_AS(parse_config_text("episodes 10\n"), std::invalid_argument);
    }
    SECTION("out-of-range value") {
        CHECK_THROWS_AS(parse_config_text("scenario.n_uavs = 0\n"), std::invalid_argument);
        CHECK_THROWS_AS(parse_config_text("e_c = -1\n"), std::invalid_argument);
        CHECK_THROWS_AS(parse_config_text("learning.gamma = 1.5\n"), std::invalid_argument);
    }
}

TEST_CASE("config values propagate and round-trip") {
    const std::string text =
        "scheme = hybrid\n"
        "e_c = 3\n"
        "seed = 42\n"
        "# a comment line\n"
        "scenario.n_uavs = 7\n"
        "pid.kp = 0.5\n"
        "learning.feat = 16\n"
        "scenario.slot_duration = 0.125e-3\n";
    const TrainConfig cfg = parse_config_text(text);
    CHECK(cfg.scheme == Scheme::Hybrid);
    CHECK(cfg.e_c == 3.0);
    CHECK(cfg.scenario.n_uavs == 7);
    CHECK(cfg.pid.kp == 0.5);
    CHECK(cfg.learning.feat == 16);
    CHECK(cfg.scenario.n_slots == 7);  // floor(0.875 ms / 0.125 ms)

    const TrainConfig again = parse_config_text(config_to_text(cfg));
    CHECK(again.scheme == cfg.scheme);
    CHECK(again.e_c == cfg.e_c);
    CHECK(again.seed == cfg.seed);
    CHECK(again.scenario.n_uavs == cfg.scenario.n_uavs);
    CHECK(again.scenario.slot_duration == cfg.scenario.slot_duration);
    CHECK(again.pid.kp == cfg.pid.kp);
    CHECK(config_to_text(again) == config_to_text(cfg));
}

TEST_CASE("scaling the interferer ring") {
    const TrainConfig cfg = parse_config_text(
        "scenario.n_interferers = 2\nscenario.interferer_radius = 100\n");
    REQUIRE(cfg.scenario.gbs_positions.size() == 3);
    CHECK(horizontal_radius(cfg.scenario.gbs_positions[1]) == Catch::Approx(100.0));
    CHECK(horizontal_radius(cfg.scenario.gbs_positions[2]) == Catch::Approx(100.0));
}

TEST_CASE("metrics csv round-trips losslessly") {
    namespace fs = std::filesystem;
    const std::string dir = fs::temp_directory_path() / "swarmcc_io_test";
    fs::create_directories(dir);
    std::vector<MetricsRecord> records;
    RandomStream rng(5);
    for (int i = 0; i < 50; ++i) {
        MetricsRecord r;
        r.episode = i;
        r.mean_success = rng.uniform(0, 5);
        r.mean_energy = rng.uniform(0, 10);
        r.lambda_mean = rng.uniform(0, 2);
        r.loss = rng.uniform(0, 1);
        r.epsilon = rng.uniform(0, 1);
        records.push_back(r);
    }
    const std::string path = dir + "/metrics.csv";
    write_metrics_csv(path, records);
    const std::vector<MetricsRecord> back = read_metrics_csv(path);
    REQUIRE(back.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        REQUIRE(back[i].episode == records[i].episode);
        REQUIRE(back[i].mean_success == records[i].mean_success);
        REQUIRE(back[i].mean_energy == records[i].mean_energy);
        REQUIRE(back[i].lambda_mean == records[i].lambda_mean);
        REQUIRE(back[i].loss == records[i].loss);
        REQUIRE(back[i].epsilon == records[i].epsilon);
    }
    // schema check
    std::ifstream f(path);
    std::string header;
    std::getline(f, header);
    CHECK(header == "episode,mean_success,mean_energy,lambda_mean,loss,epsilon");
    fs::remove_all(dir);
}

TEST_CASE("lambda csv round-trips") {
    namespace fs = std::filesystem;
    const std::string dir = fs::temp_directory_path() / "swarmcc_io_test2";
    fs::create_directories(dir);
    std::vector<std::vector<double>> series = {{0.0, 0.1, 0.2}, {0.5, 0.4, 0.3}};
    write_lambda_csv(dir + "/lambda.csv", series);
    CHECK(read_lambda_csv(dir + "/lambda.csv") == series);
    fs::remove_all(dir);
}

TEST_CASE("manifest embeds a parseable config snapshot") {
    namespace fs = std::filesystem;
    const std::string dir = fs::temp_directory_path() / "swarmcc_io_test3";
    fs::create_directories(dir);
    TrainConfig cfg;
    cfg.scheme = Scheme::Unicast;
    cfg.e_c = 5.0;
    cfg.seed = 77;
    write_manifest(dir, cfg, "2026-01-01T00:00:00Z", "2026-01-01T01:00:00Z");
    const TrainConfig back = config_from_manifest(dir);
    CHECK(back.scheme == Scheme::Unicast);
    CHECK(back.e_c == 5.0);
    CHECK(back.seed == 77);
    fs::remove_all(dir);
}

TEST_CASE("rolling mean") {
    const std::vector<double> xs = {1, 2, 3, 4, 5, 6};
    const std::vector<double> r = rolling_mean(xs, 3);
    CHECK(r[0] == 1.0);
    CHECK(r[1] == 1.5);
    CHECK(r[2] == 2.0);
    CHECK(r[3] == 3.0);
    CHECK(r[5] == 5.0);
    CHECK_THROWS_AS(rolling_mean(xs, 0), std::invalid_argument);
}
