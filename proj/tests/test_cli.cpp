#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(SWARMCC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("swarmcc_cli_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

const char* kTinyConfig =
    "episodes = 2\n"
    "rounds_per_episode = 4\n"
    "learning.feat = 8\n"
    "learning.heads = 2\n"
    "learning.head_hidden = 8\n"
    "checkpoint_every = 1\n";

}  // namespace

TEST_CASE("train produces a complete run directory") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "tiny.cfg";
    std::ofstream(cfg) << kTinyConfig;
    const fs::path run = tmp.path / "run1";
    REQUIRE(run_cli("train --config " + cfg.string() + " --scheme broadcast --seed 3 --out " +
                    run.string()) == 0);
    CHECK(fs::exists(run / "manifest.json"));
    CHECK(fs::exists(run / "metrics.csv"));
    CHECK(fs::exists(run / "lambda.csv"));
    CHECK(fs::exists(run / "checkpoint_final.ckpt"));
    CHECK(fs::exists(run / "checkpoint_ep1.ckpt"));

    SECTION("metrics are byte-identical across same-seed reruns") {
        const fs::path run2 = tmp.path / "run2";
        REQUIRE(run_cli("train --config " + cfg.string() + " --scheme broadcast --seed 3 --out " +
                        run2.string()) == 0);
        CHECK(slurp(run / "metrics.csv") == slurp(run2 / "metrics.csv"));
        CHECK(slurp(run / "lambda.csv") == slurp(run2 / "lambda.csv"));
    }
    SECTION("eval on the run works and writes a summary") {
        REQUIRE(run_cli("eval --run " + run.string() + " --episodes 1 --seed 5") == 0);
        CHECK(fs::exists(run / "eval.csv"));
    }
    SECTION("eval with a mismatched uav count fails loudly") {
        // tamper with the manifest's embedded config snapshot
        const fs::path manifest = run / "manifest.json";
        nlohmann::json m = nlohmann::json::parse(slurp(manifest));
        std::string text = m["config"].get<std::string>();
        const std::string from = "scenario.n_uavs = 5";
        text.replace(text.find(from), from.size(), "scenario.n_uavs = 4");
        m["config"] = text;
        std::ofstream(manifest) << m.dump(2);
        CHECK(run_cli("eval --run " + run.string() + " --episodes 1") != 0);
    }
    SECTION("plot renders charts and is idempotent") {
        REQUIRE(run_cli("plot --run " + run.string()) == 0);
        CHECK(fs::exists(run / "success_rolling.svg"));
        CHECK(fs::exists(run / "energy_rolling.svg"));
        CHECK(fs::exists(run / "lambda.svg"));
        CHECK(fs::exists(run / "plot_data.csv"));
        const std::string before = slurp(run / "success_rolling.svg");
        REQUIRE(run_cli("plot --run " + run.string()) == 0);
        CHECK(slurp(run / "success_rolling.svg") == before);
    }
}

TEST_CASE("cli reports missing inputs with a nonzero exit") {
    TempDir tmp;
    CHECK(run_cli("eval --run " + (tmp.path / "nope").string()) != 0);
    CHECK(run_cli("train --config " + (tmp.path / "missing.cfg").string() + " --out " +
                  (tmp.path / "x").string()) != 0);
    CHECK(run_cli("plot --run " + (tmp.path / "nope").string()) != 0);
    CHECK(run_cli("train --scheme nosuch --out " + (tmp.path / "y").string()) != 0);
}

TEST_CASE("sweep runs a grid and writes the summary") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "tiny.cfg";
    std::ofstream(cfg) << "episodes = 1\nrounds_per_episode = 3\nlearning.feat = 8\n"
                          "learning.heads = 2\nlearning.head_hidden = 8\n";
    const fs::path out = tmp.path / "sweep";
    REQUIRE(run_cli("sweep --config " + cfg.string() +
                    " --axis e_c=1,3 --scheme broadcast --seed 11 --out " + out.string()) == 0);
    CHECK(fs::exists(out / "e_c_1" / "metrics.csv"));
    CHECK(fs::exists(out / "e_c_3" / "metrics.csv"));
    const std::string summary = slurp(out / "summary.csv");
    CHECK(summary.find("e_c,1,") != std::string::npos);
    CHECK(summary.find("e_c,3,") != std::string::npos);

    SECTION("combined plot over both runs") {
        const fs::path charts = tmp.path / "charts";
        REQUIRE(run_cli("plot --run " + (out / "e_c_1").string() + " --run " +
                        (out / "e_c_3").string() + " --out " + charts.string()) == 0);
        CHECK(fs::exists(charts / "success_rolling.svg"));
    }
}
