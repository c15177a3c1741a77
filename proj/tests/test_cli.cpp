#include "chainroute/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "chainroute/scenario.hpp"
#include "doctest.h"

using namespace chainroute;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// A scenario small enough for fast CLI round-trips.
std::string small_config_json() {
    return R"({
      "model": {"total_layers": 4, "min_shard": 2},
      "shards": [2],
      "profiles": [
        {"name": "fast", "kind": "custom", "delay": [0.01, 0.02],
         "p_fail": [0.1, 0.2], "trust_init": 1.0, "count_per_stage": {"2": 3}},
        {"name": "slow", "kind": "turtle", "delay": [0.2, 0.3],
         "p_fail": 0.0, "trust_init": 1.0, "count_per_stage": {"2": 2}}
      ]
    })";
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("cmd_run writes logs, metrics and a manifest, reproducibly") {
    TempDir dir("chainroute_cli_run");
    const fs::path config_path = dir.path / "config.json";
    std::ofstream(config_path) << small_config_json();

    CliInvocation inv;
    inv.config_path = config_path.string();
    inv.seed = 7;
    inv.algo = "gtrac";
    inv.tokens = {3};
    inv.requests = 10;
    inv.out_dir = (dir.path / "out1").string();
    REQUIRE(cmd_run(inv) == 0);

    for (const char* name :
         {"ssr.csv", "latency.csv", "hops.csv", "landscape.csv", "manifest.json",
          "outcomes_gtrac_3.jsonl"})
        CHECK(fs::exists(fs::path(inv.out_dir) / name));

    CliInvocation inv2 = inv;
    inv2.out_dir = (dir.path / "out2").string();
    REQUIRE(cmd_run(inv2) == 0);
    for (const char* name : {"ssr.csv", "latency.csv", "hops.csv", "outcomes_gtrac_3.jsonl"})
        CHECK(slurp(fs::path(inv.out_dir) / name) == slurp(fs::path(inv2.out_dir) / name));

    // the input config is never mutated
    CHECK(slurp(config_path) == small_config_json());
}

TEST_CASE("cmd_run fails cleanly on a missing config") {
    TempDir dir("chainroute_cli_missing");
    CliInvocation inv;
    inv.config_path = (dir.path / "absent.json").string();
    inv.out_dir = (dir.path / "out").string();
    CHECK(cmd_run(inv) != 0);
    CHECK_FALSE(fs::exists(fs::path(inv.out_dir) / "ssr.csv"));
}

TEST_CASE("cmd_run rejects bad parameters before writing anything") {
    TempDir dir("chainroute_cli_bad");
    CliInvocation inv;
    inv.algo = "definitely-not-an-algorithm";
    inv.out_dir = (dir.path / "out").string();
    CHECK(cmd_run(inv) != 0);
    CHECK_FALSE(fs::exists(inv.out_dir));
}

TEST_CASE("cmd_bench writes overhead.csv") {
    TempDir dir("chainroute_cli_bench");
    CliInvocation inv;
    inv.sizes = {40};
    inv.trials = 2;
    inv.seed = 3;
    inv.out_dir = (dir.path / "out").string();
    REQUIRE(cmd_bench(inv) == 0);
    const std::string csv = slurp(fs::path(inv.out_dir) / "overhead.csv");
    CHECK(csv.find("gtrac,40,") != std::string::npos);
    CHECK(csv.find("larac,40,") != std::string::npos);
}

TEST_CASE("cmd_oracle_check agrees on random instances") {
    CliInvocation inv;
    inv.instances = 25;
    inv.seed = 12;
    CHECK(cmd_oracle_check(inv) == 0);

    inv.instances = 0;
    CHECK(cmd_oracle_check(inv) == 0);  // vacuous pass with a warning
}

TEST_CASE("cmd_export dumps the registry and the DAG edge list") {
    TempDir dir("chainroute_cli_export");
    const fs::path config_path = dir.path / "config.json";
    std::ofstream(config_path) << small_config_json();

    CliInvocation inv;
    inv.config_path = config_path.string();
    inv.out_dir = (dir.path / "out").string();
    REQUIRE(cmd_export(inv) == 0);
    CHECK(slurp(fs::path(inv.out_dir) / "registry.json").find("\"peers\"") != std::string::npos);
    const std::string edges = slurp(fs::path(inv.out_dir) / "dag_edges.txt");
    CHECK(edges.find("SOURCE ") != std::string::npos);
    CHECK(edges.find(" SINK ") != std::string::npos);
}
