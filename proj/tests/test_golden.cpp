#include <fstream>
#include <sstream>

#include "chainroute/scenario.hpp"
#include "chainroute/sim.hpp"
#include "doctest.h"

using namespace chainroute;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing golden file ", path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

ScenarioConfig golden_config() {
    ScenarioConfig c = default_config();
    c.model = {6, 3};
    c.shard_sizes = {3};
    for (auto& p : c.profiles) {
        p.count_per_stage.clear();
        p.count_per_stage[3] = 2;
    }
    return c;
}

}  // namespace

// Pins the exact bytes of a small seeded run. A diff here means request
// execution, trust feedback, the RNG keying, or the log format changed in a
// way that breaks reproducibility of previously published results.
TEST_CASE("seeded runs reproduce the checked-in golden logs") {
    ScenarioConfig c = golden_config();
    auto result = run_experiment(c, Algorithm::GTRAC, 12, 4, 424242);
    CHECK(outcomes_to_jsonl(result.outcomes) == slurp(GOLDEN_DIR "/outcomes_small.jsonl"));

    Scenario s = build_scenario(c, 424242);
    s.registry.heartbeat_all(0.0);
    CHECK(to_json(s.registry.snapshot(0.0)) == slurp(GOLDEN_DIR "/registry_small.json"));
}
