#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chainroute/ledger.hpp"
#include "chainroute/router.hpp"
#include "chainroute/sim.hpp"
#include "chainroute/topology.hpp"

namespace chainroute {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One behavior profile and its deployment counts. trust_init is the
/// reputation prior the registry starts this profile's peers at; peers with
/// no service history default to the ledger-wide prior.
struct ProfileSpec {
    std::string name;
    ProfileKind kind = ProfileKind::Custom;
    double delay_min = 0.0;
    double delay_max = 0.0;
    double p_fail_min = 0.0;
    double p_fail_max = 0.0;
    Seconds compute_per_layer = 0.06;
    double trust_init = 1.0;
    std::map<int, int> count_per_stage;  // shard size -> replicas per stage
};

struct ScenarioConfig {
    ModelSpec model{36, 3};
    std::vector<int> shard_sizes{9, 6, 3};
    std::vector<ProfileSpec> profiles;
    LedgerParams ledger;
    SimParams sim;
    double tau = 0.96;              // explicit floor; epsilon derived unless given
    std::optional<double> epsilon;
    bool calibrate_latency = true;  // start latency estimates at per-peer base latency

    RiskBudget budget() const;
    int total_peer_count() const;
};

/// Contiguous shards covering 1..L; the last shard absorbs the remainder.
std::vector<std::pair<int, int>> make_partition(const ModelSpec& model, int shard_size);

struct Scenario {
    Registry registry;
    ProfileMap profiles;
};

/// Instantiates the configured peer population. Per-peer delay and failure
/// probability are drawn uniformly from the profile ranges; identical
/// (config, seed) pairs produce identical populations. Peer ids encode only
/// the hosted layer range and a replica index, never the profile.
Scenario build_scenario(const ScenarioConfig& config, std::uint64_t seed);

/// The 336-peer desk-scale testbed used by default.
ScenarioConfig default_config();

/// Parses a JSON config file, applying defaults for every omitted key.
/// Validation failures name the offending key.
ScenarioConfig load_config(const std::string& path);
ScenarioConfig config_from_json(const std::string& text);
std::string config_to_json(const ScenarioConfig& config);

/// Query template for one algorithm in this scenario. Trust-aware algorithms
/// carry the scenario floor; SP and Naive run with a zero floor, matching
/// their trust-agnostic selection (the floor also governs repair lookups).
RouteQuery make_query(const ScenarioConfig& config, Algorithm algorithm);

}  // namespace chainroute
