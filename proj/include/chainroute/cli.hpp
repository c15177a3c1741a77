#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chainroute/router.hpp"

namespace chainroute {

/// Default seed for every subcommand; shipped result files were produced
/// with it. CHAINROUTE_SEED or --seed override.
constexpr std::uint64_t kDefaultSeed = 20250810;

struct CliInvocation {
    std::string config_path;  // empty = built-in default scenario
    std::uint64_t seed = kDefaultSeed;
    std::string algo = "all";
    std::vector<int> tokens{10, 20, 50};
    int requests = 100;
    std::string out_dir = "out";
    std::vector<int> sizes{50, 100, 200, 500, 1000};
    int trials = 100;
    int instances = 100;  // oracle-check topologies
};

/// Full experiment grid: per (algorithm, token length) run with trust reset,
/// outcome logs plus all metric CSVs and a manifest in out_dir.
int cmd_run(const CliInvocation& inv);

/// Selection-overhead benchmark over all five algorithms; writes overhead.csv.
int cmd_bench(const CliInvocation& inv);

/// Randomized equivalence check of the pruned search against the exhaustive
/// solver, plus feasibility of the relaxation baseline. Nonzero exit and a
/// serialized counterexample on failure.
int cmd_oracle_check(const CliInvocation& inv);

/// Dumps the scenario registry (JSON) and routing DAG (edge list) for
/// offline inspection.
int cmd_export(const CliInvocation& inv);

}  // namespace chainroute
