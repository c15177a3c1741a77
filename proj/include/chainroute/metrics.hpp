#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "chainroute/router.hpp"
#include "chainroute/sim.hpp"

namespace chainroute {

struct SsrResult {
    int successes = 0;
    int n = 0;
    double rate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

struct LatencyStats {
    int count = 0;
    Seconds mean = 0.0;
    Seconds p50 = 0.0;
    Seconds p99 = 0.0;
    Seconds max = 0.0;
};

struct OverheadRow {
    std::string algorithm;
    int network_size = 0;
    Seconds median_decision = 0.0;
    Seconds mean_decision = 0.0;
    int censored = 0;  // trials that hit the timeout
};

constexpr double kWilsonZ95 = 1.959964;

/// Wilson score interval for a binomial proportion, clipped to [0,1].
std::pair<double, double> wilson_ci(int successes, int n, double z = kWilsonZ95);

/// Success rate over the outcome list with a 95% Wilson interval.
SsrResult ssr(const std::vector<RequestOutcome>& outcomes);

/// Per-token latency statistics pooled over successful requests only.
/// Percentiles use nearest-rank on the sorted pool. With no successes the
/// returned stats have count == 0.
LatencyStats latency_stats(const std::vector<RequestOutcome>& outcomes);

/// Executed-chain length counts over all requests that had a plan.
std::map<int, int> hop_histogram(const std::vector<RequestOutcome>& outcomes);

/// One row per (selected peer, request) with the trust and latency estimate
/// the planner saw at decision time.
const std::vector<LandscapeRow>& selection_landscape(const ExperimentResult& result);

struct BenchOptions {
    Seconds trial_timeout = 2.0;  // per-trial censoring threshold
};

/// Times pure selection (pruning + DAG build + search) on seeded random
/// topologies of each requested size. Naive runs its unbounded enumeration
/// here and is censored at the trial timeout.
std::vector<OverheadRow> bench_selection(const std::vector<Algorithm>& algorithms,
                                         const std::vector<int>& sizes, int trials,
                                         std::uint64_t seed, const BenchOptions& options = {});

/// Random topology used by the selection benchmark: every stage retains at
/// least one above-floor peer, low-trust peers skew fast so the raw-latency
/// optimum violates the risk bound.
CachedView bench_topology(int n_peers, const ModelSpec& model, std::uint64_t seed);

std::string ssr_csv(const std::vector<std::tuple<std::string, int, SsrResult>>& rows);
std::string latency_csv(const std::vector<std::tuple<std::string, int, LatencyStats>>& rows);
std::string hops_csv(
    const std::vector<std::tuple<std::string, int, std::map<int, int>>>& rows);
std::string landscape_csv(
    const std::vector<std::tuple<std::string, int, std::vector<LandscapeRow>>>& rows);
std::string overhead_csv(const std::vector<OverheadRow>& rows);

}  // namespace chainroute
