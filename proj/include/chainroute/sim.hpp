#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chainroute/ledger.hpp"
#include "chainroute/rng.hpp"
#include "chainroute/router.hpp"

namespace chainroute {

struct ScenarioConfig;  // scenario.hpp

enum class ProfileKind { HoneyPot, Turtle, Golden, Custom };

const char* profile_kind_name(ProfileKind k);
std::optional<ProfileKind> profile_kind_from_name(const std::string& name);

/// Behavior profile of one simulated peer. net_delay and p_fail are fixed
/// per-peer draws from the profile's configured ranges.
struct PeerProfile {
    ProfileKind kind = ProfileKind::Custom;
    Seconds net_delay = 0.0;
    double p_fail = 0.0;
    Seconds compute_per_layer = 0.06;
};

using ProfileMap = std::map<PeerId, PeerProfile>;

struct RequestSpec {
    std::int64_t request_id = 0;
    int n_tokens = 1;
    Seconds submitted_at = 0.0;
};

struct RequestOutcome {
    std::int64_t request_id = 0;
    bool success = false;
    bool infeasible = false;  // routing aborted, no culprit
    std::vector<Seconds> token_latencies;
    std::vector<PeerId> executed_chain;
    std::vector<PeerId> planned_chain;
    bool repair_used = false;
    std::optional<PeerId> culprit;
    int attempts = 0;              // chain executions performed (0, 1 or 2)
    Seconds selection_time = 0.0;  // wall clock; excluded from canonical logs
};

struct SimParams {
    Seconds t_timeout = 25.0;
    bool repair_enabled = true;
    LedgerParams ledger;
    std::uint64_t seed = 0;
    Seconds jitter_max = 0.02;
    // Compute cost of token t scales by 1 + growth*(t-1); disabled by
    // default since the synthetic model is context-length-independent.
    double token_compute_growth = 0.0;
};

/// Deterministic per-(seed, peer, request) Bernoulli draw.
bool sample_peer_failure(std::uint64_t seed, const PeerId& peer, std::int64_t request_id,
                         double p_fail);

/// One hop's delay: compute_per_layer * layers * compute_scale + net_delay
/// + U[0, jitter_max).
Seconds hop_latency(const PeerRecord& peer, const PeerProfile& profile, Rng& rng,
                    Seconds jitter_max, double compute_scale = 1.0);

struct ChainExecResult {
    bool success = false;
    PeerId failed_peer;                                   // set on failure
    std::vector<Seconds> token_latencies;                 // fully emitted tokens
    std::vector<std::pair<PeerId, Seconds>> observations; // completed hop latencies
    Seconds elapsed = 0.0;                                // includes timeout on failure
};

/// Token-by-token chain execution against per-request failure flags. A
/// flagged peer stalls the first token that reaches it; the lowest-stage
/// flagged peer is the culprit and the attempt observes t_timeout.
ChainExecResult execute_chain(const std::vector<PeerId>& chain, const RequestSpec& request,
                              const std::map<PeerId, bool>& failures, const SimParams& params,
                              const ProfileMap& profiles, const CachedView& view);

/// Full request lifecycle: route on the cached view, execute, apply the
/// bounded one-shot repair when enabled, and feed trust/latency back into
/// the registry. At most two chain executions per request.
RequestOutcome execute_request(Registry& registry, const CachedView& view,
                               const RouteQuery& query, const RequestSpec& request,
                               const SimParams& params, const ProfileMap& profiles);

struct LandscapeRow {
    std::int64_t request_id = 0;
    PeerId peer;
    double trust = 0.0;      // at decision time
    Seconds latency_est = 0.0;
};

struct ExperimentResult {
    std::vector<RequestOutcome> outcomes;
    std::vector<LandscapeRow> landscape;
};

/// Runs n_requests sequentially on a fresh registry (trust reset), driving
/// heartbeats and view synchronization on the simulated clock. Deterministic
/// for a fixed (scenario, algorithm, seed).
ExperimentResult run_experiment(const ScenarioConfig& scenario, Algorithm algorithm,
                                int n_requests, int tokens, std::uint64_t seed);

/// Newline-delimited JSON records with a stable field order. selection_time
/// is wall-clock noise and is deliberately left out so reruns diff clean.
std::string outcomes_to_jsonl(const std::vector<RequestOutcome>& outcomes);

}  // namespace chainroute
