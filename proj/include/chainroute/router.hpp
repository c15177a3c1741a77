#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "chainroute/ledger.hpp"
#include "chainroute/rng.hpp"
#include "chainroute/topology.hpp"

namespace chainroute {

enum class Algorithm { GTRAC, SP, MR, NAIVE, LARAC, ORACLE };

const char* algorithm_name(Algorithm a);
std::optional<Algorithm> algorithm_from_name(const std::string& name);

struct LaracParams {
    int max_iters = 50;
    double lambda_tol = 1e-6;
};

struct RouteQuery {
    ModelSpec model;
    RiskBudget budget;                 // tau drives pruning and repair, epsilon the risk constraint
    Algorithm algorithm = Algorithm::GTRAC;
    Seconds t_timeout = 25.0;          // failure penalty in the effective cost
    int naive_cap = 1000;
    LaracParams larac;
    Seconds t_ttl = 15.0;              // liveness horizon used when pruning the view
};

/// A selected execution chain. predicted_cost is the selecting algorithm's
/// own objective: sum of effective costs for GTRAC/ORACLE, sum of raw latency
/// estimates otherwise. reliability is the trust product at decision time.
struct ChainPlan {
    std::vector<PeerId> peers;
    double predicted_cost = 0.0;
    double reliability = 1.0;
    int hop_count = 0;
};

using RouteResult = std::optional<ChainPlan>;  // nullopt = INFEASIBLE

struct EnumerationTooLarge : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Expected hop completion time: latency_est + (1 - trust) * t_timeout.
double effective_cost(const PeerRecord& record, Seconds t_timeout);

/// Trust product over the plan's peers as recorded in the view.
double chain_reliability(const ChainPlan& plan, const CachedView& view);

RouteResult route_gtrac(const CachedView& view, Seconds now, const RouteQuery& query);
RouteResult route_sp(const CachedView& view, Seconds now, const RouteQuery& query);
RouteResult route_mr(const CachedView& view, Seconds now, const RouteQuery& query);
RouteResult route_naive(const CachedView& view, Seconds now, const RouteQuery& query, Rng& rng);
RouteResult route_larac(const CachedView& view, Seconds now, const RouteQuery& query);

/// Exhaustive reference solver: minimum effective-cost live chain subject to
/// reliability >= 1 - epsilon. Guarded against instances with more than
/// max_chains full chains.
RouteResult brute_force_oracle(const CachedView& view, Seconds now, const RouteQuery& query,
                               std::size_t max_chains = 1'000'000);

/// Dispatch on query.algorithm. The rng is consumed only by NAIVE.
RouteResult route(const CachedView& view, Seconds now, const RouteQuery& query, Rng& rng);

/// Lowest-latency live peer with trust >= tau hosting exactly the failed
/// peer's layer range. Ties break on id; NONE when no candidate exists.
std::optional<PeerId> find_replacement(const CachedView& view, Seconds now, const PeerId& failed,
                                       double tau, Seconds t_ttl);

/// Chain enumeration in DFS order (next-stage peers ascending by id).
/// Stops after `cap` chains or at the deadline, whichever first.
struct EnumerationResult {
    std::vector<std::vector<int>> chains;  // indices into dag.peers
    bool censored = false;                 // deadline hit before cap/completion
};
EnumerationResult enumerate_chains(
    const OverlayDag& dag, std::size_t cap,
    std::optional<std::chrono::steady_clock::time_point> deadline = std::nullopt);

std::string to_json(const ChainPlan& plan, Algorithm algorithm);

}  // namespace chainroute
