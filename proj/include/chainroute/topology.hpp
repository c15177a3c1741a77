#pragma once

#include <functional>
#include <string>
#include <vector>

#include "chainroute/ledger.hpp"

namespace chainroute {

struct ModelSpec {
    int total_layers = 36;
    int min_shard = 3;
};

/// Maximum feasible chain length: ceil(total_layers / min_shard).
int k_max(const ModelSpec& model);

/// Per-peer admission floor (1-epsilon)^(1/k_max). Any chain of at most
/// k_max peers all at or above the floor has reliability >= 1-epsilon.
double trust_floor(double epsilon, int k_max);

struct RiskBudget {
    double epsilon = 0.0;
    double tau = 1.0;

    static RiskBudget from_epsilon(double epsilon, int k_max_value);
    /// An explicitly supplied floor wins; epsilon is recomputed for reporting.
    static RiskBudget from_tau(double tau, int k_max_value);
};

/// Liveness + trust-floor filter. Returns records with is_live(..) true and
/// trust >= tau, in id order. Single pass over the view.
std::vector<PeerRecord> prune(const CachedView& view, Seconds now, double tau, Seconds t_ttl);

/// Routing DAG over contiguous layer shards. Node indices: peers are
/// 0..peers.size()-1, then SOURCE and SINK. Edge (i, j) exists iff
/// peers[i].layer_end + 1 == peers[j].layer_start; edges carry the head
/// peer's cost, SOURCE edges carry the first peer's cost, edges into SINK
/// cost 0. Layer indices strictly increase along any path, so the graph is
/// acyclic by construction.
struct OverlayDag {
    struct Edge {
        int to;
        double cost;
    };

    std::vector<PeerRecord> peers;        // sorted by id
    std::vector<std::vector<Edge>> adj;   // size peers.size() + 2
    int total_layers = 0;

    int source() const { return static_cast<int>(peers.size()); }
    int sink() const { return static_cast<int>(peers.size()) + 1; }
    int node_count() const { return static_cast<int>(peers.size()) + 2; }
};

using CostFn = std::function<double(const PeerRecord&)>;

OverlayDag build_dag(std::vector<PeerRecord> admitted, const ModelSpec& model,
                     const CostFn& cost_of);

/// Text edge list, one "src dst cost" line per edge, using the reserved ids
/// SOURCE and SINK for the virtual endpoints.
std::string export_edge_list(const OverlayDag& dag);

}  // namespace chainroute
