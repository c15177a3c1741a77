#include "chainroute/topology.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace chainroute {

int k_max(const ModelSpec& model) {
    if (model.min_shard < 1 || model.min_shard > model.total_layers)
        throw ContractError("min_shard must be in [1, total_layers]");
    return (model.total_layers + model.min_shard - 1) / model.min_shard;
}

double trust_floor(double epsilon, int k_max_value) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ContractError("epsilon must be in (0,1)");
    if (k_max_value < 1) throw ContractError("k_max must be >= 1");
    return std::pow(1.0 - epsilon, 1.0 / static_cast<double>(k_max_value));
}

RiskBudget RiskBudget::from_epsilon(double epsilon, int k_max_value) {
    RiskBudget b;
    b.epsilon = epsilon;
    b.tau = trust_floor(epsilon, k_max_value);
    return b;
}

RiskBudget RiskBudget::from_tau(double tau, int k_max_value) {
    if (!(tau > 0.0 && tau <= 1.0)) throw ContractError("tau must be in (0,1]");
    RiskBudget b;
    b.tau = tau;
    b.epsilon = 1.0 - std::pow(tau, static_cast<double>(k_max_value));
    return b;
}

std::vector<PeerRecord> prune(const CachedView& view, Seconds now, double tau, Seconds t_ttl) {
    std::vector<PeerRecord> out;
    out.reserve(view.records.size());
    for (const PeerRecord& r : view.records) {
        if (is_live(r, now, t_ttl) && r.trust >= tau) out.push_back(r);
    }
    return out;
}

OverlayDag build_dag(std::vector<PeerRecord> admitted, const ModelSpec& model,
                     const CostFn& cost_of) {
    std::sort(admitted.begin(), admitted.end(),
              [](const PeerRecord& a, const PeerRecord& b) { return a.id < b.id; });

    OverlayDag dag;
    dag.peers = std::move(admitted);
    dag.total_layers = model.total_layers;
    dag.adj.assign(dag.peers.size() + 2, {});

    // Peers indexed by the layer they start at; within a bucket order follows
    // the id-sorted peer order so downstream tie-breaking is deterministic.
    std::map<int, std::vector<int>> by_start;
    for (int i = 0; i < static_cast<int>(dag.peers.size()); ++i)
        by_start[dag.peers[i].layer_start].push_back(i);

    const int src = dag.source();
    const int snk = dag.sink();

    if (auto it = by_start.find(1); it != by_start.end()) {
        for (int i : it->second)
            dag.adj[src].push_back({i, cost_of(dag.peers[i])});
    }
    for (int i = 0; i < static_cast<int>(dag.peers.size()); ++i) {
        const PeerRecord& p = dag.peers[i];
        if (p.layer_end == model.total_layers) {
            dag.adj[i].push_back({snk, 0.0});
            continue;
        }
        if (auto it = by_start.find(p.layer_end + 1); it != by_start.end()) {
            for (int j : it->second)
                dag.adj[i].push_back({j, cost_of(dag.peers[j])});
        }
    }
    return dag;
}

std::string export_edge_list(const OverlayDag& dag) {
    std::ostringstream out;
    auto name = [&](int node) -> std::string {
        if (node == dag.source()) return "SOURCE";
        if (node == dag.sink()) return "SINK";
        return dag.peers[node].id;
    };
    for (int from = 0; from < dag.node_count(); ++from) {
        for (const OverlayDag::Edge& e : dag.adj[from])
            out << name(from) << ' ' << name(e.to) << ' ' << e.cost << '\n';
    }
    return out.str();
}

}  // namespace chainroute
