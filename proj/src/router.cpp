#include "chainroute/router.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "json.hpp"

namespace chainroute {

const char* algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::GTRAC: return "gtrac";
        case Algorithm::SP: return "sp";
        case Algorithm::MR: return "mr";
        case Algorithm::NAIVE: return "naive";
        case Algorithm::LARAC: return "larac";
        case Algorithm::ORACLE: return "oracle";
    }
    return "?";
}

std::optional<Algorithm> algorithm_from_name(const std::string& name) {
    if (name == "gtrac") return Algorithm::GTRAC;
    if (name == "sp") return Algorithm::SP;
    if (name == "mr") return Algorithm::MR;
    if (name == "naive") return Algorithm::NAIVE;
    if (name == "larac") return Algorithm::LARAC;
    if (name == "oracle") return Algorithm::ORACLE;
    return std::nullopt;
}

double effective_cost(const PeerRecord& record, Seconds t_timeout) {
    return record.latency_est + (1.0 - record.trust) * t_timeout;
}

double chain_reliability(const ChainPlan& plan, const CachedView& view) {
    double rel = 1.0;
    for (const PeerId& id : plan.peers) rel *= view.at(id).trust;
    return rel;
}

namespace {

// Path label for the shortest-path search. Comparison is lexicographic on
// (primary objective, secondary objective, hop count); exact ties fall
// through to the ordered peer-id sequence of the path itself.
struct Label {
    double primary = 0.0;
    double secondary = 0.0;
    int hops = 0;

    bool operator<(const Label& o) const {
        if (primary != o.primary) return primary < o.primary;
        if (secondary != o.secondary) return secondary < o.secondary;
        return hops < o.hops;
    }
    bool operator==(const Label& o) const {
        return primary == o.primary && secondary == o.secondary && hops == o.hops;
    }
};

std::vector<int> walk_parents(const std::vector<int>& parent, int node, int extra) {
    std::vector<int> path;
    for (int cur = node; cur >= 0; cur = parent[cur]) path.push_back(cur);
    std::reverse(path.begin(), path.end());
    path.push_back(extra);
    return path;
}

bool path_less(const OverlayDag& dag, const std::vector<int>& a, const std::vector<int>& b) {
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i] == b[i]) continue;
        const bool a_peer = a[i] < static_cast<int>(dag.peers.size());
        const bool b_peer = b[i] < static_cast<int>(dag.peers.size());
        if (a_peer && b_peer) return dag.peers[a[i]].id < dag.peers[b[i]].id;
        return b_peer;  // virtual nodes order after peers
    }
    return a.size() < b.size();
}

// Dijkstra SOURCE -> SINK with deterministic tie-breaking. secondary_of adds
// an optional second additive objective (used by MR for the latency tie).
std::optional<std::vector<int>> dijkstra(const OverlayDag& dag,
                                         const std::function<double(int)>& secondary_of) {
    const int n = dag.node_count();
    const int src = dag.source();
    const int snk = dag.sink();
    constexpr double kInf = std::numeric_limits<double>::infinity();

    std::vector<Label> best(n, Label{kInf, kInf, 0});
    std::vector<int> parent(n, -1);
    std::vector<char> have(n, 0);

    using Item = std::pair<Label, int>;
    auto cmp = [](const Item& a, const Item& b) { return b.first < a.first; };
    std::priority_queue<Item, std::vector<Item>, decltype(cmp)> heap(cmp);

    best[src] = Label{0.0, 0.0, 0};
    have[src] = 1;
    heap.push({best[src], src});

    while (!heap.empty()) {
        auto [label, u] = heap.top();
        heap.pop();
        if (have[u] && best[u] < label) continue;  // stale entry
        for (const OverlayDag::Edge& e : dag.adj[u]) {
            Label cand{label.primary + e.cost,
                       label.secondary + (e.to == snk ? 0.0 : secondary_of(e.to)),
                       label.hops + 1};
            if (!have[e.to] || cand < best[e.to]) {
                best[e.to] = cand;
                parent[e.to] = u;
                have[e.to] = 1;
                heap.push({cand, e.to});
            } else if (cand == best[e.to] && parent[e.to] != u) {
                // Equal objective: keep the lexicographically smaller path.
                auto via_u = walk_parents(parent, u, e.to);
                auto current = walk_parents(parent, parent[e.to], e.to);
                if (path_less(dag, via_u, current)) {
                    parent[e.to] = u;
                    heap.push({cand, e.to});  // re-propagate the better path
                }
            }
        }
    }

    if (!have[snk]) return std::nullopt;
    std::vector<int> nodes;
    for (int cur = snk; cur != -1; cur = parent[cur]) nodes.push_back(cur);
    std::reverse(nodes.begin(), nodes.end());
    // strip SOURCE and SINK
    return std::vector<int>(nodes.begin() + 1, nodes.end() - 1);
}

ChainPlan make_plan(const OverlayDag& dag, const std::vector<int>& chain, bool effective,
                    Seconds t_timeout) {
    ChainPlan plan;
    plan.hop_count = static_cast<int>(chain.size());
    double cost = 0.0;
    double rel = 1.0;
    for (int idx : chain) {
        const PeerRecord& p = dag.peers[idx];
        plan.peers.push_back(p.id);
        cost += effective ? effective_cost(p, t_timeout) : p.latency_est;
        rel *= p.trust;
    }
    plan.predicted_cost = cost;
    plan.reliability = rel;
    return plan;
}

std::vector<PeerRecord> live_peers(const CachedView& view, Seconds now, Seconds t_ttl) {
    return prune(view, now, 0.0, t_ttl);
}

}  // namespace

RouteResult route_gtrac(const CachedView& view, Seconds now, const RouteQuery& query) {
    auto admitted = prune(view, now, query.budget.tau, query.t_ttl);
    OverlayDag dag = build_dag(std::move(admitted), query.model, [&](const PeerRecord& p) {
        return effective_cost(p, query.t_timeout);
    });
    auto chain = dijkstra(dag, [](int) { return 0.0; });
    if (!chain) return std::nullopt;
    return make_plan(dag, *chain, /*effective=*/true, query.t_timeout);
}

RouteResult route_sp(const CachedView& view, Seconds now, const RouteQuery& query) {
    auto admitted = live_peers(view, now, query.t_ttl);
    OverlayDag dag = build_dag(std::move(admitted), query.model,
                               [](const PeerRecord& p) { return p.latency_est; });
    auto chain = dijkstra(dag, [](int) { return 0.0; });
    if (!chain) return std::nullopt;
    return make_plan(dag, *chain, /*effective=*/false, query.t_timeout);
}

RouteResult route_mr(const CachedView& view, Seconds now, const RouteQuery& query) {
    auto admitted = live_peers(view, now, query.t_ttl);
    // trust 0 contributes zero reliability and has no log weight; drop it
    std::erase_if(admitted, [](const PeerRecord& p) { return p.trust <= 0.0; });
    OverlayDag dag = build_dag(std::move(admitted), query.model,
                               [](const PeerRecord& p) { return -std::log(p.trust); });
    auto chain = dijkstra(dag, [&](int idx) { return dag.peers[idx].latency_est; });
    if (!chain) return std::nullopt;
    return make_plan(dag, *chain, /*effective=*/false, query.t_timeout);
}

EnumerationResult enumerate_chains(const OverlayDag& dag, std::size_t cap,
                                   std::optional<std::chrono::steady_clock::time_point> deadline) {
    EnumerationResult result;
    if (cap == 0) return result;
    const int snk = dag.sink();
    std::vector<int> stack;  // current path, peer indices

    // Explicit DFS over (node, next edge index) frames; adjacency lists are
    // already in ascending id order.
    std::vector<std::pair<int, std::size_t>> frames;
    frames.push_back({dag.source(), 0});
    std::size_t steps = 0;
    while (!frames.empty()) {
        if (deadline && (++steps & 0x3ff) == 0 &&
            std::chrono::steady_clock::now() >= *deadline) {
            result.censored = true;
            return result;
        }
        auto& [node, edge_idx] = frames.back();
        if (edge_idx >= dag.adj[node].size()) {
            frames.pop_back();
            if (!stack.empty()) stack.pop_back();
            continue;
        }
        const OverlayDag::Edge& e = dag.adj[node][edge_idx++];
        if (e.to == snk) {
            result.chains.push_back(stack);
            if (result.chains.size() >= cap) return result;
            continue;
        }
        stack.push_back(e.to);
        frames.push_back({e.to, 0});
    }
    return result;
}

RouteResult route_naive(const CachedView& view, Seconds now, const RouteQuery& query, Rng& rng) {
    if (query.naive_cap < 1) throw ContractError("naive_cap must be >= 1");
    auto admitted = live_peers(view, now, query.t_ttl);
    OverlayDag dag = build_dag(std::move(admitted), query.model,
                               [](const PeerRecord& p) { return p.latency_est; });
    auto enumerated = enumerate_chains(dag, static_cast<std::size_t>(query.naive_cap));
    if (enumerated.chains.empty()) return std::nullopt;
    const auto& chain = enumerated.chains[rng.below(enumerated.chains.size())];
    return make_plan(dag, chain, /*effective=*/false, query.t_timeout);
}

RouteResult route_larac(const CachedView& view, Seconds now, const RouteQuery& query) {
    auto admitted = live_peers(view, now, query.t_ttl);
    std::erase_if(admitted, [](const PeerRecord& p) { return p.trust <= 0.0; });

    // Cost c is the raw latency estimate, "delay" d the log-transformed risk;
    // the constraint sum(d) <= -ln(1-eps) is the chain reliability bound.
    OverlayDag dag = build_dag(std::move(admitted), query.model,
                               [](const PeerRecord& p) { return p.latency_est; });
    const double budget_d = -std::log1p(-query.budget.epsilon);

    auto d_of = [&](int idx) { return -std::log(dag.peers[idx].trust); };
    auto path_d = [&](const std::vector<int>& chain) {
        double d = 0.0;
        for (int idx : chain) d += d_of(idx);
        return d;
    };
    auto path_c = [&](const std::vector<int>& chain) {
        double c = 0.0;
        for (int idx : chain) c += dag.peers[idx].latency_est;
        return c;
    };
    auto solve = [&](double lambda) {
        OverlayDag weighted = dag;
        for (auto& edges : weighted.adj)
            for (auto& e : edges)
                if (e.to < static_cast<int>(dag.peers.size()))
                    e.cost = dag.peers[e.to].latency_est + lambda * d_of(e.to);
        return dijkstra(weighted, [](int) { return 0.0; });
    };

    auto c_path = solve(0.0);
    if (!c_path) return std::nullopt;
    if (path_d(*c_path) <= budget_d)
        return make_plan(dag, *c_path, /*effective=*/false, query.t_timeout);

    // Feasibility probe: the minimum-d path.
    OverlayDag d_dag = dag;
    for (auto& edges : d_dag.adj)
        for (auto& e : edges)
            if (e.to < static_cast<int>(dag.peers.size())) e.cost = d_of(e.to);
    auto d_path = dijkstra(d_dag, [&](int idx) { return dag.peers[idx].latency_est; });
    if (!d_path || path_d(*d_path) > budget_d) return std::nullopt;

    std::vector<int> best = *d_path;
    double best_c = path_c(best);

    // Bisect lambda: small lambda favors latency (infeasible side), large
    // lambda favors reliability (feasible side).
    double lo = 0.0;
    double hi = 1.0;
    int iters = 0;
    while (iters < query.larac.max_iters) {
        auto p = solve(hi);
        ++iters;
        if (p && path_d(*p) <= budget_d) {
            const double c = path_c(*p);
            if (c < best_c) {
                best = *p;
                best_c = c;
            }
            break;
        }
        hi *= 2.0;
        if (hi > 1e12) break;
    }
    while (hi - lo > query.larac.lambda_tol && iters < query.larac.max_iters) {
        const double mid = 0.5 * (lo + hi);
        auto p = solve(mid);
        ++iters;
        if (p && path_d(*p) <= budget_d) {
            hi = mid;
            const double c = path_c(*p);
            if (c < best_c) {
                best = *p;
                best_c = c;
            }
        } else {
            lo = mid;
        }
    }
    return make_plan(dag, best, /*effective=*/false, query.t_timeout);
}

RouteResult brute_force_oracle(const CachedView& view, Seconds now, const RouteQuery& query,
                               std::size_t max_chains) {
    auto admitted = live_peers(view, now, query.t_ttl);
    OverlayDag dag = build_dag(std::move(admitted), query.model, [&](const PeerRecord& p) {
        return effective_cost(p, query.t_timeout);
    });

    // Count full chains by DP in layer order before enumerating.
    std::vector<double> count(dag.node_count(), 0.0);
    count[dag.source()] = 1.0;
    std::vector<int> order(dag.peers.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return dag.peers[a].layer_start < dag.peers[b].layer_start;
    });
    for (const auto& e : dag.adj[dag.source()]) count[e.to] += 1.0;
    for (int idx : order)
        for (const auto& e : dag.adj[idx]) count[e.to] += count[idx];
    if (count[dag.sink()] > static_cast<double>(max_chains))
        throw EnumerationTooLarge("chain count exceeds enumeration guard");

    auto enumerated = enumerate_chains(dag, max_chains + 1);
    const double min_rel = 1.0 - query.budget.epsilon;

    std::optional<std::vector<int>> best;
    double best_cost = 0.0;
    int best_hops = 0;
    for (const auto& chain : enumerated.chains) {
        double cost = 0.0;
        double rel = 1.0;
        for (int idx : chain) {
            cost += effective_cost(dag.peers[idx], query.t_timeout);
            rel *= dag.peers[idx].trust;
        }
        if (rel < min_rel) continue;
        const int hops = static_cast<int>(chain.size());
        bool better = false;
        if (!best) {
            better = true;
        } else if (cost != best_cost) {
            better = cost < best_cost;
        } else if (hops != best_hops) {
            better = hops < best_hops;
        } else {
            better = path_less(dag, chain, *best);
        }
        if (better) {
            best = chain;
            best_cost = cost;
            best_hops = hops;
        }
    }
    if (!best) return std::nullopt;
    return make_plan(dag, *best, /*effective=*/true, query.t_timeout);
}

RouteResult route(const CachedView& view, Seconds now, const RouteQuery& query, Rng& rng) {
    switch (query.algorithm) {
        case Algorithm::GTRAC: return route_gtrac(view, now, query);
        case Algorithm::SP: return route_sp(view, now, query);
        case Algorithm::MR: return route_mr(view, now, query);
        case Algorithm::NAIVE: return route_naive(view, now, query, rng);
        case Algorithm::LARAC: return route_larac(view, now, query);
        case Algorithm::ORACLE: return brute_force_oracle(view, now, query);
    }
    return std::nullopt;
}

std::optional<PeerId> find_replacement(const CachedView& view, Seconds now, const PeerId& failed,
                                       double tau, Seconds t_ttl) {
    const PeerRecord& ref = view.at(failed);
    const PeerRecord* best = nullptr;
    for (const PeerRecord& r : view.records) {
        if (r.id == failed) continue;
        if (r.layer_start != ref.layer_start || r.layer_end != ref.layer_end) continue;
        if (!is_live(r, now, t_ttl) || r.trust < tau) continue;
        if (!best || r.latency_est < best->latency_est ||
            (r.latency_est == best->latency_est && r.id < best->id))
            best = &r;
    }
    if (!best) return std::nullopt;
    return best->id;
}

std::string to_json(const ChainPlan& plan, Algorithm algorithm) {
    nlohmann::ordered_json doc;
    doc["algo"] = algorithm_name(algorithm);
    doc["peers"] = plan.peers;
    doc["predicted_cost"] = plan.predicted_cost;
    doc["reliability"] = plan.reliability;
    doc["hops"] = plan.hop_count;
    return doc.dump();
}

}  // namespace chainroute
