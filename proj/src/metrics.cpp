#include "chainroute/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "chainroute/scenario.hpp"

namespace chainroute {

std::pair<double, double> wilson_ci(int successes, int n, double z) {
    if (n < 1) throw ContractError("wilson_ci: n must be >= 1");
    if (successes < 0 || successes > n) throw ContractError("wilson_ci: successes out of range");
    if (!(z > 0.0)) throw ContractError("wilson_ci: z must be > 0");
    const double nn = static_cast<double>(n);
    const double phat = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (phat + z2 / (2.0 * nn)) / denom;
    const double half =
        z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

SsrResult ssr(const std::vector<RequestOutcome>& outcomes) {
    if (outcomes.empty()) throw ContractError("ssr: empty outcome list");
    SsrResult r;
    r.n = static_cast<int>(outcomes.size());
    for (const RequestOutcome& o : outcomes)
        if (o.success) ++r.successes;
    r.rate = static_cast<double>(r.successes) / r.n;
    std::tie(r.ci_low, r.ci_high) = wilson_ci(r.successes, r.n);
    return r;
}

LatencyStats latency_stats(const std::vector<RequestOutcome>& outcomes) {
    std::vector<Seconds> pool;
    for (const RequestOutcome& o : outcomes) {
        if (!o.success) continue;
        pool.insert(pool.end(), o.token_latencies.begin(), o.token_latencies.end());
    }
    LatencyStats stats;
    stats.count = static_cast<int>(pool.size());
    if (pool.empty()) return stats;
    std::sort(pool.begin(), pool.end());
    double sum = 0.0;
    for (Seconds t : pool) sum += t;
    stats.mean = sum / pool.size();
    auto nearest_rank = [&](double p) {
        const std::size_t rank =
            static_cast<std::size_t>(std::ceil(p * static_cast<double>(pool.size())));
        return pool[std::max<std::size_t>(rank, 1) - 1];
    };
    stats.p50 = nearest_rank(0.50);
    stats.p99 = nearest_rank(0.99);
    stats.max = pool.back();
    return stats;
}

std::map<int, int> hop_histogram(const std::vector<RequestOutcome>& outcomes) {
    std::map<int, int> hist;
    for (const RequestOutcome& o : outcomes) {
        if (o.executed_chain.empty()) continue;  // infeasible, no plan
        ++hist[static_cast<int>(o.executed_chain.size())];
    }
    return hist;
}

const std::vector<LandscapeRow>& selection_landscape(const ExperimentResult& result) {
    return result.landscape;
}

CachedView bench_topology(int n_peers, const ModelSpec& model, std::uint64_t seed) {
    Rng rng = Rng::substream(seed, "bench-topology");
    std::vector<std::pair<int, int>> stages;
    for (int shard : {9, 6, 3})
        for (const auto& s : make_partition(model, shard)) stages.push_back(s);

    CachedView view;
    view.as_of = 0.0;
    for (int i = 0; i < n_peers; ++i) {
        const auto& [start, end] = stages[i % stages.size()];
        PeerRecord r;
        char id[32];
        std::snprintf(id, sizeof(id), "n%05d", i);
        r.id = id;
        r.layer_start = start;
        r.layer_end = end;
        r.last_heartbeat = 0.0;
        const bool anchor = i < static_cast<int>(stages.size());  // keep every stage feasible
        if (anchor || rng.next_double() < 0.65) {
            r.trust = rng.uniform(0.96, 1.0);
            r.latency_est = rng.uniform(0.10, 0.60);
        } else {
            r.trust = rng.uniform(0.50, 0.94);
            r.latency_est = rng.uniform(0.02, 0.20);
        }
        view.records.push_back(std::move(r));
    }
    std::sort(view.records.begin(), view.records.end(),
              [](const PeerRecord& a, const PeerRecord& b) { return a.id < b.id; });
    return view;
}

namespace {

struct TimedSelection {
    Seconds elapsed = 0.0;
    bool censored = false;
};

TimedSelection time_selection(Algorithm algo, const CachedView& view, const RouteQuery& query,
                              Seconds trial_timeout) {
    TimedSelection out;
    const auto start = std::chrono::steady_clock::now();
    if (algo == Algorithm::NAIVE) {
        // Unbounded enumeration, censored at the timeout.
        auto admitted = prune(view, 0.0, 0.0, query.t_ttl);
        OverlayDag dag = build_dag(std::move(admitted), query.model,
                                   [](const PeerRecord& p) { return p.latency_est; });
        const auto deadline =
            start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                        std::chrono::duration<double>(trial_timeout));
        auto enumerated =
            enumerate_chains(dag, std::numeric_limits<std::size_t>::max(), deadline);
        out.censored = enumerated.censored;
    } else {
        RouteQuery q = query;
        q.algorithm = algo;
        Rng rng(0);
        (void)route(view, 0.0, q, rng);
    }
    out.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (out.censored) out.elapsed = trial_timeout;
    return out;
}

}  // namespace

std::vector<OverheadRow> bench_selection(const std::vector<Algorithm>& algorithms,
                                         const std::vector<int>& sizes, int trials,
                                         std::uint64_t seed, const BenchOptions& options) {
    if (trials < 1) throw ContractError("bench_selection: trials must be >= 1");
    ModelSpec model{36, 3};
    RouteQuery query;
    query.model = model;
    query.budget = RiskBudget::from_tau(0.96, k_max(model));
    query.t_timeout = 25.0;
    query.t_ttl = 15.0;

    std::vector<OverheadRow> rows;
    for (Algorithm algo : algorithms) {
        for (int n : sizes) {
            std::vector<Seconds> samples;
            int censored = 0;
            for (int trial = 0; trial < trials; ++trial) {
                CachedView view = bench_topology(n, model, mix(seed, trial));
                TimedSelection t = time_selection(algo, view, query, options.trial_timeout);
                samples.push_back(t.elapsed);
                if (t.censored) ++censored;
            }
            std::sort(samples.begin(), samples.end());
            double sum = 0.0;
            for (Seconds s : samples) sum += s;
            OverheadRow row;
            row.algorithm = algorithm_name(algo);
            row.network_size = n;
            row.median_decision = samples[(samples.size() - 1) / 2];
            row.mean_decision = sum / samples.size();
            row.censored = censored;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

namespace {

std::string format_double(double v) {
    std::ostringstream out;
    out.precision(9);
    out << v;
    return out.str();
}

}  // namespace

std::string ssr_csv(const std::vector<std::tuple<std::string, int, SsrResult>>& rows) {
    std::string out = "algo,tokens,rate,ci_low,ci_high,n\n";
    for (const auto& [algo, tokens, r] : rows) {
        out += algo + ',' + std::to_string(tokens) + ',' + format_double(r.rate) + ',' +
               format_double(r.ci_low) + ',' + format_double(r.ci_high) + ',' +
               std::to_string(r.n) + '\n';
    }
    return out;
}

std::string latency_csv(const std::vector<std::tuple<std::string, int, LatencyStats>>& rows) {
    std::string out = "algo,tokens,mean,p50,p99\n";
    for (const auto& [algo, tokens, s] : rows) {
        out += algo + ',' + std::to_string(tokens) + ',' + format_double(s.mean) + ',' +
               format_double(s.p50) + ',' + format_double(s.p99) + '\n';
    }
    return out;
}

std::string hops_csv(
    const std::vector<std::tuple<std::string, int, std::map<int, int>>>& rows) {
    std::string out = "algo,tokens,hops,count\n";
    for (const auto& [algo, tokens, hist] : rows)
        for (const auto& [hops, count] : hist)
            out += algo + ',' + std::to_string(tokens) + ',' + std::to_string(hops) + ',' +
                   std::to_string(count) + '\n';
    return out;
}

std::string landscape_csv(
    const std::vector<std::tuple<std::string, int, std::vector<LandscapeRow>>>& rows) {
    std::string out = "algo,tokens,request_id,peer,trust,latency_est\n";
    for (const auto& [algo, tokens, list] : rows)
        for (const LandscapeRow& r : list)
            out += algo + ',' + std::to_string(tokens) + ',' + std::to_string(r.request_id) +
                   ',' + r.peer + ',' + format_double(r.trust) + ',' +
                   format_double(r.latency_est) + '\n';
    return out;
}

std::string overhead_csv(const std::vector<OverheadRow>& rows) {
    std::string out = "algo,network_size,median_decision,mean_decision,censored\n";
    for (const OverheadRow& r : rows)
        out += r.algorithm + ',' + std::to_string(r.network_size) + ',' +
               format_double(r.median_decision) + ',' + format_double(r.mean_decision) + ',' +
               std::to_string(r.censored) + '\n';
    return out;
}

}  // namespace chainroute
