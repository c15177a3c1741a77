#include "chainroute/sim.hpp"

#include <chrono>
#include <cmath>

#include "chainroute/scenario.hpp"
#include "json.hpp"

namespace chainroute {

const char* profile_kind_name(ProfileKind k) {
    switch (k) {
        case ProfileKind::HoneyPot: return "honey_pot";
        case ProfileKind::Turtle: return "turtle";
        case ProfileKind::Golden: return "golden";
        case ProfileKind::Custom: return "custom";
    }
    return "?";
}

std::optional<ProfileKind> profile_kind_from_name(const std::string& name) {
    if (name == "honey_pot") return ProfileKind::HoneyPot;
    if (name == "turtle") return ProfileKind::Turtle;
    if (name == "golden") return ProfileKind::Golden;
    if (name == "custom") return ProfileKind::Custom;
    return std::nullopt;
}

bool sample_peer_failure(std::uint64_t seed, const PeerId& peer, std::int64_t request_id,
                         double p_fail) {
    if (p_fail < 0.0 || p_fail > 1.0) throw ContractError("p_fail must be in [0,1]");
    if (p_fail <= 0.0) return false;
    if (p_fail >= 1.0) return true;
    std::uint64_t key = mix(mix(seed, fnv1a64("fail")), fnv1a64(peer));
    key = mix(key, static_cast<std::uint64_t>(request_id));
    const double u = static_cast<double>(splitmix64(key) >> 11) * 0x1.0p-53;
    return u < p_fail;
}

Seconds hop_latency(const PeerRecord& peer, const PeerProfile& profile, Rng& rng,
                    Seconds jitter_max, double compute_scale) {
    const double jitter = jitter_max > 0.0 ? rng.uniform(0.0, jitter_max) : 0.0;
    return profile.compute_per_layer * peer.layer_count() * compute_scale +
           profile.net_delay + jitter;
}

namespace {

Rng jitter_stream(std::uint64_t seed, const PeerId& peer, std::int64_t request_id, int token) {
    std::uint64_t key = mix(mix(seed, fnv1a64("jitter")), fnv1a64(peer));
    key = mix(key, static_cast<std::uint64_t>(request_id));
    key = mix(key, static_cast<std::uint64_t>(token));
    return Rng(key);
}

}  // namespace

ChainExecResult execute_chain(const std::vector<PeerId>& chain, const RequestSpec& request,
                              const std::map<PeerId, bool>& failures, const SimParams& params,
                              const ProfileMap& profiles, const CachedView& view) {
    ChainExecResult result;
    for (int token = 1; token <= request.n_tokens; ++token) {
        const double compute_scale = 1.0 + params.token_compute_growth * (token - 1);
        Seconds token_latency = 0.0;
        for (const PeerId& peer : chain) {
            auto flag = failures.find(peer);
            if (flag != failures.end() && flag->second) {
                result.failed_peer = peer;
                result.elapsed += params.t_timeout;
                return result;  // stall at the lowest-stage flagged peer
            }
            const PeerRecord& rec = view.at(peer);
            const PeerProfile& prof = profiles.at(peer);
            Rng rng = jitter_stream(params.seed, peer, request.request_id, token);
            const Seconds lat = hop_latency(rec, prof, rng, params.jitter_max, compute_scale);
            token_latency += lat;
            result.observations.push_back({peer, lat});
        }
        result.token_latencies.push_back(token_latency);
        result.elapsed += token_latency;
    }
    result.success = true;
    return result;
}

namespace {

void report_observations(Registry& registry, const ChainExecResult& exec,
                         const LedgerParams& ledger) {
    for (const auto& [peer, lat] : exec.observations)
        registry.observe_latency(peer, lat, ledger.beta);
}

}  // namespace

RequestOutcome execute_request(Registry& registry, const CachedView& view,
                               const RouteQuery& query, const RequestSpec& request,
                               const SimParams& params, const ProfileMap& profiles) {
    RequestOutcome outcome;
    outcome.request_id = request.request_id;

    Rng naive_rng(mix(mix(params.seed, fnv1a64("naive")),
                      static_cast<std::uint64_t>(request.request_id)));
    const auto t0 = std::chrono::steady_clock::now();
    RouteResult plan = route(view, request.submitted_at, query, naive_rng);
    outcome.selection_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (!plan) {
        outcome.infeasible = true;  // abort, no culprit
        return outcome;
    }
    outcome.planned_chain = plan->peers;

    std::map<PeerId, bool> failures;
    for (const PeerId& peer : plan->peers)
        failures[peer] = sample_peer_failure(params.seed, peer, request.request_id,
                                             profiles.at(peer).p_fail);

    ChainExecResult first = execute_chain(plan->peers, request, failures, params, profiles, view);
    outcome.attempts = 1;
    report_observations(registry, first, params.ledger);

    if (first.success) {
        registry.apply_feedback(plan->peers, true, std::nullopt, params.ledger);
        outcome.success = true;
        outcome.executed_chain = plan->peers;
        outcome.token_latencies = std::move(first.token_latencies);
        return outcome;
    }

    registry.apply_feedback(plan->peers, false, first.failed_peer, params.ledger);
    outcome.culprit = first.failed_peer;
    outcome.executed_chain = plan->peers;
    outcome.token_latencies = std::move(first.token_latencies);

    if (!params.repair_enabled) return outcome;

    auto replacement = find_replacement(view, request.submitted_at, first.failed_peer,
                                        query.budget.tau, query.t_ttl);
    if (!replacement) return outcome;

    std::vector<PeerId> repaired = plan->peers;
    for (PeerId& id : repaired)
        if (id == first.failed_peer) id = *replacement;
    failures.erase(first.failed_peer);
    failures[*replacement] = sample_peer_failure(params.seed, *replacement, request.request_id,
                                                 profiles.at(*replacement).p_fail);

    ChainExecResult second =
        execute_chain(repaired, request, failures, params, profiles, view);
    outcome.attempts = 2;
    outcome.repair_used = true;
    outcome.executed_chain = repaired;
    report_observations(registry, second, params.ledger);

    if (second.success) {
        registry.apply_feedback(repaired, true, std::nullopt, params.ledger);
        outcome.success = true;
        outcome.token_latencies = std::move(second.token_latencies);
    } else {
        registry.apply_feedback(repaired, false, second.failed_peer, params.ledger);
        outcome.culprit = second.failed_peer;
        outcome.token_latencies = std::move(second.token_latencies);
    }
    return outcome;
}

ExperimentResult run_experiment(const ScenarioConfig& scenario, Algorithm algorithm,
                                int n_requests, int tokens, std::uint64_t seed) {
    if (n_requests < 0) throw ContractError("n_requests must be >= 0");
    if (tokens < 1) throw ContractError("tokens must be >= 1");

    Scenario world = build_scenario(scenario, seed);
    Registry& registry = world.registry;
    RouteQuery query = make_query(scenario, algorithm);
    SimParams params = scenario.sim;
    params.ledger = scenario.ledger;
    params.seed = seed;

    ExperimentResult result;
    result.outcomes.reserve(static_cast<std::size_t>(n_requests));

    Seconds now = 0.0;
    registry.heartbeat_all(0.0);
    CachedView view = registry.snapshot(0.0);

    for (int i = 1; i <= n_requests; ++i) {
        const Seconds hb_time = std::floor(now / params.ledger.t_hb) * params.ledger.t_hb;
        registry.heartbeat_all(hb_time);
        registry.advance_to(now);
        view = sync_view(registry, view, now, params.ledger.t_gossip);

        RequestSpec request{i, tokens, now};
        RequestOutcome outcome = execute_request(registry, view, query, request, params,
                                                 world.profiles);
        for (const PeerId& peer : outcome.planned_chain) {
            const PeerRecord& rec = view.at(peer);
            result.landscape.push_back({outcome.request_id, peer, rec.trust, rec.latency_est});
        }

        Seconds duration = 0.0;
        for (Seconds t : outcome.token_latencies) duration += t;
        const int failed_attempts = outcome.attempts - (outcome.success ? 1 : 0);
        duration += params.t_timeout * failed_attempts;
        now += std::max(duration, 1e-3);

        result.outcomes.push_back(std::move(outcome));
    }
    return result;
}

std::string outcomes_to_jsonl(const std::vector<RequestOutcome>& outcomes) {
    std::string out;
    for (const RequestOutcome& o : outcomes) {
        nlohmann::ordered_json doc;
        doc["request_id"] = o.request_id;
        doc["success"] = o.success;
        doc["infeasible"] = o.infeasible;
        doc["repair_used"] = o.repair_used;
        doc["attempts"] = o.attempts;
        doc["planned_chain"] = o.planned_chain;
        doc["executed_chain"] = o.executed_chain;
        if (o.culprit)
            doc["culprit"] = *o.culprit;
        else
            doc["culprit"] = nullptr;
        doc["token_latencies"] = o.token_latencies;
        out += doc.dump();
        out += '\n';
    }
    return out;
}

}  // namespace chainroute
