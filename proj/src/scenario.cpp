#include "chainroute/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace chainroute {

RiskBudget ScenarioConfig::budget() const {
    const int kmax = k_max(model);
    if (epsilon && !(tau > 0.0)) return RiskBudget::from_epsilon(*epsilon, kmax);
    return RiskBudget::from_tau(tau, kmax);
}

int ScenarioConfig::total_peer_count() const {
    int total = 0;
    for (int shard : shard_sizes) {
        const int stages = static_cast<int>(make_partition(model, shard).size());
        for (const ProfileSpec& p : profiles) {
            auto it = p.count_per_stage.find(shard);
            if (it != p.count_per_stage.end()) total += stages * it->second;
        }
    }
    return total;
}

std::vector<std::pair<int, int>> make_partition(const ModelSpec& model, int shard_size) {
    if (shard_size < 1) throw ConfigError("shard size must be >= 1");
    if (shard_size > model.total_layers)
        throw ConfigError("shard size exceeds model.total_layers");
    std::vector<std::pair<int, int>> shards;
    for (int start = 1; start <= model.total_layers; start += shard_size)
        shards.push_back({start, std::min(start + shard_size - 1, model.total_layers)});
    return shards;
}

namespace {

void validate_profile(const ProfileSpec& p) {
    const std::string where = "profiles[" + p.name + "].";
    if (p.name.empty()) throw ConfigError("profiles[].name must be non-empty");
    if (p.delay_min < 0.0 || p.delay_max < p.delay_min)
        throw ConfigError(where + "delay: need 0 <= min <= max");
    if (p.p_fail_min < 0.0 || p.p_fail_max > 1.0 || p.p_fail_max < p.p_fail_min)
        throw ConfigError(where + "p_fail: need 0 <= min <= max <= 1");
    if (p.compute_per_layer < 0.0) throw ConfigError(where + "compute_per_layer: must be >= 0");
    if (p.trust_init < 0.0 || p.trust_init > 1.0)
        throw ConfigError(where + "trust_init: must be in [0,1]");
    for (const auto& [shard, count] : p.count_per_stage)
        if (count < 0) throw ConfigError(where + "count_per_stage: counts must be >= 0");
}

void validate(const ScenarioConfig& c) {
    if (c.model.total_layers < 1) throw ConfigError("model.total_layers: must be >= 1");
    if (c.model.min_shard < 1 || c.model.min_shard > c.model.total_layers)
        throw ConfigError("model.min_shard: must be in [1, total_layers]");
    if (c.shard_sizes.empty()) throw ConfigError("shards: must list at least one shard size");
    for (int s : c.shard_sizes) {
        if (s < c.model.min_shard) throw ConfigError("shards: size below model.min_shard");
        if (s > c.model.total_layers) throw ConfigError("shards: size exceeds total_layers");
    }
    if (!(c.tau > 0.0 && c.tau <= 1.0)) throw ConfigError("budget.tau: must be in (0,1]");
    if (c.epsilon && !(*c.epsilon > 0.0 && *c.epsilon < 1.0))
        throw ConfigError("budget.epsilon: must be in (0,1)");
    if (!(c.ledger.beta > 0.0 && c.ledger.beta < 1.0))
        throw ConfigError("ledger.beta: must be in (0,1)");
    if (!(c.ledger.t_ttl > c.ledger.t_hb && c.ledger.t_hb > 0.0))
        throw ConfigError("ledger.t_ttl: need t_ttl > t_hb > 0");
    if (c.ledger.t_gossip <= 0.0) throw ConfigError("ledger.t_gossip: must be > 0");
    if (c.sim.t_timeout <= 0.0) throw ConfigError("sim.t_timeout: must be > 0");
    if (c.sim.jitter_max < 0.0) throw ConfigError("sim.jitter_max: must be >= 0");
    if (c.sim.token_compute_growth < 0.0)
        throw ConfigError("sim.token_compute_growth: must be >= 0");
    for (const ProfileSpec& p : c.profiles) validate_profile(p);
    if (c.total_peer_count() <= 0) throw ConfigError("profiles: total peer count must be > 0");
}

}  // namespace

Scenario build_scenario(const ScenarioConfig& config, std::uint64_t seed) {
    validate(config);
    Scenario scenario;
    for (int shard : config.shard_sizes) {
        for (const auto& [start, end] : make_partition(config.model, shard)) {
            int index = 0;
            for (const ProfileSpec& profile : config.profiles) {
                auto it = profile.count_per_stage.find(shard);
                const int count = it == profile.count_per_stage.end() ? 0 : it->second;
                for (int r = 0; r < count; ++r, ++index) {
                    char id[32];
                    std::snprintf(id, sizeof(id), "s%02de%02d-%02d", start, end, index);
                    Rng rng = Rng::substream(seed, std::string("scenario/") + id);
                    PeerProfile drawn;
                    drawn.kind = profile.kind;
                    drawn.net_delay = profile.delay_max > profile.delay_min
                                          ? rng.uniform(profile.delay_min, profile.delay_max)
                                          : profile.delay_min;
                    drawn.p_fail = profile.p_fail_max > profile.p_fail_min
                                       ? rng.uniform(profile.p_fail_min, profile.p_fail_max)
                                       : profile.p_fail_min;
                    drawn.compute_per_layer = profile.compute_per_layer;

                    PeerRecord rec;
                    rec.id = id;
                    rec.layer_start = start;
                    rec.layer_end = end;
                    rec.trust = profile.trust_init;
                    rec.latency_est =
                        config.calibrate_latency
                            ? drawn.compute_per_layer * (end - start + 1) + drawn.net_delay
                            : config.ledger.latency_init;
                    rec.last_heartbeat = 0.0;
                    rec.profile_ref = profile.name;
                    scenario.registry.upsert(rec);
                    scenario.profiles[rec.id] = drawn;
                }
            }
        }
    }
    return scenario;
}

ScenarioConfig default_config() {
    ScenarioConfig c;
    c.model = {36, 3};
    c.shard_sizes = {9, 6, 3};
    c.tau = 0.96;
    c.calibrate_latency = true;

    // 336 peers: 4 x 9-layer stages of 6, 6 x 6-layer stages of 8,
    // 12 x 3-layer stages of 22. Fast-but-risky peers sit on the small
    // shards, slow-but-safe and moderate peers host the larger ones.
    // Trust priors model accumulated service history: long-standing
    // flawless-but-slow peers enter at full trust, newer peers slightly
    // below, and known-risky fast peers carry a degraded prior.
    ProfileSpec honey;
    honey.name = "honey_pot";
    honey.kind = ProfileKind::HoneyPot;
    honey.delay_min = 0.0008;
    honey.delay_max = 0.0012;
    honey.p_fail_min = 0.20;
    honey.p_fail_max = 0.35;
    honey.trust_init = 0.90;
    honey.count_per_stage = {{3, 18}};

    ProfileSpec flaky;
    flaky.name = "flaky";
    flaky.kind = ProfileKind::Custom;
    flaky.delay_min = 0.005;
    flaky.delay_max = 0.015;
    flaky.p_fail_min = 0.035;
    flaky.p_fail_max = 0.07;
    flaky.trust_init = 0.999;
    flaky.count_per_stage = {{9, 5}};

    ProfileSpec golden;
    golden.name = "golden";
    golden.kind = ProfileKind::Golden;
    golden.delay_min = 0.020;
    golden.delay_max = 0.040;
    golden.p_fail_min = 0.0;
    golden.p_fail_max = 0.0;
    golden.trust_init = 0.999;
    golden.count_per_stage = {{6, 4}, {3, 2}};

    ProfileSpec turtle;
    turtle.name = "turtle";
    turtle.kind = ProfileKind::Turtle;
    turtle.delay_min = 0.15;
    turtle.delay_max = 0.30;
    turtle.p_fail_min = 0.001;
    turtle.p_fail_max = 0.001;
    turtle.trust_init = 1.0;
    turtle.count_per_stage = {{9, 1}, {6, 4}, {3, 2}};

    c.profiles = {honey, flaky, golden, turtle};
    return c;
}

namespace {

using nlohmann::json;

double get_num(const json& doc, const std::string& key, double fallback) {
    if (!doc.contains(key)) return fallback;
    if (!doc.at(key).is_number()) throw ConfigError(key + ": expected a number");
    return doc.at(key).get<double>();
}

}  // namespace

ScenarioConfig config_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    ScenarioConfig c = default_config();

    if (doc.contains("model")) {
        const auto& m = doc.at("model");
        c.model.total_layers = static_cast<int>(get_num(m, "total_layers", c.model.total_layers));
        c.model.min_shard = static_cast<int>(get_num(m, "min_shard", c.model.min_shard));
    }
    if (doc.contains("shards")) {
        if (!doc.at("shards").is_array()) throw ConfigError("shards: expected an array");
        c.shard_sizes.clear();
        for (const auto& s : doc.at("shards")) c.shard_sizes.push_back(s.get<int>());
    }
    if (doc.contains("profiles")) {
        if (!doc.at("profiles").is_array()) throw ConfigError("profiles: expected an array");
        c.profiles.clear();
        for (const auto& p : doc.at("profiles")) {
            ProfileSpec spec;
            spec.name = p.value("name", std::string());
            if (p.contains("kind")) {
                auto kind = profile_kind_from_name(p.at("kind").get<std::string>());
                if (!kind) throw ConfigError("profiles[" + spec.name + "].kind: unknown kind");
                spec.kind = *kind;
            }
            if (p.contains("delay")) {
                spec.delay_min = p.at("delay").at(0).get<double>();
                spec.delay_max = p.at("delay").at(1).get<double>();
            }
            if (p.contains("p_fail")) {
                if (p.at("p_fail").is_array()) {
                    spec.p_fail_min = p.at("p_fail").at(0).get<double>();
                    spec.p_fail_max = p.at("p_fail").at(1).get<double>();
                } else {
                    spec.p_fail_min = spec.p_fail_max = p.at("p_fail").get<double>();
                }
            }
            spec.compute_per_layer = get_num(p, "compute_per_layer", spec.compute_per_layer);
            spec.trust_init = get_num(p, "trust_init", spec.trust_init);
            if (p.contains("count_per_stage")) {
                for (const auto& [key, value] : p.at("count_per_stage").items())
                    spec.count_per_stage[std::stoi(key)] = value.get<int>();
            }
            c.profiles.push_back(std::move(spec));
        }
    }
    if (doc.contains("ledger")) {
        const auto& l = doc.at("ledger");
        c.ledger.beta = get_num(l, "beta", c.ledger.beta);
        c.ledger.delta_r_plus = get_num(l, "delta_r_plus", c.ledger.delta_r_plus);
        c.ledger.delta_r_minus = get_num(l, "delta_r_minus", c.ledger.delta_r_minus);
        c.ledger.t_hb = get_num(l, "t_hb", c.ledger.t_hb);
        c.ledger.t_ttl = get_num(l, "t_ttl", c.ledger.t_ttl);
        c.ledger.t_gossip = get_num(l, "t_gossip", c.ledger.t_gossip);
        c.ledger.latency_init = get_num(l, "latency_init", c.ledger.latency_init);
        c.ledger.trust_init = get_num(l, "trust_init", c.ledger.trust_init);
    }
    if (doc.contains("sim")) {
        const auto& s = doc.at("sim");
        c.sim.t_timeout = get_num(s, "t_timeout", c.sim.t_timeout);
        c.sim.jitter_max = get_num(s, "jitter_max", c.sim.jitter_max);
        c.sim.token_compute_growth =
            get_num(s, "token_compute_growth", c.sim.token_compute_growth);
        if (s.contains("repair_enabled")) c.sim.repair_enabled = s.at("repair_enabled").get<bool>();
    }
    if (doc.contains("budget")) {
        const auto& b = doc.at("budget");
        if (b.contains("tau")) c.tau = b.at("tau").get<double>();
        if (b.contains("epsilon")) {
            c.epsilon = b.at("epsilon").get<double>();
            // an explicit tau wins; epsilon alone derives the floor
            if (!b.contains("tau")) {
                if (!(*c.epsilon > 0.0 && *c.epsilon < 1.0))
                    throw ConfigError("budget.epsilon: must be in (0,1)");
                c.tau = trust_floor(*c.epsilon, k_max(c.model));
            }
        }
    }
    if (doc.contains("calibrate_latency"))
        c.calibrate_latency = doc.at("calibrate_latency").get<bool>();

    validate(c);
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return config_from_json(buf.str());
}

std::string config_to_json(const ScenarioConfig& c) {
    nlohmann::ordered_json doc;
    doc["model"] = {{"total_layers", c.model.total_layers}, {"min_shard", c.model.min_shard}};
    doc["shards"] = c.shard_sizes;
    doc["profiles"] = nlohmann::ordered_json::array();
    for (const ProfileSpec& p : c.profiles) {
        nlohmann::ordered_json pj;
        pj["name"] = p.name;
        pj["kind"] = profile_kind_name(p.kind);
        pj["delay"] = {p.delay_min, p.delay_max};
        pj["p_fail"] = {p.p_fail_min, p.p_fail_max};
        pj["compute_per_layer"] = p.compute_per_layer;
        pj["trust_init"] = p.trust_init;
        nlohmann::ordered_json counts;
        for (const auto& [shard, count] : p.count_per_stage)
            counts[std::to_string(shard)] = count;
        pj["count_per_stage"] = counts;
        doc["profiles"].push_back(pj);
    }
    doc["ledger"] = {{"beta", c.ledger.beta},
                     {"delta_r_plus", c.ledger.delta_r_plus},
                     {"delta_r_minus", c.ledger.delta_r_minus},
                     {"t_hb", c.ledger.t_hb},
                     {"t_ttl", c.ledger.t_ttl},
                     {"t_gossip", c.ledger.t_gossip},
                     {"latency_init", c.ledger.latency_init},
                     {"trust_init", c.ledger.trust_init}};
    doc["sim"] = {{"t_timeout", c.sim.t_timeout},
                  {"repair_enabled", c.sim.repair_enabled},
                  {"jitter_max", c.sim.jitter_max},
                  {"token_compute_growth", c.sim.token_compute_growth}};
    doc["budget"] = {{"tau", c.tau}};
    if (c.epsilon) doc["budget"]["epsilon"] = *c.epsilon;
    doc["calibrate_latency"] = c.calibrate_latency;
    return doc.dump(2);
}

RouteQuery make_query(const ScenarioConfig& config, Algorithm algorithm) {
    RouteQuery query;
    query.model = config.model;
    query.budget = config.budget();
    query.algorithm = algorithm;
    query.t_timeout = config.sim.t_timeout;
    query.t_ttl = config.ledger.t_ttl;
    if (algorithm == Algorithm::SP || algorithm == Algorithm::NAIVE) query.budget.tau = 0.0;
    return query;
}

}  // namespace chainroute
