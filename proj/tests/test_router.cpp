#include "chainroute/router.hpp"

#include <cmath>

#include "chainroute/rng.hpp"
#include "doctest.h"

using namespace chainroute;

namespace {

PeerRecord make_peer(const PeerId& id, int start, int end, double trust = 1.0,
                     double latency = 0.25) {
    PeerRecord r;
    r.id = id;
    r.layer_start = start;
    r.layer_end = end;
    r.trust = trust;
    r.latency_est = latency;
    return r;
}

CachedView view_of(std::vector<PeerRecord> records) {
    std::sort(records.begin(), records.end(),
              [](const PeerRecord& a, const PeerRecord& b) { return a.id < b.id; });
    return CachedView{std::move(records), 0.0};
}

RouteQuery query_for(Algorithm algo, const ModelSpec& model, double tau, double epsilon) {
    RouteQuery q;
    q.model = model;
    q.algorithm = algo;
    q.budget.tau = tau;
    q.budget.epsilon = epsilon;
    q.t_timeout = 25.0;
    q.t_ttl = 15.0;
    return q;
}

// Two-stage, two-replica instance from which all four chains are enumerable
// by hand: A1(1-2), A2(1-2), B1(3-4), B2(3-4).
CachedView two_by_two(double a1_trust) {
    return view_of({make_peer("A1", 1, 2, a1_trust, 1.0), make_peer("A2", 1, 2, 1.0, 2.0),
                    make_peer("B1", 3, 4, 1.0, 1.5), make_peer("B2", 3, 4, 1.0, 0.5)});
}

CachedView random_instance(Rng& rng, const ModelSpec& model, int max_extra) {
    const int stages = model.total_layers / model.min_shard;
    std::vector<PeerRecord> peers;
    int id = 0;
    for (int s = 0; s < stages; ++s) {
        const int replicas = 1 + static_cast<int>(rng.below(max_extra));
        for (int r = 0; r < replicas; ++r) {
            char name[16];
            std::snprintf(name, sizeof(name), "p%03d", id++);
            peers.push_back(make_peer(name, s * model.min_shard + 1, (s + 1) * model.min_shard,
                                      rng.uniform(0.9, 1.0), rng.uniform(0.01, 1.0)));
        }
    }
    return view_of(std::move(peers));
}

}  // namespace

TEST_CASE("effective cost combines latency and failure penalty") {
    CHECK(effective_cost(make_peer("a", 1, 1, 0.96, 0.10), 25.0) ==
          doctest::Approx(1.10).epsilon(1e-12));
    CHECK(effective_cost(make_peer("a", 1, 1, 0.70, 0.001), 25.0) ==
          doctest::Approx(7.501).epsilon(1e-12));
    CHECK(effective_cost(make_peer("a", 1, 1, 1.0, 0.37), 25.0) == 0.37);
}

TEST_CASE("chain reliability is the trust product") {
    auto view = view_of({make_peer("a", 1, 1, 0.9), make_peer("b", 2, 2, 0.9),
                         make_peer("c", 3, 3, 0.9)});
    ChainPlan plan;
    plan.peers = {"a", "b", "c"};
    CHECK(chain_reliability(plan, view) == doctest::Approx(0.729).epsilon(1e-12));

    auto ones = view_of({make_peer("a", 1, 1, 1.0), make_peer("b", 2, 2, 1.0)});
    ChainPlan p2;
    p2.peers = {"a", "b"};
    CHECK(chain_reliability(p2, ones) == 1.0);

    auto vf = view_of({make_peer("a", 1, 1, 0.96), make_peer("b", 2, 2, 0.96),
                       make_peer("c", 3, 3, 0.96), make_peer("d", 4, 4, 0.96)});
    ChainPlan p4;
    p4.peers = {"a", "b", "c", "d"};
    CHECK(chain_reliability(p4, vf) == doctest::Approx(0.84934656).epsilon(1e-12));

    ChainPlan unknown;
    unknown.peers = {"zz"};
    CHECK_THROWS_AS(chain_reliability(unknown, view), UnknownPeerError);
}

TEST_CASE("route_gtrac picks the minimum effective-cost chain") {
    ModelSpec model{4, 2};
    auto q = query_for(Algorithm::GTRAC, model, 0.96, 0.0784);

    auto best = route_gtrac(two_by_two(1.0), 0.0, q);
    REQUIRE(best.has_value());
    CHECK(best->peers == std::vector<PeerId>{"A1", "B2"});
    CHECK(best->predicted_cost == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(best->hop_count == 2);

    // pruning A1 pushes the search to the next-best chain
    auto pruned = route_gtrac(two_by_two(0.90), 0.0, q);
    REQUIRE(pruned.has_value());
    CHECK(pruned->peers == std::vector<PeerId>{"A2", "B2"});
    CHECK(pruned->predicted_cost == doctest::Approx(2.5).epsilon(1e-12));

    // no trusted peer hosting layer 1
    auto infeasible = route_gtrac(
        view_of({make_peer("A1", 1, 2, 0.5), make_peer("B1", 3, 4, 1.0)}), 0.0, q);
    CHECK_FALSE(infeasible.has_value());
}

TEST_CASE("route_sp minimizes raw latency and ignores trust") {
    ModelSpec model{2, 2};
    auto q = query_for(Algorithm::SP, model, 0.96, 0.3);
    auto view = view_of({make_peer("golden", 1, 2, 1.0, 0.03),
                         make_peer("honey", 1, 2, 0.70, 0.001)});
    auto plan = route_sp(view, 0.0, q);
    REQUIRE(plan.has_value());
    CHECK(plan->peers == std::vector<PeerId>{"honey"});  // the honey-pot effect

    // all-equal latency resolves deterministically by id
    auto tied = view_of({make_peer("b", 1, 2, 1.0, 0.1), make_peer("a", 1, 2, 1.0, 0.1)});
    auto tie_plan = route_sp(tied, 0.0, q);
    REQUIRE(tie_plan.has_value());
    CHECK(tie_plan->peers == std::vector<PeerId>{"a"});

    auto gap = route_sp(view_of({make_peer("A", 1, 1, 1.0)}), 0.0, q);
    CHECK_FALSE(gap.has_value());
}

TEST_CASE("route_mr maximizes the reliability product") {
    ModelSpec model{4, 2};
    auto q = query_for(Algorithm::MR, model, 0.96, 0.3);
    auto view = view_of({make_peer("A1", 1, 2, 0.99), make_peer("A2", 1, 2, 0.999),
                         make_peer("B1", 3, 4, 0.95), make_peer("B2", 3, 4, 0.999)});
    auto plan = route_mr(view, 0.0, q);
    REQUIRE(plan.has_value());
    CHECK(plan->peers == std::vector<PeerId>{"A2", "B2"});
    CHECK(plan->reliability == doctest::Approx(0.998001).epsilon(1e-12));
}

TEST_CASE("route_mr prefers a longer all-trusted chain over a shorter tainted one") {
    ModelSpec model{4, 2};
    auto q = query_for(Algorithm::MR, model, 0.96, 0.3);
    auto view = view_of({make_peer("W", 1, 4, 0.99, 0.1), make_peer("X", 1, 2, 1.0, 0.4),
                         make_peer("Y", 3, 4, 1.0, 0.4)});
    auto plan = route_mr(view, 0.0, q);
    REQUIRE(plan.has_value());
    CHECK(plan->peers == std::vector<PeerId>{"X", "Y"});
    CHECK(plan->reliability == 1.0);
}

TEST_CASE("route_mr ties at full reliability resolve to minimum latency") {
    ModelSpec model{4, 2};
    auto q = query_for(Algorithm::MR, model, 0.96, 0.3);
    auto view = view_of({make_peer("A1", 1, 2, 1.0, 0.9), make_peer("A2", 1, 2, 1.0, 0.2),
                         make_peer("B1", 3, 4, 1.0, 0.3), make_peer("B2", 3, 4, 1.0, 0.8)});
    auto plan = route_mr(view, 0.0, q);
    REQUIRE(plan.has_value());
    CHECK(plan->peers == std::vector<PeerId>{"A2", "B1"});

    // trust-zero peers are dropped before weighting
    auto with_zero = view_of({make_peer("A1", 1, 2, 0.0, 0.1), make_peer("A2", 1, 2, 0.9, 0.2),
                              make_peer("B1", 3, 4, 0.9, 0.3)});
    auto plan2 = route_mr(with_zero, 0.0, q);
    REQUIRE(plan2.has_value());
    CHECK(plan2->peers == std::vector<PeerId>{"A2", "B1"});
}

TEST_CASE("route_naive samples uniformly among enumerated chains") {
    ModelSpec model{4, 2};
    auto q = query_for(Algorithm::NAIVE, model, 0.0, 0.3);
    q.naive_cap = 1000;
    auto view = two_by_two(1.0);

    std::map<std::string, int> counts;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        Rng rng(mix(99, i));
        auto plan = route_naive(view, 0.0, q, rng);
        REQUIRE(plan.has_value());
        counts[plan->peers[0] + "/" + plan->peers[1]] += 1;
    }
    REQUIRE(counts.size() == 4);
    // chi-square against uniform over 4 cells; 11.34 is the 1% critical value
    double chi2 = 0.0;
    for (const auto& [chain, count] : counts) {
        const double expected = draws / 4.0;
        chi2 += (count - expected) * (count - expected) / expected;
    }
    CHECK(chi2 < 11.34);

    // degenerate cap always yields the first DFS-order chain
    q.naive_cap = 1;
    Rng rng(123);
    auto first = route_naive(view, 0.0, q, rng);
    REQUIRE(first.has_value());
    CHECK(first->peers == std::vector<PeerId>{"A1", "B1"});

    auto gap = route_naive(view_of({make_peer("A", 1, 2, 1.0)}), 0.0, q, rng);
    CHECK_FALSE(gap.has_value());
}

TEST_CASE("route_larac terminates on a feasible latency-shortest path") {
    ModelSpec model{4, 2};
    auto q = query_for(Algorithm::LARAC, model, 0.96, 0.3);
    auto view = two_by_two(1.0);  // all trust 1.0: c-shortest already feasible
    auto larac = route_larac(view, 0.0, q);
    auto sp = route_sp(view, 0.0, q);
    REQUIRE(larac.has_value());
    REQUIRE(sp.has_value());
    CHECK(larac->peers == sp->peers);
}

TEST_CASE("route_larac reports infeasibility when no chain meets the bound") {
    ModelSpec model{4, 2};
    auto q = query_for(Algorithm::LARAC, model, 0.96, 0.05);
    auto view = view_of({make_peer("A", 1, 2, 0.9, 0.1), make_peer("B", 3, 4, 0.9, 0.1)});
    // best reliability is 0.81 < 0.95
    CHECK_FALSE(route_larac(view, 0.0, q).has_value());
}

TEST_CASE("route_larac stays feasible and above the oracle optimum") {
    ModelSpec model{6, 3};
    Rng rng(2024);
    int compared = 0;
    for (int i = 0; i < 60; ++i) {
        auto view = random_instance(rng, model, 4);
        auto q = query_for(Algorithm::LARAC, model, 0.96, 0.15);
        auto larac = route_larac(view, 0.0, q);
        auto oracle = brute_force_oracle(view, 0.0, q);
        if (!oracle) {
            CHECK_FALSE(larac.has_value());
            continue;
        }
        REQUIRE(larac.has_value());
        CHECK(chain_reliability(*larac, view) >= 1.0 - q.budget.epsilon);
        // oracle minimizes effective cost; compare on the same objective
        double larac_eff = 0.0;
        for (const auto& id : larac->peers) larac_eff += effective_cost(view.at(id), q.t_timeout);
        CHECK(larac_eff >= oracle->predicted_cost - 1e-9);
        ++compared;
    }
    CHECK(compared > 30);
}

TEST_CASE("brute_force_oracle matches the pruned search when no gap peers exist") {
    ModelSpec model{4, 2};
    auto q = query_for(Algorithm::ORACLE, model, 0.96, 1.0 - 0.96 * 0.96);
    auto view = two_by_two(1.0);
    auto oracle = brute_force_oracle(view, 0.0, q);
    auto fast = route_gtrac(view, 0.0, q);
    REQUIRE(oracle.has_value());
    REQUIRE(fast.has_value());
    CHECK(oracle->predicted_cost == fast->predicted_cost);
    CHECK(oracle->peers == fast->peers);
}

TEST_CASE("pruning is sufficient but not necessary: the oracle may keep a sub-floor peer") {
    // One peer below tau but the chain still meets the chain-level bound.
    ModelSpec model{4, 2};
    auto q = query_for(Algorithm::ORACLE, model, 0.96, 0.2);
    auto view = view_of({make_peer("A", 1, 2, 0.999, 0.1), make_peer("B", 3, 4, 0.94, 0.1)});
    auto oracle = brute_force_oracle(view, 0.0, q);
    REQUIRE(oracle.has_value());  // 0.999 * 0.94 = 0.939 >= 0.8
    CHECK_FALSE(route_gtrac(view, 0.0, q).has_value());  // 0.94 < 0.96 prunes B
}

TEST_CASE("brute_force_oracle edge cases") {
    ModelSpec model{4, 2};
    auto q = query_for(Algorithm::ORACLE, model, 0.96, 0.3);
    CHECK_FALSE(brute_force_oracle(CachedView{{}, 0.0}, 0.0, q).has_value());

    // enumeration guard trips on dense instances
    std::vector<PeerRecord> many;
    for (int s = 0; s < 2; ++s)
        for (int r = 0; r < 40; ++r)
            many.push_back(make_peer("p" + std::to_string(s * 100 + r), s * 2 + 1, s * 2 + 2));
    CHECK_THROWS_AS(brute_force_oracle(view_of(many), 0.0, q, 1000), EnumerationTooLarge);
}

TEST_CASE("find_replacement returns the fastest trusted same-shard peer") {
    auto view = view_of({make_peer("B1", 3, 4, 1.0, 0.5), make_peer("B2", 3, 4, 1.0, 0.2),
                         make_peer("B3", 3, 4, 1.0, 0.1), make_peer("C", 3, 5, 1.0, 0.01)});
    auto best = find_replacement(view, 0.0, "B1", 0.96, 15.0);
    REQUIRE(best.has_value());
    CHECK(*best == "B3");

    // floor enforced on the replacement
    auto low = view_of({make_peer("B1", 3, 4, 1.0, 0.5), make_peer("B2", 3, 4, 0.9, 0.1)});
    CHECK_FALSE(find_replacement(low, 0.0, "B1", 0.96, 15.0).has_value());

    // exact layer-range match required: C hosts (3-5), not (3-4)
    auto mismatch = view_of({make_peer("B1", 3, 4, 1.0, 0.5), make_peer("C", 3, 5, 1.0, 0.01)});
    CHECK_FALSE(find_replacement(mismatch, 0.0, "B1", 0.96, 15.0).has_value());
}

TEST_CASE("gtrac chains always satisfy the chain-level reliability bound") {
    ModelSpec model{12, 3};
    Rng rng(5150);
    const int kmax = 4;
    for (int i = 0; i < 200; ++i) {
        auto view = random_instance(rng, model, 4);
        const double epsilon = rng.uniform(0.05, 0.5);
        RouteQuery q = query_for(Algorithm::GTRAC, model, 0.0, epsilon);
        q.budget = RiskBudget::from_epsilon(epsilon, kmax);
        auto plan = route_gtrac(view, 0.0, q);
        if (!plan) continue;
        const double rel = chain_reliability(*plan, view);
        CHECK(rel >= std::pow(q.budget.tau, plan->hop_count) - 1e-12);
        CHECK(rel >= 1.0 - epsilon - 1e-12);
    }
}

TEST_CASE("raising a latency estimate never lowers the gtrac cost") {
    ModelSpec model{6, 3};
    Rng rng(31337);
    for (int i = 0; i < 100; ++i) {
        auto view = random_instance(rng, model, 4);
        auto q = query_for(Algorithm::GTRAC, model, 0.9, 0.3);
        auto before = route_gtrac(view, 0.0, q);
        if (!before) continue;
        CachedView bumped = view;
        auto& victim = bumped.records[rng.below(bumped.records.size())];
        victim.latency_est += rng.uniform(0.0, 2.0);
        auto after = route_gtrac(bumped, 0.0, q);
        REQUIRE(after.has_value());
        CHECK(after->predicted_cost >= before->predicted_cost - 1e-12);
    }
}

TEST_CASE("sp equals gtrac when every trust is 1.0") {
    ModelSpec model{6, 3};
    Rng rng(86);
    for (int i = 0; i < 50; ++i) {
        auto view = random_instance(rng, model, 4);
        for (auto& r : view.records) r.trust = 1.0;
        auto q = query_for(Algorithm::GTRAC, model, 0.96, 0.3);
        auto gt = route_gtrac(view, 0.0, q);
        auto sp = route_sp(view, 0.0, q);
        REQUIRE(gt.has_value());
        REQUIRE(sp.has_value());
        CHECK(gt->peers == sp->peers);
    }
}

TEST_CASE("mr reliability dominates every other algorithm's chain") {
    ModelSpec model{6, 3};
    Rng rng(271828);
    for (int i = 0; i < 50; ++i) {
        auto view = random_instance(rng, model, 3);
        auto q = query_for(Algorithm::MR, model, 0.9, 0.3);
        auto mr = route_mr(view, 0.0, q);
        REQUIRE(mr.has_value());
        const double mr_rel = chain_reliability(*mr, view);
        for (Algorithm algo :
             {Algorithm::GTRAC, Algorithm::SP, Algorithm::NAIVE, Algorithm::LARAC}) {
            RouteQuery q2 = query_for(algo, model, algo == Algorithm::SP ? 0.0 : 0.9, 0.3);
            Rng r2(1);
            auto other = route(view, 0.0, q2, r2);
            if (other) CHECK(mr_rel >= chain_reliability(*other, view) - 1e-12);
        }
    }
}

TEST_CASE("identical inputs produce identical plans") {
    ModelSpec model{6, 3};
    Rng rng(40);
    auto view = random_instance(rng, model, 5);
    for (Algorithm algo : {Algorithm::GTRAC, Algorithm::SP, Algorithm::MR, Algorithm::NAIVE,
                           Algorithm::LARAC, Algorithm::ORACLE}) {
        auto q = query_for(algo, model, algo == Algorithm::SP ? 0.0 : 0.9, 0.3);
        Rng r1(777), r2(777);
        auto a = route(view, 0.0, q, r1);
        auto b = route(view, 0.0, q, r2);
        REQUIRE(a.has_value() == b.has_value());
        if (a) {
            CHECK(a->peers == b->peers);
            CHECK(a->predicted_cost == b->predicted_cost);
        }
    }
}

TEST_CASE("chain plan serializes with the documented fields") {
    ChainPlan plan;
    plan.peers = {"a", "b"};
    plan.predicted_cost = 1.5;
    plan.reliability = 0.99;
    plan.hop_count = 2;
    const std::string json = to_json(plan, Algorithm::GTRAC);
    CHECK(json.find("\"algo\":\"gtrac\"") != std::string::npos);
    CHECK(json.find("\"peers\":[\"a\",\"b\"]") != std::string::npos);
    CHECK(json.find("\"hops\":2") != std::string::npos);
}
