#include "chainroute/ledger.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace chainroute {

const PeerRecord* CachedView::find(const PeerId& id) const {
    auto it = std::lower_bound(records.begin(), records.end(), id,
                               [](const PeerRecord& r, const PeerId& key) { return r.id < key; });
    if (it == records.end() || it->id != id) return nullptr;
    return &*it;
}

const PeerRecord& CachedView::at(const PeerId& id) const {
    const PeerRecord* r = find(id);
    if (!r) throw UnknownPeerError(id);
    return *r;
}

void Registry::upsert(PeerRecord record) {
    if (record.trust < 0.0 || record.trust > 1.0)
        throw ContractError("trust out of [0,1] for peer " + record.id);
    if (record.latency_est < 0.0)
        throw ContractError("negative latency estimate for peer " + record.id);
    if (record.layer_start < 1 || record.layer_end < record.layer_start)
        throw ContractError("bad layer range for peer " + record.id);
    records_[record.id] = std::move(record);
}

const PeerRecord& Registry::at(const PeerId& id) const {
    auto it = records_.find(id);
    if (it == records_.end()) throw UnknownPeerError(id);
    return it->second;
}

void Registry::advance_to(Seconds t) {
    if (t > now_) now_ = t;
}

void Registry::record_heartbeat(const PeerId& id, Seconds now) {
    auto it = records_.find(id);
    if (it == records_.end()) throw UnknownPeerError(id);
    it->second.last_heartbeat = now;
    advance_to(now);
}

void Registry::heartbeat_all(Seconds now) {
    for (auto& [id, rec] : records_) rec.last_heartbeat = now;
    advance_to(now);
}

void Registry::observe_latency(const PeerId& id, Seconds observed, double beta) {
    auto it = records_.find(id);
    if (it == records_.end()) throw UnknownPeerError(id);
    it->second = update_latency(it->second, observed, beta);
}

void Registry::apply_feedback(const std::vector<PeerId>& executed_chain, bool success,
                              const std::optional<PeerId>& culprit, const LedgerParams& params) {
    if (success) {
        for (const PeerId& id : executed_chain) {
            auto it = records_.find(id);
            if (it == records_.end()) throw UnknownPeerError(id);
            it->second.trust = std::min(1.0, it->second.trust + params.delta_r_plus);
        }
        return;
    }
    if (!culprit) throw ContractError("failed chain feedback requires a culprit");
    auto it = records_.find(*culprit);
    if (it == records_.end()) throw UnknownPeerError(*culprit);
    it->second.trust = std::max(0.0, it->second.trust - params.delta_r_minus);
}

CachedView Registry::snapshot(Seconds as_of) const {
    CachedView view;
    view.as_of = as_of;
    view.records.reserve(records_.size());
    for (const auto& [id, rec] : records_) view.records.push_back(rec);
    return view;  // std::map iterates in id order, so records are sorted
}

bool is_live(const PeerRecord& record, Seconds now, Seconds t_ttl) {
    return now - record.last_heartbeat <= t_ttl;
}

PeerRecord update_latency(const PeerRecord& record, Seconds observed, double beta) {
    if (observed < 0.0) throw ContractError("negative latency observation");
    if (!(beta > 0.0 && beta < 1.0)) throw ContractError("beta must be in (0,1)");
    PeerRecord out = record;
    out.latency_est = (1.0 - beta) * record.latency_est + beta * observed;
    return out;
}

CachedView sync_view(const Registry& registry, const CachedView& view, Seconds now,
                     Seconds t_gossip) {
    if (now - view.as_of >= t_gossip) return registry.snapshot(now);
    return view;
}

namespace {

nlohmann::ordered_json record_to_json(const PeerRecord& r) {
    return nlohmann::ordered_json{{"id", r.id},
                                  {"layer_start", r.layer_start},
                                  {"layer_end", r.layer_end},
                                  {"trust", r.trust},
                                  {"latency_est", r.latency_est},
                                  {"last_heartbeat", r.last_heartbeat}};
}

}  // namespace

std::string to_json(const CachedView& view) {
    nlohmann::ordered_json doc;
    doc["as_of"] = view.as_of;
    doc["peers"] = nlohmann::ordered_json::array();
    for (const PeerRecord& r : view.records) doc["peers"].push_back(record_to_json(r));
    return doc.dump();
}

std::string to_json(const Registry& registry) {
    return to_json(registry.snapshot(registry.now()));
}

CachedView view_from_json(const std::string& text) {
    auto doc = nlohmann::json::parse(text);
    CachedView view;
    view.as_of = doc.at("as_of").get<double>();
    for (const auto& p : doc.at("peers")) {
        PeerRecord r;
        r.id = p.at("id").get<std::string>();
        r.layer_start = p.at("layer_start").get<int>();
        r.layer_end = p.at("layer_end").get<int>();
        r.trust = p.at("trust").get<double>();
        r.latency_est = p.at("latency_est").get<double>();
        r.last_heartbeat = p.at("last_heartbeat").get<double>();
        view.records.push_back(std::move(r));
    }
    std::sort(view.records.begin(), view.records.end(),
              [](const PeerRecord& a, const PeerRecord& b) { return a.id < b.id; });
    return view;
}

}  // namespace chainroute
