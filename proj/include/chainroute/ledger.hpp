#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace chainroute {

using PeerId = std::string;
using Seconds = double;

struct UnknownPeerError : std::runtime_error {
    explicit UnknownPeerError(const PeerId& id) : std::runtime_error("unknown peer: " + id) {}
};

struct ContractError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One peer's advertised shard, trust score, latency estimate and liveness.
/// profile_ref links back to the simulation behavior profile; routing code
/// never reads it.
struct PeerRecord {
    PeerId id;
    int layer_start = 1;  // 1-based, inclusive
    int layer_end = 1;
    double trust = 1.0;        // in [0, 1]
    Seconds latency_est = 0.25;
    Seconds last_heartbeat = 0.0;
    std::string profile_ref;

    int layer_count() const { return layer_end - layer_start + 1; }
};

struct LedgerParams {
    double beta = 0.30;           // latency EWMA factor, in (0,1)
    double delta_r_plus = 0.03;   // trust reward
    double delta_r_minus = 0.2;   // trust penalty
    Seconds t_hb = 2.0;           // heartbeat interval
    Seconds t_ttl = 15.0;         // liveness timeout
    Seconds t_gossip = 2.0;       // registry sync period
    Seconds latency_init = 0.25;
    double trust_init = 1.0;
};

/// Immutable snapshot of the registry as seen by a seeker. Records are sorted
/// by peer id. The snapshot may trail the registry by up to one gossip
/// period; routing never blocks on synchronization.
struct CachedView {
    std::vector<PeerRecord> records;
    Seconds as_of = 0.0;

    const PeerRecord* find(const PeerId& id) const;
    const PeerRecord& at(const PeerId& id) const;
};

/// The anchor's global peer state. Single writer at a time; snapshots are
/// cheap immutable copies that readers can hold across updates. Simulation
/// runs drive all mutation from one thread.
class Registry {
  public:
    void upsert(PeerRecord record);
    bool contains(const PeerId& id) const { return records_.count(id) > 0; }
    const PeerRecord& at(const PeerId& id) const;
    std::size_t size() const { return records_.size(); }

    Seconds now() const { return now_; }
    void advance_to(Seconds t);

    /// Stamps the peer's heartbeat. Unknown peers are rejected.
    void record_heartbeat(const PeerId& id, Seconds now);
    void heartbeat_all(Seconds now);

    /// EWMA latency update from one observed hop completion. Negative
    /// observations are rejected; failed hops never report here.
    void observe_latency(const PeerId& id, Seconds observed, double beta);

    /// Asymmetric trust feedback for one executed chain. On success every
    /// chain member gains delta_r_plus; on failure only the culprit loses
    /// delta_r_minus. Both clamp to [0, 1].
    void apply_feedback(const std::vector<PeerId>& executed_chain, bool success,
                        const std::optional<PeerId>& culprit, const LedgerParams& params);

    CachedView snapshot(Seconds as_of) const;

    const std::map<PeerId, PeerRecord>& records() const { return records_; }

  private:
    std::map<PeerId, PeerRecord> records_;
    Seconds now_ = 0.0;
};

/// Liveness indicator: true iff the peer heartbeated within t_ttl.
bool is_live(const PeerRecord& record, Seconds now, Seconds t_ttl);

/// Pure EWMA step: (1-beta)*estimate + beta*observed.
PeerRecord update_latency(const PeerRecord& record, Seconds observed, double beta);

/// Refreshes the view if at least t_gossip elapsed since the last sync,
/// otherwise returns it unchanged.
CachedView sync_view(const Registry& registry, const CachedView& view, Seconds now,
                     Seconds t_gossip);

std::string to_json(const CachedView& view);
std::string to_json(const Registry& registry);
CachedView view_from_json(const std::string& text);

}  // namespace chainroute
