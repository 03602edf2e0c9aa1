#pragma once

#include <bicomp/pow.hpp>
#include <bicomp/types.hpp>

#include <cstdint>
#include <memory>
#include <queue>
#include <stdexcept>
#include <vector>

namespace bicomp {

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/** A network message. content_hash identifies it for duplicate suppression and tracing. */
struct Message {
    enum class Kind : std::uint8_t { Header = 0, Micro = 1, Macro = 2 };

    Kind kind = Kind::Header;
    HeaderPtr header;
    MicroPtr micro;
    MacroPtr macro;
    Hash256 content_hash;
    std::size_t bytes = 0;

    static std::shared_ptr<const Message> of(HeaderPtr h);
    static std::shared_ptr<const Message> of(MicroPtr m);
    static std::shared_ptr<const Message> of(MacroPtr m);
};

using MsgPtr = std::shared_ptr<const Message>;

const char* to_string(Message::Kind k);

enum class EventKind : std::uint8_t {
    Deliver = 0,
    HeaderMined = 1,
    MicroMined = 2,
    TenureEnd = 3,
    Expiration = 4,
    TxInject = 5,
    AttackTimer = 6,
    Stop = 7,
};

const char* to_string(EventKind k);

struct Event {
    SimTime time = 0;
    std::uint64_t sequence = 0;
    EventKind kind = EventKind::Deliver;
    std::uint32_t node = 0;
    std::uint32_t from = 0;
    //! Generation or round tag; stale timers are recognised by it.
    std::uint64_t tag = 0;
    MsgPtr msg;
};

/** Min-heap on (time, sequence). Scheduling into the past is a simulator bug and throws. */
class EventQueue {
public:
    //! Assigns the next sequence number and returns it.
    std::uint64_t schedule(Event e);
    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }
    const Event& peek() const { return heap_.top(); }
    //! Removes the earliest event and advances the clock to its time.
    Event pop();
    SimTime now() const { return now_; }
    std::uint64_t processed() const { return processed_; }

private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const
        {
            if (a.time != b.time) return a.time > b.time;
            return a.sequence > b.sequence;
        }
    };
    std::priority_queue<Event, std::vector<Event>, Later> heap_;
    SimTime now_ = 0;
    std::uint64_t next_seq_ = 0;
    std::uint64_t processed_ = 0;
};

struct LatencyModel {
    enum class Kind : std::uint8_t { Fixed, Uniform, Regions };
    Kind kind = Kind::Regions;
    SimTime fixed_ms = 50;
    SimTime min_ms = 20;
    SimTime max_ms = 250;
    SimTime intra_region_ms = 20;
    SimTime cross_region_min_ms = 80;
    SimTime cross_region_max_ms = 250;

    friend bool operator==(const LatencyModel&, const LatencyModel&) = default;
};

struct Delivery {
    std::uint32_t node = 0;
    SimTime delay = 0;
    std::uint8_t hops = 0;
};

/** Undirected peer graph with a fixed positive latency per edge. */
class Topology {
public:
    explicit Topology(std::size_t n = 0) : adj_(n) {}

    std::size_t size() const { return adj_.size(); }
    void add_edge(std::uint32_t u, std::uint32_t v, SimTime latency);
    bool has_edge(std::uint32_t u, std::uint32_t v) const;
    const std::vector<std::pair<std::uint32_t, SimTime>>& neighbors(std::uint32_t u) const { return adj_.at(u); }
    std::size_t edge_count() const;
    bool connected() const;
    //! Hop-count diameter; the graph must be connected.
    std::uint32_t diameter() const;

    //! Dijkstra from origin; delay and hop count of the fastest path to every node.
    std::vector<Delivery> shortest_paths(std::uint32_t origin) const;
    //! Fastest path using at most hop_limit edges; nodes out of reach are omitted. Origin included at delay 0.
    std::vector<Delivery> hop_limited(std::uint32_t origin, std::uint32_t hop_limit) const;

    /**
     * Random connected graph: a random spanning tree plus random extra edges
     * until the mean degree reaches target_degree.
     */
    static Topology random_connected(std::size_t n, double target_degree, const std::vector<std::uint32_t>& regions,
                                     const LatencyModel& latency, RngStream& rng);
    static Topology line(const std::vector<SimTime>& latencies);
    static Topology complete(std::size_t n, SimTime latency);

private:
    std::vector<std::vector<std::pair<std::uint32_t, SimTime>>> adj_;
};

//! Latency for one edge under the model. region_pair holds the drawn cross-region latencies.
SimTime edge_latency(const LatencyModel& m, std::uint32_t region_u, std::uint32_t region_v,
                     const std::vector<std::vector<SimTime>>& region_pair, RngStream& rng);

struct GossipPolicy {
    //! Negative means unlimited (full flood).
    int tx_hop_limit = 2;
};

/** Recipients and arrival delays of a transaction injected at origin. */
std::vector<Delivery> gossip_tx(const Topology& topo, std::uint32_t origin, const GossipPolicy& policy);

struct BroadcastModel {
    SimTime jitter_ms = 0;
    //! Zero disables the size/bandwidth transmission term.
    double bandwidth_mbps = 0;
};

//! Size and jitter terms added to a shortest-path delay of the given hop count.
SimTime transmission_delay(const BroadcastModel& model, std::size_t bytes, std::uint8_t hops, RngStream* jitter_rng);

/**
 * Flooded delivery of a block-layer message. Every node other than the origin
 * receives it once, at the shortest-path time plus transmission and jitter.
 */
std::vector<Delivery> broadcast(const Topology& topo, std::uint32_t origin, std::size_t bytes,
                                const BroadcastModel& model, RngStream* jitter_rng);

} // namespace bicomp
