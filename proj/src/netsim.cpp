#include <bicomp/netsim.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace bicomp {

namespace {
constexpr SimTime kInf = std::numeric_limits<SimTime>::max() / 4;
}

MsgPtr Message::of(HeaderPtr h)
{
    auto m = std::make_shared<Message>();
    m->kind = Kind::Header;
    m->content_hash = h->hash();
    m->bytes = kHeaderSize;
    m->header = std::move(h);
    return m;
}

MsgPtr Message::of(MicroPtr micro)
{
    auto m = std::make_shared<Message>();
    m->kind = Kind::Micro;
    m->content_hash = micro->hash();
    m->bytes = micro->serialized_size();
    m->micro = std::move(micro);
    return m;
}

MsgPtr Message::of(MacroPtr macro)
{
    auto m = std::make_shared<Message>();
    m->kind = Kind::Macro;
    m->content_hash = block_id(*macro);
    m->bytes = macro->serialized_size();
    m->macro = std::move(macro);
    return m;
}

const char* to_string(Message::Kind k)
{
    switch (k) {
    case Message::Kind::Header: return "header";
    case Message::Kind::Micro: return "microblock";
    case Message::Kind::Macro: return "macroblock";
    }
    return "unknown";
}

const char* to_string(EventKind k)
{
    switch (k) {
    case EventKind::Deliver: return "deliver";
    case EventKind::HeaderMined: return "header-mined";
    case EventKind::MicroMined: return "micro-mined";
    case EventKind::TenureEnd: return "tenure-end";
    case EventKind::Expiration: return "expiration";
    case EventKind::TxInject: return "tx-inject";
    case EventKind::AttackTimer: return "attack-timer";
    case EventKind::Stop: return "stop";
    }
    return "unknown";
}

std::uint64_t EventQueue::schedule(Event e)
{
    if (e.time < now_) {
        throw SimulationError("event scheduled in the past: t=" + std::to_string(e.time) +
                              " now=" + std::to_string(now_) + " kind=" + to_string(e.kind));
    }
    e.sequence = next_seq_++;
    const auto seq = e.sequence;
    heap_.push(std::move(e));
    return seq;
}

Event EventQueue::pop()
{
    // priority_queue::top is const; the copy is cheap (one shared_ptr).
    Event e = heap_.top();
    heap_.pop();
    now_ = e.time;
    ++processed_;
    return e;
}

void Topology::add_edge(std::uint32_t u, std::uint32_t v, SimTime latency)
{
    if (u == v) throw std::invalid_argument("self loops are not allowed");
    if (latency <= 0) throw std::invalid_argument("edge latency must be positive");
    if (u >= adj_.size() || v >= adj_.size()) throw std::out_of_range("edge endpoint outside topology");
    if (has_edge(u, v)) return;
    adj_[u].emplace_back(v, latency);
    adj_[v].emplace_back(u, latency);
}

bool Topology::has_edge(std::uint32_t u, std::uint32_t v) const
{
    for (const auto& [w, l] : adj_[u]) {
        if (w == v) return true;
    }
    return false;
}

std::size_t Topology::edge_count() const
{
    std::size_t n = 0;
    for (const auto& a : adj_) n += a.size();
    return n / 2;
}

bool Topology::connected() const
{
    if (adj_.empty()) return true;
    return hop_limited(0, static_cast<std::uint32_t>(adj_.size())).size() == adj_.size();
}

std::uint32_t Topology::diameter() const
{
    std::uint32_t d = 0;
    for (std::uint32_t s = 0; s < adj_.size(); ++s) {
        std::vector<std::uint32_t> dist(adj_.size(), std::numeric_limits<std::uint32_t>::max());
        std::vector<std::uint32_t> frontier{s};
        dist[s] = 0;
        for (std::size_t i = 0; i < frontier.size(); ++i) {
            const auto u = frontier[i];
            for (const auto& [v, l] : adj_[u]) {
                if (dist[v] != std::numeric_limits<std::uint32_t>::max()) continue;
                dist[v] = dist[u] + 1;
                d = std::max(d, dist[v]);
                frontier.push_back(v);
            }
        }
    }
    return d;
}

std::vector<Delivery> Topology::shortest_paths(std::uint32_t origin) const
{
    const std::size_t n = adj_.size();
    std::vector<SimTime> dist(n, kInf);
    std::vector<std::uint8_t> hops(n, 0);
    using Item = std::pair<SimTime, std::uint32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[origin] = 0;
    pq.emplace(0, origin);
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        for (const auto& [v, l] : adj_[u]) {
            if (d + l < dist[v]) {
                dist[v] = d + l;
                hops[v] = static_cast<std::uint8_t>(std::min<int>(hops[u] + 1, 255));
                pq.emplace(dist[v], v);
            }
        }
    }
    std::vector<Delivery> out;
    out.reserve(n);
    for (std::uint32_t v = 0; v < n; ++v) {
        if (dist[v] < kInf) out.push_back(Delivery{v, dist[v], hops[v]});
    }
    return out;
}

std::vector<Delivery> Topology::hop_limited(std::uint32_t origin, std::uint32_t hop_limit) const
{
    const std::size_t n = adj_.size();
    std::vector<SimTime> dist(n, kInf);
    std::vector<std::uint8_t> hops(n, 0);
    dist[origin] = 0;
    // Bellman-Ford restricted to hop_limit rounds; each round extends paths by one edge.
    for (std::uint32_t round = 0; round < hop_limit; ++round) {
        auto next = dist;
        auto next_hops = hops;
        bool changed = false;
        for (std::uint32_t u = 0; u < n; ++u) {
            if (dist[u] >= kInf) continue;
            for (const auto& [v, l] : adj_[u]) {
                if (dist[u] + l < next[v]) {
                    next[v] = dist[u] + l;
                    next_hops[v] = static_cast<std::uint8_t>(std::min<int>(hops[u] + 1, 255));
                    changed = true;
                }
            }
        }
        dist.swap(next);
        hops.swap(next_hops);
        if (!changed) break;
    }
    std::vector<Delivery> out;
    for (std::uint32_t v = 0; v < n; ++v) {
        if (dist[v] < kInf) out.push_back(Delivery{v, dist[v], hops[v]});
    }
    return out;
}

SimTime edge_latency(const LatencyModel& m, std::uint32_t region_u, std::uint32_t region_v,
                     const std::vector<std::vector<SimTime>>& region_pair, RngStream& rng)
{
    switch (m.kind) {
    case LatencyModel::Kind::Fixed: return m.fixed_ms;
    case LatencyModel::Kind::Uniform:
        return static_cast<SimTime>(rng.range(static_cast<std::uint64_t>(m.min_ms), static_cast<std::uint64_t>(m.max_ms)));
    case LatencyModel::Kind::Regions:
        if (region_u == region_v) return m.intra_region_ms;
        return region_pair.at(region_u).at(region_v);
    }
    return m.fixed_ms;
}

Topology Topology::random_connected(std::size_t n, double target_degree, const std::vector<std::uint32_t>& regions,
                                    const LatencyModel& latency, RngStream& rng)
{
    Topology t(n);
    if (n < 2) return t;
    std::uint32_t region_count = 1;
    for (auto r : regions) region_count = std::max(region_count, r + 1);
    std::vector<std::vector<SimTime>> pair(region_count, std::vector<SimTime>(region_count, latency.intra_region_ms));
    for (std::uint32_t a = 0; a < region_count; ++a) {
        for (std::uint32_t b = a + 1; b < region_count; ++b) {
            const auto l = static_cast<SimTime>(rng.range(static_cast<std::uint64_t>(latency.cross_region_min_ms),
                                                          static_cast<std::uint64_t>(latency.cross_region_max_ms)));
            pair[a][b] = pair[b][a] = l;
        }
    }
    auto region_of = [&](std::uint32_t v) { return v < regions.size() ? regions[v] : 0u; };
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    for (std::size_t i = 1; i < n; ++i) {
        const auto u = order[i];
        const auto v = order[rng.below(i)];
        t.add_edge(u, v, edge_latency(latency, region_of(u), region_of(v), pair, rng));
    }
    const std::size_t max_edges = n * (n - 1) / 2;
    const auto target_edges =
        std::min<std::size_t>(max_edges, static_cast<std::size_t>(std::llround(target_degree * static_cast<double>(n) / 2.0)));
    while (t.edge_count() < target_edges) {
        const auto u = static_cast<std::uint32_t>(rng.below(n));
        const auto v = static_cast<std::uint32_t>(rng.below(n));
        if (u == v || t.has_edge(u, v)) continue;
        t.add_edge(u, v, edge_latency(latency, region_of(u), region_of(v), pair, rng));
    }
    return t;
}

Topology Topology::line(const std::vector<SimTime>& latencies)
{
    Topology t(latencies.size() + 1);
    for (std::uint32_t i = 0; i < latencies.size(); ++i) t.add_edge(i, i + 1, latencies[i]);
    return t;
}

Topology Topology::complete(std::size_t n, SimTime latency)
{
    Topology t(n);
    for (std::uint32_t u = 0; u < n; ++u) {
        for (std::uint32_t v = u + 1; v < n; ++v) t.add_edge(u, v, latency);
    }
    return t;
}

std::vector<Delivery> gossip_tx(const Topology& topo, std::uint32_t origin, const GossipPolicy& policy)
{
    if (origin >= topo.size()) throw std::out_of_range("gossip origin outside topology");
    if (policy.tx_hop_limit < 0) return topo.shortest_paths(origin);
    return topo.hop_limited(origin, static_cast<std::uint32_t>(policy.tx_hop_limit));
}

SimTime transmission_delay(const BroadcastModel& model, std::size_t bytes, std::uint8_t hops, RngStream* jitter_rng)
{
    SimTime extra = 0;
    if (model.bandwidth_mbps > 0) {
        const double per_hop_ms = static_cast<double>(bytes) * 8.0 / (model.bandwidth_mbps * 1000.0);
        extra += static_cast<SimTime>(std::ceil(per_hop_ms * hops));
    }
    if (model.jitter_ms > 0 && jitter_rng != nullptr) {
        extra += static_cast<SimTime>(jitter_rng->range(0, static_cast<std::uint64_t>(model.jitter_ms)));
    }
    return extra;
}

std::vector<Delivery> broadcast(const Topology& topo, std::uint32_t origin, std::size_t bytes,
                                const BroadcastModel& model, RngStream* jitter_rng)
{
    if (origin >= topo.size()) throw std::out_of_range("broadcast origin outside topology");
    auto paths = topo.shortest_paths(origin);
    std::vector<Delivery> out;
    out.reserve(paths.size());
    for (auto d : paths) {
        if (d.node == origin) continue;
        d.delay += transmission_delay(model, bytes, d.hops, jitter_rng);
        out.push_back(d);
    }
    return out;
}

} // namespace bicomp
