#include <bicomp/simulation.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace bicomp {

namespace {

constexpr std::uint64_t kNoNonce = std::numeric_limits<std::uint64_t>::max();
constexpr std::uint8_t kWorkloadTag = 0x57;

SimTime seconds_to_ms(double s) { return static_cast<SimTime>(std::llround(s * 1000.0)); }

std::shared_ptr<const LedgerState> build_genesis_state(const Scenario& s, const std::vector<ResolvedNode>& nodes,
                                                       std::vector<AccountId>& workload_accounts)
{
    std::vector<std::pair<AccountId, Account>> alloc;
    const std::uint64_t k = s.tx_rate > 0 ? s.accounts : 0;
    workload_accounts.reserve(k);
    alloc.reserve(k + s.genesis.size() + nodes.size());
    for (std::uint64_t i = 0; i < k; ++i) {
        workload_accounts.push_back(workload_account(i));
        alloc.emplace_back(workload_accounts.back(), Account{s.initial_balance, 0});
    }
    for (const auto& g : s.genesis) alloc.emplace_back(g.account, Account{g.amount, 0});
    if (s.attack == AttackStrategy::DoubleSpend) {
        for (const auto& n : nodes) {
            if (!n.honest) alloc.emplace_back(attacker_wallet(node_identity(n.id)), Account{s.initial_balance, 0});
        }
    }
    std::sort(alloc.begin(), alloc.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::pair<AccountId, Account>> merged;
    merged.reserve(alloc.size());
    for (auto& a : alloc) {
        if (!merged.empty() && merged.back().first == a.first) {
            merged.back().second.balance += a.second.balance;
        } else {
            merged.push_back(a);
        }
    }
    LedgerState::Map m(boost::container::ordered_unique_range, merged.begin(), merged.end());
    return std::make_shared<const LedgerState>(std::move(m));
}

Topology build_topology(const Scenario& s, const std::vector<ResolvedNode>& nodes)
{
    RngStream rng(s.seed, "topology");
    switch (s.topology) {
    case TopologyKind::Complete: return Topology::complete(s.nodes, s.latency.fixed_ms);
    case TopologyKind::Line: return Topology::line(std::vector<SimTime>(s.nodes - 1, s.latency.fixed_ms));
    case TopologyKind::Random: break;
    }
    std::vector<std::uint32_t> regions;
    regions.reserve(nodes.size());
    for (const auto& n : nodes) regions.push_back(n.region);
    return Topology::random_connected(s.nodes, s.degree, regions, s.latency, rng);
}

} // namespace

Simulation::Simulation(const Scenario& s, std::ostream* trace_out)
    : scenario_(s), params_(s.protocol()), resolved_(s.resolved_nodes()), workload_rng_(s.seed, "workload"),
      jitter_rng_(s.seed, "jitter"), trace_out_(s.trace == TraceLevel::None ? nullptr : trace_out)
{
    if (auto issues = validate(s); !issues.empty()) throw ScenarioError(std::move(issues));
    auto genesis_state = build_genesis_state(s, resolved_, accounts_);
    genesis_supply_ = genesis_state->total_supply();
    auto genesis = std::make_shared<const Macroblock>(make_genesis(s.n_macro));
    tree_ = std::make_unique<BlockTree>(std::move(genesis_state), std::move(genesis), params_.rules, params_.incentives);

    topology_ = build_topology(s, resolved_);
    broadcast_model_ = BroadcastModel{s.jitter_ms, s.bandwidth_mbps};
    gossip_.tx_hop_limit = static_cast<int>(s.tx_hop_limit);
    broadcast_cache_.resize(s.nodes);
    gossip_cache_.resize(s.nodes);

    if (s.attack != AttackStrategy::None) {
        coalition_ = std::make_unique<Coalition>();
        coalition_->strategy = s.attack;
        coalition_->victim = s.victim;
        coalition_->confirmations = s.confirmations;
        coalition_->give_up_margin = s.give_up_margin;
        coalition_->max_attempts = s.max_attempts;
    }
    nodes_.reserve(s.nodes);
    for (const auto& r : resolved_) {
        NodeConfig cfg;
        cfg.index = r.id;
        cfg.id = node_identity(r.id);
        cfg.power = HashPower{r.hash_power};
        cfg.selection = r.selection;
        cfg.honest = r.honest;
        cfg.region = r.region;
        if (!r.honest && coalition_) {
            nodes_.push_back(std::make_unique<AttackerNode>(cfg, *this, s.seed, *coalition_));
        } else {
            nodes_.push_back(std::make_unique<Node>(cfg, *this, s.seed));
        }
    }
    last_sent_nonce_.assign(accounts_.size(), kNoNonce);
    last_sent_at_.assign(accounts_.size(), 0);
}

Simulation::~Simulation() = default;

const std::vector<Delivery>& Simulation::broadcast_paths(std::uint32_t origin)
{
    auto& c = broadcast_cache_[origin];
    if (c.empty() && topology_.size() > 1) c = bicomp::broadcast(topology_, origin, 0, BroadcastModel{}, nullptr);
    return c;
}

const std::vector<Delivery>& Simulation::gossip_paths(std::uint32_t origin)
{
    auto& c = gossip_cache_[origin];
    if (c.empty()) c = gossip_tx(topology_, origin, gossip_);
    return c;
}

void Simulation::broadcast(std::uint32_t from, MsgPtr msg)
{
    const auto now = queue_.now();
    for (const auto& d : broadcast_paths(from)) {
        Event e;
        e.time = now + d.delay + transmission_delay(broadcast_model_, msg->bytes, d.hops, &jitter_rng_);
        e.kind = EventKind::Deliver;
        e.node = d.node;
        e.from = from;
        e.msg = msg;
        queue_.schedule(std::move(e));
    }
}

void Simulation::schedule(std::uint32_t node, EventKind kind, SimTime at, std::uint64_t tag)
{
    Event e;
    e.time = at;
    e.kind = kind;
    e.node = node;
    e.from = node;
    e.tag = tag;
    queue_.schedule(std::move(e));
}

bool Simulation::fault_drop_macroblock(std::uint64_t height)
{
    const auto& drops = scenario_.drop_macroblock_heights;
    if (std::find(drops.begin(), drops.end(), height) == drops.end()) return false;
    if (std::find(dropped_heights_.begin(), dropped_heights_.end(), height) != dropped_heights_.end()) return false;
    dropped_heights_.push_back(height);
    return true;
}

void Simulation::trace_json(const std::string& line)
{
    if (trace_out_ != nullptr) *trace_out_ << line << '\n';
}

void Simulation::observe(const Observation& o)
{
    std::uint8_t rec[1 + 1 + 4 + 32 + 8 + 8];
    rec[0] = 'O';
    rec[1] = static_cast<std::uint8_t>(o.kind);
    store_le<std::uint32_t>(rec + 2, o.node);
    std::memcpy(rec + 6, o.hash.bytes.data(), 32);
    store_le<std::uint64_t>(rec + 38, static_cast<std::uint64_t>(o.a));
    store_le<std::uint64_t>(rec + 46, static_cast<std::uint64_t>(o.b));
    trace_.update(ByteView{rec, sizeof rec});
    if (!o.detail.empty()) {
        trace_.update(ByteView{reinterpret_cast<const std::uint8_t*>(o.detail.data()), o.detail.size()});
    }

    if (o.kind == Observation::Kind::Expired && resolved_[o.node].honest) ++expirations_;
    if (keep_observations_) observations_.push_back(o);
    if (trace_out_ != nullptr) {
        nlohmann::json j{{"t", queue_.now()}, {"type", "obs"},   {"kind", to_string(o.kind)}, {"node", o.node},
                         {"hash", o.hash.hex()}, {"a", o.a}, {"b", o.b}};
        if (!o.detail.empty()) j["detail"] = o.detail;
        trace_json(j.dump());
    }
}

void Simulation::on_adopt(std::uint32_t node, const BlockEntry* old_tip, const BlockEntry* new_tip)
{
    std::uint64_t depth = 0;
    if (!BlockTree::is_ancestor(old_tip, new_tip)) {
        std::uint64_t h = std::min(old_tip->height, new_tip->height);
        while (old_tip->path[h] != new_tip->path[h]) --h;
        depth = old_tip->height - h;
    }
    observe({Observation::Kind::Adopt, node, new_tip->id, static_cast<std::int64_t>(new_tip->height),
             static_cast<std::int64_t>(depth), {}});
    if (!resolved_[node].honest) return;
    max_reorg_ = std::max(max_reorg_, depth);
    if (coalition_ && node == coalition_->victim) coalition_->victim_adopted(new_tip, queue_.now());
    if (scenario_.stop_height != 0 && new_tip->height >= scenario_.stop_height) stopped_ = true;
}

void Simulation::trace_event(const Event& e)
{
    std::uint8_t rec[8 + 8 + 1 + 4 + 4 + 8 + 32];
    store_le<std::uint64_t>(rec, static_cast<std::uint64_t>(e.time));
    store_le<std::uint64_t>(rec + 8, e.sequence);
    rec[16] = static_cast<std::uint8_t>(e.kind);
    store_le<std::uint32_t>(rec + 17, e.node);
    store_le<std::uint32_t>(rec + 21, e.from);
    store_le<std::uint64_t>(rec + 25, e.tag);
    if (e.msg) {
        std::memcpy(rec + 33, e.msg->content_hash.bytes.data(), 32);
    } else {
        std::memset(rec + 33, 0, 32);
    }
    trace_.update(ByteView{rec, sizeof rec});

    if (trace_out_ == nullptr) return;
    const bool full = scenario_.trace == TraceLevel::Full;
    if (!full && (e.kind == EventKind::TxInject || (e.msg && e.msg->kind == Message::Kind::Micro))) return;
    std::ostringstream line;
    line << "{\"t\":" << e.time << ",\"seq\":" << e.sequence << ",\"ev\":\"" << to_string(e.kind)
         << "\",\"node\":" << e.node << ",\"from\":" << e.from << ",\"tag\":" << e.tag;
    if (e.msg) line << ",\"msg\":\"" << to_string(e.msg->kind) << "\",\"hash\":\"" << e.msg->content_hash.hex() << '"';
    line << '}';
    trace_json(line.str());
}

void Simulation::inject_transaction()
{
    const SimTime now = queue_.now();
    const auto origin = static_cast<std::uint32_t>(workload_rng_.below(nodes_.size()));
    const BlockEntry* tip = nodes_[origin]->tip();
    if (tip != state_tip_) {
        state_cache_ = tree_->state_after(tip);
        state_tip_ = tip;
    }
    const std::uint64_t k = accounts_.size();
    const SimTime resend = seconds_to_ms(scenario_.resend_after_s);
    std::uint64_t a = 0;
    std::uint64_t nonce = 0;
    // Skip senders whose previous payment is still unconfirmed on the origin's chain.
    for (int tries = 0; tries < 64; ++tries) {
        a = next_account_++ % k;
        nonce = state_cache_->get(accounts_[a]).next_nonce;
        const bool outstanding =
            last_sent_nonce_[a] != kNoNonce && last_sent_nonce_[a] >= nonce && now - last_sent_at_[a] < resend;
        if (!outstanding) break;
    }
    const auto& recipient = accounts_[workload_rng_.below(k)];
    const auto amount = workload_rng_.range(scenario_.amount_min, scenario_.amount_max);
    const auto fee = workload_rng_.range(scenario_.fee_min, scenario_.fee_max);
    const std::uint64_t serial = inject_times_.size();
    std::array<std::uint8_t, 9> payload{kWorkloadTag};
    store_le<std::uint64_t>(payload.data() + 1, serial);
    auto tx = std::make_shared<const Transaction>(accounts_[a], recipient, amount, fee, nonce,
                                                  ByteView{payload.data(), payload.size()});
    trace_.update(tx->id().value.view());
    inject_times_.push_back(now);
    last_sent_nonce_[a] = nonce;
    last_sent_at_[a] = now;
    for (const auto& d : gossip_paths(origin)) nodes_[d.node]->mempool().add(tx, now + d.delay, d.hops);

    inject_clock_ms_ += workload_rng_.exponential(1000.0 / scenario_.tx_rate);
    schedule(origin, EventKind::TxInject, std::max(now, static_cast<SimTime>(inject_clock_ms_)), serial);
}

bool Simulation::step()
{
    if (!started_) {
        started_ = true;
        nlohmann::json meta{{"type", "meta"}, {"format", 1}, {"seed", scenario_.seed},
                            {"scenario", scenario_to_text(scenario_)}};
        trace_json(meta.dump());
        if (scenario_.stop_time_s > 0) {
            schedule(0, EventKind::Stop, seconds_to_ms(scenario_.stop_time_s), 0);
        }
        for (auto& n : nodes_) n->start();
        if (scenario_.tx_rate > 0 && !accounts_.empty()) {
            inject_clock_ms_ = workload_rng_.exponential(1000.0 / scenario_.tx_rate);
            schedule(0, EventKind::TxInject, static_cast<SimTime>(inject_clock_ms_), 0);
        }
    }
    if (stopped_) return false;
    if (queue_.empty()) {
        std::ostringstream diag;
        diag << "event queue drained before the stop condition at t=" << queue_.now() << " ms after "
             << queue_.processed() << " events;";
        for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
            const auto snap = snapshot(i);
            diag << " node" << i << "{" << snap.role << ",h=" << snap.tip->height << (snap.crashed ? ",crashed" : "")
                 << "}";
        }
        throw SimulationError(diag.str());
    }
    Event e = queue_.pop();
    trace_event(e);
    switch (e.kind) {
    case EventKind::Stop: stopped_ = true; break;
    case EventKind::TxInject: inject_transaction(); break;
    default: nodes_[e.node]->handle(e); break;
    }
    if (scenario_.stop_events != 0 && queue_.processed() >= scenario_.stop_events) stopped_ = true;
    return !stopped_;
}

bool Simulation::run_until(SimTime t)
{
    if (!started_ && !step()) return false;
    while (!stopped_ && !queue_.empty() && queue_.peek().time <= t) step();
    return !stopped_;
}

RunResult Simulation::run()
{
    while (step()) {
    }
    return collect();
}

NodeSnapshot Simulation::snapshot(std::uint32_t i) const
{
    const auto& n = *nodes_.at(i);
    return NodeSnapshot{i, resolved_[i].honest, n.crashed(), n.tip(), role_name(n.role())};
}

const BlockEntry* Simulation::chosen_tip() const
{
    const BlockEntry* best = nullptr;
    for (int pass = 0; pass < 2 && best == nullptr; ++pass) {
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (pass == 0 && (!resolved_[i].honest || nodes_[i]->crashed())) continue;
            const auto* t = nodes_[i]->tip();
            if (t != nullptr && (best == nullptr || preferred(t->key(), best->key()))) best = t;
        }
    }
    return best != nullptr ? best : tree_->genesis();
}

RunResult Simulation::collect()
{
    RunResult r;
    auto& m = r.metrics;
    const BlockEntry* tip = chosen_tip();
    const auto& genesis_state = tree_->genesis_state();
    m.elapsed_s = static_cast<double>(queue_.now()) / 1000.0;
    m.height = tip->height;
    m.injected_txs = inject_times_.size();
    m.events = queue_.processed();

    std::uint64_t micros = 0;
    std::uint64_t bytes = 0;
    std::uint64_t tx_bytes = 0;
    double lat = 0;
    double queue_wait = 0;
    double inclusion = 0;
    std::uint64_t lat_n = 0;
    for (std::uint64_t h = 1; h <= tip->height; ++h) {
        const BlockEntry* e = tip->path[h];
        const auto& mb = *e->block;
        RoundRow row;
        row.height = h;
        row.micros = mb.microblocks.size();
        row.valid = e->report.non_overlapping_valid_count;
        row.bytes = e->bytes;
        row.timestamp = mb.header.timestamp;
        row.first_seen = e->first_seen;
        for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
            if (nodes_[i]->id() == mb.header.miner) {
                row.leader = i;
                row.honest = resolved_[i].honest;
                break;
            }
        }
        std::size_t k = 0;
        for (const auto& micro : mb.microblocks) {
            for (const auto& t : micro->transactions) {
                ++row.txs;
                tx_bytes += t->serialized_size();
                const auto p = t->payload();
                if (e->report.verdicts[k] == Verdict::Valid && p.size() == 9 && p[0] == kWorkloadTag) {
                    const auto serial = load_le<std::uint64_t>(p.data() + 1);
                    if (serial < inject_times_.size()) {
                        const SimTime inj = inject_times_[serial];
                        lat += static_cast<double>(e->first_seen - inj);
                        queue_wait += static_cast<double>(micro->header.timestamp - inj);
                        inclusion += static_cast<double>(e->first_seen - micro->header.timestamp);
                        ++lat_n;
                    }
                }
                ++k;
            }
        }
        micros += row.micros;
        bytes += row.bytes;
        m.packaged_txs += row.txs;
        m.valid_txs += row.valid;
        r.rounds.push_back(row);
    }
    if (m.elapsed_s > 0) {
        m.total_tps = static_cast<double>(m.packaged_txs) / m.elapsed_s;
        m.nonoverlap_tps = static_cast<double>(m.valid_txs) / m.elapsed_s;
    }
    if (tip->height > 0) {
        m.mean_block_bytes = static_cast<double>(bytes) / static_cast<double>(tip->height);
        m.mean_micros_per_block = static_cast<double>(micros) / static_cast<double>(tip->height);
    }
    if (lat_n > 0) {
        m.mean_latency_s = lat / static_cast<double>(lat_n) / 1000.0;
        m.mean_queue_s = queue_wait / static_cast<double>(lat_n) / 1000.0;
        m.mean_inclusion_s = inclusion / static_cast<double>(lat_n) / 1000.0;
    }
    {
        const double mean_tx = m.packaged_txs > 0 ? static_cast<double>(tx_bytes) / static_cast<double>(m.packaged_txs)
                                                  : 98.0;
        const auto c = static_cast<double>(scenario_.capacity);
        const auto txs = static_cast<double>(
            std::min<std::uint64_t>(scenario_.effective_macro_tx_cap(),
                                    static_cast<std::uint64_t>(scenario_.capacity) * scenario_.micro_tx_cap));
        const double sig = static_cast<double>(tip->block->leader_signature.size() > 0 ? tip->block->leader_signature.size()
                                                                                       : 32);
        m.expected_block_bytes = kHeaderSize + 32 + 2 + sig + 4 + c * (kMicroHeaderSize + 4) + txs * mean_tx;
    }

    auto honest_known = [&](const BlockEntry* e) {
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (resolved_[i].honest && nodes_[i]->knows(e)) return true;
        }
        return false;
    };
    std::unordered_map<Hash256, int, Hash256Hasher> bodies;
    for (const auto& e : tree_->entries()) {
        if (!e->valid() || e->height == 0) continue;
        if (++bodies[e->header_hash] == 2) ++m.equivocations;
        if (!BlockTree::is_ancestor(e.get(), tip) && honest_known(e.get())) ++m.forks;
    }
    m.max_reorg_depth = max_reorg_;
    m.expirations = expirations_;

    const auto realized = tip->height > 0 ? tree_->state_after(tip->parent) : tree_->state_after(tree_->genesis());
    for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
        const auto id = nodes_[i]->id();
        const auto now_bal = realized->get(id).balance;
        const auto start_bal = genesis_state.get(id).balance;
        const std::uint64_t reward = now_bal > start_bal ? now_bal - start_bal : 0;
        r.revenue.push_back(RevenueRow{i, resolved_[i].honest, reward});
        (resolved_[i].honest ? m.honest_reward : m.attacker_reward) += reward;
    }
    const auto total_reward = m.honest_reward + m.attacker_reward;
    if (total_reward > 0) {
        m.attacker_share = static_cast<double>(m.attacker_reward) / static_cast<double>(total_reward);
        m.honest_share = static_cast<double>(m.honest_reward) / static_cast<double>(total_reward);
    }
    m.conservation_ok = tree_->state_after(tip)->total_supply() ==
                        genesis_supply_ + static_cast<unsigned __int128>(params_.incentives.block_reward) * tip->height;

    if (coalition_) {
        coalition_->finalize(tip, *tree_, honest_known);
        m.ds_attempts = coalition_->completed_attempts();
        m.ds_successes = coalition_->successful_attempts();
        m.attack_releases = coalition_->stats.releases;
        m.attack_abandons = coalition_->stats.abandons;
        m.detain_forks = coalition_->stats.detain_forks;
        m.detain_private_lower = coalition_->stats.detain_private_lower;
        m.max_private_lead = coalition_->stats.max_private_lead;
        r.attempts = coalition_->attempts;
    }

    r.chain = tree_->chain_to(tip);
    r.tip_id = tip->id;
    r.trace_hash = trace_.digest();
    nlohmann::json end{{"type", "end"},          {"events", m.events},          {"trace_hash", r.trace_hash.hex()},
                       {"tip", tip->id.hex()},   {"height", tip->height},       {"cumulative_valid", tip->cumulative_valid},
                       {"time_ms", queue_.now()}};
    trace_json(end.dump());
    return r;
}

std::shared_ptr<const LedgerState> genesis_state(const Scenario& s)
{
    std::vector<AccountId> accounts;
    return build_genesis_state(s, s.resolved_nodes(), accounts);
}

RunResult run_scenario(const Scenario& s, std::ostream* trace_out)
{
    Simulation sim(s, trace_out);
    return sim.run();
}

} // namespace bicomp
