#include <bicomp/node.hpp>

#include <algorithm>
#include <queue>

namespace bicomp {

double expiration_deadline(double tenure_s, double receipt_s, double header_ts_s, double delta_s)
{
    return tenure_s - (receipt_s - header_ts_s) + delta_s;
}

SimTime expiration_deadline_ms(SimTime tenure_ms, SimTime receipt, SimTime header_ts, SimTime delta_ms)
{
    return tenure_ms - (receipt - header_ts) + delta_ms;
}

const char* to_string(SelectionStrategy s)
{
    switch (s) {
    case SelectionStrategy::Random: return "random";
    case SelectionStrategy::FeePriority: return "fee-priority";
    case SelectionStrategy::Locality: return "locality";
    }
    return "unknown";
}

std::optional<SelectionStrategy> parse_selection(std::string_view s)
{
    if (s == "random") return SelectionStrategy::Random;
    if (s == "fee-priority") return SelectionStrategy::FeePriority;
    if (s == "locality") return SelectionStrategy::Locality;
    return std::nullopt;
}

void Mempool::add(TxPtr tx, SimTime arrival, std::uint8_t hops)
{
    if (bound_ == 0) return;
    while (size() >= bound_) {
        const bool live = static_cast<bool>(entries_.front().tx);
        entries_.pop_front();
        if (live) {
            ++evicted_;
        } else {
            --dead_;
        }
    }
    entries_.push_back(PoolEntry{std::move(tx), arrival, hops, 0});
}

void Mempool::remove_slot(std::size_t i)
{
    if (!entries_[i].tx) return;
    entries_[i].tx.reset();
    ++dead_;
}

void Mempool::compact()
{
    if (dead_ == 0) return;
    std::erase_if(entries_, [](const PoolEntry& e) { return !e.tx; });
    dead_ = 0;
}

std::vector<TxPtr> Mempool::pending(SimTime now, const IncludedPredicate& included) const
{
    std::vector<TxPtr> out;
    for (const auto& e : entries_) {
        if (e.tx && e.arrival <= now && !included(e.tx->id())) out.push_back(e.tx);
    }
    return out;
}

void Mempool::prune(const IncludedPredicate& included)
{
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].tx && included(entries_[i].tx->id())) remove_slot(i);
    }
    compact();
}

std::vector<TxPtr> select_transactions(Mempool& pool, std::size_t cap, SelectionStrategy strategy, SimTime now,
                                       RngStream& rng, const IncludedPredicate& included, std::uint32_t round)
{
    std::vector<TxPtr> out;
    if (cap == 0 || pool.size() == 0) return out;
    if (pool.slots() > 2 * pool.size() + 64) pool.compact();

    auto eligible = [&](std::size_t i) {
        auto& e = pool.slot(i);
        if (!e.tx || e.arrival > now || e.reserved_round == round) return false;
        if (included(e.tx->id())) {
            pool.remove_slot(i);
            return false;
        }
        return true;
    };
    auto take = [&](std::size_t i) {
        auto& e = pool.slot(i);
        e.reserved_round = round;
        out.push_back(e.tx);
    };

    if (strategy == SelectionStrategy::Random) {
        const std::size_t slots = pool.slots();
        std::size_t budget = 4 * cap + 64;
        while (out.size() < cap && budget-- > 0) {
            const auto i = static_cast<std::size_t>(rng.below(slots));
            if (eligible(i)) take(i);
        }
        if (out.size() < cap) {
            std::vector<std::size_t> rest;
            for (std::size_t i = 0; i < slots; ++i) {
                if (eligible(i)) rest.push_back(i);
            }
            const std::size_t want = std::min(cap - out.size(), rest.size());
            for (std::size_t k = 0; k < want; ++k) {
                std::swap(rest[k], rest[k + rng.below(rest.size() - k)]);
                take(rest[k]);
            }
        }
        return out;
    }

    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < pool.slots(); ++i) {
        if (eligible(i)) idx.push_back(i);
    }
    auto by_fee = [&](std::size_t a, std::size_t b) {
        const auto& x = pool.slot(a);
        const auto& y = pool.slot(b);
        if (x.tx->fee() != y.tx->fee()) return x.tx->fee() > y.tx->fee();
        if (x.arrival != y.arrival) return x.arrival < y.arrival;
        return a < b;
    };
    auto by_hops = [&](std::size_t a, std::size_t b) {
        const auto& x = pool.slot(a);
        const auto& y = pool.slot(b);
        if (x.hops != y.hops) return x.hops < y.hops;
        if (x.arrival != y.arrival) return x.arrival < y.arrival;
        return a < b;
    };
    const std::size_t want = std::min(cap, idx.size());
    if (strategy == SelectionStrategy::FeePriority) {
        std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(want), idx.end(), by_fee);
        std::sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(want), by_fee);
    } else {
        std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(want), idx.end(), by_hops);
        std::sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(want), by_hops);
    }
    for (std::size_t k = 0; k < want; ++k) take(idx[k]);
    return out;
}

std::uint64_t coverage(const std::vector<MicroPtr>& micros, const SeenPredicate& seen)
{
    std::unordered_set<TxId, TxId::Hasher> ids;
    for (const auto& m : micros) {
        for (const auto& t : m->transactions) {
            if (!seen(t->id())) ids.insert(t->id());
        }
    }
    return ids.size();
}

namespace {

//! Single-swap local search on a greedy pick: replace one chosen microblock by an unchosen one while coverage grows.
void improve_by_swaps(const std::vector<MicroPtr>& pool, const std::vector<std::vector<TxId>>& fresh,
                      const std::vector<std::size_t>& eligible, std::vector<std::size_t>& chosen, std::uint64_t tx_cap)
{
    if (chosen.empty()) return;
    std::unordered_map<TxId, std::uint32_t, TxId::Hasher> cover;
    std::uint64_t used = 0;
    std::vector<char> in(pool.size(), 0);
    for (auto i : chosen) {
        in[i] = 1;
        used += pool[i]->transactions.size();
        for (const auto& id : fresh[i]) ++cover[id];
    }
    auto count = [&](const TxId& id) {
        auto it = cover.find(id);
        return it == cover.end() ? 0u : it->second;
    };

    for (int pass = 0; pass < 8; ++pass) {
        bool improved = false;
        for (std::size_t ci = 0; ci < chosen.size(); ++ci) {
            const auto out = chosen[ci];
            std::unordered_set<TxId, TxId::Hasher> out_ids(fresh[out].begin(), fresh[out].end());
            std::uint64_t loss = 0;
            for (const auto& id : fresh[out]) loss += count(id) == 1 ? 1 : 0;
            std::int64_t best_delta = 0;
            std::size_t best = 0;
            for (auto j : eligible) {
                if (in[j]) continue;
                if (used - pool[out]->transactions.size() + pool[j]->transactions.size() > tx_cap) continue;
                std::uint64_t gain = 0;
                for (const auto& id : fresh[j]) {
                    const auto c = count(id);
                    // Covered only by the outgoing block counts as lost, so regaining it is a gain.
                    if (c == 0 || (c == 1 && out_ids.count(id) != 0)) ++gain;
                }
                const auto delta = static_cast<std::int64_t>(gain) - static_cast<std::int64_t>(loss);
                if (delta > best_delta) {
                    best_delta = delta;
                    best = j;
                }
            }
            if (best_delta <= 0) continue;
            for (const auto& id : fresh[out]) {
                if (--cover[id] == 0) cover.erase(id);
            }
            for (const auto& id : fresh[best]) ++cover[id];
            used = used - pool[out]->transactions.size() + pool[best]->transactions.size();
            in[out] = 0;
            in[best] = 1;
            chosen[ci] = best;
            improved = true;
        }
        if (!improved) break;
    }
}

} // namespace

std::vector<MicroPtr> select_microblocks(const std::vector<MicroPtr>& pool, std::uint32_t capacity,
                                         std::uint64_t tx_cap, const NodeId& leader, const SeenPredicate& seen)
{
    std::vector<std::size_t> eligible;
    std::uint64_t total_tx = 0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (pool[i]->header.miner == leader) continue;
        eligible.push_back(i);
        total_tx += pool[i]->transactions.size();
    }

    // Transactions not yet on the chain, per microblock.
    std::vector<std::vector<TxId>> fresh(pool.size());
    for (auto i : eligible) {
        for (const auto& t : pool[i]->transactions) {
            if (!seen(t->id())) fresh[i].push_back(t->id());
        }
    }

    std::unordered_set<TxId, TxId::Hasher> chosen_ids;
    auto gain = [&](std::size_t i) {
        std::uint64_t g = 0;
        for (const auto& id : fresh[i]) g += chosen_ids.count(id) == 0 ? 1 : 0;
        return g;
    };
    std::vector<std::size_t> chosen;

    if (eligible.size() <= capacity && total_tx <= tx_cap) {
        for (auto i : eligible) {
            if (gain(i) == 0) continue;
            chosen.push_back(i);
            chosen_ids.insert(fresh[i].begin(), fresh[i].end());
        }
    } else {
        struct Cand {
            std::uint64_t gain;
            std::size_t idx;
            bool operator<(const Cand& o) const
            {
                if (gain != o.gain) return gain < o.gain;
                return idx > o.idx;
            }
        };
        std::priority_queue<Cand> heap;
        for (auto i : eligible) heap.push(Cand{fresh[i].size(), i});
        std::uint64_t used = 0;
        while (!heap.empty() && chosen.size() < capacity) {
            const Cand top = heap.top();
            heap.pop();
            const auto g = gain(top.idx);
            if (g == 0) continue;
            if (g < top.gain) {
                heap.push(Cand{g, top.idx});
                continue;
            }
            const auto size = pool[top.idx]->transactions.size();
            if (used + size > tx_cap) continue;
            used += size;
            chosen.push_back(top.idx);
            chosen_ids.insert(fresh[top.idx].begin(), fresh[top.idx].end());
        }
        improve_by_swaps(pool, fresh, eligible, chosen, tx_cap);
        std::sort(chosen.begin(), chosen.end());
    }

    std::vector<MicroPtr> out;
    out.reserve(chosen.size());
    for (auto i : chosen) out.push_back(pool[i]);
    return out;
}

Macroblock seal_macroblock(const MacroblockHeader& header, std::vector<MicroPtr> micros, const SignatureScheme& signer)
{
    Macroblock mb;
    mb.header = header;
    mb.microblocks = std::move(micros);
    mb.body_root = body_root(mb.microblocks);
    mb.leader_signature = signer.sign(header.miner, signing_message(header.hash(), mb.body_root));
    return mb;
}

Macroblock assemble_macroblock(const MacroblockHeader& header, const std::vector<MicroPtr>& pool,
                               const TenureConfig& cfg, const SeenPredicate& seen, const SignatureScheme& signer)
{
    return seal_macroblock(header, select_microblocks(pool, cfg.capacity, cfg.tx_cap, header.miner, seen), signer);
}

const char* role_name(const NodeRole& r)
{
    if (std::holds_alternative<Competing>(r)) return "competing";
    if (std::holds_alternative<Leader>(r)) return "leader";
    return "micro-miner";
}

const char* to_string(Observation::Kind k)
{
    switch (k) {
    case Observation::Kind::RoleChange: return "role";
    case Observation::Kind::Adopt: return "adopt";
    case Observation::Kind::Reject: return "reject";
    case Observation::Kind::Equivocation: return "equivocation";
    case Observation::Kind::Expired: return "expired";
    case Observation::Kind::HeaderReuse: return "header-reuse";
    case Observation::Kind::LeaderAbdicated: return "leader-abdicated";
    case Observation::Kind::MacroDropped: return "macro-dropped";
    case Observation::Kind::AttackRelease: return "attack-release";
    case Observation::Kind::AttackAbandon: return "attack-abandon";
    case Observation::Kind::AttackStart: return "attack-start";
    }
    return "unknown";
}

Node::Node(NodeConfig cfg, NodeHost& host, std::uint64_t seed)
    : cfg_(cfg), host_(host), params_(host.params()),
      mining_rng_(seed, "node/" + std::to_string(cfg.index) + "/mining"),
      select_rng_(seed, "node/" + std::to_string(cfg.index) + "/select"), mempool_(host.params().mempool_bound)
{
}

void Node::start()
{
    tip_ = host_.tree().genesis();
    mark_known(tip_);
    become_competing();
}

std::optional<SimTime> Node::header_receipt(const Hash256& header_hash) const
{
    auto it = headers_.find(header_hash);
    if (it == headers_.end()) return std::nullopt;
    return it->second.receipt;
}

void Node::handle(const Event& e)
{
    if (crashed_) return;
    switch (e.kind) {
    case EventKind::Deliver:
        switch (e.msg->kind) {
        case Message::Kind::Header: on_header(e.msg->header); break;
        case Message::Kind::Micro: on_micro(e.msg->micro); break;
        case Message::Kind::Macro: on_macro(e.msg->macro); break;
        }
        break;
    case EventKind::HeaderMined:
        if (e.tag == gen_) on_header_mined();
        break;
    case EventKind::MicroMined:
        if (e.tag == gen_) on_micro_mined();
        break;
    case EventKind::TenureEnd:
        if (e.tag == gen_) on_tenure_end();
        break;
    case EventKind::Expiration:
        if (e.tag == gen_) on_expiration();
        break;
    case EventKind::AttackTimer: on_attack_timer(e.tag); break;
    default: break;
    }
}

void Node::mark_known(const BlockEntry* e)
{
    if (known_.size() <= e->index) known_.resize(e->index + 1 + known_.size() / 2, 0);
    known_[e->index] = 1;
}

void Node::record_header(const HeaderPtr& h)
{
    const auto hh = h->hash();
    if (headers_.emplace(hh, HeaderRecord{h, host_.now()}).second) {
        headers_by_parent_[h->prev_macroblock_hash].push_back(hh);
    }
}

void Node::on_header(const HeaderPtr& h)
{
    const auto hh = h->hash();
    if (headers_.count(hh) != 0) return;
    record_header(h);
    const auto& rules = params_.rules;
    const auto raw = serialize_header(*h);
    if (!check_pow(ByteView{raw.data(), raw.size()}, rules.checked(rules.macro_difficulty))) {
        host_.observe({Observation::Kind::Reject, cfg_.index, hh, 0, 0, to_string(Reject::BadPow)});
        return;
    }
    if (!timestamp_plausible(h->timestamp, host_.now(), rules, false)) {
        host_.observe({Observation::Kind::Reject, cfg_.index, hh, 0, 0, to_string(Reject::BadTimestamp)});
        return;
    }
    if (std::holds_alternative<Competing>(role_) && h->prev_macroblock_hash == tip_->header_hash) try_follow(hh);
}

bool Node::try_follow(const Hash256& header_hash)
{
    auto it = headers_.find(header_hash);
    if (it == headers_.end()) return false;
    const auto& rec = it->second;
    const auto& h = *rec.header;
    if (h.miner == cfg_.id) return false;
    if (h.prev_macroblock_hash != tip_->header_hash) return false;
    if (validate_header(h, tip_->block->header, tip_->post_root, params_.rules, host_.now()) != Reject::Ok) {
        return false;
    }
    const SimTime e = expiration_deadline_ms(params_.tenure.tenure_ms, rec.receipt, h.timestamp, params_.tenure.delta_ms);
    const SimTime deadline = rec.receipt + e;
    if (e <= 0 || deadline <= host_.now()) return false;
    ++round_tag_;
    role_ = MicroMiner{rec.header, header_hash, deadline};
    ++gen_;
    host_.observe({Observation::Kind::RoleChange, cfg_.index, header_hash, 2, deadline, "micro-miner"});
    schedule(EventKind::Expiration, deadline);
    schedule(EventKind::MicroMined,
             host_.now() + sample_mining_time(params_.rules.micro_difficulty, cfg_.power, mining_rng_));
    return true;
}

void Node::become_competing()
{
    const bool after_expiry = std::holds_alternative<MicroMiner>(role_);
    role_ = Competing{};
    ++gen_;
    auto it = headers_by_parent_.find(tip_->header_hash);
    if (it != headers_by_parent_.end()) {
        const auto candidates = it->second;
        for (const auto& hh : candidates) {
            if (try_follow(hh)) {
                if (after_expiry) host_.observe({Observation::Kind::HeaderReuse, cfg_.index, hh, 0, 0, {}});
                return;
            }
        }
    }
    host_.observe({Observation::Kind::RoleChange, cfg_.index, tip_->header_hash, 0, 0, "competing"});
    schedule(EventKind::HeaderMined,
             host_.now() + sample_mining_time(params_.rules.macro_difficulty, cfg_.power, mining_rng_));
}

void Node::become_leader(const HeaderPtr& h)
{
    record_header(h);
    const auto hh = h->hash();
    Leader l;
    l.header = h;
    l.header_hash = hh;
    l.tenure_end = host_.now() + params_.tenure.tenure_ms;
    role_ = std::move(l);
    ++gen_;
    host_.observe({Observation::Kind::RoleChange, cfg_.index, hh, 1, host_.now() + params_.tenure.tenure_ms, "leader"});
    schedule(EventKind::TenureEnd, host_.now() + params_.tenure.tenure_ms);
    host_.broadcast(cfg_.index, Message::of(h));
}

void Node::add_to_leader_pool(const MicroPtr& m)
{
    auto* l = std::get_if<Leader>(&role_);
    if (l == nullptr || m->header.round_header_hash != l->header_hash) return;
    if (m->header.miner == cfg_.id) return;
    if (!l->pool_ids.insert(m->hash()).second) return;
    const auto r = validate_microblock(*m, *l->header, params_.rules);
    if (r != Reject::Ok) {
        host_.observe({Observation::Kind::Reject, cfg_.index, m->hash(), 1, 0, to_string(r)});
        return;
    }
    l->pool.push_back(m);
}

void Node::on_micro(const MicroPtr& m) { add_to_leader_pool(m); }

const BlockEntry* Node::accept_block(const MacroPtr& mb)
{
    auto& tree = host_.tree();
    const auto id = block_id(*mb);
    if (const auto* ex = tree.find(id); ex != nullptr && knows(ex)) return nullptr;
    const BlockEntry* parent = tree.resolve_parent(mb->header);
    if (parent == nullptr || !knows(parent)) {
        orphan_blocks_[mb->header.prev_macroblock_hash].push_back(mb);
        return nullptr;
    }
    if (!timestamp_plausible(mb->header.timestamp, host_.now(), params_.rules, true)) {
        host_.observe({Observation::Kind::Reject, cfg_.index, id, 2, 0, to_string(Reject::BadTimestamp)});
        return nullptr;
    }
    const BlockEntry* e = tree.insert(mb, host_.now());
    if (e == nullptr) return nullptr;
    mark_known(e);
    if (headers_.count(e->header_hash) == 0) record_header(std::make_shared<const MacroblockHeader>(mb->header));
    if (!e->valid()) {
        host_.observe({Observation::Kind::Reject, cfg_.index, id, 2, 0, to_string(e->status)});
        return nullptr;
    }
    std::size_t bodies = 0;
    for (const auto* b : tree.bodies_for(e->header_hash)) bodies += knows(b) && b->valid() ? 1 : 0;
    if (bodies > 1) host_.observe({Observation::Kind::Equivocation, cfg_.index, e->header_hash, 0, 0, {}});
    return e;
}

void Node::consider(const BlockEntry* e)
{
    if (preferred(e->key(), tip_->key())) adopt(e);
}

void Node::adopt(const BlockEntry* e)
{
    const BlockEntry* old = tip_;
    if (const auto* l = std::get_if<Leader>(&role_); l != nullptr && e->header_hash != l->header_hash) {
        host_.observe({Observation::Kind::LeaderAbdicated, cfg_.index, l->header_hash, 0, 0, {}});
    }
    tip_ = e;
    host_.on_adopt(cfg_.index, old, e);
    become_competing();
}

void Node::process_orphans(const Hash256& header_hash)
{
    auto it = orphan_blocks_.find(header_hash);
    if (it == orphan_blocks_.end()) return;
    auto waiting = std::move(it->second);
    orphan_blocks_.erase(it);
    for (const auto& mb : waiting) on_macro(mb);
}

void Node::on_macro(const MacroPtr& mb)
{
    const BlockEntry* e = accept_block(mb);
    if (e == nullptr) return;
    consider(e);
    process_orphans(e->header_hash);
}

HeaderPtr Node::build_header(const BlockEntry* parent)
{
    MacroblockHeader h;
    h.version = 1;
    h.height = parent->height + 1;
    h.prev_macroblock_hash = parent->header_hash;
    h.state_root = parent->post_root.value;
    h.timestamp = host_.now();
    h.difficulty_bits = params_.rules.macro_difficulty.bits;
    h.miner = cfg_.id;
    const auto raw = serialize_header(h);
    const auto nonce = mine_real(Bytes(raw.begin(), raw.end()), kHeaderNonceOffset,
                                 params_.rules.checked(params_.rules.macro_difficulty), mining_rng_.next(), 1ull << 40);
    h.nonce = *nonce;
    return std::make_shared<const MacroblockHeader>(h);
}

MicroPtr Node::build_microblock(const MacroblockHeader& round)
{
    auto& tree = host_.tree();
    const BlockEntry* base = tip_;
    auto txs = select_transactions(mempool_, params_.rules.micro_tx_cap, cfg_.selection, host_.now(), select_rng_,
                                   [&](const TxId& id) { return tree.included_on(id, base); }, round_tag_);
    if (txs.empty()) return nullptr;
    auto m = std::make_shared<Microblock>();
    m->header.round_header_hash = round.hash();
    m->header.miner = cfg_.id;
    m->header.merkle_root = merkle_root(txs);
    m->header.timestamp = host_.now();
    m->header.difficulty_bits = params_.rules.micro_difficulty.bits;
    m->transactions = std::move(txs);
    const auto nonce = mine_real(m->header.serialize(), kMicroNonceOffset,
                                 params_.rules.checked(params_.rules.micro_difficulty), mining_rng_.next(), 1ull << 40);
    m->header.nonce = *nonce;
    return m;
}

MacroPtr Node::build_macroblock(const MacroblockHeader& header, const std::vector<MicroPtr>& pool)
{
    auto& tree = host_.tree();
    const BlockEntry* parent = tree.resolve_parent(header);
    auto seen = [&](const TxId& id) { return parent != nullptr && tree.included_on(id, parent); };
    return std::make_shared<const Macroblock>(
        assemble_macroblock(header, pool, params_.tenure, seen, *params_.rules.signatures));
}

void Node::on_header_mined()
{
    if (!std::holds_alternative<Competing>(role_)) return;
    become_leader(build_header(tip_));
}

void Node::on_micro_mined()
{
    auto* mm = std::get_if<MicroMiner>(&role_);
    if (mm == nullptr) return;
    if (auto m = build_microblock(*mm->header)) host_.broadcast(cfg_.index, Message::of(std::move(m)));
    schedule(EventKind::MicroMined,
             host_.now() + sample_mining_time(params_.rules.micro_difficulty, cfg_.power, mining_rng_));
}

void Node::on_tenure_end()
{
    auto* l = std::get_if<Leader>(&role_);
    if (l == nullptr) return;
    auto mb = build_macroblock(*l->header, l->pool);
    if (host_.fault_drop_macroblock(mb->header.height)) {
        crashed_ = true;
        host_.observe({Observation::Kind::MacroDropped, cfg_.index, l->header_hash,
                       static_cast<std::int64_t>(mb->header.height), 0, {}});
        return;
    }
    host_.broadcast(cfg_.index, Message::of(mb));
    const BlockEntry* e = accept_block(mb);
    if (e == nullptr) return;
    consider(e);
    process_orphans(e->header_hash);
}

void Node::on_expiration()
{
    auto* mm = std::get_if<MicroMiner>(&role_);
    if (mm == nullptr) return;
    host_.observe({Observation::Kind::Expired, cfg_.index, mm->header_hash, 0, 0, {}});
    become_competing();
}

} // namespace bicomp
