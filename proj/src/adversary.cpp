#include <bicomp/adversary.hpp>

#include <algorithm>

namespace bicomp {

bool Coalition::is_member(const NodeId& id) const
{
    return std::any_of(members.begin(), members.end(), [&](const AttackerNode* m) { return m->id() == id; });
}

void Coalition::victim_adopted(const BlockEntry* tip, SimTime now)
{
    if (!active || members.empty()) return;
    auto& a = attempts[*active];
    if (a.m1 == nullptr || a.accepted) return;
    if (!BlockTree::is_ancestor(a.m1, tip) || tip->height - a.m1->height < confirmations) return;
    a.accepted = true;
    a.accepted_at = now;
    members.front()->ds_check();
}

void Coalition::finalize(const BlockEntry* chosen_tip, const BlockTree& tree,
                         const std::function<bool(const BlockEntry*)>& honest_known)
{
    for (auto& a : attempts) {
        a.success = a.m1 != nullptr && a.accepted && BlockTree::is_ancestor(a.m2, chosen_tip);
    }
    if (strategy != AttackStrategy::HeaderDetain) return;
    for (const auto* d : detain_released) {
        std::optional<std::uint64_t> best;
        for (const auto& e : tree.entries()) {
            if (!e->valid() || e->height != d->height || e.get() == d) continue;
            if (is_member(e->block->header.miner) || !honest_known(e.get())) continue;
            best = std::max(best.value_or(0), e->cumulative_valid);
        }
        if (!best) continue;
        ++stats.detain_forks;
        if (d->cumulative_valid < *best) ++stats.detain_private_lower;
    }
}

std::uint64_t Coalition::completed_attempts() const
{
    return static_cast<std::uint64_t>(
        std::count_if(attempts.begin(), attempts.end(), [](const auto& a) { return a.m1 != nullptr; }));
}

std::uint64_t Coalition::successful_attempts() const
{
    return static_cast<std::uint64_t>(
        std::count_if(attempts.begin(), attempts.end(), [](const auto& a) { return a.success; }));
}

AttackerNode::AttackerNode(NodeConfig cfg, NodeHost& host, std::uint64_t seed, Coalition& co)
    : Node(cfg, host, seed), co_(co)
{
    co_.members.push_back(this);
}

void AttackerNode::share(const BlockEntry* e)
{
    for (auto* m : co_.members) {
        m->mark_known(e);
        if (preferred(e->key(), m->tip_->key())) m->adopt(e);
    }
}

void AttackerNode::on_header_mined()
{
    if (!std::holds_alternative<Competing>(role_)) return;
    switch (co_.strategy) {
    case AttackStrategy::SelfishWithhold: selfish_header(); return;
    case AttackStrategy::HeaderDetain: detain_header(); return;
    case AttackStrategy::DoubleSpend:
        if (co_.active && co_.attempts[*co_.active].m1 != nullptr) {
            ds_private_header();
        } else if (!co_.active && co_.members.size() >= 2 &&
                   (co_.max_attempts == 0 || co_.attempts.size() < co_.max_attempts)) {
            ds_start();
        } else {
            Node::on_header_mined();
        }
        return;
    case AttackStrategy::None: break;
    }
    Node::on_header_mined();
}

// Selfish withholding: the body is built as soon as the header is found and
// kept private until the tenure would have ended.
void AttackerNode::selfish_header()
{
    auto h = build_header(tip_);
    record_header(h);
    if (co_.is_private(tip_)) {
        co_.held_headers[tip_].push_back(h);
    } else {
        host_.broadcast(cfg_.index, Message::of(h));
    }
    const BlockEntry* e = accept_block(build_macroblock(*h, {}));
    if (e == nullptr) return;
    co_.private_blocks.insert(e);
    host_.observe({Observation::Kind::AttackStart, cfg_.index, e->header_hash, static_cast<std::int64_t>(e->height), 0,
                   "selfish-withhold"});
    host_.schedule(cfg_.index, EventKind::AttackTimer, h->timestamp + params_.tenure.tenure_ms, e->index);
    share(e);
    if (tip_ != e) adopt(e);
}

void AttackerNode::on_attack_timer(std::uint64_t tag)
{
    if (co_.strategy != AttackStrategy::SelfishWithhold) return;
    const BlockEntry* e = host_.tree().entries().at(tag).get();
    if (!co_.is_private(e)) return;
    if (BlockTree::is_ancestor(e, tip_)) {
        selfish_release(e);
        return;
    }
    co_.private_blocks.erase(e);
    co_.held_headers.erase(e);
    ++co_.stats.abandons;
    host_.observe({Observation::Kind::AttackAbandon, cfg_.index, e->header_hash, static_cast<std::int64_t>(e->height), 0,
                   "selfish-withhold"});
}

void AttackerNode::selfish_release(const BlockEntry* e)
{
    co_.private_blocks.erase(e);
    ++co_.stats.releases;
    host_.observe({Observation::Kind::AttackRelease, cfg_.index, e->header_hash, static_cast<std::int64_t>(e->height), 0,
                   "selfish-withhold"});
    host_.broadcast(cfg_.index, Message::of(e->block));
    auto it = co_.held_headers.find(e);
    if (it == co_.held_headers.end()) return;
    for (const auto& h : it->second) host_.broadcast(cfg_.index, Message::of(h));
    co_.held_headers.erase(it);
}

// Header detain: the header stays inside the coalition for the whole tenure.
void AttackerNode::detain_header()
{
    auto h = build_header(tip_);
    record_header(h);
    const auto hh = h->hash();
    Leader l;
    l.header = h;
    l.header_hash = hh;
    l.tenure_end = host_.now() + params_.tenure.tenure_ms;
    role_ = std::move(l);
    ++gen_;
    detaining_ = true;
    co_.detained[hh] = this;
    host_.observe({Observation::Kind::AttackStart, cfg_.index, hh, static_cast<std::int64_t>(h->height), 0, "header-detain"});
    schedule(EventKind::TenureEnd, host_.now() + params_.tenure.tenure_ms);
    for (auto* m : co_.members) {
        if (m == this) continue;
        m->record_header(h);
        if (std::holds_alternative<Competing>(m->role_) && m->tip_ == tip_) m->try_follow(hh);
    }
}

void AttackerNode::on_micro_mined()
{
    auto* mm = std::get_if<MicroMiner>(&role_);
    if (mm == nullptr) return;
    auto it = co_.detained.find(mm->header_hash);
    if (it == co_.detained.end()) {
        Node::on_micro_mined();
        return;
    }
    if (auto m = build_microblock(*mm->header)) it->second->add_to_leader_pool(m);
    schedule(EventKind::MicroMined,
             host_.now() + sample_mining_time(params_.rules.micro_difficulty, cfg_.power, mining_rng_));
}

void AttackerNode::detain_release(const MacroPtr& mb)
{
    auto* l = std::get_if<Leader>(&role_);
    detaining_ = false;
    co_.detained.erase(l->header_hash);
    ++co_.stats.releases;
    host_.observe({Observation::Kind::AttackRelease, cfg_.index, l->header_hash,
                   static_cast<std::int64_t>(mb->header.height), 0, "header-detain"});
    host_.broadcast(cfg_.index, Message::of(l->header));
    host_.broadcast(cfg_.index, Message::of(mb));
    const BlockEntry* e = accept_block(mb);
    if (e == nullptr) return;
    co_.detain_released.push_back(e);
    consider(e);
    process_orphans(e->header_hash);
}

void AttackerNode::on_tenure_end()
{
    auto* l = std::get_if<Leader>(&role_);
    if (l == nullptr) return;
    if (detaining_) {
        detain_release(build_macroblock(*l->header, l->pool));
        return;
    }
    if (co_.strategy == AttackStrategy::DoubleSpend && co_.active && co_.attempts[*co_.active].leader == cfg_.index &&
        co_.attempts[*co_.active].m1 == nullptr) {
        ds_tenure_end();
        return;
    }
    Node::on_tenure_end();
}

void AttackerNode::consider(const BlockEntry* e)
{
    if (detaining_) {
        auto* l = std::get_if<Leader>(&role_);
        if (l != nullptr && e->height == l->header->height && preferred(e->key(), tip_->key())) {
            auto& tree = host_.tree();
            auto mb = build_macroblock(*l->header, l->pool);
            const auto state = tree.state_after(tip_);
            const BlockEntry* parent = tip_;
            const auto rep = resolve_validity(*mb, *state, [&](const TxId& id) { return tree.included_on(id, parent); });
            const ForkChoiceKey ours{tip_->height + 2, tip_->cumulative_valid + rep.non_overlapping_valid_count,
                                     l->header_hash, mb->body_root};
            ++co_.stats.detain_forks;
            if (ours.total_non_overlapping_valid < e->cumulative_valid) ++co_.stats.detain_private_lower;
            if (preferred(ours, e->key())) {
                detain_release(mb);
                return;
            }
            detaining_ = false;
            co_.detained.erase(l->header_hash);
            ++co_.stats.abandons;
            host_.observe({Observation::Kind::AttackAbandon, cfg_.index, l->header_hash,
                           static_cast<std::int64_t>(l->header->height), 0, "header-detain"});
        }
        Node::consider(e);
        return;
    }

    if (co_.strategy == AttackStrategy::DoubleSpend && co_.active) {
        auto& a = co_.attempts[*co_.active];
        if (a.m1 != nullptr) {
            if (!co_.is_private(e) && (co_.public_best == nullptr || preferred(e->key(), co_.public_best->key()))) {
                co_.public_best = e;
                ds_check();
            }
            return;
        }
        if (a.leader == cfg_.index) {
            Node::consider(e);
            if (!std::holds_alternative<Leader>(role_)) {
                co_.attempts.pop_back();
                co_.active.reset();
            }
            return;
        }
    }
    Node::consider(e);
}

MicroPtr AttackerNode::make_poison_micro(AttackerNode& helper, const Hash256& round_hash, std::uint64_t serial)
{
    auto& tree = host_.tree();
    const BlockEntry* base = tip_;
    const auto wallet = attacker_wallet(helper.id());
    const auto acct = tree.state_after(base)->get(wallet);
    if (acct.balance < 2) return nullptr;
    std::array<std::uint8_t, 9> payload{'P'};
    store_le<std::uint64_t>(payload.data() + 1, serial);
    auto poison = std::make_shared<const Transaction>(wallet, node_identity(co_.victim),
                                                      std::min<std::uint64_t>(1000000, acct.balance - 1), 1,
                                                      acct.next_nonce, ByteView{payload.data(), payload.size()});
    std::vector<TxPtr> txs{poison};
    auto rest = select_transactions(helper.mempool_, params_.rules.micro_tx_cap - 1, helper.cfg_.selection, host_.now(),
                                    helper.select_rng_, [&](const TxId& id) { return tree.included_on(id, base); },
                                    0xFFFFFFFFu);
    txs.insert(txs.end(), rest.begin(), rest.end());

    auto m = std::make_shared<Microblock>();
    m->header.round_header_hash = round_hash;
    m->header.miner = helper.id();
    m->header.merkle_root = merkle_root(txs);
    m->header.timestamp = host_.now();
    m->header.difficulty_bits = params_.rules.micro_difficulty.bits;
    m->transactions = std::move(txs);
    m->header.nonce = *mine_real(m->header.serialize(), kMicroNonceOffset,
                                 params_.rules.checked(params_.rules.micro_difficulty), mining_rng_.next(), 1ull << 40);
    return m;
}

// Equivocating double spend. The leader keeps a poison microblock from a
// coalition helper outside its pool, then signs two bodies at tenure end.
void AttackerNode::ds_start()
{
    AttackerNode* helper = nullptr;
    for (auto* m : co_.members) {
        if (m != this) {
            helper = m;
            break;
        }
    }
    auto h = build_header(tip_);
    auto poison = make_poison_micro(*helper, h->hash(), co_.attempts.size());
    if (!poison) {
        become_leader(h);
        return;
    }
    DoubleSpendAttempt a;
    a.leader = cfg_.index;
    a.started = host_.now();
    a.header_hash = h->hash();
    a.poison = poison->transactions.front()->id();
    a.poison_micro = std::move(poison);
    co_.attempts.push_back(std::move(a));
    co_.active = co_.attempts.size() - 1;
    host_.observe({Observation::Kind::AttackStart, cfg_.index, h->hash(), static_cast<std::int64_t>(h->height),
                   static_cast<std::int64_t>(co_.attempts.size() - 1), "equivocate-double-spend"});
    become_leader(h);
}

void AttackerNode::ds_tenure_end()
{
    auto* l = std::get_if<Leader>(&role_);
    auto& a = co_.attempts[*co_.active];
    const auto& signer = *params_.rules.signatures;

    std::vector<MicroPtr> m1_micros{a.poison_micro};
    std::uint64_t txs = a.poison_micro->transactions.size();
    for (const auto& m : l->pool) {
        if (m1_micros.size() >= params_.tenure.capacity) break;
        if (!co_.is_member(m->header.miner) || m->header.miner == cfg_.id) continue;
        if (txs + m->transactions.size() > params_.tenure.tx_cap) continue;
        txs += m->transactions.size();
        m1_micros.push_back(m);
    }
    auto m1 = std::make_shared<const Macroblock>(seal_macroblock(*l->header, std::move(m1_micros), signer));
    auto m2 = build_macroblock(*l->header, l->pool);

    host_.broadcast(cfg_.index, Message::of(m1));
    const BlockEntry* e1 = accept_block(m1);
    const BlockEntry* e2 = accept_block(m2);
    if (e1 == nullptr || e2 == nullptr || !preferred(e2->key(), e1->key())) {
        // No honest diversity to hide: M1 simply stands as an ordinary block.
        co_.attempts.pop_back();
        co_.active.reset();
        if (e1 != nullptr) consider(e1);
        return;
    }
    a.m1 = e1;
    a.m2 = e2;
    co_.private_blocks.insert(e2);
    co_.private_tip = e2;
    co_.public_best = e1;
    for (auto* m : co_.members) {
        m->mark_known(e1);
        m->mark_known(e2);
        m->adopt(e2);
    }
    if (auto* v = co_.members.front(); v != nullptr) v->ds_check();
}

void AttackerNode::ds_private_header()
{
    auto h = build_header(tip_);
    record_header(h);
    const BlockEntry* e = accept_block(build_macroblock(*h, {}));
    if (e == nullptr) return;
    co_.private_blocks.insert(e);
    co_.private_tip = e;
    for (auto* m : co_.members) {
        m->mark_known(e);
        m->adopt(e);
    }
    ds_check();
}

void AttackerNode::ds_check()
{
    if (!co_.active) return;
    auto& a = co_.attempts[*co_.active];
    if (a.m1 == nullptr) return;
    const auto* priv = co_.private_tip;
    const auto* pub = co_.public_best;
    if (priv->height > pub->height) co_.stats.max_private_lead = std::max(co_.stats.max_private_lead, priv->height - pub->height);

    if (a.accepted && preferred(priv->key(), pub->key())) {
        for (std::uint64_t h = a.m2->height; h <= priv->height; ++h) {
            const BlockEntry* e = priv->path[h];
            co_.private_blocks.erase(e);
            host_.broadcast(cfg_.index, Message::of(e->block));
        }
        a.released = true;
        co_.active.reset();
        ++co_.stats.releases;
        host_.observe({Observation::Kind::AttackRelease, cfg_.index, a.header_hash, static_cast<std::int64_t>(priv->height),
                       static_cast<std::int64_t>(a.accepted_at), "equivocate-double-spend"});
        return;
    }
    if (pub->height >= priv->height + co_.confirmations + co_.give_up_margin) {
        a.gave_up = true;
        co_.active.reset();
        ++co_.stats.abandons;
        for (std::uint64_t h = a.m2->height; h <= priv->height; ++h) co_.private_blocks.erase(priv->path[h]);
        host_.observe({Observation::Kind::AttackAbandon, cfg_.index, a.header_hash, static_cast<std::int64_t>(pub->height),
                       0, "equivocate-double-spend"});
        for (auto* m : co_.members) {
            if (m->knows(pub) && preferred(pub->key(), m->tip_->key())) m->adopt(pub);
        }
    }
}

} // namespace bicomp
