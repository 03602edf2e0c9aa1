#pragma once

#include <bicomp/node.hpp>
#include <bicomp/scenario.hpp>

#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace bicomp {

struct AttackStats {
    std::uint64_t releases = 0;
    std::uint64_t abandons = 0;
    //! Header-detain forks decided while the header was still private.
    std::uint64_t detain_forks = 0;
    std::uint64_t detain_private_lower = 0;
    std::uint64_t max_private_lead = 0;
};

struct DoubleSpendAttempt {
    std::uint32_t leader = 0;
    SimTime started = 0;
    Hash256 header_hash;
    TxId poison;
    MicroPtr poison_micro;
    const BlockEntry* m1 = nullptr;
    const BlockEntry* m2 = nullptr;
    bool accepted = false;
    SimTime accepted_at = 0;
    bool released = false;
    bool gave_up = false;
    //! Set by Coalition::finalize.
    bool success = false;
};

class AttackerNode;

/** State shared by all attacker nodes of a run. Members see each other's private artifacts instantly. */
struct Coalition {
    AttackStrategy strategy = AttackStrategy::None;
    std::uint32_t victim = 0;
    std::uint32_t confirmations = 6;
    std::uint32_t give_up_margin = 3;
    std::uint64_t max_attempts = 0;

    std::vector<AttackerNode*> members;
    std::unordered_set<const BlockEntry*> private_blocks;
    std::unordered_map<const BlockEntry*, std::vector<HeaderPtr>> held_headers;
    std::unordered_map<Hash256, AttackerNode*, Hash256Hasher> detained;
    std::vector<const BlockEntry*> detain_released;

    std::vector<DoubleSpendAttempt> attempts;
    std::optional<std::size_t> active;
    const BlockEntry* private_tip = nullptr;
    const BlockEntry* public_best = nullptr;

    AttackStats stats;

    bool is_member(const NodeId& id) const;
    bool is_private(const BlockEntry* e) const { return private_blocks.count(e) != 0; }
    //! Victim tip change; drives confirmation tracking for the double-spend attack.
    void victim_adopted(const BlockEntry* tip, SimTime now);
    /**
     * End-of-run bookkeeping against the chosen tip: double-spend success flags
     * and header-detain forks found after release. honest_known reports whether
     * any honest node saw an entry.
     */
    void finalize(const BlockEntry* chosen_tip, const BlockTree& tree,
                  const std::function<bool(const BlockEntry*)>& honest_known);

    std::uint64_t completed_attempts() const;
    std::uint64_t successful_attempts() const;
};

/** A node running one of the attack strategies on top of the honest state machine. */
class AttackerNode : public Node {
public:
    AttackerNode(NodeConfig cfg, NodeHost& host, std::uint64_t seed, Coalition& co);

    //! Release or give-up decision for the active double-spend attempt.
    void ds_check();

protected:
    void on_header_mined() override;
    void on_micro_mined() override;
    void on_tenure_end() override;
    void on_attack_timer(std::uint64_t tag) override;
    void consider(const BlockEntry* e) override;

private:
    void share(const BlockEntry* e);
    void selfish_header();
    void selfish_release(const BlockEntry* e);
    void detain_header();
    void detain_release(const MacroPtr& mb);
    void ds_start();
    void ds_private_header();
    void ds_tenure_end();
    MicroPtr make_poison_micro(AttackerNode& helper, const Hash256& round_hash, std::uint64_t serial);

    Coalition& co_;
    bool detaining_ = false;
};

} // namespace bicomp
