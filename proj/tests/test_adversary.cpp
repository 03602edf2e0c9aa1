#include <bicomp/simulation.hpp>

#include <doctest.h>

using namespace bicomp;

namespace {

Scenario base(std::uint64_t seed)
{
    Scenario s;
    s.seed = seed;
    s.stop_time_s = 0;
    s.stop_height = 60;
    s.trace = TraceLevel::None;
    s.nodes = 10;
    s.degree = 4;
    s.regions = 2;
    s.hash_power = 14000;
    s.tx_rate = 5;
    s.accounts = 500;
    s.block_reward = 1000000;
    return s;
}

void shares_add_up(const Metrics& m)
{
    CHECK(m.conservation_ok);
    CHECK(m.attacker_reward + m.honest_reward > 0);
    CHECK(m.attacker_share + m.honest_share == doctest::Approx(1.0).epsilon(1e-12));
}

} // namespace

TEST_CASE("without attackers the attacker share is zero")
{
    const auto r = run_scenario(base(1));
    CHECK(r.metrics.attacker_reward == 0);
    CHECK(r.metrics.attacker_share == 0);
    CHECK(r.metrics.honest_share == 1);
    CHECK(r.attempts.empty());
}

TEST_CASE("attack settings without attackers leave the trace unchanged")
{
    auto honest = base(2);
    auto configured = base(2);
    configured.confirmations = 2;
    configured.give_up_margin = 7;
    configured.victim = 4;
    configured.max_attempts = 3;
    CHECK(run_scenario(honest).trace_hash == run_scenario(configured).trace_hash);

    // Nodes flagged dishonest but given no strategy run the honest protocol.
    auto flagged = base(2);
    flagged.attackers = {0};
    CHECK(run_scenario(flagged).trace_hash == run_scenario(honest).trace_hash);
}

TEST_CASE("selfish withholding")
{
    auto s = base(3);
    s.attack = AttackStrategy::SelfishWithhold;
    s.attackers = {0, 1};
    s.stop_height = 80;
    const auto r = run_scenario(s);
    shares_add_up(r.metrics);
    CHECK(r.metrics.attack_releases + r.metrics.attack_abandons > 0);
    CHECK(r.metrics.attacker_share > 0);
    CHECK(r.metrics.attacker_share < 0.5);
    CHECK(r.metrics.ds_attempts == 0);
}

TEST_CASE("header detain")
{
    auto s = base(4);
    s.attack = AttackStrategy::HeaderDetain;
    s.attackers = {0, 1};
    s.stop_height = 80;
    const auto r = run_scenario(s);
    shares_add_up(r.metrics);
    CHECK(r.metrics.attack_releases > 0);
    CHECK(r.metrics.detain_private_lower <= r.metrics.detain_forks);
}

TEST_CASE("equivocating double spend")
{
    auto s = base(5);
    s.attack = AttackStrategy::DoubleSpend;
    s.attackers = {0, 1};
    s.victim = 5;

    SUBCASE("with zero confirmations the victim is always fooled")
    {
        s.confirmations = 0;
        Simulation sim(s);
        sim.record_observations(true);
        const auto r = sim.run();
        shares_add_up(r.metrics);
        REQUIRE(r.metrics.ds_attempts > 0);
        CHECK(r.metrics.ds_successes == r.metrics.ds_attempts);
        CHECK(r.metrics.equivocations > 0);
        const auto* tip = sim.chosen_tip();
        for (const auto& a : r.attempts) {
            if (a.m1 == nullptr) continue;
            CHECK(a.accepted);
            CHECK(a.m1->header_hash == a.m2->header_hash);
            CHECK(a.m1->block->body_root != a.m2->block->body_root);
            // The poison payment sits in M1 only, and M1 lost.
            CHECK(sim.tree().included_on(a.poison, a.m1));
            CHECK_FALSE(sim.tree().included_on(a.poison, a.m2));
            CHECK_FALSE(BlockTree::is_ancestor(a.m1, tip));
            CHECK(BlockTree::is_ancestor(a.m2, tip));
            CHECK(preferred(a.m2->key(), a.m1->key()));
        }
    }

    SUBCASE("deep confirmations defeat a small coalition")
    {
        s.confirmations = 6;
        s.stop_height = 120;
        const auto r = run_scenario(s);
        shares_add_up(r.metrics);
        CHECK(r.metrics.ds_successes == 0);
        CHECK(r.metrics.attack_abandons > 0);
    }

    SUBCASE("max_attempts bounds the number of attempts")
    {
        s.confirmations = 0;
        s.max_attempts = 2;
        const auto r = run_scenario(s);
        CHECK(r.attempts.size() <= 2);
    }
}
