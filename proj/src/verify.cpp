#include <bicomp/simulation.hpp>
#include <bicomp/verify.hpp>

#include <nlohmann/json.hpp>

#include <fstream>
#include <iterator>
#include <unordered_set>

namespace bicomp {

VerifyReport verify_chain(const Scenario& s, const Chain& c)
{
    VerifyReport rep;
    auto problem = [&](std::uint64_t height, const std::string& what) {
        rep.problems.push_back("height " + std::to_string(height) + ": " + what);
    };
    if (c.empty()) {
        rep.problems.emplace_back("chain is empty");
        return rep;
    }
    const auto params = s.protocol();
    const auto genesis = make_genesis(s.n_macro);
    if (c.blocks.front()->serialize() != genesis.serialize()) problem(0, "genesis block differs from the scenario's");

    auto state = genesis_state(s);
    const auto supply0 = state->total_supply();
    std::unordered_set<TxId, TxId::Hasher> seen;

    for (std::size_t i = 1; i < c.blocks.size(); ++i) {
        const auto& mb = *c.blocks[i];
        const auto& parent = c.blocks[i - 1]->header;
        const auto h = mb.header.height;
        if (auto r = validate_header(mb.header, parent, state_root(*state), params.rules); r != Reject::Ok) {
            problem(h, std::string("header rejected: ") + to_string(r));
            break;
        }
        if (auto r = validate_body(mb, params.rules); r != Reject::Ok) {
            problem(h, std::string("body rejected: ") + to_string(r));
            break;
        }
        const auto report = resolve_validity(mb, *state, seen);
        for (const auto& m : mb.microblocks) {
            for (const auto& t : m->transactions) seen.insert(t->id());
        }
        rep.valid_txs += report.non_overlapping_valid_count;
        state = std::make_shared<const LedgerState>(settle(*state, mb, report, params.incentives));
        ++rep.blocks_checked;
    }
    rep.height = c.height();
    rep.tip_id = block_id(*c.blocks.back());
    if (rep.problems.empty()) {
        const auto expected = supply0 + static_cast<unsigned __int128>(params.incentives.block_reward) * rep.height;
        if (state->total_supply() != expected) problem(rep.height, "supply does not equal genesis supply plus block rewards");
    }
    return rep;
}

VerifyReport verify_trace(const std::filesystem::path& trace, bool replay)
{
    std::ifstream in(trace);
    if (!in) throw VerifyInputError("cannot open " + trace.string());
    std::string line;
    std::optional<nlohmann::json> meta;
    std::optional<nlohmann::json> end;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw VerifyInputError("malformed trace line: " + std::string(e.what()));
        }
        const auto type = j.value("type", "");
        if (type == "meta" && !meta) meta = std::move(j);
        else if (type == "end") end = std::move(j);
    }
    if (!meta) throw VerifyInputError(trace.string() + " has no meta line");
    if (meta->value("format", 0) != 1) throw VerifyInputError("unsupported trace format");

    Scenario s;
    try {
        s = parse_scenario(meta->at("scenario").get<std::string>());
    } catch (const ScenarioError& e) {
        throw VerifyInputError(std::string("embedded scenario invalid: ") + e.what());
    }

    const auto chain_path = trace.parent_path() / "chain.bin";
    std::ifstream cf(chain_path, std::ios::binary);
    if (!cf) throw VerifyInputError("cannot open " + chain_path.string());
    const Bytes raw{std::istreambuf_iterator<char>(cf), std::istreambuf_iterator<char>()};
    Chain chain;
    try {
        chain = parse_chain(ByteView{raw.data(), raw.size()});
    } catch (const std::exception& e) {
        VerifyReport rep;
        rep.problems.push_back(std::string("chain dump unreadable: ") + e.what());
        return rep;
    }

    auto rep = verify_chain(s, chain);
    if (!end) {
        rep.problems.emplace_back("trace has no end line; the run did not finish");
    } else {
        if (end->value("tip", "") != rep.tip_id.hex()) rep.problems.emplace_back("chain tip differs from the trace's end line");
        if (end->value("height", std::uint64_t{0}) != rep.height) {
            rep.problems.emplace_back("chain height differs from the trace's end line");
        }
    }
    if (replay) {
        const auto r = run_scenario(s);
        rep.replay_match = end && end->value("trace_hash", "") == r.trace_hash.hex();
    }
    return rep;
}

} // namespace bicomp
