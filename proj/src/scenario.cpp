#include <bicomp/scenario.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace bicomp {

const char* to_string(TraceLevel t)
{
    switch (t) {
    case TraceLevel::None: return "none";
    case TraceLevel::Blocks: return "blocks";
    case TraceLevel::Full: return "full";
    }
    return "unknown";
}

const char* to_string(TopologyKind t)
{
    switch (t) {
    case TopologyKind::Random: return "random";
    case TopologyKind::Complete: return "complete";
    case TopologyKind::Line: return "line";
    }
    return "unknown";
}

const char* to_string(AttackStrategy a)
{
    switch (a) {
    case AttackStrategy::None: return "none";
    case AttackStrategy::SelfishWithhold: return "selfish-withhold";
    case AttackStrategy::HeaderDetain: return "header-detain";
    case AttackStrategy::DoubleSpend: return "equivocate-double-spend";
    }
    return "unknown";
}

const char* to_string(LatencyModel::Kind k)
{
    switch (k) {
    case LatencyModel::Kind::Fixed: return "fixed";
    case LatencyModel::Kind::Uniform: return "uniform";
    case LatencyModel::Kind::Regions: return "regions";
    }
    return "unknown";
}

std::string ScenarioIssue::str() const
{
    std::string out;
    if (line != 0) out += "line " + std::to_string(line) + ": ";
    if (!key.empty()) out += key + ": ";
    return out + message;
}

namespace {

std::string join_issues(const std::vector<ScenarioIssue>& issues)
{
    std::string out = "invalid scenario";
    for (const auto& i : issues) out += "\n  " + i.str();
    return out;
}

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

template <class Int>
Int parse_int(std::string_view v)
{
    v = trim(v);
    Int out{};
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size() || v.empty()) fail("expected an integer, got '" + std::string(v) + "'");
    return out;
}

double parse_double(std::string_view v)
{
    v = trim(v);
    double out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size() || v.empty()) fail("expected a number, got '" + std::string(v) + "'");
    if (!std::isfinite(out)) fail("number must be finite");
    return out;
}

bool parse_bool(std::string_view v)
{
    v = trim(v);
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    fail("expected true or false, got '" + std::string(v) + "'");
}

template <class Int>
std::vector<Int> parse_list(std::string_view v)
{
    std::vector<Int> out;
    v = trim(v);
    while (!v.empty()) {
        const auto comma = v.find(',');
        out.push_back(parse_int<Int>(v.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        v = v.substr(comma + 1);
    }
    return out;
}

std::string fmt_double(double d)
{
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, d);
    return std::string(buf, p);
}

template <class Int>
std::string fmt_list(const std::vector<Int>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i != 0) out += ',';
        out += std::to_string(v[i]);
    }
    return out;
}

SelectionStrategy parse_selection_or_throw(std::string_view v)
{
    auto s = parse_selection(trim(v));
    if (!s) fail("expected random, fee-priority or locality");
    return *s;
}

struct Field {
    std::string section;
    std::string key;
    std::function<std::string(const Scenario&)> get;
    std::function<void(Scenario&, std::string_view)> set;
};

template <class T>
Field int_field(const char* section, const char* key, T Scenario::*m)
{
    return Field{section, key, [m](const Scenario& s) { return std::to_string(s.*m); },
                 [m](Scenario& s, std::string_view v) { s.*m = parse_int<T>(v); }};
}

Field double_field(const char* section, const char* key, double Scenario::*m)
{
    return Field{section, key, [m](const Scenario& s) { return fmt_double(s.*m); },
                 [m](Scenario& s, std::string_view v) { s.*m = parse_double(v); }};
}

Field latency_field(const char* key, SimTime LatencyModel::*m)
{
    return Field{"network", key, [m](const Scenario& s) { return std::to_string(s.latency.*m); },
                 [m](Scenario& s, std::string_view v) { s.latency.*m = parse_int<SimTime>(v); }};
}

const std::vector<Field>& fields()
{
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        f.push_back(int_field("run", "seed", &Scenario::seed));
        f.push_back(double_field("run", "stop_time_s", &Scenario::stop_time_s));
        f.push_back(int_field("run", "stop_height", &Scenario::stop_height));
        f.push_back(int_field("run", "stop_events", &Scenario::stop_events));
        f.push_back(Field{"run", "trace", [](const Scenario& s) { return std::string(to_string(s.trace)); },
                          [](Scenario& s, std::string_view v) {
                              v = trim(v);
                              if (v == "none") s.trace = TraceLevel::None;
                              else if (v == "blocks") s.trace = TraceLevel::Blocks;
                              else if (v == "full") s.trace = TraceLevel::Full;
                              else fail("expected none, blocks or full");
                          }});

        f.push_back(double_field("protocol", "tenure_s", &Scenario::tenure_s));
        f.push_back(int_field("protocol", "capacity", &Scenario::capacity));
        f.push_back(int_field("protocol", "micro_tx_cap", &Scenario::micro_tx_cap));
        f.push_back(int_field("protocol", "macro_tx_cap", &Scenario::macro_tx_cap));
        f.push_back(double_field("protocol", "delta_s", &Scenario::delta_s));
        f.push_back(int_field("protocol", "n_macro", &Scenario::n_macro));
        f.push_back(int_field("protocol", "n_micro", &Scenario::n_micro));
        f.push_back(int_field("protocol", "pow_check_bits", &Scenario::pow_check_bits));
        f.push_back(int_field("protocol", "block_reward", &Scenario::block_reward));
        f.push_back(double_field("protocol", "leader_fee_share", &Scenario::leader_fee_share));
        f.push_back(int_field("protocol", "mempool_bound", &Scenario::mempool_bound));
        f.push_back(Field{"protocol", "selection", [](const Scenario& s) { return std::string(to_string(s.selection)); },
                          [](Scenario& s, std::string_view v) { s.selection = parse_selection_or_throw(v); }});

        f.push_back(int_field("network", "nodes", &Scenario::nodes));
        f.push_back(Field{"network", "topology", [](const Scenario& s) { return std::string(to_string(s.topology)); },
                          [](Scenario& s, std::string_view v) {
                              v = trim(v);
                              if (v == "random") s.topology = TopologyKind::Random;
                              else if (v == "complete") s.topology = TopologyKind::Complete;
                              else if (v == "line") s.topology = TopologyKind::Line;
                              else fail("expected random, complete or line");
                          }});
        f.push_back(double_field("network", "degree", &Scenario::degree));
        f.push_back(Field{"network", "latency", [](const Scenario& s) { return std::string(to_string(s.latency.kind)); },
                          [](Scenario& s, std::string_view v) {
                              v = trim(v);
                              if (v == "fixed") s.latency.kind = LatencyModel::Kind::Fixed;
                              else if (v == "uniform") s.latency.kind = LatencyModel::Kind::Uniform;
                              else if (v == "regions") s.latency.kind = LatencyModel::Kind::Regions;
                              else fail("expected fixed, uniform or regions");
                          }});
        f.push_back(latency_field("fixed_ms", &LatencyModel::fixed_ms));
        f.push_back(latency_field("min_ms", &LatencyModel::min_ms));
        f.push_back(latency_field("max_ms", &LatencyModel::max_ms));
        f.push_back(int_field("network", "regions", &Scenario::regions));
        f.push_back(latency_field("intra_region_ms", &LatencyModel::intra_region_ms));
        f.push_back(latency_field("cross_region_min_ms", &LatencyModel::cross_region_min_ms));
        f.push_back(latency_field("cross_region_max_ms", &LatencyModel::cross_region_max_ms));
        f.push_back(int_field("network", "jitter_ms", &Scenario::jitter_ms));
        f.push_back(double_field("network", "bandwidth_mbps", &Scenario::bandwidth_mbps));
        f.push_back(int_field("network", "tx_hop_limit", &Scenario::tx_hop_limit));

        f.push_back(double_field("workload", "tx_rate", &Scenario::tx_rate));
        f.push_back(int_field("workload", "accounts", &Scenario::accounts));
        f.push_back(int_field("workload", "initial_balance", &Scenario::initial_balance));
        f.push_back(int_field("workload", "fee_min", &Scenario::fee_min));
        f.push_back(int_field("workload", "fee_max", &Scenario::fee_max));
        f.push_back(int_field("workload", "amount_min", &Scenario::amount_min));
        f.push_back(int_field("workload", "amount_max", &Scenario::amount_max));
        f.push_back(double_field("workload", "resend_after_s", &Scenario::resend_after_s));

        f.push_back(double_field("nodes", "hash_power", &Scenario::hash_power));

        f.push_back(Field{"attack", "strategy", [](const Scenario& s) { return std::string(to_string(s.attack)); },
                          [](Scenario& s, std::string_view v) {
                              v = trim(v);
                              if (v == "none") s.attack = AttackStrategy::None;
                              else if (v == "selfish-withhold") s.attack = AttackStrategy::SelfishWithhold;
                              else if (v == "header-detain") s.attack = AttackStrategy::HeaderDetain;
                              else if (v == "equivocate-double-spend") s.attack = AttackStrategy::DoubleSpend;
                              else fail("expected none, selfish-withhold, header-detain or equivocate-double-spend");
                          }});
        f.push_back(Field{"attack", "attackers", [](const Scenario& s) { return fmt_list(s.attackers); },
                          [](Scenario& s, std::string_view v) { s.attackers = parse_list<std::uint32_t>(v); }});
        f.push_back(int_field("attack", "victim", &Scenario::victim));
        f.push_back(int_field("attack", "confirmations", &Scenario::confirmations));
        f.push_back(int_field("attack", "give_up_margin", &Scenario::give_up_margin));
        f.push_back(Field{"attack", "threshold_search",
                          [](const Scenario& s) { return std::string(s.threshold_search ? "true" : "false"); },
                          [](Scenario& s, std::string_view v) { s.threshold_search = parse_bool(v); }});
        f.push_back(int_field("attack", "max_attempts", &Scenario::max_attempts));

        f.push_back(Field{"fault", "drop_macroblock_heights",
                          [](const Scenario& s) { return fmt_list(s.drop_macroblock_heights); },
                          [](Scenario& s, std::string_view v) {
                              s.drop_macroblock_heights = parse_list<std::uint64_t>(v);
                          }});
        return f;
    }();
    return table;
}

const Field* find_field(std::string_view section, std::string_view key)
{
    for (const auto& f : fields()) {
        if (f.section == section && f.key == key) return &f;
    }
    return nullptr;
}

const Field& resolve_key(std::string_view key)
{
    const auto dot = key.find('.');
    if (dot != std::string_view::npos) {
        if (const auto* f = find_field(key.substr(0, dot), key.substr(dot + 1))) return *f;
        throw ScenarioError({ScenarioIssue{0, std::string(key), "unknown parameter"}});
    }
    const Field* match = nullptr;
    for (const auto& f : fields()) {
        if (f.key != key) continue;
        if (match != nullptr) throw ScenarioError({ScenarioIssue{0, std::string(key), "ambiguous; qualify with a section"}});
        match = &f;
    }
    if (match == nullptr) throw ScenarioError({ScenarioIssue{0, std::string(key), "unknown parameter"}});
    return *match;
}

const std::set<std::string, std::less<>> kSections = {"run",   "protocol", "network", "workload", "nodes",
                                                       "node", "attack",   "fault",   "genesis"};

void apply_node_key(NodeSpec& n, std::string_view key, std::string_view v)
{
    if (key == "id") n.id = parse_int<std::uint32_t>(v);
    else if (key == "hash_power") n.hash_power = parse_double(v);
    else if (key == "region") n.region = parse_int<std::uint32_t>(v);
    else if (key == "honest") n.honest = parse_bool(v);
    else if (key == "selection") n.selection = parse_selection_or_throw(v);
    else fail("unknown node key");
}

GenesisAlloc parse_alloc(std::string_view v)
{
    v = trim(v);
    const auto sp = v.find_first_of(" \t");
    if (sp == std::string_view::npos) fail("expected '<account hex> <amount>'");
    const auto hex = trim(v.substr(0, sp));
    if (hex.size() != 64) fail("account id must be 64 hex digits");
    GenesisAlloc a;
    try {
        a.account = AccountId{Hash256::from_hex(hex)};
    } catch (const std::exception&) {
        fail("account id is not valid hex");
    }
    a.amount = parse_int<std::uint64_t>(v.substr(sp));
    return a;
}

} // namespace

ScenarioError::ScenarioError(std::vector<ScenarioIssue> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues))
{
}

std::vector<ResolvedNode> Scenario::resolved_nodes() const
{
    std::vector<ResolvedNode> out(nodes);
    for (std::uint32_t i = 0; i < nodes; ++i) {
        out[i].id = i;
        out[i].hash_power = hash_power;
        out[i].region = regions == 0 ? 0 : i % regions;
        out[i].selection = selection;
    }
    for (auto a : attackers) {
        if (a < nodes) out[a].honest = false;
    }
    for (const auto& n : node_specs) {
        if (n.id >= nodes) continue;
        auto& r = out[n.id];
        if (n.hash_power) r.hash_power = *n.hash_power;
        if (n.region) r.region = *n.region;
        if (n.honest && !*n.honest) r.honest = false;
        if (n.selection) r.selection = *n.selection;
    }
    return out;
}

double Scenario::attacker_fraction() const
{
    double total = 0;
    double bad = 0;
    for (const auto& n : resolved_nodes()) {
        total += n.hash_power;
        if (!n.honest) bad += n.hash_power;
    }
    return total > 0 ? bad / total : 0;
}

ProtocolParams Scenario::protocol() const
{
    ProtocolParams p;
    p.rules.macro_difficulty = Difficulty{static_cast<std::uint8_t>(n_macro)};
    p.rules.micro_difficulty = Difficulty{static_cast<std::uint8_t>(n_micro)};
    p.rules.pow_check_cap = static_cast<std::uint8_t>(pow_check_bits);
    p.rules.capacity = capacity;
    p.rules.micro_tx_cap = micro_tx_cap;
    p.rules.macro_tx_cap = effective_macro_tx_cap();
    p.tenure.tenure_ms = std::llround(tenure_s * 1000.0);
    p.rules.timestamp_window_ms = 2 * p.tenure.tenure_ms;
    p.tenure.capacity = capacity;
    p.tenure.tx_cap = effective_macro_tx_cap();
    p.tenure.delta_ms = std::llround(delta_s * 1000.0);
    p.incentives.block_reward = block_reward;
    p.incentives.leader_fee_share_ppm = static_cast<std::uint32_t>(std::llround(leader_fee_share * 1e6));
    p.mempool_bound = mempool_bound;
    return p;
}

std::vector<ScenarioIssue> validate(const Scenario& s)
{
    std::vector<ScenarioIssue> out;
    auto bad = [&](const char* key, std::string msg) { out.push_back(ScenarioIssue{0, key, std::move(msg)}); };

    if (!(s.stop_time_s >= 0)) bad("run.stop_time_s", "must be non-negative");
    if (s.stop_time_s == 0 && s.stop_height == 0 && s.stop_events == 0) bad("run.stop_time_s", "no stop condition set");

    if (!(s.tenure_s > 0)) bad("protocol.tenure_s", "must be positive");
    if (s.capacity < 1) bad("protocol.capacity", "must be at least 1");
    if (s.micro_tx_cap < 1) bad("protocol.micro_tx_cap", "must be at least 1");
    if (!(s.delta_s >= 0)) bad("protocol.delta_s", "must be non-negative");
    if (s.n_macro > 64) bad("protocol.n_macro", "must be at most 64");
    if (s.n_micro > 64) bad("protocol.n_micro", "must be at most 64");
    if (s.pow_check_bits > 24) bad("protocol.pow_check_bits", "must be at most 24");
    if (!(s.leader_fee_share >= 0 && s.leader_fee_share <= 1)) bad("protocol.leader_fee_share", "must lie in [0, 1]");
    if (s.mempool_bound < 1) bad("protocol.mempool_bound", "must be at least 1");

    if (s.nodes < 1) bad("network.nodes", "must be at least 1");
    if (!(s.degree > 0)) bad("network.degree", "must be positive");
    if (s.regions < 1) bad("network.regions", "must be at least 1");
    if (s.latency.fixed_ms <= 0) bad("network.fixed_ms", "must be positive");
    if (s.latency.min_ms <= 0) bad("network.min_ms", "must be positive");
    if (s.latency.max_ms < s.latency.min_ms) bad("network.max_ms", "must be at least min_ms");
    if (s.latency.intra_region_ms <= 0) bad("network.intra_region_ms", "must be positive");
    if (s.latency.cross_region_min_ms <= 0) bad("network.cross_region_min_ms", "must be positive");
    if (s.latency.cross_region_max_ms < s.latency.cross_region_min_ms) {
        bad("network.cross_region_max_ms", "must be at least cross_region_min_ms");
    }
    if (s.jitter_ms < 0) bad("network.jitter_ms", "must be non-negative");
    if (!(s.bandwidth_mbps >= 0)) bad("network.bandwidth_mbps", "must be non-negative");
    if (s.tx_hop_limit < -1) bad("network.tx_hop_limit", "must be -1 (unlimited) or non-negative");

    if (!(s.tx_rate >= 0)) bad("workload.tx_rate", "must be non-negative");
    if (s.tx_rate > 0 && s.accounts < 1) bad("workload.accounts", "must be at least 1 when transactions are injected");
    if (s.fee_min > s.fee_max) bad("workload.fee_max", "must be at least fee_min");
    if (s.amount_min > s.amount_max) bad("workload.amount_max", "must be at least amount_min");
    if (s.fee_max > UINT64_MAX - s.amount_max) bad("workload.amount_max", "amount + fee overflows");
    if (!(s.resend_after_s > 0)) bad("workload.resend_after_s", "must be positive");

    if (!(s.hash_power > 0)) bad("nodes.hash_power", "must be positive");

    std::set<std::uint32_t> seen;
    for (const auto& n : s.node_specs) {
        if (n.id >= s.nodes) bad("node.id", "node " + std::to_string(n.id) + " outside 0.." + std::to_string(s.nodes - 1));
        if (!seen.insert(n.id).second) bad("node.id", "node " + std::to_string(n.id) + " defined more than once");
        if (n.hash_power && !(*n.hash_power > 0)) bad("node.hash_power", "must be positive");
        if (n.region && *n.region >= s.regions) bad("node.region", "outside the configured regions");
        if (n.honest && *n.honest &&
            std::find(s.attackers.begin(), s.attackers.end(), n.id) != s.attackers.end()) {
            bad("node.honest", "node " + std::to_string(n.id) + " is listed as an attacker");
        }
    }

    std::set<std::uint32_t> att;
    for (auto a : s.attackers) {
        if (a >= s.nodes) bad("attack.attackers", "node " + std::to_string(a) + " does not exist");
        if (!att.insert(a).second) bad("attack.attackers", "node " + std::to_string(a) + " listed twice");
    }

    if (out.empty()) {
        const auto nodes = s.resolved_nodes();
        double lo = nodes.front().hash_power;
        double hi = lo;
        std::size_t dishonest = 0;
        for (const auto& n : nodes) {
            lo = std::min(lo, n.hash_power);
            hi = std::max(hi, n.hash_power);
            dishonest += n.honest ? 0 : 1;
        }
        if (hi > 100 * lo) bad("nodes.hash_power", "per-node hash power ratio exceeds 100");
        if (s.attack != AttackStrategy::None && dishonest == 0) bad("attack.attackers", "strategy needs at least one attacker");
        const double alpha = s.attacker_fraction();
        if (!s.threshold_search && alpha >= 0.25) {
            bad("attack.attackers", "attacker hash power " + fmt_double(alpha) + " is not below 1/4 of the total");
        }
        if (s.attack == AttackStrategy::DoubleSpend) {
            if (dishonest < 2) bad("attack.attackers", "double-spend needs at least two attacker nodes");
            if (s.victim >= s.nodes || !nodes[s.victim].honest) bad("attack.victim", "victim must be an honest node");
        }
    }

    for (auto h : s.drop_macroblock_heights) {
        if (h == 0) bad("fault.drop_macroblock_heights", "height 0 is genesis");
    }
    std::set<AccountId> accts;
    for (const auto& g : s.genesis) {
        if (!accts.insert(g.account).second) bad("genesis.alloc", "account " + g.account.hex() + " allocated twice");
    }
    return out;
}

Scenario parse_scenario(std::string_view text)
{
    Scenario s;
    std::vector<ScenarioIssue> issues;
    std::map<std::string, std::size_t> key_lines;
    std::set<std::string> assigned;
    std::string section;
    std::vector<std::set<std::string>> node_keys;
    std::vector<std::size_t> node_lines;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') {
                issues.push_back({line_no, std::string(line), "unterminated section header"});
                continue;
            }
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (kSections.count(section) == 0) {
                issues.push_back({line_no, section, "unknown section"});
                continue;
            }
            if (section == "node") {
                s.node_specs.emplace_back();
                node_keys.emplace_back();
                node_lines.push_back(line_no);
            }
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            issues.push_back({line_no, std::string(line), "expected 'key = value'"});
            continue;
        }
        const std::string key(trim(line.substr(0, eq)));
        const auto value = trim(line.substr(eq + 1));
        if (section.empty() || kSections.count(section) == 0) {
            issues.push_back({line_no, key, "key outside a known section"});
            continue;
        }
        const std::string qualified = section + "." + key;
        try {
            if (section == "node") {
                if (!node_keys.back().insert(key).second) {
                    issues.push_back({line_no, qualified, "duplicate key in node stanza"});
                    continue;
                }
                apply_node_key(s.node_specs.back(), key, value);
            } else if (section == "genesis") {
                if (key != "alloc") fail("unknown genesis key");
                s.genesis.push_back(parse_alloc(value));
                key_lines[qualified] = line_no;
            } else {
                const Field* f = find_field(section, key);
                if (f == nullptr) {
                    issues.push_back({line_no, qualified, "unknown key"});
                    continue;
                }
                if (!assigned.insert(qualified).second) {
                    issues.push_back({line_no, qualified, "duplicate key"});
                    continue;
                }
                f->set(s, value);
                key_lines[qualified] = line_no;
            }
        } catch (const std::invalid_argument& e) {
            issues.push_back({line_no, qualified, e.what()});
        }
    }
    for (std::size_t i = 0; i < node_keys.size(); ++i) {
        if (node_keys[i].count("id") == 0) issues.push_back({node_lines[i], "node.id", "node stanza without id"});
    }
    if (issues.empty()) {
        for (auto& v : validate(s)) {
            if (auto it = key_lines.find(v.key); it != key_lines.end()) v.line = it->second;
            issues.push_back(std::move(v));
        }
    }
    if (!issues.empty()) throw ScenarioError(std::move(issues));
    return s;
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError({ScenarioIssue{0, path, "cannot open scenario file"}});
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string scenario_to_text(const Scenario& s)
{
    std::ostringstream out;
    std::string current;
    for (const auto& f : fields()) {
        if (f.section != current) {
            if (!current.empty()) out << '\n';
            out << '[' << f.section << "]\n";
            current = f.section;
        }
        out << f.key << " = " << f.get(s) << '\n';
    }
    for (const auto& n : s.node_specs) {
        out << "\n[node]\nid = " << n.id << '\n';
        if (n.hash_power) out << "hash_power = " << fmt_double(*n.hash_power) << '\n';
        if (n.region) out << "region = " << *n.region << '\n';
        if (n.honest) out << "honest = " << (*n.honest ? "true" : "false") << '\n';
        if (n.selection) out << "selection = " << to_string(*n.selection) << '\n';
    }
    if (!s.genesis.empty()) {
        out << "\n[genesis]\n";
        for (const auto& g : s.genesis) out << "alloc = " << g.account.hex() << ' ' << g.amount << '\n';
    }
    return out.str();
}

void set_parameter(Scenario& s, std::string_view key, std::string_view value)
{
    const Field& f = resolve_key(key);
    try {
        f.set(s, value);
    } catch (const std::invalid_argument& e) {
        throw ScenarioError({ScenarioIssue{0, f.section + "." + f.key, e.what()}});
    }
}

std::string get_parameter(const Scenario& s, std::string_view key) { return resolve_key(key).get(s); }

AccountId workload_account(std::uint64_t index)
{
    Bytes b{'a', 'c', 'c', 't'};
    put_le<std::uint64_t>(b, index);
    return AccountId{sha256(b)};
}

AccountId attacker_wallet(const NodeId& node)
{
    Bytes b{'w', 'a', 'l', 'l', 'e', 't'};
    put_hash(b, node.value);
    return AccountId{sha256(b)};
}

NodeId node_identity(std::uint32_t index)
{
    Bytes b{'n', 'o', 'd', 'e'};
    put_le<std::uint32_t>(b, index);
    return NodeId{sha256(b)};
}

} // namespace bicomp
