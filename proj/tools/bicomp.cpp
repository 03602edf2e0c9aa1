#include <bicomp/bicomp.h>

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

namespace {

// 0 success, 1 validation failure, 2 runtime error
constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitRuntime = 2;

struct ScenarioDeleter {
    void operator()(bicomp_scenario* s) const { bicomp_scenario_free(s); }
};
struct ResultDeleter {
    void operator()(bicomp_result* r) const { bicomp_result_free(r); }
};
using ScenarioPtr = std::unique_ptr<bicomp_scenario, ScenarioDeleter>;
using ResultPtr = std::unique_ptr<bicomp_result, ResultDeleter>;

int report(bicomp_status st, const char* what)
{
    std::cerr << "bicomp: " << what << ": " << bicomp_last_error() << '\n';
    return st == BICOMP_E_VALIDATION || st == BICOMP_E_SCENARIO ? kExitInvalid : kExitRuntime;
}

//! Loads the scenario (or defaults) and applies --seed and --set overrides.
ScenarioPtr prepare(const std::string& path, const std::vector<std::string>& sets, const std::string* seed, int& rc)
{
    bicomp_scenario* raw = nullptr;
    auto st = path.empty() ? bicomp_scenario_default(&raw) : bicomp_scenario_load(path.c_str(), &raw);
    ScenarioPtr s(raw);
    if (st != BICOMP_OK) {
        rc = report(st, "cannot load scenario");
        return nullptr;
    }
    for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::cerr << "bicomp: --set expects key=value, got '" << kv << "'\n";
            rc = kExitRuntime;
            return nullptr;
        }
        if ((st = bicomp_scenario_set(s.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str())) != BICOMP_OK) {
            rc = report(st, "bad override");
            return nullptr;
        }
    }
    if (seed != nullptr && !seed->empty()) {
        if ((st = bicomp_scenario_set(s.get(), "run.seed", seed->c_str())) != BICOMP_OK) {
            rc = report(st, "bad seed");
            return nullptr;
        }
    }
    rc = kExitOk;
    return s;
}

void print_metric(const bicomp_result* r, const char* name)
{
    double v = 0;
    if (bicomp_result_metric(r, name, &v) == BICOMP_OK) std::printf("  %-22s %.6g\n", name, v);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Bicomp bilayer consensus simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(bicomp_version()));

    std::string scenario_path;
    std::string seed;
    std::string out_dir;
    std::vector<std::string> sets;

    auto* run = app.add_subcommand("run", "Run one scenario");
    run->add_option("--scenario", scenario_path, "Scenario file (defaults when omitted)")->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "Override run.seed");
    run->add_option("--out", out_dir, "Output directory")->required();
    run->add_option("--set", sets, "Override a parameter, key=value (repeatable)");

    std::vector<std::string> axes;
    std::uint32_t seeds = 1;
    std::uint32_t jobs = 1;
    bool quiet = false;
    auto* sweep = app.add_subcommand("sweep", "Cartesian parameter sweep");
    sweep->add_option("--scenario", scenario_path, "Base scenario file")->check(CLI::ExistingFile);
    sweep->add_option("--axis", axes, "key=v1,v2,... or key=lo..hi[:step] (repeatable)");
    sweep->add_option("--seeds", seeds, "Seeds per point, starting at run.seed")->check(CLI::PositiveNumber);
    sweep->add_option("--jobs", jobs, "Parallel runs")->check(CLI::PositiveNumber);
    sweep->add_option("--out", out_dir, "Output directory")->required();
    sweep->add_option("--set", sets, "Override a base parameter, key=value (repeatable)");
    sweep->add_flag("--quiet", quiet, "No progress output");

    std::string trace_path;
    bool replay = false;
    auto* verify = app.add_subcommand("verify", "Re-validate a trace's chain against all invariants");
    verify->add_option("--trace", trace_path, "trace.jsonl with chain.bin beside it")->required();
    verify->add_flag("--replay", replay, "Also re-run the embedded scenario and compare trace hashes");

    auto* defaults = app.add_subcommand("defaults", "Print the default scenario");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitRuntime;
    }

    int rc = kExitOk;
    if (*defaults) {
        auto s = prepare({}, {}, nullptr, rc);
        if (!s) return rc;
        std::size_t n = 0;
        bicomp_scenario_to_text(s.get(), nullptr, 0, &n);
        std::string text(n, '\0');
        bicomp_scenario_to_text(s.get(), text.data(), n, &n);
        std::cout << text.c_str();
        return kExitOk;
    }

    if (*run) {
        auto s = prepare(scenario_path, sets, &seed, rc);
        if (!s) return rc;
        bicomp_result* raw = nullptr;
        const auto st = bicomp_run(s.get(), out_dir.c_str(), &raw);
        ResultPtr r(raw);
        if (st != BICOMP_OK) return report(st, "run failed");
        char hash[65];
        bicomp_result_trace_hash(r.get(), hash);
        std::printf("wrote %s\n  trace_hash             %s\n", out_dir.c_str(), hash);
        for (const char* m : {"elapsed_s", "height", "total_tps", "nonoverlap_tps", "mean_latency_s", "mean_queue_s",
                              "mean_inclusion_s", "forks", "attacker_share", "conservation_ok"}) {
            print_metric(r.get(), m);
        }
        double ok = 0;
        bicomp_result_metric(r.get(), "conservation_ok", &ok);
        return ok == 1.0 ? kExitOk : kExitInvalid;
    }

    if (*sweep) {
        auto s = prepare(scenario_path, sets, nullptr, rc);
        if (!s) return rc;
        std::vector<const char*> axis_ptrs;
        for (const auto& a : axes) axis_ptrs.push_back(a.c_str());
        bicomp_progress_fn progress = nullptr;
        if (!quiet) {
            progress = [](size_t done, size_t total, void*) {
                std::fprintf(stderr, "\r%zu/%zu runs", done, total);
                if (done == total) std::fputc('\n', stderr);
            };
        }
        const auto st = bicomp_sweep(s.get(), axis_ptrs.data(), axis_ptrs.size(), seeds, jobs, out_dir.c_str(),
                                     progress, nullptr);
        if (st != BICOMP_OK) return report(st, "sweep failed");
        std::printf("wrote %s/sweep.csv\n", out_dir.c_str());
        return kExitOk;
    }

    if (*verify) {
        std::size_t n = 0;
        std::string text(4096, '\0');
        auto st = bicomp_verify_trace(trace_path.c_str(), replay ? 1 : 0, text.data(), text.size(), &n);
        if (st == BICOMP_E_BUFFER) {
            text.assign(n, '\0');
            st = bicomp_verify_trace(trace_path.c_str(), replay ? 1 : 0, text.data(), text.size(), &n);
        }
        if (st == BICOMP_OK || st == BICOMP_E_VALIDATION) {
            std::cout << text.c_str();
            std::cout << (st == BICOMP_OK ? "valid\n" : "INVALID\n");
            return st == BICOMP_OK ? kExitOk : kExitInvalid;
        }
        return report(st, "verify failed");
    }
    return kExitOk;
}
