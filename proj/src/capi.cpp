#include <bicomp/bicomp.h>

#include <bicomp/report.hpp>
#include <bicomp/sweep.hpp>
#include <bicomp/verify.hpp>

#include <cstring>
#include <fstream>
#include <string>

struct bicomp_scenario {
    bicomp::Scenario s;
};

struct bicomp_result {
    bicomp::Metrics metrics;
    std::string trace_hash;
    std::string tip;
};

namespace {

thread_local std::string last_error;

bicomp_status fail(bicomp_status code, std::string msg)
{
    last_error = std::move(msg);
    return code;
}

bicomp_status copy_out(const std::string& text, char* buf, size_t cap, size_t* needed)
{
    if (needed != nullptr) *needed = text.size() + 1;
    if (buf == nullptr || cap < text.size() + 1) {
        if (buf == nullptr && cap == 0) return BICOMP_OK;
        return fail(BICOMP_E_BUFFER, "buffer too small");
    }
    std::memcpy(buf, text.c_str(), text.size() + 1);
    return BICOMP_OK;
}

template <class F>
bicomp_status guarded(F&& f)
{
    try {
        return f();
    } catch (const bicomp::ScenarioError& e) {
        return fail(BICOMP_E_SCENARIO, e.what());
    } catch (const bicomp::VerifyInputError& e) {
        return fail(BICOMP_E_IO, e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        return fail(BICOMP_E_IO, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(BICOMP_E_INVALID_ARGUMENT, e.what());
    } catch (const std::bad_alloc&) {
        return fail(BICOMP_E_RUNTIME, "out of memory");
    } catch (const std::exception& e) {
        return fail(BICOMP_E_RUNTIME, e.what());
    } catch (...) {
        return fail(BICOMP_E_RUNTIME, "unknown error");
    }
}

#define BICOMP_REQUIRE(cond)                                                                                       \
    do {                                                                                                           \
        if (!(cond)) return fail(BICOMP_E_INVALID_ARGUMENT, "invalid argument: " #cond);                           \
    } while (0)

} // namespace

extern "C" {

const char* bicomp_last_error(void) { return last_error.c_str(); }

const char* bicomp_version(void) { return "0.1.0"; }

const char* bicomp_status_string(bicomp_status s)
{
    switch (s) {
    case BICOMP_OK: return "ok";
    case BICOMP_E_INVALID_ARGUMENT: return "invalid argument";
    case BICOMP_E_SCENARIO: return "scenario error";
    case BICOMP_E_IO: return "i/o error";
    case BICOMP_E_RUNTIME: return "runtime error";
    case BICOMP_E_VALIDATION: return "validation failure";
    case BICOMP_E_NOT_FOUND: return "not found";
    case BICOMP_E_BUFFER: return "buffer too small";
    }
    return "unknown status";
}

bicomp_status bicomp_scenario_default(bicomp_scenario** out)
{
    BICOMP_REQUIRE(out != nullptr);
    return guarded([&] {
        *out = new bicomp_scenario{};
        return BICOMP_OK;
    });
}

bicomp_status bicomp_scenario_parse(const char* text, bicomp_scenario** out)
{
    BICOMP_REQUIRE(text != nullptr && out != nullptr);
    *out = nullptr;
    return guarded([&] {
        *out = new bicomp_scenario{bicomp::parse_scenario(text)};
        return BICOMP_OK;
    });
}

bicomp_status bicomp_scenario_load(const char* path, bicomp_scenario** out)
{
    BICOMP_REQUIRE(path != nullptr && out != nullptr);
    *out = nullptr;
    return guarded([&] {
        std::ifstream f(path);
        if (!f) return fail(BICOMP_E_IO, std::string("cannot open ") + path);
        *out = new bicomp_scenario{bicomp::load_scenario(path)};
        return BICOMP_OK;
    });
}

bicomp_status bicomp_scenario_clone(const bicomp_scenario* s, bicomp_scenario** out)
{
    BICOMP_REQUIRE(s != nullptr && out != nullptr);
    return guarded([&] {
        *out = new bicomp_scenario{s->s};
        return BICOMP_OK;
    });
}

bicomp_status bicomp_scenario_set(bicomp_scenario* s, const char* key, const char* value)
{
    BICOMP_REQUIRE(s != nullptr && key != nullptr && value != nullptr);
    return guarded([&] {
        bicomp::Scenario copy = s->s;
        bicomp::set_parameter(copy, key, value);
        s->s = std::move(copy);
        return BICOMP_OK;
    });
}

bicomp_status bicomp_scenario_get(const bicomp_scenario* s, const char* key, char* buf, size_t cap, size_t* needed)
{
    BICOMP_REQUIRE(s != nullptr && key != nullptr);
    return guarded([&] {
        const auto v = bicomp::get_parameter(s->s, key);
        return copy_out(v, buf, cap, needed);
    });
}

bicomp_status bicomp_scenario_to_text(const bicomp_scenario* s, char* buf, size_t cap, size_t* needed)
{
    BICOMP_REQUIRE(s != nullptr);
    return guarded([&] { return copy_out(bicomp::scenario_to_text(s->s), buf, cap, needed); });
}

void bicomp_scenario_free(bicomp_scenario* s) { delete s; }

bicomp_status bicomp_run(const bicomp_scenario* s, const char* out_dir, bicomp_result** out)
{
    BICOMP_REQUIRE(s != nullptr && out != nullptr);
    *out = nullptr;
    return guarded([&] {
        const auto r = out_dir != nullptr ? bicomp::run_to_directory(s->s, out_dir) : bicomp::run_scenario(s->s);
        *out = new bicomp_result{r.metrics, r.trace_hash.hex(), r.tip_id.hex()};
        return BICOMP_OK;
    });
}

bicomp_status bicomp_result_metric(const bicomp_result* r, const char* name, double* value)
{
    BICOMP_REQUIRE(r != nullptr && name != nullptr && value != nullptr);
    const auto* col = bicomp::find_metric(name);
    if (col == nullptr) return fail(BICOMP_E_NOT_FOUND, std::string("no metric named ") + name);
    *value = col->get(r->metrics);
    return BICOMP_OK;
}

bicomp_status bicomp_result_trace_hash(const bicomp_result* r, char out[65])
{
    BICOMP_REQUIRE(r != nullptr && out != nullptr);
    std::memcpy(out, r->trace_hash.c_str(), 65);
    return BICOMP_OK;
}

bicomp_status bicomp_result_tip(const bicomp_result* r, char out[65])
{
    BICOMP_REQUIRE(r != nullptr && out != nullptr);
    std::memcpy(out, r->tip.c_str(), 65);
    return BICOMP_OK;
}

void bicomp_result_free(bicomp_result* r) { delete r; }

size_t bicomp_metric_count(void) { return bicomp::metric_columns().size(); }

const char* bicomp_metric_name(size_t i)
{
    const auto& cols = bicomp::metric_columns();
    return i < cols.size() ? cols[i].name : nullptr;
}

bicomp_status bicomp_sweep(const bicomp_scenario* base, const char* const* axes, size_t n_axes, uint32_t seeds,
                           uint32_t jobs, const char* out_dir, bicomp_progress_fn progress, void* user)
{
    BICOMP_REQUIRE(base != nullptr && out_dir != nullptr && (axes != nullptr || n_axes == 0));
    return guarded([&] {
        std::vector<bicomp::SweepAxis> parsed;
        for (size_t i = 0; i < n_axes; ++i) {
            if (axes[i] == nullptr) return fail(BICOMP_E_INVALID_ARGUMENT, "null axis");
            parsed.push_back(bicomp::parse_axis(axes[i]));
        }
        bicomp::SweepProgress cb;
        if (progress != nullptr) cb = [&](std::size_t d, std::size_t t) { progress(d, t, user); };
        const auto r = bicomp::run_sweep(base->s, parsed, seeds, jobs, cb);

        const std::filesystem::path dir(out_dir);
        std::filesystem::create_directories(dir);
        std::ofstream csv(dir / "sweep.csv", std::ios::trunc);
        std::ofstream schema(dir / "columns.csv", std::ios::trunc);
        if (!csv || !schema) return fail(BICOMP_E_IO, "cannot write into " + dir.string());
        bicomp::write_sweep_csv(csv, r);
        bicomp::write_sweep_schema(schema, r);
        {
            std::ofstream scn(dir / "scenario.scn", std::ios::trunc);
            scn << bicomp::scenario_to_text(base->s);
        }
        for (const auto& run : r.runs) {
            if (!run.error.empty()) return fail(BICOMP_E_RUNTIME, "run failed (seed " + std::to_string(run.seed) + "): " + run.error);
        }
        return BICOMP_OK;
    });
}

bicomp_status bicomp_verify_trace(const char* trace_path, int replay, char* report, size_t cap, size_t* needed)
{
    BICOMP_REQUIRE(trace_path != nullptr);
    return guarded([&] {
        const auto rep = bicomp::verify_trace(trace_path, replay != 0);
        std::string text;
        for (const auto& p : rep.problems) text += p + '\n';
        if (rep.replay_match && !*rep.replay_match) text += "replay produced a different trace hash\n";
        text += "height " + std::to_string(rep.height) + ", blocks checked " + std::to_string(rep.blocks_checked) +
                ", valid txs " + std::to_string(rep.valid_txs) + ", tip " + rep.tip_id.hex() + "\n";
        if (report != nullptr || needed != nullptr) {
            if (auto st = copy_out(text, report, cap, needed); st != BICOMP_OK) return st;
        }
        if (!rep.ok()) return fail(BICOMP_E_VALIDATION, rep.problems.empty() ? "replay mismatch" : rep.problems.front());
        return BICOMP_OK;
    });
}

} // extern "C"
