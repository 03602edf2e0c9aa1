#include <bicomp/report.hpp>
#include <bicomp/sweep.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace bicomp {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

long long parse_int(std::string_view s, std::string_view spec)
{
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        throw std::invalid_argument("axis '" + std::string(spec) + "': '" + std::string(s) + "' is not an integer");
    }
    return v;
}

} // namespace

SweepAxis parse_axis(std::string_view spec)
{
    const auto eq = spec.find('=');
    if (eq == std::string_view::npos) throw std::invalid_argument("axis '" + std::string(spec) + "': expected key=values");
    SweepAxis axis;
    axis.key = std::string(trim(spec.substr(0, eq)));
    if (axis.key.empty()) throw std::invalid_argument("axis '" + std::string(spec) + "': empty key");
    const auto values = trim(spec.substr(eq + 1));

    if (const auto dots = values.find(".."); dots != std::string_view::npos) {
        auto hi_part = values.substr(dots + 2);
        long long step = 1;
        if (const auto colon = hi_part.find(':'); colon != std::string_view::npos) {
            step = parse_int(trim(hi_part.substr(colon + 1)), spec);
            hi_part = hi_part.substr(0, colon);
        }
        const auto lo = parse_int(trim(values.substr(0, dots)), spec);
        const auto hi = parse_int(trim(hi_part), spec);
        if (step <= 0 || hi < lo) throw std::invalid_argument("axis '" + std::string(spec) + "': empty range");
        for (long long v = lo; v <= hi; v += step) axis.values.push_back(std::to_string(v));
    } else {
        std::size_t start = 0;
        while (start <= values.size()) {
            const auto comma = values.find(',', start);
            const auto item = trim(values.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
            if (item.empty()) throw std::invalid_argument("axis '" + std::string(spec) + "': empty value");
            axis.values.emplace_back(item);
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
    }
    return axis;
}

SweepResult run_sweep(const Scenario& base, const std::vector<SweepAxis>& axes, std::uint32_t seeds, unsigned jobs,
                      const SweepProgress& progress)
{
    if (seeds == 0) throw std::invalid_argument("sweep needs at least one seed");
    SweepResult r;
    r.axes = axes;
    r.points.emplace_back();
    for (const auto& axis : axes) {
        if (axis.values.empty()) throw std::invalid_argument("axis '" + axis.key + "' has no values");
        // Fail on unknown keys before spending time on runs.
        Scenario probe = base;
        set_parameter(probe, axis.key, axis.values.front());
        std::vector<std::vector<std::string>> next;
        for (const auto& p : r.points) {
            for (const auto& v : axis.values) {
                next.push_back(p);
                next.back().push_back(v);
            }
        }
        r.points = std::move(next);
    }

    const std::size_t total = r.points.size() * seeds;
    r.runs.resize(total);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex progress_mu;

    auto worker = [&] {
        for (std::size_t i = next++; i < total; i = next++) {
            auto& run = r.runs[i];
            run.point = i / seeds;
            run.seed = base.seed + i % seeds;
            try {
                Scenario s = base;
                for (std::size_t a = 0; a < axes.size(); ++a) set_parameter(s, axes[a].key, r.points[run.point][a]);
                s.seed = run.seed;
                s.trace = TraceLevel::None;
                auto res = run_scenario(s);
                run.metrics = res.metrics;
                run.trace_hash = res.trace_hash.hex();
            } catch (const std::exception& e) {
                run.error = e.what();
            }
            const auto d = ++done;
            if (progress) {
                std::lock_guard lock(progress_mu);
                progress(d, total);
            }
        }
    };

    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(total)));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return r;
}

void write_sweep_schema(std::ostream& out, const SweepResult& r)
{
    std::vector<std::pair<std::string, std::string>> leading{{"row_type", "run or mean"}};
    for (const auto& a : r.axes) leading.emplace_back(a.key, "swept parameter");
    leading.emplace_back("seed", "run seed, empty on mean rows");
    leading.emplace_back("runs", "successful runs behind a mean row");
    leading.emplace_back("trace_hash", "run trace digest");
    leading.emplace_back("error", "run failure message");
    write_schema(out, leading);
    for (const auto& c : metric_columns()) {
        out << c.name << "_sd," << c.unit << ",sample standard deviation over seeds (mean rows only)\n";
    }
}

void write_sweep_csv(std::ostream& out, const SweepResult& r)
{
    const auto& cols = metric_columns();
    out << "row_type";
    for (const auto& a : r.axes) out << ',' << csv_field(a.key);
    out << ",seed,runs,trace_hash,error";
    for (const auto& c : cols) out << ',' << c.name;
    for (const auto& c : cols) out << ',' << c.name << "_sd";
    out << '\n';

    auto point_cells = [&](std::size_t p) {
        for (const auto& v : r.points[p]) out << ',' << csv_field(v);
    };

    for (std::size_t p = 0; p < r.points.size(); ++p) {
        std::vector<const Metrics*> ok;
        for (const auto& run : r.runs) {
            if (run.point != p) continue;
            out << "run";
            point_cells(p);
            out << ',' << run.seed << ",1," << run.trace_hash << ',' << csv_field(run.error);
            for (const auto& c : cols) out << ',' << (run.metrics ? format_number(c.get(*run.metrics)) : "");
            for (std::size_t i = 0; i < cols.size(); ++i) out << ',';
            out << '\n';
            if (run.metrics) ok.push_back(&*run.metrics);
        }
        out << "mean";
        point_cells(p);
        out << ",," << ok.size() << ",,";
        std::vector<double> sd;
        for (const auto& c : cols) {
            if (ok.empty()) {
                out << ',';
                continue;
            }
            double mean = 0;
            for (const auto* m : ok) mean += c.get(*m);
            mean /= static_cast<double>(ok.size());
            double var = 0;
            for (const auto* m : ok) var += (c.get(*m) - mean) * (c.get(*m) - mean);
            sd.push_back(ok.size() > 1 ? std::sqrt(var / static_cast<double>(ok.size() - 1)) : 0.0);
            out << ',' << format_number(mean);
        }
        for (std::size_t i = 0; i < cols.size(); ++i) out << ',' << (ok.empty() ? "" : format_number(sd[i]));
        out << '\n';
    }
}

} // namespace bicomp
