#include "qsig/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>
#include <thread>

#include "qsig/random.hpp"

namespace qsig {

namespace {

constexpr double kHour = 3600.0;

bool is_builtin(const std::string& name) { return name == "simple" || name == "dongda"; }

}  // namespace

void ExperimentConfig::validate() const {
    if (scenario.empty()) throw std::invalid_argument("experiment needs a scenario");
    if (dynamic) {
        if (!t_d) throw std::invalid_argument("dynamic green durations need t_d");
        if (!(*t_d > 0.0 && *t_d <= 2.0)) throw std::invalid_argument("t_d must lie in (0, 2]");
        if (controller == ControllerKind::Fixed) {
            throw std::invalid_argument("dynamic durations apply to the cqubo and qubo controllers only");
        }
    }
    if (duration && !(*duration > 0.0)) throw std::invalid_argument("duration must be positive");
    if (anneal_reads && *anneal_reads < 1) throw std::invalid_argument("anneal reads must be >= 1");
    if (anneal_sweeps && *anneal_sweeps < 1) throw std::invalid_argument("anneal sweeps must be >= 1");
    if (phi && !(*phi > 0.0)) throw std::invalid_argument("phi must be positive");
    if (!(warmup >= 0.0)) throw std::invalid_argument("warmup must be non-negative");
    if (!(sim.imperfection >= 0.0 && sim.imperfection < 1.0)) {
        throw std::invalid_argument("imperfection must lie in [0, 1)");
    }
}

ControllerOptions ExperimentConfig::controller_options() const {
    ControllerOptions o;
    o.kind = controller;
    o.dynamic = dynamic;
    if (t_d) o.t_d = *t_d;
    o.phi = phi;
    o.exact_solver = exact_solver;
    if (anneal_reads) o.anneal.num_reads = *anneal_reads;
    if (anneal_sweeps) o.anneal.sweeps = *anneal_sweeps;
    return o;
}

ScenarioConfig resolve_scenario(const ExperimentConfig& config) {
    ScenarioConfig sc;
    if (is_builtin(config.scenario)) {
        sc = make_scenario(config.scenario, config.preset);
    } else {
        sc = load_scenario_file(config.scenario);
        if (!config.preset.empty()) {
            DemandPreset p = demand_preset(config.preset);
            sc.flows = std::move(p.flows);
        }
    }
    sc.seed = config.seed;
    if (config.duration) sc.duration = *config.duration;
    sc.validate();
    return sc;
}

HourlySeries average_speed_per_hour(const std::vector<SpeedSample>& samples, std::optional<int> span_hours) {
    std::map<int, SpeedTally> buckets;
    int last = -1;
    for (const auto& s : samples) {
        const int h = static_cast<int>(std::floor(s.time / kHour));
        auto& b = buckets[h];
        b.sum += s.speed;
        ++b.count;
        last = std::max(last, h);
    }
    const int span = span_hours.value_or(last + 1);
    HourlySeries out;
    for (int h = 0; h < span; ++h) {
        auto it = buckets.find(h);
        if (it == buckets.end() || it->second.count == 0) {
            out.empty_hours.push_back(h);
        }
    }
    for (const auto& [h, b] : buckets) {
        if (b.count > 0) out.hours.push_back({h, b.sum / static_cast<double>(b.count), b.count});
    }
    return out;
}

namespace {

struct HourBucket {
    SpeedTally speed;
    SpeedTally trip;
    std::uint64_t injected = 0;
    std::uint64_t departed = 0;
};

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, const StepObserver& observer) {
    config.validate();
    const auto wall_start = std::chrono::steady_clock::now();
    const ScenarioConfig sc = resolve_scenario(config);
    const ControllerOptions copts = config.controller_options();
    copts.validate();

    Simulation sim(sc.network, sc.classes, sc.flows, config.seed, config.sim);
    std::vector<SignalController> controllers;
    controllers.reserve(sc.network.junctions.size());
    for (std::size_t j = 0; j < sc.network.junctions.size(); ++j) {
        controllers.emplace_back(sc.network.junctions[j].plan, copts,
                                 derive_seed(config.seed, {static_cast<std::uint64_t>(Stream::Anneal), j}));
    }

    const auto steps = static_cast<long>(std::ceil(sc.duration));
    const int span_hours = static_cast<int>(std::ceil(static_cast<double>(steps) / kHour));
    std::vector<HourBucket> buckets(static_cast<std::size_t>(span_hours));
    PhaseVector phases(controllers.size());
    SpeedTally overall;

    for (long step = 0; step < steps; ++step) {
        const double t = static_cast<double>(step);
        auto& bucket = buckets[static_cast<std::size_t>(step / static_cast<long>(kHour))];
        bucket.injected += sim.inject(t);
        for (std::size_t j = 0; j < controllers.size(); ++j) {
            const ActivePhase& ph = controllers[j].tick(t, [&] { return sim.halting_counts(j); });
            phases[j] = ph.yellow ? std::nullopt : std::optional<std::size_t>(ph.mode);
        }
        const StepEvents events = sim.advance(phases);
        for (const auto& d : events.departures) {
            ++bucket.departed;
            bucket.trip.sum += d.trip_speed();
            ++bucket.trip.count;
        }
        if (t >= config.warmup) {
            const SpeedTally s = sim.sample_speeds();
            bucket.speed.sum += s.sum;
            bucket.speed.count += s.count;
            overall.sum += s.sum;
            overall.count += s.count;
        }
        if (observer) observer(t, sim, phases, events);
    }

    ExperimentResult r;
    r.config = config;
    r.scenario_name = sc.name;
    for (int h = 0; h < span_hours; ++h) {
        const auto& b = buckets[static_cast<std::size_t>(h)];
        if (b.speed.count == 0) {
            r.empty_hours.push_back(h);
            continue;
        }
        HourlyRow row;
        row.hour = h;
        row.avg_speed = b.speed.sum / static_cast<double>(b.speed.count);
        row.trip_mean = b.trip.count ? b.trip.sum / static_cast<double>(b.trip.count) : 0.0;
        row.injected = b.injected;
        row.departed = b.departed;
        row.samples = b.speed.count;
        r.hours.push_back(row);
    }
    r.injected = sim.injected();
    r.departed = sim.departed();
    r.in_network = sim.in_network();
    r.queued = sim.queued();
    r.samples = overall.count;
    r.avg_speed = overall.count ? overall.sum / static_cast<double>(overall.count) : 0.0;
    for (std::size_t j = 0; j < controllers.size(); ++j) {
        controllers[j].finish(static_cast<double>(steps));
        const auto& plan = controllers[j].plan();
        r.junctions.push_back(plan.junction_id);
        std::vector<std::string> names;
        for (const auto& m : plan.modes) names.push_back(m.name);
        r.mode_names.push_back(std::move(names));
        r.phase_logs.push_back(controllers[j].log());
        r.solver_warnings += controllers[j].state().warnings;
    }
    r.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    return r;
}

std::vector<ExperimentResult> run_batch(const std::vector<ExperimentConfig>& configs, unsigned jobs) {
    for (const auto& c : configs) c.validate();
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    std::vector<ExperimentResult> results(configs.size());
    std::size_t next = 0;
    while (next < configs.size()) {
        std::vector<std::future<ExperimentResult>> wave;
        const std::size_t first = next;
        for (unsigned k = 0; k < jobs && next < configs.size(); ++k, ++next) {
            wave.push_back(std::async(std::launch::async, [&configs, next] { return run_experiment(configs[next]); }));
        }
        for (std::size_t k = 0; k < wave.size(); ++k) results[first + k] = wave[k].get();
    }
    return results;
}

std::vector<double> td_range(double from, double to, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("t_d step must be positive");
    if (!(to >= from)) throw std::invalid_argument("t_d range must have to >= from");
    std::vector<double> out;
    for (int k = 0;; ++k) {
        const double v = from + step * k;
        if (v > to + step * 0.5) break;
        // Round away binary noise so 0.1 + 0.1 * 2 prints as 0.3.
        out.push_back(std::round(v * 1e9) / 1e9);
    }
    return out;
}

SweepResult sweep_td(const ExperimentConfig& base, std::vector<double> values, unsigned jobs) {
    if (base.controller == ControllerKind::Fixed) {
        throw std::invalid_argument("t_d sweeps need the cqubo or qubo controller");
    }
    if (values.empty()) throw std::invalid_argument("t_d sweep needs at least one value");
    std::sort(values.begin(), values.end());
    std::vector<ExperimentConfig> configs;
    for (double v : values) {
        ExperimentConfig c = base;
        c.dynamic = true;
        c.t_d = v;
        configs.push_back(c);
    }
    auto results = run_batch(configs, jobs);
    SweepResult out;
    for (std::size_t k = 0; k < values.size(); ++k) {
        out.rows.push_back({values[k], std::move(results[k])});
        if (out.rows[k].result.avg_speed > out.rows[out.best].result.avg_speed) out.best = k;
    }
    return out;
}

CompareResult compare_controllers(const ExperimentConfig& base, const std::vector<ControllerKind>& controllers,
                                  int seeds, unsigned jobs) {
    if (seeds < 1) throw std::invalid_argument("compare needs at least one seed");
    if (controllers.empty()) throw std::invalid_argument("compare needs at least one controller");
    CompareResult out;
    for (int s = 0; s < seeds; ++s) out.seeds.push_back(base.seed + static_cast<std::uint64_t>(s));
    std::vector<ExperimentConfig> configs;
    for (auto kind : controllers) {
        for (auto seed : out.seeds) {
            ExperimentConfig c = base;
            c.controller = kind;
            c.seed = seed;
            if (kind == ControllerKind::Fixed) {
                c.dynamic = false;
                c.t_d.reset();
            }
            configs.push_back(c);
        }
    }
    out.runs = run_batch(configs, jobs);
    std::optional<double> fixed_mean;
    for (std::size_t c = 0; c < controllers.size(); ++c) {
        CompareRow row;
        row.controller = controllers[c];
        double sum = 0.0;
        for (std::size_t s = 0; s < out.seeds.size(); ++s) {
            const double v = out.runs[c * out.seeds.size() + s].avg_speed;
            row.speeds.push_back(v);
            sum += v;
        }
        row.mean_speed = sum / static_cast<double>(out.seeds.size());
        if (row.controller == ControllerKind::Fixed && !fixed_mean) fixed_mean = row.mean_speed;
        out.rows.push_back(row);
    }
    if (fixed_mean && *fixed_mean > 0.0) {
        for (auto& row : out.rows) row.improvement = (row.mean_speed - *fixed_mean) / *fixed_mean;
    }
    return out;
}

std::string format_number(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", value);
    return buf;
}

void write_csv_header(std::ostream& out) {
    out << "hour,avg_speed_mps,trip_mean_mps,injected,departed,controller,t_d,seed\n";
}

void write_csv_rows(std::ostream& out, const ExperimentResult& result) {
    const auto& c = result.config;
    const std::string td = c.dynamic && c.t_d ? format_number(*c.t_d) : std::string();
    for (const auto& row : result.hours) {
        out << row.hour << ',' << format_number(row.avg_speed) << ',' << format_number(row.trip_mean) << ','
            << row.injected << ',' << row.departed << ',' << to_string(c.controller) << ',' << td << ','
            << c.seed << '\n';
    }
}

void write_csv(std::ostream& out, const std::vector<ExperimentResult>& results) {
    write_csv_header(out);
    for (const auto& r : results) write_csv_rows(out, r);
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
    out << "t_d,avg_speed_mps,best\n";
    for (std::size_t k = 0; k < sweep.rows.size(); ++k) {
        out << format_number(sweep.rows[k].t_d) << ',' << format_number(sweep.rows[k].result.avg_speed) << ','
            << (k == sweep.best ? 1 : 0) << '\n';
    }
}

void write_compare_csv(std::ostream& out, const CompareResult& compare) {
    out << "controller,mean_avg_speed_mps,improvement_vs_fixed";
    for (auto s : compare.seeds) out << ",seed_" << s;
    out << '\n';
    for (const auto& row : compare.rows) {
        out << to_string(row.controller) << ',' << format_number(row.mean_speed) << ','
            << (row.improvement ? format_number(*row.improvement) : std::string());
        for (double v : row.speeds) out << ',' << format_number(v);
        out << '\n';
    }
}

void write_phase_log(std::ostream& out, const ExperimentResult& result) {
    out << "junction,phase,mode,start,end,truncated\n";
    for (std::size_t j = 0; j < result.phase_logs.size(); ++j) {
        for (const auto& p : result.phase_logs[j]) {
            out << result.junctions[j] << ',' << (p.yellow ? "yellow" : "green") << ','
                << result.mode_names[j].at(p.mode) << ',' << format_number(p.start) << ','
                << format_number(p.end) << ',' << (p.truncated ? 1 : 0) << '\n';
        }
    }
}

void write_gnuplot_script(std::ostream& out, const std::string& csv_path, const std::string& title) {
    out << "set datafile separator ','\n"
        << "set key autotitle columnhead\n"
        << "set title '" << title << "'\n"
        << "set xlabel 'hour'\n"
        << "set ylabel 'average speed (m/s)'\n"
        << "set style data linespoints\n"
        << "plot '" << csv_path << "' using 1:2 title 'avg speed', '' using 1:3 title 'trip mean'\n";
}

std::optional<std::string> audit_fair_sharing(const std::vector<PhaseRecord>& log, std::size_t mode_count) {
    std::set<std::size_t> group;
    std::size_t group_index = 0;
    for (const auto& p : log) {
        if (p.yellow) continue;
        if (p.mode >= mode_count) return "green of unknown mode " + std::to_string(p.mode);
        if (!group.insert(p.mode).second) {
            return "cycle group " + std::to_string(group_index) + " serves mode " + std::to_string(p.mode) +
                   " twice (green starting at " + format_number(p.start) + " s)";
        }
        if (group.size() == mode_count) {
            group.clear();
            ++group_index;
        }
    }
    return std::nullopt;
}

std::optional<std::string> audit_min_green(const std::vector<PhaseRecord>& log,
                                           const std::function<double(std::size_t)>& min_green) {
    for (const auto& p : log) {
        if (p.yellow || p.truncated) continue;
        if (p.duration() + 1e-9 < min_green(p.mode)) {
            return "green of mode " + std::to_string(p.mode) + " at " + format_number(p.start) + " s lasted " +
                   format_number(p.duration()) + " s, below the minimum " + format_number(min_green(p.mode));
        }
    }
    return std::nullopt;
}

std::optional<std::string> audit_yellow_transitions(const std::vector<PhaseRecord>& log) {
    const PhaseRecord* last_green = nullptr;
    bool yellow_since = false;
    for (const auto& p : log) {
        if (p.yellow) {
            yellow_since = true;
            continue;
        }
        if (last_green && last_green->mode != p.mode && !yellow_since) {
            return "mode change at " + format_number(p.start) + " s without a yellow";
        }
        last_green = &p;
        yellow_since = false;
    }
    return std::nullopt;
}

double minimum_green(const ExperimentConfig& config, const SignalPlan& plan, std::size_t mode) {
    if (config.controller == ControllerKind::Fixed) return plan.modes.at(mode).fixed_green;
    if (config.dynamic) return kMinDynamicGreen;
    return config.controller_options().min_green;
}

}  // namespace qsig
