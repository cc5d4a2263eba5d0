// qsig: run signal-control experiments from the command line.
//
//   qsig run --scenario dongda --preset T1 --controller qubo --out run.csv
//   qsig sweep --scenario dongda --preset T1 --controller qubo --td-from 0.1 --td-to 1.0 --td-step 0.1
//   qsig compare --scenario dongda --preset T1 --controllers fixed,cqubo,qubo --seeds 5
//   qsig scenario --scenario dongda --preset T2 --out dongda_t2.scn

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "qsig/harness.hpp"

using namespace qsig;

namespace {

struct CommonArgs {
    std::string scenario = "dongda";
    std::string preset;
    std::string controller = "fixed";
    bool dynamic = false;
    double t_d = 0.0;
    double duration = 0.0;
    std::uint64_t seed = 1;
    int reads = 0;
    int sweeps = 0;
    double phi = 0.0;
    bool exact = false;
    double warmup = 0.0;
    double imperfection = 0.5;
    std::string out;
    std::string gnuplot;
    std::string phase_log;
    unsigned jobs = 0;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool with_controller) {
    cmd->add_option("--scenario", a.scenario, "Scenario name (simple, dongda) or scenario file")->capture_default_str();
    cmd->add_option("--preset", a.preset, "Demand preset (H, D, L, LT, LR, LRB, T1..T4)");
    if (with_controller) {
        cmd->add_option("--controller", a.controller, "fixed, cqubo or qubo")->capture_default_str();
    }
    cmd->add_option("--duration", a.duration, "Simulated seconds (default: the scenario's)");
    cmd->add_option("--seed", a.seed, "Master seed")->capture_default_str();
    cmd->add_option("--reads", a.reads, "Annealer reads per solve");
    cmd->add_option("--sweeps", a.sweeps, "Annealer sweeps per read");
    cmd->add_option("--phi", a.phi, "One-hot penalty weight (default: 1 + max halting count)");
    cmd->add_flag("--exact", a.exact, "Use the exhaustive solver instead of annealing");
    cmd->add_option("--warmup", a.warmup, "Exclude speed samples before this time (s)");
    cmd->add_option("--imperfection", a.imperfection, "Driver imperfection bound in [0, 1)")->capture_default_str();
    cmd->add_option("--out", a.out, "CSV output path (default: stdout)");
    cmd->add_option("--gnuplot", a.gnuplot, "Also write a gnuplot script to this path");
    cmd->add_option("--jobs", a.jobs, "Parallel experiments (0: all cores)");
}

ExperimentConfig to_config(const CommonArgs& a) {
    ExperimentConfig c;
    c.scenario = a.scenario;
    c.preset = a.preset;
    c.controller = parse_controller_kind(a.controller);
    c.dynamic = a.dynamic;
    if (a.dynamic) c.t_d = a.t_d;
    if (a.duration != 0.0) c.duration = a.duration;
    c.seed = a.seed;
    if (a.reads != 0) c.anneal_reads = a.reads;
    if (a.sweeps != 0) c.anneal_sweeps = a.sweeps;
    if (a.phi != 0.0) c.phi = a.phi;
    c.exact_solver = a.exact;
    c.warmup = a.warmup;
    c.output = a.out;
    c.sim.imperfection = a.imperfection;
    c.validate();
    return c;
}

// Writes to the --out file, or stdout.
template <class Fn>
void emit(const std::string& path, Fn&& fn) {
    if (path.empty()) {
        fn(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    fn(out);
}

void maybe_gnuplot(const CommonArgs& a, const std::string& title) {
    if (a.gnuplot.empty()) return;
    std::ofstream out(a.gnuplot);
    if (!out) throw std::runtime_error("cannot write '" + a.gnuplot + "'");
    write_gnuplot_script(out, a.out.empty() ? "results.csv" : a.out, title);
}

std::vector<ControllerKind> parse_controllers(const std::string& list) {
    std::vector<ControllerKind> out;
    std::stringstream ss(list);
    for (std::string item; std::getline(ss, item, ',');) {
        if (!item.empty()) out.push_back(parse_controller_kind(item));
    }
    if (out.empty()) throw std::invalid_argument("--controllers needs at least one controller");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Traffic signal control experiments with QUBO-based phase selection"};
    app.require_subcommand(1);

    CommonArgs run_args;
    auto* run = app.add_subcommand("run", "Run one experiment and write hourly CSV");
    add_common(run, run_args, true);
    run->add_flag("--dynamic", run_args.dynamic, "Green time = halting count x t_d");
    run->add_option("--td", run_args.t_d, "Seconds of green per halting vehicle, in (0, 2]");
    run->add_option("--phase-log", run_args.phase_log, "Write the phase activation log to this path");

    CommonArgs sweep_args;
    sweep_args.controller = "qubo";
    double td_from = 0.1, td_to = 1.0, td_step = 0.1;
    auto* sweep = app.add_subcommand("sweep", "Sweep t_d for a dynamic controller");
    add_common(sweep, sweep_args, true);
    sweep->add_option("--td-from", td_from)->capture_default_str();
    sweep->add_option("--td-to", td_to)->capture_default_str();
    sweep->add_option("--td-step", td_step)->capture_default_str();

    CommonArgs cmp_args;
    std::string controllers = "fixed,cqubo,qubo";
    int seeds = 5;
    auto* cmp = app.add_subcommand("compare", "Compare controllers over several seeds");
    add_common(cmp, cmp_args, false);
    cmp->add_option("--controllers", controllers, "Comma-separated controllers")->capture_default_str();
    cmp->add_option("--seeds", seeds, "Number of seeds, starting at --seed")->capture_default_str();
    cmp->add_flag("--dynamic", cmp_args.dynamic, "Dynamic green durations for the QUBO controllers");
    cmp->add_option("--td", cmp_args.t_d, "Seconds of green per halting vehicle");
    std::string runs_csv;
    cmp->add_option("--runs-out", runs_csv, "Also write the hourly CSV of every run");

    CommonArgs sc_args;
    auto* sc = app.add_subcommand("scenario", "Write a built-in scenario as a scenario file");
    sc->add_option("--scenario", sc_args.scenario, "simple or dongda")->capture_default_str();
    sc->add_option("--preset", sc_args.preset, "Demand preset");
    sc->add_option("--out", sc_args.out, "Output path (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            const ExperimentConfig cfg = to_config(run_args);
            const ExperimentResult r = run_experiment(cfg);
            emit(run_args.out, [&](std::ostream& o) { write_csv(o, {r}); });
            if (!run_args.phase_log.empty()) {
                std::ofstream log(run_args.phase_log);
                if (!log) throw std::runtime_error("cannot write '" + run_args.phase_log + "'");
                write_phase_log(log, r);
            }
            maybe_gnuplot(run_args, r.scenario_name + " " + std::string(to_string(cfg.controller)));
            for (int h : r.empty_hours) std::cerr << "warning: hour " << h << " has no speed samples\n";
            std::cerr << r.scenario_name << ' ' << to_string(cfg.controller) << ": avg speed "
                      << format_number(r.avg_speed) << " m/s, injected " << r.injected << ", departed "
                      << r.departed << ", " << format_number(r.runtime_seconds) << " s\n";
        } else if (sweep->parsed()) {
            ExperimentConfig cfg = to_config(sweep_args);
            const SweepResult s = sweep_td(cfg, td_range(td_from, td_to, td_step), sweep_args.jobs);
            emit(sweep_args.out, [&](std::ostream& o) { write_sweep_csv(o, s); });
            std::cerr << "best t_d " << format_number(s.rows[s.best].t_d) << ": avg speed "
                      << format_number(s.rows[s.best].result.avg_speed) << " m/s\n";
        } else if (cmp->parsed()) {
            const ExperimentConfig cfg = to_config(cmp_args);
            const CompareResult c = compare_controllers(cfg, parse_controllers(controllers), seeds, cmp_args.jobs);
            emit(cmp_args.out, [&](std::ostream& o) { write_compare_csv(o, c); });
            if (!runs_csv.empty()) {
                std::ofstream o(runs_csv);
                if (!o) throw std::runtime_error("cannot write '" + runs_csv + "'");
                write_csv(o, c.runs);
            }
        } else if (sc->parsed()) {
            const ScenarioConfig s = make_scenario(sc_args.scenario, sc_args.preset);
            s.validate();
            emit(sc_args.out, [&](std::ostream& o) { write_scenario(o, s); });
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
