#pragma once

// Experiment runner: scenario + controller + simulator, the hourly
// average-speed metric, t_d sweeps, multi-seed comparisons and CSV output.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qsig/controller.hpp"
#include "qsig/scenario.hpp"
#include "qsig/sim.hpp"

namespace qsig {

struct ExperimentConfig {
    std::string scenario = "dongda";  // "simple", "dongda" or a scenario file path
    std::string preset;               // demand preset; empty keeps the scenario's own flows
    ControllerKind controller = ControllerKind::Fixed;
    bool dynamic = false;
    std::optional<double> t_d;        // required iff dynamic, in (0, 2]
    std::optional<double> duration;   // seconds; default: the scenario's duration
    std::uint64_t seed = 1;
    std::optional<int> anneal_reads;
    std::optional<int> anneal_sweeps;
    std::optional<double> phi;
    bool exact_solver = false;
    double warmup = 0.0;              // samples before this time are excluded
    std::string output;               // CSV path for the CLI; unused by run_experiment
    SimOptions sim;

    void validate() const;
    ControllerOptions controller_options() const;
};

/// Loads the named scenario (or file) and applies the preset and seed.
ScenarioConfig resolve_scenario(const ExperimentConfig& config);

struct SpeedSample {
    double time = 0.0;
    double speed = 0.0;
};

struct HourlySpeed {
    int hour = 0;
    double mean = 0.0;
    std::size_t samples = 0;
};

struct HourlySeries {
    std::vector<HourlySpeed> hours;  // non-empty hours only, ascending
    std::vector<int> empty_hours;    // hours inside the span that had no samples
};

/// Mean of the instantaneous speed samples per whole simulated hour
/// [3600 h, 3600 (h + 1)). `span_hours` (if given) fixes the hour range used
/// to report empty hours.
HourlySeries average_speed_per_hour(const std::vector<SpeedSample>& samples,
                                    std::optional<int> span_hours = std::nullopt);

struct HourlyRow {
    int hour = 0;
    double avg_speed = 0.0;
    double trip_mean = 0.0;  // mean trip speed of vehicles leaving during the hour
    std::uint64_t injected = 0;
    std::uint64_t departed = 0;
    std::size_t samples = 0;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::string scenario_name;
    std::vector<HourlyRow> hours;
    std::vector<int> empty_hours;
    std::uint64_t injected = 0;
    std::uint64_t departed = 0;
    std::uint64_t in_network = 0;  // on lanes or crossing at the end
    std::uint64_t queued = 0;      // spawned but not yet inserted at the end
    double avg_speed = 0.0;        // over all samples of the run
    std::size_t samples = 0;
    std::vector<std::string> junctions;
    std::vector<std::vector<std::string>> mode_names;
    std::vector<std::vector<PhaseRecord>> phase_logs;  // per junction
    std::uint64_t solver_warnings = 0;
    double runtime_seconds = 0.0;
};

/// Called after every simulated second with the phases that were applied.
using StepObserver =
    std::function<void(double t, const Simulation&, const PhaseVector&, const StepEvents&)>;

/// Per second: inject, query the controllers, apply phases, advance, sample.
ExperimentResult run_experiment(const ExperimentConfig& config, const StepObserver& observer = {});

/// Runs configurations concurrently (jobs = 0: hardware concurrency); results
/// are returned in input order.
std::vector<ExperimentResult> run_batch(const std::vector<ExperimentConfig>& configs, unsigned jobs = 0);

struct SweepRow {
    double t_d = 0.0;
    ExperimentResult result;
};

struct SweepResult {
    std::vector<SweepRow> rows;  // ascending t_d
    std::size_t best = 0;        // highest average speed; ties go to the smallest t_d
};

/// One dynamic run per t_d (same seed).
SweepResult sweep_td(const ExperimentConfig& base, std::vector<double> values, unsigned jobs = 0);

/// from, from + step, ... up to `to` (inclusive within half a step).
std::vector<double> td_range(double from, double to, double step);

struct CompareRow {
    ControllerKind controller = ControllerKind::Fixed;
    std::vector<double> speeds;  // one per seed
    double mean_speed = 0.0;
    std::optional<double> improvement;  // relative to the fixed controller, if compared
};

struct CompareResult {
    std::vector<CompareRow> rows;
    std::vector<std::uint64_t> seeds;
    std::vector<ExperimentResult> runs;  // controller-major, then seed
};

/// Every controller on seeds base.seed, base.seed + 1, ...
CompareResult compare_controllers(const ExperimentConfig& base, const std::vector<ControllerKind>& controllers,
                                  int seeds, unsigned jobs = 0);

/// Header plus one row per hourly bucket, 6 significant digits:
/// hour,avg_speed_mps,trip_mean_mps,injected,departed,controller,t_d,seed
void write_csv_header(std::ostream& out);
void write_csv_rows(std::ostream& out, const ExperimentResult& result);
void write_csv(std::ostream& out, const std::vector<ExperimentResult>& results);

void write_sweep_csv(std::ostream& out, const SweepResult& sweep);
void write_compare_csv(std::ostream& out, const CompareResult& compare);
void write_phase_log(std::ostream& out, const ExperimentResult& result);

/// gnuplot script plotting `column` of a CSV written by write_csv.
void write_gnuplot_script(std::ostream& out, const std::string& csv_path, const std::string& title);

/// 6-significant-digit formatting used throughout the CSV output.
std::string format_number(double value);

// Post-hoc audits of a phase log; each returns a description of the first
// violation, or nothing.

/// Greens split into consecutive groups of `mode_count`, each holding every
/// mode exactly once (a trailing partial group must not repeat a mode).
std::optional<std::string> audit_fair_sharing(const std::vector<PhaseRecord>& log, std::size_t mode_count);

/// No completed green shorter than `min_green(mode)`.
std::optional<std::string> audit_min_green(const std::vector<PhaseRecord>& log,
                                           const std::function<double(std::size_t)>& min_green);

/// Every change of green mode is separated by a yellow.
std::optional<std::string> audit_yellow_transitions(const std::vector<PhaseRecord>& log);

/// Minimum green applicable to a controller configuration.
double minimum_green(const ExperimentConfig& config, const SignalPlan& plan, std::size_t mode);

}  // namespace qsig
