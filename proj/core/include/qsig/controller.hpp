#pragma once

// Signal controllers for a single junction: fixed cycle, cycled QUBO
// (C-QUBO) and the two-stage fair-sharing QUBO cycle.
//
// A controller owns its phase schedule. The simulation loop calls tick() once
// per simulated second and applies the returned phase for [t, t + 1).

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qsig/qubo.hpp"
#include "qsig/signal.hpp"

namespace qsig {

enum class ControllerKind { Fixed, CQubo, Qubo };

std::string_view to_string(ControllerKind kind) noexcept;
ControllerKind parse_controller_kind(std::string_view name);

struct PhaseCommand {
    enum class Kind { Green, Yellow, Continue };

    Kind kind = Kind::Continue;
    std::size_t mode = 0;  // green mode; for yellow, the mode being left
    double duration = 0.0;

    static PhaseCommand green(std::size_t mode, double duration) { return {Kind::Green, mode, duration}; }
    static PhaseCommand yellow(double duration, std::size_t leaving = 0) {
        return {Kind::Yellow, leaving, duration};
    }
    static PhaseCommand keep() { return {}; }

    bool is_green() const noexcept { return kind == Kind::Green; }
    bool is_yellow() const noexcept { return kind == Kind::Yellow; }
    bool is_continue() const noexcept { return kind == Kind::Continue; }

    friend bool operator==(const PhaseCommand&, const PhaseCommand&) = default;
};

struct ControllerOptions {
    ControllerKind kind = ControllerKind::Fixed;
    bool dynamic = false;
    double t_d = 0.7;
    double dynamic_cap = kDefaultDynamicGreenCap;
    std::optional<double> phi;  // default: penalty_floor per solve
    AnnealConfig anneal;
    bool exact_solver = false;

    double min_green = 20.0;
    double proposed_green = 40.0;
    double yellow = 5.0;  // QUBO-driven controllers; the fixed cycle uses the plan's yellow
    double proposal_period = 10.0;

    void validate() const;
};

/// Solver used for the per-step mode selection; stateful closures are allowed.
using ModeSolver = std::function<Assignment(const QuboProblem&)>;

/// Exhaustive solver, or annealing with a per-solve seed derived from `seed`.
ModeSolver make_mode_solver(const ControllerOptions& options, std::uint64_t seed);

struct ActivePhase {
    bool yellow = false;
    std::size_t mode = 0;  // green mode, or the mode being left during yellow
    double start = 0.0;
    std::optional<double> end;  // empty while a C-QUBO green is held open
};

struct ControllerState {
    ControllerKind kind = ControllerKind::Fixed;
    bool started = false;
    ActivePhase active;
    std::deque<PhaseCommand> pending;

    // QUBO cycle
    std::vector<bool> served;
    std::size_t group = 0;

    std::uint64_t solves = 0;
    std::uint64_t warnings = 0;

    std::optional<std::size_t> committed_target() const;
};

struct ControllerContext {
    const SignalPlan& plan;
    const ControllerOptions& options;
    const ModeSolver& solver;
};

/// Mode with the most halting vehicles according to the traffic QUBO, or
/// nothing if the solver returned a non-one-hot assignment.
std::optional<std::size_t> propose_mode(std::span<const int> halts, const ControllerContext& ctx,
                                        ControllerState& state);

/// Phase of the fixed cycle G1, Y, G2, Y, ... containing time t; the duration
/// is the time remaining in that phase.
PhaseCommand fixed_cycle_next(const SignalPlan& plan, double t);

/// One C-QUBO evaluation. Either leaves the schedule untouched (returns
/// Continue) or rewrites it to roll sequentially toward the proposed mode and
/// returns the current green with its committed duration (or, during a yellow,
/// the next green).
PhaseCommand cqubo_step(ControllerState& state, const ControllerContext& ctx,
                        std::span<const int> halts, double t);

/// One fair-sharing step, called when the current green expires. Queues the
/// next green (preceded by a yellow on mode change) and returns the first
/// queued command.
PhaseCommand qubo_cycle_step(ControllerState& state, const ControllerContext& ctx,
                             std::span<const int> halts, double t);

struct PhaseRecord {
    bool yellow = false;
    std::size_t mode = 0;
    double start = 0.0;
    double end = 0.0;
    bool truncated = false;  // still running when the experiment ended

    double duration() const noexcept { return end - start; }
};

class SignalController {
public:
    using HaltSource = std::function<std::vector<int>()>;

    SignalController(SignalPlan plan, ControllerOptions options, std::uint64_t seed);
    SignalController(SignalPlan plan, ControllerOptions options, ModeSolver solver);

    /// Phase for [t, t + 1). `halts` is only called when a solve is needed.
    const ActivePhase& tick(double t, const HaltSource& halts);

    /// Closes the phase log at time t.
    void finish(double t);

    const SignalPlan& plan() const noexcept { return plan_; }
    const ControllerOptions& options() const noexcept { return options_; }
    const ControllerState& state() const noexcept { return state_; }
    const std::vector<PhaseRecord>& log() const noexcept { return log_; }

private:
    void tick_fixed(double t);
    bool advance(double t, const HaltSource& halts);
    void begin(const PhaseCommand& cmd, double t);

    SignalPlan plan_;
    ControllerOptions options_;
    ModeSolver solver_;
    ControllerState state_;
    std::vector<PhaseRecord> log_;
    double next_proposal_ = 0.0;
    bool finished_ = false;
};

}  // namespace qsig
