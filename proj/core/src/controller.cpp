#include "qsig/controller.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "qsig/random.hpp"

namespace qsig {

std::string_view to_string(ControllerKind kind) noexcept {
    switch (kind) {
        case ControllerKind::Fixed: return "fixed";
        case ControllerKind::CQubo: return "cqubo";
        case ControllerKind::Qubo: return "qubo";
    }
    return "unknown";
}

ControllerKind parse_controller_kind(std::string_view name) {
    if (name == "fixed") return ControllerKind::Fixed;
    if (name == "cqubo") return ControllerKind::CQubo;
    if (name == "qubo") return ControllerKind::Qubo;
    throw std::invalid_argument("unknown controller '" + std::string(name) +
                                "' (expected fixed, cqubo or qubo)");
}

void ControllerOptions::validate() const {
    if (dynamic && (!(t_d > 0.0) || t_d > 2.0)) {
        throw std::invalid_argument("t_d must lie in (0, 2] when dynamic durations are enabled");
    }
    if (phi && !(*phi > 0.0)) throw std::invalid_argument("phi override must be positive");
    if (!(min_green > 0.0) || !(proposed_green > 0.0) || !(yellow > 0.0) || !(proposal_period > 0.0)) {
        throw std::invalid_argument("controller durations must be positive");
    }
    if (!(dynamic_cap >= kMinDynamicGreen)) throw std::invalid_argument("dynamic cap must be >= 10 s");
    anneal.validate();
}

ModeSolver make_mode_solver(const ControllerOptions& options, std::uint64_t seed) {
    if (options.exact_solver) return [](const QuboProblem& q) { return solve_exact(q); };
    auto counter = std::make_shared<std::uint64_t>(0);
    AnnealConfig base = options.anneal;
    return [base, seed, counter](const QuboProblem& q) {
        AnnealConfig cfg = base;
        cfg.seed = derive_seed(seed, {static_cast<std::uint64_t>(Stream::Anneal), (*counter)++});
        return solve_anneal(q, cfg);
    };
}

std::optional<std::size_t> ControllerState::committed_target() const {
    for (auto it = pending.rbegin(); it != pending.rend(); ++it) {
        if (it->is_green()) return it->mode;
    }
    if (!active.yellow) return active.mode;
    return std::nullopt;
}

std::optional<std::size_t> propose_mode(std::span<const int> halts, const ControllerContext& ctx,
                                        ControllerState& state) {
    const HaltCountMatrix matrix({std::vector<int>(halts.begin(), halts.end())});
    const double phi = ctx.options.phi.value_or(penalty_floor(matrix));
    auto [qubo, layout] = build_traffic_qubo(matrix, phi);
    ++state.solves;
    const Assignment x = ctx.solver(qubo);
    try {
        return decode_selection(x, layout).front();
    } catch (const ConstraintViolation&) {
        ++state.warnings;
        return std::nullopt;
    }
}

PhaseCommand fixed_cycle_next(const SignalPlan& plan, double t) {
    plan.validate();
    const double cycle = plan.cycle_length();
    double local = std::fmod(t, cycle);
    if (local < 0.0) local += cycle;
    for (std::size_t m = 0; m < plan.modes.size(); ++m) {
        const double green = plan.modes[m].fixed_green;
        if (local < green) return PhaseCommand::green(m, green - local);
        local -= green;
        if (local < plan.yellow) return PhaseCommand::yellow(plan.yellow - local, m);
        local -= plan.yellow;
    }
    // fmod rounding can leave local == cycle
    return PhaseCommand::green(0, plan.modes.front().fixed_green);
}

namespace {

double selected_green(const ControllerOptions& opt, std::span<const int> halts, std::size_t mode,
                      double static_duration) {
    if (!opt.dynamic) return static_duration;
    return dynamic_green_duration(halts[mode], opt.t_d, opt.dynamic_cap);
}

}  // namespace

PhaseCommand cqubo_step(ControllerState& state, const ControllerContext& ctx,
                        std::span<const int> halts, double t) {
    const std::size_t n = ctx.plan.mode_count();
    if (halts.size() != n) throw DimensionError("halt row size does not match the plan's mode count");

    const auto proposal = propose_mode(halts, ctx, state);
    if (!proposal) return PhaseCommand::keep();
    const std::size_t p = *proposal;

    const auto target = state.committed_target();
    if ((!state.active.yellow && p == state.active.mode) || (target && p == *target)) {
        return PhaseCommand::keep();
    }

    const auto& opt = ctx.options;
    const double proposed = selected_green(opt, halts, p, opt.proposed_green);

    std::size_t anchor = state.active.mode;
    std::deque<PhaseCommand> schedule;
    if (state.active.yellow) {
        // The green after this yellow is already committed.
        auto next = std::find_if(state.pending.begin(), state.pending.end(),
                                 [](const PhaseCommand& c) { return c.is_green(); });
        anchor = next != state.pending.end() ? next->mode : (state.active.mode + 1) % n;
        schedule.push_back(PhaseCommand::green(anchor, anchor == p ? proposed : opt.min_green));
    } else if (!state.active.end) {
        state.active.end = std::max(state.active.start + opt.min_green, t);
    }
    for (std::size_t m = anchor; m != p;) {
        const std::size_t from = m;
        m = (m + 1) % n;
        schedule.push_back(PhaseCommand::yellow(opt.yellow, from));
        schedule.push_back(PhaseCommand::green(m, m == p ? proposed : opt.min_green));
    }
    state.pending = std::move(schedule);

    if (state.active.yellow) return state.pending.front();
    return PhaseCommand::green(state.active.mode, *state.active.end - state.active.start);
}

PhaseCommand qubo_cycle_step(ControllerState& state, const ControllerContext& ctx,
                             std::span<const int> halts, double t) {
    (void)t;
    const std::size_t n = ctx.plan.mode_count();
    if (halts.size() != n) throw DimensionError("halt row size does not match the plan's mode count");
    if (state.served.size() != n) state.served.assign(n, false);
    if (std::all_of(state.served.begin(), state.served.end(), [](bool b) { return b; })) {
        state.served.assign(n, false);
        ++state.group;
    }

    // Global stage over the full counts.
    const auto global = propose_mode(halts, ctx, state);

    // Local stage: served modes have their counts zeroed.
    std::vector<int> masked(halts.begin(), halts.end());
    for (std::size_t y = 0; y < n; ++y) {
        if (state.served[y]) masked[y] = 0;
    }
    auto local = propose_mode(masked, ctx, state);
    if (!local || state.served[*local]) {
        // Only reachable on a tie at zero or a solver failure: take the
        // unserved mode with the largest count, lowest index first.
        std::optional<std::size_t> pick;
        for (std::size_t y = 0; y < n; ++y) {
            if (state.served[y]) continue;
            if (!pick || masked[y] > masked[*pick]) pick = y;
        }
        local = pick;
    }
    const std::size_t gy = *local;
    state.served[gy] = true;

    const auto& opt = ctx.options;
    const bool agree = global && *global == gy;
    const double duration = selected_green(opt, halts, gy, agree ? opt.proposed_green : opt.min_green);

    if (state.started && (state.active.yellow || state.active.mode != gy)) {
        const std::size_t leaving = state.active.mode;
        state.pending.push_back(PhaseCommand::yellow(opt.yellow, leaving));
    }
    state.pending.push_back(PhaseCommand::green(gy, duration));

    if (std::all_of(state.served.begin(), state.served.end(), [](bool b) { return b; })) {
        state.served.assign(n, false);
        ++state.group;
    }
    return state.pending.front();
}

SignalController::SignalController(SignalPlan plan, ControllerOptions options, std::uint64_t seed)
    : SignalController(plan, options, make_mode_solver(options, seed)) {}

SignalController::SignalController(SignalPlan plan, ControllerOptions options, ModeSolver solver)
    : plan_(std::move(plan)), options_(std::move(options)), solver_(std::move(solver)) {
    plan_.validate();
    options_.validate();
    state_.kind = options_.kind;
    state_.served.assign(plan_.mode_count(), false);
}

void SignalController::begin(const PhaseCommand& cmd, double t) {
    if (state_.started) {
        log_.push_back({state_.active.yellow, state_.active.mode, state_.active.start, t, false});
    }
    ActivePhase next;
    next.yellow = cmd.is_yellow();
    next.mode = cmd.is_yellow() ? state_.active.mode : cmd.mode;
    next.start = t;
    next.end = t + cmd.duration;
    state_.active = next;
    state_.started = true;
}

void SignalController::tick_fixed(double t) {
    const PhaseCommand cmd = fixed_cycle_next(plan_, t);
    const bool same = state_.started && state_.active.yellow == cmd.is_yellow() &&
                      state_.active.mode == cmd.mode;
    if (same) return;
    begin(cmd, t);
    state_.active.mode = cmd.mode;
}

// Moves to the next queued phase. Returns true when a new green mode starts.
bool SignalController::advance(double t, const HaltSource& halts) {
    const ControllerContext ctx{plan_, options_, solver_};
    if (state_.pending.empty()) {
        if (options_.kind == ControllerKind::CQubo) {
            state_.active.end.reset();  // hold the green until the next proposal differs
            return false;
        }
        const auto row = halts();
        qubo_cycle_step(state_, ctx, row, t);
    }
    const PhaseCommand cmd = state_.pending.front();
    state_.pending.pop_front();
    const bool was_green = state_.started && !state_.active.yellow;
    const std::size_t previous = state_.active.mode;
    begin(cmd, t);
    return cmd.is_green() && !(was_green && previous == cmd.mode);
}

const ActivePhase& SignalController::tick(double t, const HaltSource& halts) {
    if (options_.kind == ControllerKind::Fixed) {
        tick_fixed(t);
        return state_.active;
    }

    const ControllerContext ctx{plan_, options_, solver_};
    bool switched = false;
    if (!state_.started) {
        if (options_.kind == ControllerKind::CQubo) {
            begin(PhaseCommand::green(0, options_.min_green), t);
            state_.active.end.reset();
            switched = true;
        } else {
            switched = advance(t, halts);
        }
    }

    auto expire = [&] {
        while (state_.active.end && t >= *state_.active.end) {
            const bool moved = advance(t, halts);
            switched = switched || moved;
            if (!state_.active.end) break;
        }
    };
    expire();

    if (options_.kind == ControllerKind::CQubo && (switched || t >= next_proposal_)) {
        const auto row = halts();
        cqubo_step(state_, ctx, row, t);
        while (t >= next_proposal_) next_proposal_ += options_.proposal_period;
        // The step may commit the current green to end right now.
        switched = false;
        expire();
        if (switched) {
            const auto fresh = halts();
            cqubo_step(state_, ctx, fresh, t);
            expire();
        }
    }
    return state_.active;
}

void SignalController::finish(double t) {
    if (finished_ || !state_.started) return;
    log_.push_back({state_.active.yellow, state_.active.mode, state_.active.start, t, true});
    finished_ = true;
}

}  // namespace qsig
