#include "qsig/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace qsig {

double car_following_speed(double gap, double own_speed, double leader_speed, const VehicleClass& cls,
                           double dt, double epsilon) {
    if (gap < 0.0) gap = 0.0;
    double v_safe = std::isinf(gap) ? kNoLeader : leader_speed + (gap - cls.min_gap) / kHeadway;
    v_safe = std::max(0.0, v_safe);
    const double v_next = std::min({own_speed + cls.accel * dt, cls.max_speed, v_safe});
    return std::max(0.0, v_next - epsilon * cls.decel * dt);
}

double car_following_speed(double gap, double own_speed, double leader_speed, const VehicleClass& cls,
                           double dt, Engine& rng, double imperfection) {
    const double epsilon = imperfection > 0.0 ? imperfection * uniform01(rng) : 0.0;
    return car_following_speed(gap, own_speed, leader_speed, cls, dt, epsilon);
}

namespace {
constexpr double kStep = 1.0;
}

Simulation::Simulation(NetworkSpec network, std::vector<VehicleClass> classes, FlowSpec flows,
                       std::uint64_t seed, SimOptions options)
    : network_(std::move(network)),
      classes_(std::move(classes)),
      flows_(std::move(flows)),
      options_(options),
      driver_rng_(derive_seed(seed, {static_cast<std::uint64_t>(Stream::Driver)})) {
    if (classes_.empty() || classes_.size() > 64) throw std::invalid_argument("need between 1 and 64 vehicle classes");
    for (const auto& c : classes_) c.validate();
    injected_by_class_.assign(classes_.size(), 0);
    network_.validate(classes_);
    flows_.validate();

    lanes_.resize(network_.lanes.size());
    for (std::size_t li = 0; li < network_.lanes.size(); ++li) {
        const Lane& lane = network_.lanes[li];
        LaneState& st = lanes_[li];
        for (const auto& c : lane.allowed_classes) st.class_mask |= std::uint64_t{1} << class_index(c);
        if (!lane.junction.empty()) {
            for (std::size_t j = 0; j < network_.junctions.size(); ++j) {
                if (network_.junctions[j].id == lane.junction) st.junction = j;
            }
        }
        for (const auto& mv : lane.movements) {
            CompiledMovement cm{*network_.lane_index(mv.target), mv.turn, ~std::uint64_t{0}, 0};
            if (!mv.only_classes.empty()) {
                cm.class_mask = 0;
                for (const auto& c : mv.only_classes) cm.class_mask |= std::uint64_t{1} << class_index(c);
            }
            const auto& plan = network_.junctions[*st.junction].plan;
            if (plan.modes.size() > 32) throw std::invalid_argument("at most 32 green modes per junction");
            for (std::size_t m = 0; m < plan.modes.size(); ++m) {
                for (const auto& ref : plan.modes[m].movements) {
                    if (ref.from == lane.id && ref.to == mv.target) cm.mode_mask |= 1U << m;
                }
            }
            st.served_modes |= cm.mode_mask;
            st.movements.push_back(cm);
        }
    }

    std::map<std::pair<std::string, std::string>, double> od_totals;
    for (const auto& f : flows_.flows) od_totals[{f.origin, f.destination}] += f.rate;

    for (std::size_t i = 0; i < flows_.flows.size(); ++i) {
        const OdFlow& f = flows_.flows[i];
        FlowStream s{i, Engine(derive_seed(seed, {static_cast<std::uint64_t>(Stream::Injection), i})), 0.0, {}, {}, {}};
        s.routes = routes_for(f.origin, f.destination, class_index(f.vehicle_class));
        if (s.routes.empty()) {
            throw std::invalid_argument("no route for " + f.vehicle_class + " from " + f.origin + " to " + f.destination);
        }
        if (flows_.truck_share > 0.0 && f.vehicle_class == flows_.car_class && f.rate > 0.0) {
            const double trucks = flows_.truck_share * od_totals[{f.origin, f.destination}];
            s.truck_probability = std::min(1.0, trucks / f.rate);
            s.truck_routes = routes_for(f.origin, f.destination, class_index(flows_.truck_class));
            if (s.truck_routes.empty()) {
                throw std::invalid_argument("no truck route from " + f.origin + " to " + f.destination);
            }
        }
        streams_.push_back(std::move(s));
    }
}

std::size_t Simulation::class_index(std::string_view name) const {
    for (std::size_t i = 0; i < classes_.size(); ++i) {
        if (classes_[i].name == name) return i;
    }
    throw std::invalid_argument("unknown vehicle class '" + std::string(name) + "'");
}

std::size_t Simulation::junction_index(std::string_view id) const {
    for (std::size_t j = 0; j < network_.junctions.size(); ++j) {
        if (network_.junctions[j].id == id) return j;
    }
    throw std::invalid_argument("unknown junction '" + std::string(id) + "'");
}

std::vector<std::vector<std::size_t>> Simulation::resolve_routes(std::size_t origin_lane, std::size_t cls,
                                                                 std::string_view destination) const {
    std::vector<std::vector<std::size_t>> found;
    std::vector<std::size_t> path{origin_lane};
    const std::uint64_t bit = std::uint64_t{1} << cls;
    auto dfs = [&](auto&& self, std::size_t lane) -> void {
        const Lane& l = network_.lanes[lane];
        if (l.kind == LaneKind::Outbound && l.approach == destination) {
            found.push_back(path);
            return;
        }
        if (path.size() > 6) return;
        for (const auto& mv : lanes_[lane].movements) {
            if (!(mv.class_mask & bit) || !(lanes_[mv.target].class_mask & bit)) continue;
            path.push_back(mv.target);
            self(self, mv.target);
            path.pop_back();
        }
    };
    dfs(dfs, origin_lane);
    return found;
}

std::vector<Simulation::RouteOption> Simulation::routes_for(std::string_view origin, std::string_view destination,
                                                            std::size_t cls) const {
    std::vector<RouteOption> out;
    const std::uint64_t bit = std::uint64_t{1} << cls;
    for (std::size_t li = 0; li < network_.lanes.size(); ++li) {
        const Lane& l = network_.lanes[li];
        if (l.kind != LaneKind::Inbound || l.approach != origin || !(lanes_[li].class_mask & bit)) continue;
        auto routes = resolve_routes(li, cls, destination);
        if (!routes.empty()) out.push_back({std::move(routes.front())});
    }
    return out;
}

std::size_t Simulation::inject(double t) {
    std::size_t spawned = 0;
    for (auto& s : streams_) {
        const OdFlow& f = flows_.flows[s.flow];
        if (t < f.begin || t >= f.end) continue;
        std::size_t count = 0;
        if (flows_.arrival == ArrivalProcess::Bernoulli) {
            const double p = f.rate * kStep / 3600.0;
            const double whole = std::floor(p);
            count = static_cast<std::size_t>(whole) + (uniform01(s.rng) < p - whole ? 1 : 0);
        } else {
            const double local = t - f.begin;
            count = static_cast<std::size_t>(std::floor(f.rate * (local + kStep) / 3600.0) -
                                             std::floor(f.rate * local / 3600.0));
        }
        for (std::size_t k = 0; k < count; ++k) spawn(s, t);
        spawned += count;
    }
    return spawned;
}

void Simulation::spawn(FlowStream& s, double t) {
    const OdFlow& f = flows_.flows[s.flow];
    std::size_t cls = class_index(f.vehicle_class);
    const std::vector<RouteOption>* options = &s.routes;
    if (s.truck_probability > 0.0 && uniform01(s.rng) < s.truck_probability) {
        cls = class_index(flows_.truck_class);
        options = &s.truck_routes;
    }
    const auto& choice = (*options)[uniform_index(s.rng, options->size())];
    Vehicle v;
    v.id = next_id_++;
    v.cls = cls;
    v.route = choice.route;
    v.spawned_at = t;
    lanes_[v.route.front()].entry_queue.push_back(std::move(v));
    ++injected_;
    ++injected_by_class_[cls];
}

std::uint64_t Simulation::place_vehicle(std::string_view lane, std::string_view cls, double position, double speed,
                                        std::string_view destination) {
    const auto li = network_.lane_index(lane);
    if (!li) throw std::invalid_argument("unknown lane '" + std::string(lane) + "'");
    Vehicle v;
    v.id = next_id_++;
    v.cls = class_index(cls);
    if (destination.empty()) {
        v.route = {*li};
    } else {
        auto routes = resolve_routes(*li, v.cls, destination);
        if (routes.empty()) throw std::invalid_argument("no route from " + std::string(lane) + " to " + std::string(destination));
        v.route = routes.front();
    }
    v.position = std::clamp(position, 0.0, network_.lanes[*li].length);
    v.speed = speed;
    v.spawned_at = v.entered_at = time_;
    auto& q = lanes_[*li].vehicles;
    auto at = std::find_if(q.begin(), q.end(), [&](const Vehicle& o) { return o.position < v.position; });
    ++injected_by_class_[v.cls];
    q.insert(at, std::move(v));
    ++injected_;
    return next_id_ - 1;
}

const Simulation::CompiledMovement* Simulation::next_movement(const Vehicle& v) const {
    if (v.on_last_leg()) return nullptr;
    const std::size_t next = v.route[v.leg + 1];
    for (const auto& mv : lanes_[v.lane()].movements) {
        if (mv.target == next) return &mv;
    }
    return nullptr;
}

std::optional<std::uint32_t> Simulation::movement_modes(std::size_t from, std::size_t to) const {
    for (const auto& mv : lanes_.at(from).movements) {
        if (mv.target == to) return mv.mode_mask;
    }
    return std::nullopt;
}

bool Simulation::movement_open(const CompiledMovement& mv, const PhaseVector& phases, std::size_t from) const {
    const auto& j = lanes_[from].junction;
    if (!j || *j >= phases.size() || !phases[*j]) return false;
    return (mv.mode_mask >> *phases[*j]) & 1U;
}

double Simulation::tail_rear(std::size_t lane) const {
    const auto& q = lanes_[lane].vehicles;
    if (q.empty()) return network_.lanes[lane].length;
    const Vehicle& tail = q.back();
    return tail.position - classes_[tail.cls].length;
}

bool Simulation::can_enter(std::size_t lane, const Vehicle& v) const {
    const LaneState& st = lanes_[lane];
    if (network_.lanes[lane].kind == LaneKind::WaitingBox) {
        return static_cast<int>(st.vehicles.size()) + st.reserved_slots < network_.lanes[lane].capacity;
    }
    const auto& c = classes_[v.cls];
    return tail_rear(lane) - st.reserved_length >= c.length + c.min_gap;
}

void Simulation::reserve(std::size_t lane, const Vehicle& v, int sign) {
    const auto& c = classes_[v.cls];
    lanes_[lane].reserved_slots += sign;
    lanes_[lane].reserved_length += sign * (c.length + c.min_gap);
}

void Simulation::start_crossing(Vehicle v, std::size_t from, const CompiledMovement& mv, double speed,
                                StepEvents& events) {
    const std::size_t j = *lanes_[from].junction;
    const double d = network_.junctions[j].crossing_distance;
    v.speed = speed;
    const int steps = std::max(1, static_cast<int>(std::ceil(d / std::max(speed, 1.0))));
    reserve(mv.target, v, +1);
    events.crossings.push_back({v.id, from, mv.target, j, mv.mode_mask});
    transit_.push_back({std::move(v), mv.target, steps, d});
}

StepEvents Simulation::advance(const PhaseVector& phases) {
    StepEvents events;
    const double t = time_;

    // 1. Junction interiors: vehicles whose crossing is complete join the target.
    {
        std::vector<Transit> still;
        still.reserve(transit_.size());
        for (auto& tr : transit_) {
            if (tr.remaining > 0) --tr.remaining;
            if (tr.remaining > 0) {
                still.push_back(std::move(tr));
                continue;
            }
            LaneState& target = lanes_[tr.to];
            const Lane& ln = network_.lanes[tr.to];
            Vehicle& v = tr.vehicle;
            const auto& c = classes_[v.cls];
            if (ln.kind == LaneKind::WaitingBox) {
                v.position = 0.0;
                v.speed = 0.0;
            } else {
                if (tail_rear(tr.to) - c.length < c.min_gap) {
                    v.speed = 0.0;  // wait inside the junction for room
                    still.push_back(std::move(tr));
                    continue;
                }
                v.position = std::min(c.length, ln.length);
            }
            reserve(tr.to, v, -1);
            v.distance += tr.crossing;
            ++v.leg;
            target.vehicles.push_back(std::move(v));
        }
        transit_ = std::move(still);
    }

    // 2. Waiting boxes release one scooter per step onto the cross street.
    for (std::size_t li = 0; li < lanes_.size(); ++li) {
        if (network_.lanes[li].kind != LaneKind::WaitingBox || lanes_[li].vehicles.empty()) continue;
        const Vehicle& front = lanes_[li].vehicles.front();
        const CompiledMovement* mv = next_movement(front);
        if (!mv || !movement_open(*mv, phases, li) || !can_enter(mv->target, front)) continue;
        const auto& c = classes_[front.cls];
        Vehicle v = std::move(lanes_[li].vehicles.front());
        lanes_[li].vehicles.pop_front();
        start_crossing(std::move(v), li, *mv, std::min(c.accel * kStep, c.max_speed), events);
    }

    // 3. Car following along lanes, synchronous update from the previous state.
    std::vector<double> old_pos, old_speed, new_pos, new_speed;
    for (std::size_t li = 0; li < lanes_.size(); ++li) {
        const Lane& ln = network_.lanes[li];
        if (ln.kind == LaneKind::WaitingBox) continue;
        auto& q = lanes_[li].vehicles;
        const std::size_t n = q.size();
        if (n == 0) continue;
        old_pos.resize(n);
        old_speed.resize(n);
        new_pos.resize(n);
        new_speed.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            old_pos[i] = q[i].position;
            old_speed[i] = q[i].speed;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const Vehicle& v = q[i];
            const auto& c = classes_[v.cls];
            double gap = kNoLeader;
            double leader_speed = 0.0;
            if (i > 0) {
                gap = old_pos[i - 1] - classes_[q[i - 1].cls].length - old_pos[i];
                leader_speed = old_speed[i - 1];
            } else if (const CompiledMovement* mv = next_movement(v)) {
                const bool open = movement_open(*mv, phases, li) && can_enter(mv->target, v);
                if (!open) gap = ln.length - old_pos[i];  // stop line as a stationary obstacle
            }
            new_speed[i] = car_following_speed(gap, old_speed[i], leader_speed, c, kStep, driver_rng_,
                                               options_.imperfection);
        }

        std::size_t left = 0;
        for (std::size_t i = 0; i < n; ++i) {
            Vehicle& v = q[i];
            double pos = old_pos[i] + new_speed[i] * kStep;
            double speed = new_speed[i];
            if (i > left) {
                // Leader still on the lane: keep min_gap behind its new rear
                // bumper, or at least hold position if already closer.
                const double limit = new_pos[i - 1] - classes_[q[i - 1].cls].length - classes_[v.cls].min_gap;
                if (pos > limit) {
                    pos = std::max(old_pos[i], limit);
                    speed = (pos - old_pos[i]) / kStep;
                }
            }
            if (pos >= ln.length && left == i) {
                if (v.on_last_leg()) {
                    v.distance += ln.length - old_pos[i];
                    ++departed_;
                    events.departures.push_back({v.id, v.cls, v.spawned_at, v.entered_at, t + kStep, v.distance});
                    ++left;
                    continue;
                }
                const CompiledMovement* mv = next_movement(v);
                if (mv && movement_open(*mv, phases, li) && can_enter(mv->target, v)) {
                    v.distance += ln.length - old_pos[i];
                    v.position = ln.length;
                    start_crossing(std::move(v), li, *mv, std::max(speed, 0.0), events);
                    ++left;
                    continue;
                }
                pos = ln.length;
                speed = 0.0;
            } else if (pos > ln.length) {
                pos = ln.length;
                speed = (pos - old_pos[i]) / kStep;
            }
            v.distance += pos - old_pos[i];
            v.position = pos;
            v.speed = speed;
            new_pos[i] = pos;
        }
        for (std::size_t k = 0; k < left; ++k) q.pop_front();
    }

    // 4. Queued spawns enter at the lane start when there is room.
    for (std::size_t li = 0; li < lanes_.size(); ++li) {
        auto& st = lanes_[li];
        if (st.entry_queue.empty()) continue;
        Vehicle& v = st.entry_queue.front();
        if (!can_enter(li, v)) continue;
        const auto& c = classes_[v.cls];
        const double length = network_.lanes[li].length;
        v.position = std::min(c.length, length);
        double speed = c.max_speed;
        if (!st.vehicles.empty()) {
            const double gap = tail_rear(li) - v.position;
            speed = std::min(speed, std::max(0.0, st.vehicles.back().speed + (gap - c.min_gap) / kHeadway));
        }
        v.speed = speed;
        v.entered_at = t;
        st.vehicles.push_back(std::move(v));
        st.entry_queue.pop_front();
        ++events.inserted;
    }

    time_ = t + kStep;
    return events;
}

std::vector<int> Simulation::halting_counts(std::size_t junction) const {
    const auto& plan = network_.junctions.at(junction).plan;
    std::vector<int> counts(plan.modes.size(), 0);
    for (std::size_t li = 0; li < lanes_.size(); ++li) {
        const LaneState& st = lanes_[li];
        if (!st.junction || *st.junction != junction || st.served_modes == 0) continue;
        int halted = 0;
        for (const auto& v : st.vehicles) {
            if (v.speed <= options_.halting_speed) ++halted;
        }
        if (halted == 0) continue;
        for (std::size_t m = 0; m < counts.size(); ++m) {
            if ((st.served_modes >> m) & 1U) counts[m] += halted;
        }
    }
    return counts;
}

HaltCountMatrix Simulation::halting_counts() const {
    std::vector<std::vector<int>> rows;
    for (std::size_t j = 0; j < network_.junctions.size(); ++j) rows.push_back(halting_counts(j));
    return HaltCountMatrix(std::move(rows));
}

SpeedTally Simulation::sample_speeds() const {
    SpeedTally tally;
    for (const auto& st : lanes_) {
        for (const auto& v : st.vehicles) {
            tally.sum += v.speed;
            ++tally.count;
        }
    }
    for (const auto& tr : transit_) {
        tally.sum += tr.vehicle.speed;
        ++tally.count;
    }
    return tally;
}

std::size_t Simulation::queued() const noexcept {
    std::size_t n = 0;
    for (const auto& st : lanes_) n += st.entry_queue.size();
    return n;
}

std::size_t Simulation::on_lanes() const noexcept {
    std::size_t n = 0;
    for (const auto& st : lanes_) n += st.vehicles.size();
    return n;
}

}  // namespace qsig
