#pragma once

// Discrete-time (1 s) microscopic simulation of one or more signalised
// junctions with mixed car / scooter / truck traffic.
//
// Vehicles follow a simplified Krauss model along single lanes, queue at the
// stop line while their movement is not green, cross the junction in a fixed
// number of steps and leave at the end of their outbound lane. Scooters turning
// left do so in two stages through a corner waiting box.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qsig/network.hpp"
#include "qsig/random.hpp"
#include "qsig/signal.hpp"

namespace qsig {

inline constexpr double kHaltingSpeed = 0.1;  // m/s
inline constexpr double kHeadway = 1.0;       // tau, s
inline constexpr double kNoLeader = std::numeric_limits<double>::infinity();

/// Krauss-style speed update with an explicit imperfection draw epsilon:
///   v_safe = leader + (gap - min_gap) / tau  (floored at 0)
///   v      = max(0, min(own + accel dt, max_speed, v_safe) - epsilon decel dt)
double car_following_speed(double gap, double own_speed, double leader_speed, const VehicleClass& cls,
                           double dt, double epsilon);

/// Same, with epsilon drawn uniformly from [0, imperfection).
double car_following_speed(double gap, double own_speed, double leader_speed, const VehicleClass& cls,
                           double dt, Engine& rng, double imperfection = 0.5);

struct SimOptions {
    double imperfection = 0.5;  // upper bound of epsilon; 0 disables driver noise
    double halting_speed = kHaltingSpeed;
};

struct Vehicle {
    std::uint64_t id = 0;
    std::size_t cls = 0;
    std::vector<std::size_t> route;  // lane indices: entry lane, [box], exit lane
    std::size_t leg = 0;             // index into route of the current lane
    double position = 0.0;           // front bumper, metres from the lane start
    double speed = 0.0;
    double spawned_at = 0.0;
    double entered_at = 0.0;  // inserted into the network
    double distance = 0.0;

    std::size_t lane() const { return route[leg]; }
    bool on_last_leg() const { return leg + 1 >= route.size(); }
};

struct Crossing {
    std::uint64_t vehicle = 0;
    std::size_t from = 0;
    std::size_t to = 0;
    std::size_t junction = 0;
    std::uint32_t mode_mask = 0;  // green modes permitting this movement
};

struct Departure {
    std::uint64_t vehicle = 0;
    std::size_t cls = 0;
    double spawned_at = 0.0;
    double entered_at = 0.0;
    double departed_at = 0.0;
    double distance = 0.0;

    double trip_speed() const {
        const double dt = departed_at - entered_at;
        return dt > 0.0 ? distance / dt : 0.0;
    }
};

struct StepEvents {
    std::size_t spawned = 0;
    std::size_t inserted = 0;
    std::vector<Crossing> crossings;
    std::vector<Departure> departures;
};

struct SpeedTally {
    double sum = 0.0;
    std::size_t count = 0;
};

/// Green mode per junction for the current step; empty means all red (yellow).
using PhaseVector = std::vector<std::optional<std::size_t>>;

class Simulation {
public:
    Simulation(NetworkSpec network, std::vector<VehicleClass> classes, FlowSpec flows, std::uint64_t seed,
               SimOptions options = {});

    /// Spawns this second's demand into the per-lane entry queues.
    std::size_t inject(double t);

    /// One 1 s step under the given phases.
    StepEvents advance(const PhaseVector& phases);

    HaltCountMatrix halting_counts() const;
    std::vector<int> halting_counts(std::size_t junction) const;

    /// Instantaneous speeds of every vehicle in the network (lanes, boxes,
    /// junction interiors); queued spawns are not yet in the network.
    SpeedTally sample_speeds() const;

    double time() const noexcept { return time_; }
    const NetworkSpec& network() const noexcept { return network_; }
    const std::vector<VehicleClass>& classes() const noexcept { return classes_; }
    const std::deque<Vehicle>& lane_vehicles(std::size_t lane) const { return lanes_.at(lane).vehicles; }
    std::size_t junction_index(std::string_view id) const;

    std::uint64_t injected() const noexcept { return injected_; }
    const std::vector<std::uint64_t>& injected_by_class() const noexcept { return injected_by_class_; }
    std::uint64_t departed() const noexcept { return departed_; }
    std::size_t queued() const noexcept;
    std::size_t in_transit() const noexcept { return transit_.size(); }
    std::size_t on_lanes() const noexcept;
    std::size_t in_network() const noexcept { return on_lanes() + in_transit(); }

    /// Mode mask of the movement from lane `from` to lane `to`, if any.
    std::optional<std::uint32_t> movement_modes(std::size_t from, std::size_t to) const;

    /// Places a vehicle directly on a lane (tests and warm starts). The route
    /// is resolved from `lane` to `destination` (an approach side), or ends on
    /// `lane` if the destination is empty.
    std::uint64_t place_vehicle(std::string_view lane, std::string_view cls, double position, double speed,
                                std::string_view destination = {});

private:
    struct CompiledMovement {
        std::size_t target;
        Turn turn;
        std::uint64_t class_mask;
        std::uint32_t mode_mask;
    };
    struct LaneState {
        std::deque<Vehicle> vehicles;  // front (nearest the end) first
        std::deque<Vehicle> entry_queue;
        double reserved_length = 0.0;
        int reserved_slots = 0;
        std::uint64_t class_mask = 0;
        std::optional<std::size_t> junction;
        std::uint32_t served_modes = 0;
        std::vector<CompiledMovement> movements;
    };
    struct Transit {
        Vehicle vehicle;
        std::size_t to;
        int remaining;
        double crossing;
    };
    struct RouteOption {
        std::vector<std::size_t> route;
    };
    struct FlowStream {
        std::size_t flow;
        Engine rng;
        double truck_probability;
        std::vector<RouteOption> car_routes;
        std::vector<RouteOption> truck_routes;
        std::vector<RouteOption> routes;  // for the flow's own class
    };

    std::vector<std::vector<std::size_t>> resolve_routes(std::size_t origin_lane, std::size_t cls,
                                                         std::string_view destination) const;
    std::vector<RouteOption> routes_for(std::string_view origin, std::string_view destination,
                                        std::size_t cls) const;
    std::size_t class_index(std::string_view name) const;
    const CompiledMovement* next_movement(const Vehicle& v) const;
    bool movement_open(const CompiledMovement& mv, const PhaseVector& phases, std::size_t from) const;
    bool can_enter(std::size_t lane, const Vehicle& v) const;
    double tail_rear(std::size_t lane) const;
    void reserve(std::size_t lane, const Vehicle& v, int sign);
    void start_crossing(Vehicle v, std::size_t from, const CompiledMovement& mv, double speed,
                        StepEvents& events);
    void spawn(FlowStream& stream, double t);

    NetworkSpec network_;
    std::vector<VehicleClass> classes_;
    FlowSpec flows_;
    SimOptions options_;
    std::vector<LaneState> lanes_;
    std::vector<Transit> transit_;
    std::vector<FlowStream> streams_;
    Engine driver_rng_;
    double time_ = 0.0;
    std::uint64_t next_id_ = 1;
    std::uint64_t injected_ = 0;
    std::vector<std::uint64_t> injected_by_class_;
    std::uint64_t departed_ = 0;
};

}  // namespace qsig
