#pragma once

// Static description of an intersection network: vehicle classes, lanes,
// waiting boxes, junctions and their signal plans, and origin-destination
// demand. Everything here is plain data; sim.hpp compiles it for stepping.

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qsig/signal.hpp"

namespace qsig {

struct VehicleClass {
    std::string name;
    double length = 5.0;      // m
    double max_speed = 13.9;  // m/s
    double accel = 2.6;       // m/s^2
    double decel = 4.5;       // m/s^2
    double min_gap = 2.5;     // m

    void validate() const;
};

/// Car, Scooter and Truck with the default kinematics.
std::vector<VehicleClass> default_vehicle_classes();

enum class Turn { Left, Through, Right, UTurn };
std::string_view to_string(Turn turn) noexcept;
Turn parse_turn(std::string_view name);

enum class LaneKind { Inbound, Outbound, WaitingBox };
std::string_view to_string(LaneKind kind) noexcept;
LaneKind parse_lane_kind(std::string_view name);

struct Movement {
    Turn turn = Turn::Through;
    std::string target;
    std::vector<std::string> only_classes;  // empty: every class the lane admits
};

/// A lane, or a scooter waiting box for two-stage left turns (kind
/// WaitingBox, holding up to `capacity` stopped scooters).
struct Lane {
    std::string id;
    LaneKind kind = LaneKind::Inbound;
    double length = 100.0;
    std::string approach;  // L, T, R or B; for outbound lanes the side the lane leaves by
    std::string junction;  // junction served (inbound lanes and boxes)
    std::vector<std::string> allowed_classes;
    std::vector<Movement> movements;
    int capacity = 0;

    bool allows(std::string_view cls) const;
};

struct Junction {
    std::string id;
    double crossing_distance = 20.0;  // m, internal path length through the junction
    SignalPlan plan;
};

struct NetworkSpec {
    std::vector<Lane> lanes;
    std::vector<Junction> junctions;

    const Lane* find_lane(std::string_view id) const;
    std::optional<std::size_t> lane_index(std::string_view id) const;

    /// Checks lane references, that every movement is served by some green
    /// mode, and that no green mode contains conflicting movements.
    void validate(const std::vector<VehicleClass>& classes) const;
};

/// Approach sides, clockwise from the top: T (north), R (east), B (south), L (west).
std::optional<int> side_index(std::string_view approach);
/// Side a movement leaves by.
std::string destination_side(std::string_view origin, Turn turn);
/// Turn that takes a vehicle from `origin` to `destination`.
Turn turn_between(std::string_view origin, std::string_view destination);

/// Geometric conflict between movements (origin side, turn) of right-hand traffic.
bool movements_conflict(std::string_view origin_a, Turn turn_a, std::string_view origin_b, Turn turn_b);

struct OdFlow {
    std::string origin;
    std::string destination;
    std::string vehicle_class;
    double rate = 0.0;  // vehicles per hour
    double begin = 0.0;
    double end = std::numeric_limits<double>::infinity();
};

enum class ArrivalProcess { Bernoulli, Uniform };
std::string_view to_string(ArrivalProcess p) noexcept;
ArrivalProcess parse_arrival(std::string_view name);

struct FlowSpec {
    std::vector<OdFlow> flows;
    /// Fraction of each OD pair's total volume spawned as trucks, taken out
    /// of the car volume so totals are preserved.
    double truck_share = 0.0;
    std::string car_class = "Car";
    std::string truck_class = "Truck";
    ArrivalProcess arrival = ArrivalProcess::Bernoulli;

    void validate() const;
    double total_rate() const;
};

}  // namespace qsig
