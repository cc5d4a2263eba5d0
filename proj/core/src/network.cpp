#include "qsig/network.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <stdexcept>

namespace qsig {

void VehicleClass::validate() const {
    if (name.empty()) throw std::invalid_argument("vehicle class needs a name");
    if (!(length > 0.0) || !(max_speed > 0.0) || !(accel > 0.0) || !(decel > 0.0)) {
        throw std::invalid_argument("vehicle class '" + name + "' needs positive kinematics");
    }
    if (!(min_gap >= 0.0)) throw std::invalid_argument("vehicle class '" + name + "' has negative min_gap");
}

std::vector<VehicleClass> default_vehicle_classes() {
    return {
        {"Car", 5.0, 13.9, 2.6, 4.5, 2.5},
        {"Scooter", 2.0, 11.1, 3.0, 5.0, 1.0},
        {"Truck", 10.0, 11.1, 1.3, 4.0, 2.5},
    };
}

std::string_view to_string(Turn turn) noexcept {
    switch (turn) {
        case Turn::Left: return "Left";
        case Turn::Through: return "Through";
        case Turn::Right: return "Right";
        case Turn::UTurn: return "UTurn";
    }
    return "?";
}

Turn parse_turn(std::string_view name) {
    if (name == "Left") return Turn::Left;
    if (name == "Through") return Turn::Through;
    if (name == "Right") return Turn::Right;
    if (name == "UTurn") return Turn::UTurn;
    throw std::invalid_argument("unknown turn '" + std::string(name) + "'");
}

std::string_view to_string(LaneKind kind) noexcept {
    switch (kind) {
        case LaneKind::Inbound: return "inbound";
        case LaneKind::Outbound: return "outbound";
        case LaneKind::WaitingBox: return "box";
    }
    return "?";
}

LaneKind parse_lane_kind(std::string_view name) {
    if (name == "inbound") return LaneKind::Inbound;
    if (name == "outbound") return LaneKind::Outbound;
    if (name == "box") return LaneKind::WaitingBox;
    throw std::invalid_argument("unknown lane kind '" + std::string(name) + "'");
}

std::string_view to_string(ArrivalProcess p) noexcept {
    return p == ArrivalProcess::Bernoulli ? "bernoulli" : "uniform";
}

ArrivalProcess parse_arrival(std::string_view name) {
    if (name == "bernoulli") return ArrivalProcess::Bernoulli;
    if (name == "uniform") return ArrivalProcess::Uniform;
    throw std::invalid_argument("unknown arrival process '" + std::string(name) + "'");
}

bool Lane::allows(std::string_view cls) const {
    return std::find(allowed_classes.begin(), allowed_classes.end(), cls) != allowed_classes.end();
}

const Lane* NetworkSpec::find_lane(std::string_view id) const {
    auto it = std::find_if(lanes.begin(), lanes.end(), [&](const Lane& l) { return l.id == id; });
    return it == lanes.end() ? nullptr : &*it;
}

std::optional<std::size_t> NetworkSpec::lane_index(std::string_view id) const {
    auto it = std::find_if(lanes.begin(), lanes.end(), [&](const Lane& l) { return l.id == id; });
    if (it == lanes.end()) return std::nullopt;
    return static_cast<std::size_t>(it - lanes.begin());
}

namespace {

constexpr std::array<std::string_view, 4> kSides{"T", "R", "B", "L"};

int turn_offset(Turn t) {
    switch (t) {
        case Turn::UTurn: return 0;
        case Turn::Left: return 1;
        case Turn::Through: return 2;
        case Turn::Right: return 3;
    }
    return 2;
}

bool is_left_like(Turn t) { return t == Turn::Left || t == Turn::UTurn; }

}  // namespace

std::optional<int> side_index(std::string_view approach) {
    for (int i = 0; i < 4; ++i) {
        if (kSides[i] == approach) return i;
    }
    return std::nullopt;
}

std::string destination_side(std::string_view origin, Turn turn) {
    const auto k = side_index(origin);
    if (!k) throw std::invalid_argument("unknown approach side '" + std::string(origin) + "'");
    return std::string(kSides[(*k + turn_offset(turn)) % 4]);
}

Turn turn_between(std::string_view origin, std::string_view destination) {
    const auto a = side_index(origin);
    const auto b = side_index(destination);
    if (!a || !b) throw std::invalid_argument("unknown approach side in OD pair");
    switch ((*b - *a + 4) % 4) {
        case 0: return Turn::UTurn;
        case 1: return Turn::Left;
        case 2: return Turn::Through;
        default: return Turn::Right;
    }
}

bool movements_conflict(std::string_view origin_a, Turn turn_a, std::string_view origin_b, Turn turn_b) {
    const auto a = side_index(origin_a);
    const auto b = side_index(origin_b);
    if (!a || !b) return false;  // no geometry to judge by
    const int rel = (*b - *a + 4) % 4;
    if (rel == 0) return false;
    if (rel == 2) return is_left_like(turn_a) != is_left_like(turn_b);
    // Perpendicular approaches.
    if (turn_a == Turn::Right && turn_b == Turn::Right) return false;
    if (turn_a == Turn::Right || turn_b == Turn::Right) {
        return destination_side(origin_a, turn_a) == destination_side(origin_b, turn_b);
    }
    return true;
}

void FlowSpec::validate() const {
    if (truck_share < 0.0 || truck_share >= 1.0) throw std::invalid_argument("truck_share must lie in [0, 1)");
    for (const auto& f : flows) {
        if (!(f.rate >= 0.0) || !std::isfinite(f.rate)) {
            throw std::invalid_argument("flow " + f.origin + f.destination + " has invalid rate");
        }
        if (!(f.end > f.begin)) throw std::invalid_argument("flow window must have end > begin");
    }
}

double FlowSpec::total_rate() const {
    double total = 0.0;
    for (const auto& f : flows) total += f.rate;
    return total;
}

void NetworkSpec::validate(const std::vector<VehicleClass>& classes) const {
    auto known_class = [&](const std::string& c) {
        return std::any_of(classes.begin(), classes.end(), [&](const VehicleClass& v) { return v.name == c; });
    };
    std::set<std::string> ids;
    for (const auto& lane : lanes) {
        if (!ids.insert(lane.id).second) throw std::invalid_argument("duplicate lane id '" + lane.id + "'");
        if (!(lane.length > 0.0)) throw std::invalid_argument("lane '" + lane.id + "' must have positive length");
        if (lane.kind == LaneKind::WaitingBox && lane.capacity < 1) {
            throw std::invalid_argument("waiting box '" + lane.id + "' needs capacity >= 1");
        }
        for (const auto& c : lane.allowed_classes) {
            if (!known_class(c)) throw std::invalid_argument("lane '" + lane.id + "' admits unknown class '" + c + "'");
        }
    }
    auto find_junction = [&](const std::string& id) -> const Junction* {
        for (const auto& j : junctions) {
            if (j.id == id) return &j;
        }
        return nullptr;
    };

    for (const auto& lane : lanes) {
        if (lane.kind != LaneKind::Outbound && lane.movements.empty()) {
            throw std::invalid_argument("lane '" + lane.id + "' has no movements");
        }
        if (!lane.movements.empty() && !find_junction(lane.junction)) {
            throw std::invalid_argument("lane '" + lane.id + "' references unknown junction '" + lane.junction + "'");
        }
        for (const auto& mv : lane.movements) {
            if (!find_lane(mv.target)) {
                throw std::invalid_argument("movement " + lane.id + " -> " + mv.target + " targets an unknown lane");
            }
        }
    }

    for (const auto& j : junctions) {
        j.plan.validate();
        if (!(j.crossing_distance > 0.0)) throw std::invalid_argument("junction '" + j.id + "' crossing distance must be positive");
        // Every mode movement exists, and modes are internally conflict free.
        for (const auto& mode : j.plan.modes) {
            std::vector<std::pair<const Lane*, const Movement*>> resolved;
            for (const auto& ref : mode.movements) {
                const Lane* from = find_lane(ref.from);
                const Movement* mv = nullptr;
                if (from) {
                    for (const auto& m : from->movements) {
                        if (m.target == ref.to) mv = &m;
                    }
                }
                if (!mv || from->junction != j.id) {
                    throw std::invalid_argument("mode " + mode.name + " permits unknown movement " + ref.from + " -> " + ref.to);
                }
                resolved.emplace_back(from, mv);
            }
            for (std::size_t a = 0; a < resolved.size(); ++a) {
                for (std::size_t b = a + 1; b < resolved.size(); ++b) {
                    if (movements_conflict(resolved[a].first->approach, resolved[a].second->turn,
                                           resolved[b].first->approach, resolved[b].second->turn)) {
                        throw std::invalid_argument("mode " + mode.name + " has conflicting movements " +
                                                    resolved[a].first->id + " -> " + resolved[a].second->target + " and " +
                                                    resolved[b].first->id + " -> " + resolved[b].second->target);
                    }
                }
            }
        }
        for (const auto& lane : lanes) {
            if (lane.junction != j.id) continue;
            for (const auto& mv : lane.movements) {
                const bool served = std::any_of(j.plan.modes.begin(), j.plan.modes.end(), [&](const GreenMode& m) {
                    return std::any_of(m.movements.begin(), m.movements.end(), [&](const MovementRef& r) {
                        return r.from == lane.id && r.to == mv.target;
                    });
                });
                if (!served) {
                    throw std::invalid_argument("movement " + lane.id + " -> " + mv.target + " is not served by any green mode");
                }
            }
        }
    }
}

}  // namespace qsig
