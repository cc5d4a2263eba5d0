#pragma once

// Scenario construction: the simple four-way intersection, the Dongda-Keyuan
// intersection with mixed car / scooter lanes, demand presets, and the
// plain-text scenario file format (see docs/scenario_format.md).

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qsig/network.hpp"

namespace qsig {

struct ScenarioConfig {
    std::string name;
    NetworkSpec network;
    std::vector<VehicleClass> classes = default_vehicle_classes();
    FlowSpec flows;
    double duration = 3600.0;
    std::uint64_t seed = 1;
    std::vector<std::string> notes;  // emitted as comments in scenario files

    /// Network invariants plus duration > 0 and every flow resolving to a route.
    void validate() const;
};

/// Three inflow lanes per side (car-only 150 m left/U-turn lane, through lane,
/// through/right lane) and two outflow lanes; four green modes, each 30 s
/// green then 5 s yellow in the fixed plan. Flows are empty.
ScenarioConfig build_simple_intersection();

/// Dongda-Keyuan: car-only left and through lanes, two mixed car/scooter
/// lanes and a scooter lane per side; scooters turn left in two stages via a
/// waiting box at each corner. Fixed plan 45/30/22/24 s green, 4 s yellow.
ScenarioConfig build_dongda_intersection();

struct DemandPreset {
    std::string name;
    std::string scenario;  // "simple" or "dongda"
    FlowSpec flows;
    bool transcribed = true;  // false for placeholder values
};

/// One row of the Dongda-Keyuan hourly OD table.
struct OdCount {
    std::string od;  // origin + destination side, e.g. "LR"
    int cars;
    int scooters;
};

/// Hourly OD counts for T1..T4 (index 0..3).
const std::vector<OdCount>& dongda_od_table(std::size_t period);

std::vector<std::string> preset_names();
DemandPreset demand_preset(std::string_view name);

/// True once the simple-intersection presets carry transcribed values
/// instead of placeholders.
bool simple_presets_transcribed() noexcept;

/// Named scenario with a preset applied ("simple" or "dongda").
ScenarioConfig make_scenario(std::string_view scenario, std::string_view preset);

void write_scenario(std::ostream& out, const ScenarioConfig& config);
ScenarioConfig read_scenario(std::istream& in);
ScenarioConfig load_scenario_file(const std::string& path);
void save_scenario_file(const std::string& path, const ScenarioConfig& config);

class ScenarioParseError : public std::runtime_error {
public:
    ScenarioParseError(int line, const std::string& message);
    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace qsig
