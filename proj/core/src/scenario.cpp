#include "qsig/scenario.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "qsig/sim.hpp"

namespace qsig {

void ScenarioConfig::validate() const {
    if (!(duration > 0.0)) throw std::invalid_argument("scenario duration must be positive");
    // Compiling a simulation checks lanes, plans and that every flow has a route.
    Simulation probe(network, classes, flows, seed);
    (void)probe;
}

namespace {

constexpr std::array<const char*, 4> kSides{"T", "R", "B", "L"};

std::string opposite(const std::string& side) { return destination_side(side, Turn::Through); }

std::string out_lane(const std::string& side, int k) { return side + "_out_" + std::to_string(k); }
std::string in_lane(const std::string& side, int k) { return side + "_in_" + std::to_string(k); }

Lane inbound(const std::string& side, int k, double length, std::vector<std::string> classes) {
    Lane l;
    l.id = in_lane(side, k);
    l.kind = LaneKind::Inbound;
    l.length = length;
    l.approach = side;
    l.junction = "J";
    l.allowed_classes = std::move(classes);
    return l;
}

Lane outbound(const std::string& side, int k, double length, std::vector<std::string> classes) {
    Lane l;
    l.id = out_lane(side, k);
    l.kind = LaneKind::Outbound;
    l.length = length;
    l.approach = side;
    l.allowed_classes = std::move(classes);
    return l;
}

void add_move(Lane& lane, Turn turn, std::string target, std::vector<std::string> only = {}) {
    lane.movements.push_back({turn, std::move(target), std::move(only)});
}

// Every movement of the given lanes.
void permit_lanes(GreenMode& mode, const NetworkSpec& net, const std::vector<std::string>& lanes) {
    for (const auto& id : lanes) {
        const Lane* l = net.find_lane(id);
        for (const auto& mv : l->movements) mode.movements.push_back({l->id, mv.target});
    }
}

}  // namespace

ScenarioConfig build_simple_intersection() {
    ScenarioConfig cfg;
    cfg.name = "simple";
    const std::vector<std::string> cars{"Car", "Truck"};
    for (const char* s : kSides) {
        const std::string side = s;
        Lane left = inbound(side, 0, 150.0, cars);
        add_move(left, Turn::Left, out_lane(destination_side(side, Turn::Left), 0));
        add_move(left, Turn::UTurn, out_lane(side, 0));
        Lane middle = inbound(side, 1, 300.0, cars);
        add_move(middle, Turn::Through, out_lane(opposite(side), 0));
        Lane outer = inbound(side, 2, 300.0, cars);
        add_move(outer, Turn::Through, out_lane(opposite(side), 1));
        add_move(outer, Turn::Right, out_lane(destination_side(side, Turn::Right), 1));
        cfg.network.lanes.push_back(left);
        cfg.network.lanes.push_back(middle);
        cfg.network.lanes.push_back(outer);
        cfg.network.lanes.push_back(outbound(side, 0, 200.0, cars));
        cfg.network.lanes.push_back(outbound(side, 1, 200.0, cars));
    }

    Junction j;
    j.id = "J";
    j.crossing_distance = 20.0;
    j.plan.junction_id = "J";
    j.plan.yellow = 5.0;
    auto mode = [&](const char* name, const char* a, const char* b, std::vector<int> ks) {
        GreenMode m;
        m.name = name;
        m.fixed_green = 30.0;
        std::vector<std::string> lanes;
        for (const char* side : {a, b}) {
            for (int k : ks) lanes.push_back(in_lane(side, k));
        }
        permit_lanes(m, cfg.network, lanes);
        return m;
    };
    j.plan.modes = {mode("G1", "L", "R", {1, 2}), mode("G2", "L", "R", {0}), mode("G3", "T", "B", {1, 2}),
                    mode("G4", "T", "B", {0})};
    cfg.network.junctions.push_back(j);

    cfg.notes = {
        "Simple symmetric intersection: 3 inflow and 2 outflow lanes per side.",
        "Lane 0 is the car-only left/U-turn bay (150 m); lane 1 through; lane 2 through/right.",
        "Green modes: G1 L/R through+right, G2 L/R left, G3 T/B through+right, G4 T/B left.",
    };
    return cfg;
}

ScenarioConfig build_dongda_intersection() {
    ScenarioConfig cfg;
    cfg.name = "dongda";
    const std::vector<std::string> cars{"Car", "Truck"};
    const std::vector<std::string> mixed{"Car", "Scooter"};
    const std::vector<std::string> mixed_truck{"Car", "Scooter", "Truck"};
    const std::vector<std::string> scooters{"Scooter"};
    const std::vector<std::string> only_scooter{"Scooter"};

    for (const char* s : kSides) {
        const std::string side = s;
        const std::string ahead = opposite(side);
        const std::string left_exit = destination_side(side, Turn::Left);
        const std::string right_exit = destination_side(side, Turn::Right);
        const std::string box = "box_" + left_exit;

        Lane l0 = inbound(side, 0, 150.0, cars);
        add_move(l0, Turn::Left, out_lane(left_exit, 0));
        Lane l1 = inbound(side, 1, 250.0, cars);
        add_move(l1, Turn::Through, out_lane(ahead, 0));
        Lane l2 = inbound(side, 2, 250.0, mixed);
        add_move(l2, Turn::Through, out_lane(ahead, 1));
        add_move(l2, Turn::Through, box, only_scooter);
        Lane l3 = inbound(side, 3, 250.0, mixed_truck);
        add_move(l3, Turn::Through, out_lane(ahead, 2));
        add_move(l3, Turn::Right, out_lane(right_exit, 2));
        add_move(l3, Turn::Through, box, only_scooter);
        Lane l4 = inbound(side, 4, 250.0, scooters);
        add_move(l4, Turn::Through, out_lane(ahead, 3));
        add_move(l4, Turn::Right, out_lane(right_exit, 3));
        add_move(l4, Turn::Through, box, only_scooter);
        for (Lane* l : {&l0, &l1, &l2, &l3, &l4}) cfg.network.lanes.push_back(*l);

        cfg.network.lanes.push_back(outbound(side, 0, 200.0, cars));
        cfg.network.lanes.push_back(outbound(side, 1, 200.0, mixed_truck));
        cfg.network.lanes.push_back(outbound(side, 2, 200.0, mixed_truck));
        cfg.network.lanes.push_back(outbound(side, 3, 200.0, scooters));
    }
    // Waiting box for scooters leaving by `exit`: filled by the approach whose
    // left turn leads there, released with the through phase heading to `exit`.
    for (const char* s : kSides) {
        const std::string exit = s;
        Lane b;
        b.id = "box_" + exit;
        b.kind = LaneKind::WaitingBox;
        b.length = 5.0;
        b.approach = opposite(exit);
        b.junction = "J";
        b.allowed_classes = scooters;
        b.capacity = 10;
        add_move(b, Turn::Through, out_lane(exit, 3));
        cfg.network.lanes.push_back(b);
    }

    Junction j;
    j.id = "J";
    j.crossing_distance = 30.0;
    j.plan.junction_id = "J";
    j.plan.yellow = 4.0;
    auto mode = [&](const char* name, double green, const char* a, const char* b, std::vector<int> ks,
                    bool with_boxes) {
        GreenMode m;
        m.name = name;
        m.fixed_green = green;
        std::vector<std::string> lanes;
        for (const char* side : {a, b}) {
            for (int k : ks) lanes.push_back(in_lane(side, k));
        }
        if (with_boxes) {
            // Boxes whose release approach is a or b.
            for (const char* side : {a, b}) lanes.push_back("box_" + opposite(side));
        }
        permit_lanes(m, cfg.network, lanes);
        return m;
    };
    j.plan.modes = {mode("G1", 45.0, "T", "B", {1, 2, 3, 4}, true), mode("G2", 30.0, "T", "B", {0}, false),
                    mode("G3", 22.0, "L", "R", {1, 2, 3, 4}, true), mode("G4", 24.0, "L", "R", {0}, false)};
    cfg.network.junctions.push_back(j);

    cfg.notes = {
        "Dongda-Keyuan intersection. Per side: lane 0 car-only left bay (150 m), lane 1 car-only through,",
        "lane 2 mixed car/scooter through, lane 3 mixed through/right (trucks allowed), lane 4 scooter lane.",
        "Scooters turn left in two stages: straight into box_<exit>, then out with the through phase toward <exit>.",
        "Green modes (assumed from the fixed timings): G1 T/B through+right, G2 T/B left,",
        "G3 L/R through+right, G4 L/R left. Fixed plan 45/30/22/24 s, yellow 4 s.",
    };
    return cfg;
}

namespace {

// Hourly OD counts (cars, scooters) for the four rush-hour periods.
const std::array<std::vector<OdCount>, 4> kDongdaTable{{
    {{"LR", 351, 311}, {"LT", 134, 104}, {"LB", 97, 104}, {"TR", 184, 79}, {"TB", 236, 238}, {"TL", 113, 79},
     {"RB", 120, 46}, {"RL", 151, 226}, {"RT", 80, 46}, {"BL", 224, 131}, {"BT", 448, 394}, {"BR", 176, 131}},
    {{"LR", 399, 371}, {"LT", 142, 124}, {"LB", 104, 124}, {"TR", 188, 86}, {"TB", 269, 257}, {"TL", 141, 86},
     {"RB", 115, 57}, {"RL", 188, 284}, {"RT", 76, 57}, {"BL", 237, 150}, {"BT", 475, 448}, {"BR", 199, 150}},
    {{"LR", 434, 375}, {"LT", 153, 125}, {"LB", 115, 125}, {"TR", 148, 96}, {"TB", 220, 288}, {"TL", 142, 96},
     {"RB", 72, 58}, {"RL", 187, 285}, {"RT", 48, 58}, {"BL", 256, 161}, {"BT", 512, 484}, {"BR", 217, 161}},
    {{"LR", 288, 288}, {"LT", 117, 96}, {"LB", 115, 96}, {"TR", 171, 64}, {"TB", 190, 192}, {"TL", 116, 64},
     {"RB", 68, 47}, {"RL", 150, 232}, {"RT", 46, 47}, {"BL", 195, 130}, {"BT", 389, 388}, {"BR", 144, 130}},
}};

constexpr double kTruckShare = 0.01;

// PLACEHOLDER simple-intersection demand: per-side hourly car volumes, split
// 20 % left / 60 % through / 20 % right. These are NOT the published values
// for the simple-intersection presets and must be replaced by a transcription.
constexpr bool kSimpleTranscribed = false;
struct SimpleShape {
    const char* name;
    std::array<double, 4> volume;  // T, R, B, L
};
constexpr std::array<SimpleShape, 6> kSimplePlaceholders{{
    {"H", {300, 300, 300, 300}},
    {"D", {600, 600, 600, 600}},
    {"L", {300, 300, 300, 900}},
    {"LT", {900, 300, 300, 900}},
    {"LR", {300, 900, 300, 900}},
    {"LRB", {300, 900, 900, 900}},
}};

FlowSpec simple_flows(const SimpleShape& shape) {
    FlowSpec spec;
    for (int k = 0; k < 4; ++k) {
        const std::string side = kSides[k];
        const double v = shape.volume[k];
        spec.flows.push_back({side, destination_side(side, Turn::Left), "Car", 0.2 * v});
        spec.flows.push_back({side, destination_side(side, Turn::Through), "Car", 0.6 * v});
        spec.flows.push_back({side, destination_side(side, Turn::Right), "Car", 0.2 * v});
    }
    return spec;
}

}  // namespace

const std::vector<OdCount>& dongda_od_table(std::size_t period) { return kDongdaTable.at(period); }

bool simple_presets_transcribed() noexcept { return kSimpleTranscribed; }

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& s : kSimplePlaceholders) names.emplace_back(s.name);
    for (int p = 1; p <= 4; ++p) names.push_back("T" + std::to_string(p));
    return names;
}

DemandPreset demand_preset(std::string_view name) {
    for (const auto& s : kSimplePlaceholders) {
        if (name == s.name) return {s.name, "simple", simple_flows(s), kSimpleTranscribed};
    }
    if (name.size() == 2 && name[0] == 'T' && name[1] >= '1' && name[1] <= '4') {
        DemandPreset preset{std::string(name), "dongda", {}, true};
        preset.flows.truck_share = kTruckShare;
        for (const auto& row : dongda_od_table(static_cast<std::size_t>(name[1] - '1'))) {
            const std::string o(1, row.od[0]), d(1, row.od[1]);
            preset.flows.flows.push_back({o, d, "Car", static_cast<double>(row.cars)});
            preset.flows.flows.push_back({o, d, "Scooter", static_cast<double>(row.scooters)});
        }
        return preset;
    }
    std::string valid;
    for (const auto& n : preset_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown demand preset '" + std::string(name) + "' (valid: " + valid + ")");
}

ScenarioConfig make_scenario(std::string_view scenario, std::string_view preset) {
    ScenarioConfig cfg;
    if (scenario == "simple") {
        cfg = build_simple_intersection();
    } else if (scenario == "dongda") {
        cfg = build_dongda_intersection();
    } else {
        throw std::invalid_argument("unknown scenario '" + std::string(scenario) + "' (expected simple or dongda)");
    }
    if (!preset.empty()) {
        DemandPreset p = demand_preset(preset);
        if (p.scenario != cfg.name) {
            throw std::invalid_argument("preset " + p.name + " belongs to the " + p.scenario + " scenario");
        }
        cfg.flows = std::move(p.flows);
        cfg.name += "/" + p.name;
        if (!p.transcribed) cfg.notes.push_back("Demand preset " + p.name + " uses PLACEHOLDER rates.");
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Scenario file format

ScenarioParseError::ScenarioParseError(int line, const std::string& message)
    : std::runtime_error("scenario line " + std::to_string(line) + ": " + message), line_(line) {}

namespace {

std::string fmt_num(double v) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), end);
}

std::string join(const std::vector<std::string>& items, char sep) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += sep;
        out += s;
    }
    return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t pos = s.find(sep, start);
        const std::size_t stop = pos == std::string_view::npos ? s.size() : pos;
        if (stop > start) out.emplace_back(s.substr(start, stop - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::vector<std::string> tokens(std::string_view s) {
    std::istringstream in{std::string(s)};
    std::vector<std::string> out;
    for (std::string tok; in >> tok;) out.push_back(tok);
    return out;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

// Positional tokens followed by key=value attributes.
struct Record {
    std::vector<std::string> positional;
    std::map<std::string, std::string> attrs;
    int line = 0;

    const std::string& attr(const std::string& key) const {
        auto it = attrs.find(key);
        if (it == attrs.end()) throw ScenarioParseError(line, "missing attribute '" + key + "'");
        return it->second;
    }
    std::string attr_or(const std::string& key, std::string fallback) const {
        auto it = attrs.find(key);
        return it == attrs.end() ? fallback : it->second;
    }
    double number(const std::string& key) const { return parse_number(attr(key)); }
    double number_or(const std::string& key, double fallback) const {
        auto it = attrs.find(key);
        return it == attrs.end() ? fallback : parse_number(it->second);
    }
    double parse_number(const std::string& s) const {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) {
            if (s == "inf") return std::numeric_limits<double>::infinity();
            throw ScenarioParseError(line, "not a number: '" + s + "'");
        }
        return v;
    }
};

Record parse_record(std::string_view value, int line) {
    Record r;
    r.line = line;
    for (const auto& tok : tokens(value)) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) {
            r.positional.push_back(tok);
        } else {
            r.attrs[tok.substr(0, eq)] = tok.substr(eq + 1);
        }
    }
    return r;
}

}  // namespace

void write_scenario(std::ostream& out, const ScenarioConfig& cfg) {
    out << "# qsig scenario file\n";
    for (const auto& n : cfg.notes) out << "# " << n << '\n';
    out << "\n[scenario]\n";
    out << "name = " << cfg.name << '\n';
    out << "duration = " << fmt_num(cfg.duration) << '\n';
    out << "seed = " << cfg.seed << '\n';

    out << "\n[classes]\n# class = <name> length= max_speed= accel= decel= min_gap=\n";
    for (const auto& c : cfg.classes) {
        out << "class = " << c.name << " length=" << fmt_num(c.length) << " max_speed=" << fmt_num(c.max_speed)
            << " accel=" << fmt_num(c.accel) << " decel=" << fmt_num(c.decel) << " min_gap=" << fmt_num(c.min_gap)
            << '\n';
    }

    out << "\n[network]\n";
    for (const auto& j : cfg.network.junctions) {
        out << "junction = " << j.id << " crossing=" << fmt_num(j.crossing_distance) << '\n';
    }
    for (const auto& l : cfg.network.lanes) {
        out << "lane = " << l.id << " kind=" << to_string(l.kind) << " length=" << fmt_num(l.length);
        if (!l.approach.empty()) out << " approach=" << l.approach;
        if (!l.junction.empty()) out << " junction=" << l.junction;
        out << " classes=" << join(l.allowed_classes, ',');
        if (l.kind == LaneKind::WaitingBox) out << " capacity=" << l.capacity;
        out << '\n';
    }
    for (const auto& l : cfg.network.lanes) {
        for (const auto& m : l.movements) {
            out << "move = " << l.id << ' ' << to_string(m.turn) << ' ' << m.target;
            if (!m.only_classes.empty()) out << " only=" << join(m.only_classes, ',');
            out << '\n';
        }
    }

    for (const auto& j : cfg.network.junctions) {
        out << "\n[signal_plan]\n";
        out << "junction = " << j.plan.junction_id << '\n';
        out << "yellow = " << fmt_num(j.plan.yellow) << '\n';
        for (const auto& m : j.plan.modes) {
            out << "mode = " << m.name << " green=" << fmt_num(m.fixed_green);
            for (const auto& ref : m.movements) out << ' ' << ref.from << '>' << ref.to;
            out << '\n';
        }
    }

    out << "\n[flows]\n";
    out << "arrival = " << to_string(cfg.flows.arrival) << '\n';
    out << "truck_share = " << fmt_num(cfg.flows.truck_share) << '\n';
    out << "car_class = " << cfg.flows.car_class << '\n';
    out << "truck_class = " << cfg.flows.truck_class << '\n';
    out << "# flow = <origin> <destination> <class> <veh/h> [begin=<s>] [end=<s>]\n";
    for (const auto& f : cfg.flows.flows) {
        out << "flow = " << f.origin << ' ' << f.destination << ' ' << f.vehicle_class << ' ' << fmt_num(f.rate);
        if (f.begin != 0.0) out << " begin=" << fmt_num(f.begin);
        if (std::isfinite(f.end)) out << " end=" << fmt_num(f.end);
        out << '\n';
    }
}

ScenarioConfig read_scenario(std::istream& in) {
    ScenarioConfig cfg;
    cfg.classes.clear();
    std::string section;
    Junction* plan_junction = nullptr;
    std::vector<std::tuple<std::string, Movement, int>> moves;
    bool saw_classes = false;

    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ScenarioParseError(line_no, "malformed section header");
            section = line.substr(1, line.size() - 2);
            if (section != "scenario" && section != "classes" && section != "network" &&
                section != "signal_plan" && section != "flows") {
                throw ScenarioParseError(line_no, "unknown section [" + section + "]");
            }
            plan_junction = nullptr;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ScenarioParseError(line_no, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const Record rec = parse_record(value, line_no);

        if (section == "scenario") {
            if (key == "name") cfg.name = value;
            else if (key == "duration") cfg.duration = rec.parse_number(value);
            else if (key == "seed") cfg.seed = std::stoull(value);
            else throw ScenarioParseError(line_no, "unknown key '" + key + "' in [scenario]");
        } else if (section == "classes") {
            if (key != "class" || rec.positional.size() != 1) throw ScenarioParseError(line_no, "expected 'class = <name> ...'");
            saw_classes = true;
            cfg.classes.push_back({rec.positional[0], rec.number("length"), rec.number("max_speed"),
                                   rec.number("accel"), rec.number("decel"), rec.number("min_gap")});
        } else if (section == "network") {
            if (key == "junction") {
                if (rec.positional.size() != 1) throw ScenarioParseError(line_no, "expected 'junction = <id> crossing=<m>'");
                Junction j;
                j.id = rec.positional[0];
                j.crossing_distance = rec.number_or("crossing", 20.0);
                j.plan.junction_id = j.id;
                cfg.network.junctions.push_back(j);
            } else if (key == "lane") {
                if (rec.positional.size() != 1) throw ScenarioParseError(line_no, "expected 'lane = <id> ...'");
                Lane l;
                l.id = rec.positional[0];
                try {
                    l.kind = parse_lane_kind(rec.attr_or("kind", "inbound"));
                } catch (const std::invalid_argument& e) {
                    throw ScenarioParseError(line_no, e.what());
                }
                l.length = rec.number("length");
                l.approach = rec.attr_or("approach", "");
                l.junction = rec.attr_or("junction", "");
                l.allowed_classes = split(rec.attr("classes"), ',');
                l.capacity = static_cast<int>(rec.number_or("capacity", 0));
                cfg.network.lanes.push_back(l);
            } else if (key == "move") {
                if (rec.positional.size() != 3) throw ScenarioParseError(line_no, "expected 'move = <from> <turn> <to>'");
                Movement m;
                try {
                    m.turn = parse_turn(rec.positional[1]);
                } catch (const std::invalid_argument& e) {
                    throw ScenarioParseError(line_no, e.what());
                }
                m.target = rec.positional[2];
                if (rec.attrs.count("only")) m.only_classes = split(rec.attrs.at("only"), ',');
                moves.emplace_back(rec.positional[0], m, line_no);
            } else {
                throw ScenarioParseError(line_no, "unknown key '" + key + "' in [network]");
            }
        } else if (section == "signal_plan") {
            if (key == "junction") {
                auto it = std::find_if(cfg.network.junctions.begin(), cfg.network.junctions.end(),
                                       [&](const Junction& j) { return j.id == value; });
                if (it == cfg.network.junctions.end()) throw ScenarioParseError(line_no, "unknown junction '" + value + "'");
                plan_junction = &*it;
            } else if (!plan_junction) {
                throw ScenarioParseError(line_no, "[signal_plan] must start with 'junction = <id>'");
            } else if (key == "yellow") {
                plan_junction->plan.yellow = rec.parse_number(value);
            } else if (key == "mode") {
                if (rec.positional.empty()) throw ScenarioParseError(line_no, "expected 'mode = <name> green=<s> ...'");
                GreenMode m;
                m.name = rec.positional[0];
                m.fixed_green = rec.number("green");
                for (std::size_t k = 1; k < rec.positional.size(); ++k) {
                    const auto parts = split(rec.positional[k], '>');
                    if (parts.size() != 2) throw ScenarioParseError(line_no, "movement must be <from>><to>");
                    m.movements.push_back({parts[0], parts[1]});
                }
                plan_junction->plan.modes.push_back(m);
            } else {
                throw ScenarioParseError(line_no, "unknown key '" + key + "' in [signal_plan]");
            }
        } else if (section == "flows") {
            try {
                if (key == "arrival") cfg.flows.arrival = parse_arrival(value);
                else if (key == "truck_share") cfg.flows.truck_share = rec.parse_number(value);
                else if (key == "car_class") cfg.flows.car_class = value;
                else if (key == "truck_class") cfg.flows.truck_class = value;
                else if (key == "flow") {
                    if (rec.positional.size() != 4) {
                        throw ScenarioParseError(line_no, "expected 'flow = <origin> <destination> <class> <rate>'");
                    }
                    OdFlow f{rec.positional[0], rec.positional[1], rec.positional[2], rec.parse_number(rec.positional[3])};
                    f.begin = rec.number_or("begin", 0.0);
                    f.end = rec.number_or("end", std::numeric_limits<double>::infinity());
                    cfg.flows.flows.push_back(f);
                } else {
                    throw ScenarioParseError(line_no, "unknown key '" + key + "' in [flows]");
                }
            } catch (const std::invalid_argument& e) {
                throw ScenarioParseError(line_no, e.what());
            }
        } else {
            throw ScenarioParseError(line_no, "entry outside of any section");
        }
    }

    for (auto& [from, m, line] : moves) {
        auto it = std::find_if(cfg.network.lanes.begin(), cfg.network.lanes.end(),
                               [&](const Lane& l) { return l.id == from; });
        if (it == cfg.network.lanes.end()) throw ScenarioParseError(line, "move from unknown lane '" + from + "'");
        it->movements.push_back(m);
    }
    if (!saw_classes) cfg.classes = default_vehicle_classes();
    return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file '" + path + "'");
    ScenarioConfig cfg = read_scenario(in);
    cfg.validate();
    return cfg;
}

void save_scenario_file(const std::string& path, const ScenarioConfig& config) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write scenario file '" + path + "'");
    write_scenario(out, config);
}

}  // namespace qsig
