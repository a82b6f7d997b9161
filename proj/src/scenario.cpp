#include "mirrorvlc/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <string_view>

namespace mirrorvlc {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && first != last;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> items;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    items.push_back(trim(text.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return items;
}

const char* wall_name(WallId w) {
  switch (w) {
    case WallId::XZ: return "xz";
    case WallId::YZ: return "yz";
    case WallId::XZFar: return "xz_far";
    case WallId::YZFar: return "yz_far";
  }
  return "?";
}

bool parse_wall(std::string_view text, WallId& out) {
  for (int w = 0; w < kWallCount; ++w) {
    if (text == wall_name(static_cast<WallId>(w))) {
      out = static_cast<WallId>(w);
      return true;
    }
  }
  return false;
}

struct Field {
  std::function<bool(Scenario&, std::string_view)> parse;
  std::function<std::string(const Scenario&)> format;
};

template <typename T>
Field number_field(T Scenario::*member) {
  return {[member](Scenario& s, std::string_view v) { return parse_number(v, s.*member); },
          [member](const Scenario& s) {
            if constexpr (std::is_floating_point_v<T>) {
              return format_double(s.*member);
            } else {
              return std::to_string(s.*member);
            }
          }};
}

Field wall_pair_field(std::array<WallId, 2> RegimeWalls::*member) {
  return {[member](Scenario& s, std::string_view v) {
            const auto items = split_list(v);
            if (items.size() != 2) return false;
            return parse_wall(items[0], (s.regime_walls.*member)[0]) &&
                   parse_wall(items[1], (s.regime_walls.*member)[1]);
          },
          [member](const Scenario& s) {
            return std::string(wall_name((s.regime_walls.*member)[0])) + "," +
                   wall_name((s.regime_walls.*member)[1]);
          }};
}

// Ordered so that write_scenario groups keys the way the struct does.
const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = [] {
    std::vector<std::pair<std::string, Field>> t;
    t.emplace_back("room_width", number_field(&Scenario::room_width));
    t.emplace_back("room_depth", number_field(&Scenario::room_depth));
    t.emplace_back("room_height", number_field(&Scenario::room_height));
    t.emplace_back("grid_x", number_field(&Scenario::grid_x));
    t.emplace_back("grid_y", number_field(&Scenario::grid_y));
    t.emplace_back("eta", number_field(&Scenario::eta));
    t.emplace_back("bulb_radius", number_field(&Scenario::bulb_radius));
    t.emplace_back("layers", Field{[](Scenario& s, std::string_view v) {
                                     std::vector<int> out;
                                     for (auto item : split_list(v)) {
                                       int k = 0;
                                       if (!parse_number(item, k)) return false;
                                       out.push_back(k);
                                     }
                                     s.layers = std::move(out);
                                     return true;
                                   },
                                   [](const Scenario& s) {
                                     std::string out;
                                     for (std::size_t i = 0; i < s.layers.size(); ++i) {
                                       if (i) out += ',';
                                       out += std::to_string(s.layers[i]);
                                     }
                                     return out;
                                   }});
    t.emplace_back("divergence_deg", number_field(&Scenario::divergence_deg));
    t.emplace_back("half_power_deg", number_field(&Scenario::half_power_deg));
    t.emplace_back("p_max", number_field(&Scenario::p_max));
    t.emplace_back("p_min", number_field(&Scenario::p_min));
    t.emplace_back("alpha0", number_field(&Scenario::alpha0));
    t.emplace_back("lux_convention",
                   Field{[](Scenario& s, std::string_view v) {
                           if (v == "area") {
                             s.lux_convention = LuxConvention::AreaDivided;
                           } else if (v == "raw") {
                             s.lux_convention = LuxConvention::Raw;
                           } else {
                             return false;
                           }
                           return true;
                         },
                         [](const Scenario& s) {
                           return std::string(s.lux_convention == LuxConvention::Raw ? "raw" : "area");
                         }});
    t.emplace_back("mu", number_field(&Scenario::mu));
    t.emplace_back("phi1", number_field(&Scenario::phi1));
    t.emplace_back("phi2", number_field(&Scenario::phi2));
    t.emplace_back("users", number_field(&Scenario::users));
    t.emplace_back("sensing_points", number_field(&Scenario::sensing_points));
    t.emplace_back("pd_area_cm2", number_field(&Scenario::pd_area_cm2));
    t.emplace_back("sensor_area_cm2", number_field(&Scenario::sensor_area_cm2));
    t.emplace_back("fov_deg", number_field(&Scenario::fov_deg));
    t.emplace_back("user_height", number_field(&Scenario::user_height));
    t.emplace_back("bandwidth", number_field(&Scenario::bandwidth));
    t.emplace_back("noise_psd", number_field(&Scenario::noise_psd));
    t.emplace_back("tau", number_field(&Scenario::tau));
    t.emplace_back("crowd_threshold", number_field(&Scenario::crowd_threshold));
    t.emplace_back("regime", Field{[](Scenario& s, std::string_view v) {
                                     try {
                                       s.regime = parse_regime(v);
                                     } catch (const std::invalid_argument&) {
                                       return false;
                                     }
                                     return true;
                                   },
                                   [](const Scenario& s) { return std::string(to_string(s.regime)); }});
    t.emplace_back("adjacent_walls", wall_pair_field(&RegimeWalls::adjacent));
    t.emplace_back("opposite_walls", wall_pair_field(&RegimeWalls::opposite));
    t.emplace_back("seed", number_field(&Scenario::seed));
    t.emplace_back("trials", number_field(&Scenario::trials));
    t.emplace_back("design_node_budget", number_field(&Scenario::design_node_budget));
    t.emplace_back("design_max_relaxation_rows", number_field(&Scenario::design_max_relaxation_rows));
    return t;
  }();
  return table;
}

const Field* find_field(std::string_view key) {
  for (const auto& [name, field] : fields()) {
    if (name == key) return &field;
  }
  return nullptr;
}

[[noreturn]] void reject(const std::string& key, const std::string& why) {
  throw ConfigError("invalid value for '" + key + "': " + why);
}

bool perpendicular(WallId a, WallId b) {
  return (static_cast<int>(a) % 2) != (static_cast<int>(b) % 2);
}

}  // namespace

double Scenario::half_power_rad() const {
  return (half_power_deg > 0.0 ? half_power_deg : divergence_deg) * kDeg;
}

DesignParams Scenario::design_params() const {
  DesignParams p;
  p.p_min = p_min;
  p.p_max = p_max;
  p.mu = mu;
  p.lux_min = phi2;
  p.lux_max = phi1;
  p.photometry.luminous_efficacy = alpha0;
  p.photometry.convention = lux_convention;
  return p;
}

DesignOptions Scenario::design_options() const {
  DesignOptions o;
  o.node_budget = design_node_budget;
  o.max_relaxation_rows = design_max_relaxation_rows;
  return o;
}

void validate(const Scenario& s) {
  const auto positive = [](const char* key, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) reject(key, "must be positive");
  };
  const auto non_negative = [](const char* key, double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) reject(key, "must not be negative");
  };
  positive("room_width", s.room_width);
  positive("room_depth", s.room_depth);
  positive("room_height", s.room_height);
  if (s.grid_x < 1) reject("grid_x", "must be at least 1");
  if (s.grid_y < 1) reject("grid_y", "must be at least 1");
  if (!(s.eta >= 0.0 && s.eta <= 1.0)) reject("eta", "must lie in [0, 1]");
  positive("bulb_radius", s.bulb_radius);
  if (2.0 * s.bulb_radius >= std::min(s.room_width, s.room_depth) || s.bulb_radius >= s.room_height) {
    reject("bulb_radius", "bulb does not fit in the room");
  }
  if (s.layers.empty()) reject("layers", "needs at least one layer");
  if (s.layers.front() != 1) reject("layers", "the first layer holds exactly one LED");
  for (int k : s.layers) {
    if (k < 1) reject("layers", "every layer needs at least one LED");
  }
  if (!(s.divergence_deg > 0.0 && s.divergence_deg < 90.0)) reject("divergence_deg", "must lie in (0, 90)");
  if (!(s.half_power_deg >= 0.0 && s.half_power_deg < 90.0)) reject("half_power_deg", "must lie in [0, 90)");
  positive("p_max", s.p_max);
  non_negative("p_min", s.p_min);
  if (s.p_min > s.p_max) reject("p_min", "must not exceed p_max");
  positive("alpha0", s.alpha0);
  if (!(s.mu > 0.0 && s.mu <= 1.0)) reject("mu", "must lie in (0, 1]");
  non_negative("phi1", s.phi1);
  non_negative("phi2", s.phi2);
  if (s.phi2 > s.phi1) {
    reject("phi2", "lux floor " + format_double(s.phi2) + " exceeds the ceiling phi1 = " + format_double(s.phi1));
  }
  if (s.users < 0) reject("users", "must not be negative");
  if (s.sensing_points < 1) reject("sensing_points", "must be at least 1");
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(s.sensing_points))));
  if (side * side != s.sensing_points) reject("sensing_points", "must be a perfect square");
  positive("pd_area_cm2", s.pd_area_cm2);
  positive("sensor_area_cm2", s.sensor_area_cm2);
  if (!(s.fov_deg > 0.0 && s.fov_deg <= 90.0)) reject("fov_deg", "must lie in (0, 90]");
  if (!(s.user_height >= 0.0 && s.user_height < s.room_height - s.bulb_radius)) {
    reject("user_height", "must lie between the floor and the bulb");
  }
  positive("bandwidth", s.bandwidth);
  non_negative("noise_psd", s.noise_psd);
  if (!(s.tau >= 0.0 && s.tau < 1.0)) reject("tau", "must lie in [0, 1)");
  if (s.trials < 1) reject("trials", "must be at least 1");
  if (s.design_node_budget < 1) reject("design_node_budget", "must be at least 1");
  if (s.design_max_relaxation_rows < 1) reject("design_max_relaxation_rows", "must be at least 1");
  const auto& adj = s.regime_walls.adjacent;
  if (!perpendicular(adj[0], adj[1])) reject("adjacent_walls", "walls must meet at a corner");
  const auto& opp = s.regime_walls.opposite;
  if (opp[0] == opp[1] || perpendicular(opp[0], opp[1])) reject("opposite_walls", "walls must face each other");
}

Scenario parse_scenario(std::istream& in) {
  Scenario s;
  std::set<std::string> seen;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view text = line;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    const std::string where = "line " + std::to_string(number) + ": ";
    if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key(trim(text.substr(0, eq)));
    const std::string_view value = trim(text.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "missing key");
    const Field* field = find_field(key);
    if (!field) throw ConfigError(where + "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");
    if (value.empty() || !field->parse(s, value)) {
      throw ConfigError(where + "cannot parse value '" + std::string(value) + "' for '" + key + "'");
    }
  }
  validate(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  try {
    return parse_scenario(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_scenario(const Scenario& s, std::ostream& out) {
  for (const auto& [name, field] : fields()) out << name << " = " << field.format(s) << '\n';
}

std::vector<ReceiverNode> sensing_lattice(const Scenario& s) {
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(s.sensing_points))));
  std::vector<ReceiverNode> nodes;
  nodes.reserve(static_cast<std::size_t>(side * side));
  for (int j = 0; j < side; ++j) {
    for (int i = 0; i < side; ++i) {
      const Vector3 pos((i + 0.5) * s.room_width / side, (j + 0.5) * s.room_depth / side, 0.0);
      nodes.push_back({j * side + i, NodeKind::SensingPoint, pos, Vector3(0, 0, 1),
                       s.sensor_area_cm2 * 1e-4, std::numbers::pi / 2});
    }
  }
  return nodes;
}

ScenarioGeometry build_geometry(const Scenario& s) {
  ScenarioGeometry g;
  g.room = make_room(s.room_width, s.room_depth, s.room_height, s.grid_x, s.grid_y);
  g.bulb.center = Vector3(s.room_width / 2, s.room_depth / 2, s.room_height);
  g.bulb.radius = s.bulb_radius;
  g.bulb.layer_counts = s.layers;
  g.bulb.divergence = s.divergence_deg * kDeg;
  g.bulb.half_power_semiangle = s.half_power_rad();
  g.beam = beam_of(g.bulb);
  g.leds = build_bulb(g.bulb);
  g.sensors = sensing_lattice(s);
  g.sensor_area = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(g.sensors.size()),
                                            s.sensor_area_cm2 * 1e-4);
  return g;
}

}  // namespace mirrorvlc
