#pragma once

// Experiment description loaded from a flat key = value file. Missing keys
// keep the defaults below (the full-size room of the reference setup).

#include "mirrorvlc/design.hpp"
#include "mirrorvlc/geometry.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace mirrorvlc {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Scenario {
  // Room and wall grid.
  double room_width{6.0};
  double room_depth{6.0};
  double room_height{3.0};
  int grid_x{12};
  int grid_y{6};
  double eta{0.95};

  // Bulb, centred on the ceiling.
  double bulb_radius{0.4};
  std::vector<int> layers{1, 6, 12, 15, 19, 26, 30, 37, 43, 33, 30, 28, 25, 21, 16, 13, 11, 10, 9, 6};
  double divergence_deg{30.0};
  double half_power_deg{0.0};  // 0: same as the divergence

  // Power and photometry.
  double p_max{0.1};
  double p_min{0.0};
  double alpha0{169.0};
  LuxConvention lux_convention{LuxConvention::AreaDivided};
  double mu{0.7};
  double phi1{600.0};  // lux ceiling
  double phi2{400.0};  // lux floor

  // Receivers.
  int users{6};
  int sensing_points{100};  // square lattice
  double pd_area_cm2{5.0};
  double sensor_area_cm2{10.0};
  double fov_deg{90.0};
  double user_height{0.0};

  // Communication.
  double bandwidth{20e6};
  double noise_psd{2.5e-20};
  double tau{0.1};
  int crowd_threshold{-1};  // < 0: max(1, ceil(0.03 U))

  // Experiment.
  MirrorRegime regime{MirrorRegime::Four};
  RegimeWalls regime_walls;
  std::uint64_t seed{1};
  int trials{100};
  long design_node_budget{1'000'000};
  int design_max_relaxation_rows{6000};

  [[nodiscard]] DesignParams design_params() const;
  [[nodiscard]] DesignOptions design_options() const;
  [[nodiscard]] double half_power_rad() const;
};

/// Throws ConfigError with the key name.
void validate(const Scenario& s);

/// Parses the key = value text on top of the defaults; '#' starts a comment.
/// Unknown keys and malformed lines raise ConfigError with the line number.
[[nodiscard]] Scenario parse_scenario(std::istream& in);
[[nodiscard]] Scenario load_scenario(const std::filesystem::path& path);

/// Every recognised key with its current value, one per line.
void write_scenario(const Scenario& s, std::ostream& out);

/// Derived geometry shared by every trial.
struct ScenarioGeometry {
  Room room;
  Bulb bulb;
  Beam beam;
  std::vector<LedPose> leds;
  std::vector<ReceiverNode> sensors;
  Eigen::VectorXd sensor_area;
};

[[nodiscard]] ScenarioGeometry build_geometry(const Scenario& s);

/// N sensing points on a k x k floor lattice, inset half a cell.
[[nodiscard]] std::vector<ReceiverNode> sensing_lattice(const Scenario& s);

}  // namespace mirrorvlc
