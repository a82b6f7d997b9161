#pragma once

// Stage-1 mirror placement: maximize the minimum sensor illuminance over the
// mirror vector xi and the per-LED powers, subject to uniformity and lux
// bounds. The binary program is linearized with rho = chi * P.

#include "mirrorvlc/channel.hpp"
#include "mirrorvlc/lp.hpp"
#include "mirrorvlc/photometry.hpp"

#include <Eigen/Dense>

#include <array>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace mirrorvlc {

enum class MirrorRegime { None, Adjacent, Opposite, Four };

/// Accepts none, adjacent, opposite, four. Throws std::invalid_argument.
[[nodiscard]] MirrorRegime parse_regime(std::string_view name);
[[nodiscard]] const char* to_string(MirrorRegime regime);

struct RegimeWalls {
  std::array<WallId, 2> adjacent{WallId::XZ, WallId::YZ};
  std::array<WallId, 2> opposite{WallId::XZ, WallId::XZFar};
};

/// 1 for the cells a regime allows to carry a mirror.
[[nodiscard]] MirrorVector regime_cell_mask(const Room& room, MirrorRegime regime,
                                            const RegimeWalls& walls = {});

struct DesignParams {
  double p_min{0.0};     // W
  double p_max{0.1};     // W
  double mu{0.7};        // minimum uniformity
  double lux_min{400.0}; // phi_2
  double lux_max{600.0}; // phi_1
  Photometry photometry;
};

/// One (LED, cell) pair with the cell inside the LED's reflection area.
struct DesignPair {
  int led{};
  int cell{};
  std::vector<std::pair<int, double>> lux;  // (sensor, lux per watt) for nonzero paths
};

struct DesignModel {
  DesignParams params;
  int led_count{};
  int cell_count{};
  int sensor_count{};
  MirrorVector allowed;       // regime mask; disallowed cells have xi fixed to 0
  Eigen::MatrixXd los_lux;    // leds x sensors, lux per watt
  std::vector<DesignPair> pairs;  // sorted by (led, cell)
  lp::LinearModel lp;         // full rendering with the documented names

  [[nodiscard]] int pair_count() const { return static_cast<int>(pairs.size()); }
  [[nodiscard]] int xi_var(int z) const { return z; }
  [[nodiscard]] int chi_var(int k) const { return cell_count + k; }
  [[nodiscard]] int p_var(int m) const { return cell_count + pair_count() + m; }
  [[nodiscard]] int rho_var(int k) const { return cell_count + pair_count() + led_count + k; }
  [[nodiscard]] int phi_var() const { return cell_count + 2 * pair_count() + led_count; }
};

/// Z + 2|pairs| + M + 1.
[[nodiscard]] int design_variable_count(int leds, int cells, int pairs);
/// 3N + 1 + 4|pairs|: N links, one uniformity row, 2N lux rows, and per pair
/// the chi link plus the three linearization rows.
[[nodiscard]] int design_row_count(int sensors, int pairs);

/// `tensor` must have the sensing points as its nodes.
[[nodiscard]] DesignModel build_design_model(const ChannelTensor& tensor,
                                             const Eigen::VectorXd& sensor_area,
                                             const MirrorVector& allowed,
                                             const DesignParams& params);

enum class DesignStatus { Optimal, Feasible, Infeasible, IterationLimit };

[[nodiscard]] const char* to_string(DesignStatus status);

struct MirrorDesign {
  MirrorVector xi;
  Eigen::VectorXd powers_prev;   // W per LED
  Eigen::VectorXd rho;           // per pair, W
  double objective_phi{std::numeric_limits<double>::quiet_NaN()};
  DesignStatus status{DesignStatus::Infeasible};
  std::string certificate;       // row name proving infeasibility
  int infeasible_sensor{-1};
  long nodes{0};

  [[nodiscard]] bool has_solution() const {
    return status != DesignStatus::Infeasible && powers_prev.size() > 0;
  }
};

/// Optimal powers for a fixed mirror vector (length Z).
[[nodiscard]] MirrorDesign solve_lp(const DesignModel& model, const MirrorVector& xi);

struct DesignOptions {
  long node_budget{1'000'000};
  int max_relaxation_rows{6000};  // larger relaxations skip the tree search
  bool heuristics{true};          // greedy and rounding incumbents
};

[[nodiscard]] MirrorDesign solve_design(const DesignModel& model,
                                        const DesignOptions& options = {});

/// Enumerates every mirror vector over the allowed cells (at most 20).
[[nodiscard]] MirrorDesign brute_force_design(const DesignModel& model);

/// Full variable vector of `model.lp` for a design.
[[nodiscard]] Eigen::VectorXd design_point(const DesignModel& model, const MirrorDesign& design);

/// Per-sensor lux of a design point.
[[nodiscard]] Eigen::VectorXd design_lux(const DesignModel& model, const MirrorDesign& design);

}  // namespace mirrorvlc
