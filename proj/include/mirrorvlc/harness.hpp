#pragma once

// Monte-Carlo driver: stage 1 once per regime, then per trial re-placed
// users, one association heuristic and the resulting metrics.

#include "mirrorvlc/comm.hpp"
#include "mirrorvlc/design.hpp"
#include "mirrorvlc/scenario.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace mirrorvlc {

enum class Heuristic { Nua, SsaUser, SsaLed };

/// Accepts nua, ssa-user, ssa-led. Throws std::invalid_argument.
[[nodiscard]] Heuristic parse_heuristic(std::string_view name);
[[nodiscard]] const char* to_string(Heuristic heuristic);

[[nodiscard]] Assignment run_heuristic(Heuristic h, const CommProblem& problem, int crowd_threshold = -1);

/// Thrown when stage 1 has no feasible design; carries the certificate row.
struct StageOneInfeasible : std::runtime_error {
  StageOneInfeasible(MirrorRegime regime, std::string certificate, int sensor);
  MirrorRegime regime;
  std::string certificate;
  int sensor;
};

/// SplitMix64 step.
[[nodiscard]] std::uint64_t splitmix64(std::uint64_t& state);

/// Independent generator for one trial; the same (seed, trial) always gives
/// the same stream regardless of thread scheduling.
[[nodiscard]] std::mt19937_64 trial_rng(std::uint64_t seed, int trial);

/// Uniform double in [0, 1) from the top 53 bits of one draw.
[[nodiscard]] double canonical(std::mt19937_64& rng);

/// scenario.users users, i.i.d. uniform on the floor at user_height, facing up.
[[nodiscard]] std::vector<ReceiverNode> place_users(const Scenario& scenario, std::mt19937_64& rng);

struct TrialMetrics {
  double min_tp_bps{};  // NaN without users
  double avg_tp_bps{};  // NaN without users
  double avg_lux{};
  double uniformity{};
};

struct TrialReport {
  std::vector<TrialMetrics> trials;
  TrialMetrics mean;
  TrialMetrics std_error;
  std::uint64_t seed{};
  MirrorRegime regime{MirrorRegime::Four};
  Heuristic heuristic{Heuristic::Nua};
  int users{};
  double divergence_deg{};
  double stage_one_phi{};
};

/// Arithmetic mean and standard error of each column; NaN if any entry is.
void aggregate(TrialReport& report);

struct StageOne {
  MirrorRegime regime{};
  DesignModel model;
  MirrorDesign design;
  Eigen::MatrixXd sensor_gains;  // leds x sensors under design.xi
  Eigen::VectorXd lux;           // stage-1 field
};

class Experiment {
 public:
  /// threads <= 0 uses MIRRORVLC_THREADS or the hardware count.
  explicit Experiment(Scenario scenario, int threads = 0);

  [[nodiscard]] const Scenario& scenario() const { return scenario_; }
  [[nodiscard]] const ScenarioGeometry& geometry() const { return geometry_; }
  [[nodiscard]] const ChannelTensor& sensor_tensor() const { return sensors_; }

  /// Builds the stage-1 model for a regime without solving it.
  [[nodiscard]] DesignModel design_model(MirrorRegime regime) const;

  /// Solved on first use and cached. Throws StageOneInfeasible.
  const StageOne& stage_one(MirrorRegime regime);

  /// Replaces the regime's stage-1 result, e.g. with an imported solution.
  const StageOne& set_stage_one(MirrorRegime regime, MirrorDesign design);

  /// Uses the scenario's users, trials and seed.
  [[nodiscard]] TrialReport run(Heuristic heuristic, MirrorRegime regime);
  [[nodiscard]] TrialReport run(Heuristic heuristic, MirrorRegime regime, int users, int trials);

  /// One trial, for tests and tooling.
  [[nodiscard]] TrialMetrics run_trial(Heuristic heuristic, const StageOne& stage, int users, int trial) const;

  /// The comm-stage instance a trial sees.
  [[nodiscard]] CommProblem trial_problem(const StageOne& stage, int users, int trial) const;

 private:
  Scenario scenario_;
  int threads_;
  ScenarioGeometry geometry_;
  ChannelTensor sensors_;
  std::map<MirrorRegime, std::unique_ptr<StageOne>> stage_one_;
};

[[nodiscard]] TrialReport run_experiment(const Scenario& scenario, Heuristic heuristic,
                                         MirrorRegime regime, int threads = 0);

/// Header trial,min_tp_bps,avg_tp_bps,avg_lux,uniformity; one row per
/// trial, then a "mean" row. Undefined values print as NA.
void emit_results(const TrialReport& report, std::ostream& out);
void emit_results(const TrialReport& report, const std::filesystem::path& path);

/// Trials and the mean row of an emitted CSV.
struct ResultsTable {
  std::vector<TrialMetrics> trials;
  TrialMetrics mean;
};

[[nodiscard]] ResultsTable read_results(std::istream& in);

/// One grid_x by grid_y 0/1 matrix per wall in wall order, rows from the
/// floor up, values separated by single spaces.
void emit_heatmap(const Room& room, const MirrorVector& xi, std::ostream& out);
void emit_heatmap(const Room& room, const MirrorVector& xi, const std::filesystem::path& path);
[[nodiscard]] MirrorVector read_heatmap(const Room& room, std::istream& in);

struct SweepPoint {
  double divergence_deg{};
  int users{};
  Heuristic heuristic{};
  MirrorRegime regime{};
  TrialMetrics mean;
  TrialMetrics std_error;
};

/// Every combination of divergence, user count and heuristic; stage 1 is
/// solved once per divergence.
[[nodiscard]] std::vector<SweepPoint> run_sweep(const Scenario& scenario, MirrorRegime regime,
                                                std::span<const double> divergences_deg,
                                                std::span<const int> user_counts,
                                                std::span<const Heuristic> heuristics,
                                                int threads = 0);

void emit_sweep(std::span<const SweepPoint> points, std::ostream& out);

/// Writes text to a file, raising std::runtime_error with the path on failure.
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace mirrorvlc
