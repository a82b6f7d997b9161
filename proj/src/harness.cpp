#include "mirrorvlc/harness.hpp"

#include "mirrorvlc/parallel.hpp"
#include "mirrorvlc/photometry.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace mirrorvlc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_value(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_value(std::string_view text, int line) {
  if (text == "NA") return kNaN;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw std::runtime_error("results line " + std::to_string(line) + ": bad number '" +
                             std::string(text) + "'");
  }
  return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

constexpr const char* kResultsHeader = "trial,min_tp_bps,avg_tp_bps,avg_lux,uniformity";

void write_metrics(std::ostream& out, const TrialMetrics& m) {
  out << format_value(m.min_tp_bps) << ',' << format_value(m.avg_tp_bps) << ','
      << format_value(m.avg_lux) << ',' << format_value(m.uniformity);
}

}  // namespace

Heuristic parse_heuristic(std::string_view name) {
  if (name == "nua") return Heuristic::Nua;
  if (name == "ssa-user") return Heuristic::SsaUser;
  if (name == "ssa-led") return Heuristic::SsaLed;
  throw std::invalid_argument("unknown heuristic '" + std::string(name) +
                              "' (expected nua, ssa-user or ssa-led)");
}

const char* to_string(Heuristic heuristic) {
  switch (heuristic) {
    case Heuristic::Nua: return "nua";
    case Heuristic::SsaUser: return "ssa-user";
    case Heuristic::SsaLed: return "ssa-led";
  }
  return "?";
}

Assignment run_heuristic(Heuristic h, const CommProblem& problem, int crowd_threshold) {
  switch (h) {
    case Heuristic::Nua: return nua_assign(problem);
    case Heuristic::SsaUser: return ssa_user_assign(problem);
    case Heuristic::SsaLed: return ssa_led_assign(problem, crowd_threshold);
  }
  throw std::invalid_argument("unknown heuristic");
}

StageOneInfeasible::StageOneInfeasible(MirrorRegime r, std::string cert, int s)
    : std::runtime_error(std::string("stage 1 is infeasible for regime ") + to_string(r) +
                         (cert.empty() ? std::string() : " (violated row " + cert + ")")),
      regime(r),
      certificate(std::move(cert)),
      sensor(s) {}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::mt19937_64 trial_rng(std::uint64_t seed, int trial) {
  std::uint64_t state = seed;
  std::uint64_t key = splitmix64(state);
  state = key + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(trial);
  return std::mt19937_64(splitmix64(state));
}

double canonical(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<ReceiverNode> place_users(const Scenario& s, std::mt19937_64& rng) {
  std::vector<ReceiverNode> users;
  users.reserve(static_cast<std::size_t>(std::max(0, s.users)));
  for (int u = 0; u < s.users; ++u) {
    const double x = canonical(rng) * s.room_width;
    const double y = canonical(rng) * s.room_depth;
    users.push_back({u, NodeKind::User, Vector3(x, y, s.user_height), Vector3(0, 0, 1),
                     s.pd_area_cm2 * 1e-4, s.fov_deg * std::numbers::pi / 180.0});
  }
  return users;
}

void aggregate(TrialReport& r) {
  const auto column = [&](double TrialMetrics::*f, double& mean, double& se) {
    const double n = static_cast<double>(r.trials.size());
    if (r.trials.empty()) {
      mean = se = kNaN;
      return;
    }
    double sum = 0.0;
    for (const auto& t : r.trials) sum += t.*f;
    mean = sum / n;
    if (r.trials.size() < 2) {
      se = kNaN;
      return;
    }
    double ss = 0.0;
    for (const auto& t : r.trials) ss += (t.*f - mean) * (t.*f - mean);
    se = std::sqrt(ss / (n - 1.0) / n);
  };
  column(&TrialMetrics::min_tp_bps, r.mean.min_tp_bps, r.std_error.min_tp_bps);
  column(&TrialMetrics::avg_tp_bps, r.mean.avg_tp_bps, r.std_error.avg_tp_bps);
  column(&TrialMetrics::avg_lux, r.mean.avg_lux, r.std_error.avg_lux);
  column(&TrialMetrics::uniformity, r.mean.uniformity, r.std_error.uniformity);
}

Experiment::Experiment(Scenario scenario, int threads)
    : scenario_(std::move(scenario)), threads_(threads > 0 ? threads : default_thread_count()) {
  validate(scenario_);
  geometry_ = build_geometry(scenario_);
  sensors_ = build_channel_tensor(geometry_.room, geometry_.leds, geometry_.beam, geometry_.sensors,
                                  scenario_.eta, threads_);
}

DesignModel Experiment::design_model(MirrorRegime regime) const {
  return build_design_model(sensors_, geometry_.sensor_area,
                            regime_cell_mask(geometry_.room, regime, scenario_.regime_walls),
                            scenario_.design_params());
}

const StageOne& Experiment::set_stage_one(MirrorRegime regime, MirrorDesign design) {
  if (!design.has_solution()) {
    throw StageOneInfeasible(regime, design.certificate, design.infeasible_sensor);
  }
  auto stage = std::make_unique<StageOne>();
  stage->regime = regime;
  stage->model = design_model(regime);
  stage->design = std::move(design);
  stage->sensor_gains = total_gain_matrix(sensors_, stage->design.xi);
  stage->lux = illumination(stage->sensor_gains, stage->design.powers_prev, geometry_.sensor_area,
                            stage->model.params.photometry)
                   .lux;
  auto& slot = stage_one_[regime];
  slot = std::move(stage);
  return *slot;
}

const StageOne& Experiment::stage_one(MirrorRegime regime) {
  if (auto it = stage_one_.find(regime); it != stage_one_.end()) return *it->second;
  const DesignModel model = design_model(regime);
  return set_stage_one(regime, solve_design(model, scenario_.design_options()));
}

CommProblem Experiment::trial_problem(const StageOne& stage, int users, int trial) const {
  Scenario s = scenario_;
  s.users = users;
  std::mt19937_64 rng = trial_rng(s.seed, trial);
  const std::vector<ReceiverNode> placed = place_users(s, rng);
  const ChannelTensor tensor =
      build_channel_tensor(geometry_.room, geometry_.leds, geometry_.beam, placed, s.eta, 1);
  CommProblem p = make_comm_problem(tensor, stage.design.xi, geometry_.room, geometry_.leds,
                                    geometry_.beam, placed, stage.design.powers_prev, s.p_max);
  p.tau = s.tau;
  p.bandwidth = s.bandwidth;
  p.noise_psd = s.noise_psd;
  return p;
}

TrialMetrics Experiment::run_trial(Heuristic heuristic, const StageOne& stage, int users, int trial) const {
  const CommProblem problem = trial_problem(stage, users, trial);
  Assignment a = run_heuristic(heuristic, problem, scenario_.crowd_threshold);
  evaluate(a, problem);

  TrialMetrics m;
  if (users > 0) {
    m.min_tp_bps = a.per_user_throughput.minCoeff();
    m.avg_tp_bps = a.per_user_throughput.mean();
  } else {
    m.min_tp_bps = m.avg_tp_bps = kNaN;
  }
  const Eigen::VectorXd lux =
      illumination(stage.sensor_gains, a.powers, geometry_.sensor_area, stage.model.params.photometry).lux;
  m.avg_lux = lux.mean();
  m.uniformity = lux.maxCoeff() > 0.0 ? uniformity(lux) : kNaN;
  return m;
}

TrialReport Experiment::run(Heuristic heuristic, MirrorRegime regime) {
  return run(heuristic, regime, scenario_.users, scenario_.trials);
}

TrialReport Experiment::run(Heuristic heuristic, MirrorRegime regime, int users, int trials) {
  if (users < 0) throw std::invalid_argument("user count must not be negative");
  if (trials < 1) throw std::invalid_argument("need at least one trial");
  const StageOne& stage = stage_one(regime);
  TrialReport report;
  report.seed = scenario_.seed;
  report.regime = regime;
  report.heuristic = heuristic;
  report.users = users;
  report.divergence_deg = scenario_.divergence_deg;
  report.stage_one_phi = stage.design.objective_phi;
  report.trials.resize(static_cast<std::size_t>(trials));
  parallel_for(trials, threads_, [&](int t) { report.trials[t] = run_trial(heuristic, stage, users, t); });
  aggregate(report);
  return report;
}

TrialReport run_experiment(const Scenario& scenario, Heuristic heuristic, MirrorRegime regime, int threads) {
  Experiment e(scenario, threads);
  return e.run(heuristic, regime);
}

void emit_results(const TrialReport& report, std::ostream& out) {
  out << kResultsHeader << '\n';
  for (std::size_t t = 0; t < report.trials.size(); ++t) {
    out << t << ',';
    write_metrics(out, report.trials[t]);
    out << '\n';
  }
  out << "mean,";
  write_metrics(out, report.mean);
  out << '\n';
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << text;
  out.close();
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

void emit_results(const TrialReport& report, const std::filesystem::path& path) {
  std::ostringstream s;
  emit_results(report, s);
  write_file(path, s.str());
}

ResultsTable read_results(std::istream& in) {
  ResultsTable table;
  std::string line;
  int number = 0;
  bool have_mean = false;
  if (!std::getline(in, line) || line != kResultsHeader) {
    throw std::runtime_error("results line 1: expected header " + std::string(kResultsHeader));
  }
  ++number;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 5) {
      throw std::runtime_error("results line " + std::to_string(number) + ": expected 5 columns");
    }
    const TrialMetrics m{parse_value(cells[1], number), parse_value(cells[2], number),
                         parse_value(cells[3], number), parse_value(cells[4], number)};
    if (cells[0] == "mean") {
      table.mean = m;
      have_mean = true;
    } else {
      if (have_mean || cells[0] != std::to_string(table.trials.size())) {
        throw std::runtime_error("results line " + std::to_string(number) + ": unexpected trial '" +
                                 std::string(cells[0]) + "'");
      }
      table.trials.push_back(m);
    }
  }
  if (!have_mean) throw std::runtime_error("results: missing mean row");
  return table;
}

void emit_heatmap(const Room& room, const MirrorVector& xi, std::ostream& out) {
  if (static_cast<int>(xi.size()) != room.cell_count()) {
    throw std::invalid_argument("mirror vector length must equal the cell count");
  }
  for (int w = 0; w < kWallCount; ++w) {
    for (int row = 0; row < room.grid_y; ++row) {
      for (int col = 0; col < room.grid_x; ++col) {
        if (col) out << ' ';
        out << (xi[cell_index(room, static_cast<WallId>(w), col, row)] ? 1 : 0);
      }
      out << '\n';
    }
  }
}

void emit_heatmap(const Room& room, const MirrorVector& xi, const std::filesystem::path& path) {
  std::ostringstream s;
  emit_heatmap(room, xi, s);
  write_file(path, s.str());
}

MirrorVector read_heatmap(const Room& room, std::istream& in) {
  MirrorVector xi(room.cell_count(), 0);
  std::string line;
  for (int w = 0; w < kWallCount; ++w) {
    for (int row = 0; row < room.grid_y; ++row) {
      const int number = w * room.grid_y + row + 1;
      if (!std::getline(in, line)) throw std::runtime_error("heatmap: expected " + std::to_string(4 * room.grid_y) + " lines");
      std::istringstream cells(line);
      for (int col = 0; col < room.grid_x; ++col) {
        int v = -1;
        if (!(cells >> v) || (v != 0 && v != 1)) {
          throw std::runtime_error("heatmap line " + std::to_string(number) + ": expected " +
                                   std::to_string(room.grid_x) + " values of 0 or 1");
        }
        xi[cell_index(room, static_cast<WallId>(w), col, row)] = static_cast<std::uint8_t>(v);
      }
      std::string extra;
      if (cells >> extra) throw std::runtime_error("heatmap line " + std::to_string(number) + ": too many values");
    }
  }
  return xi;
}

std::vector<SweepPoint> run_sweep(const Scenario& scenario, MirrorRegime regime,
                                  std::span<const double> divergences_deg, std::span<const int> user_counts,
                                  std::span<const Heuristic> heuristics, int threads) {
  std::vector<SweepPoint> points;
  for (double d : divergences_deg) {
    Scenario s = scenario;
    s.divergence_deg = d;
    Experiment e(s, threads);
    for (int u : user_counts) {
      for (Heuristic h : heuristics) {
        const TrialReport r = e.run(h, regime, u, s.trials);
        points.push_back({d, u, h, regime, r.mean, r.std_error});
      }
    }
  }
  return points;
}

void emit_sweep(std::span<const SweepPoint> points, std::ostream& out) {
  out << "divergence_deg,users,heuristic,regime,min_tp_bps,min_tp_bps_se,avg_tp_bps,avg_tp_bps_se,"
         "avg_lux,avg_lux_se,uniformity,uniformity_se\n";
  for (const SweepPoint& p : points) {
    out << format_value(p.divergence_deg) << ',' << p.users << ',' << to_string(p.heuristic) << ','
        << to_string(p.regime) << ',' << format_value(p.mean.min_tp_bps) << ','
        << format_value(p.std_error.min_tp_bps) << ',' << format_value(p.mean.avg_tp_bps) << ','
        << format_value(p.std_error.avg_tp_bps) << ',' << format_value(p.mean.avg_lux) << ','
        << format_value(p.std_error.avg_lux) << ',' << format_value(p.mean.uniformity) << ','
        << format_value(p.std_error.uniformity) << '\n';
  }
}

}  // namespace mirrorvlc
