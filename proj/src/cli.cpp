#include "mirrorvlc/cli.hpp"

#include "mirrorvlc/harness.hpp"
#include "mirrorvlc/lp_format.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

namespace mirrorvlc {

namespace {

namespace fs = std::filesystem;

struct Common {
  std::string config;
  std::string regime;
  std::string heuristic;
  std::optional<int> users;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string export_path;
  std::string import_path;
};

void add_common(CLI::App* cmd, Common& c, bool comm) {
  cmd->add_option("--config", c.config, "scenario file (key = value)");
  cmd->add_option("--regime", c.regime, "mirror regime")
      ->check(CLI::IsMember({"none", "adjacent", "opposite", "four"}));
  cmd->add_option("--out", c.out_dir, "output directory");
  if (comm) {
    cmd->add_option("--heuristic", c.heuristic, "association heuristic")
        ->check(CLI::IsMember({"nua", "ssa-user", "ssa-led"}));
    cmd->add_option("--users", c.users, "users per trial")->check(CLI::NonNegativeNumber);
    cmd->add_option("--trials", c.trials, "trial count")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", c.seed, "RNG seed");
  }
}

Scenario scenario_of(const Common& c) {
  Scenario s = c.config.empty() ? Scenario{} : load_scenario(c.config);
  if (!c.regime.empty()) s.regime = parse_regime(c.regime);
  if (c.users) s.users = *c.users;
  if (c.trials) s.trials = *c.trials;
  if (c.seed) s.seed = *c.seed;
  validate(s);
  return s;
}

fs::path output_dir(const std::string& dir) {
  const fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw std::runtime_error(p.string() + ": " + ec.message());
  return p;
}

std::string number(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

std::string design_summary(MirrorRegime regime, const MirrorDesign& d, const Eigen::VectorXd& lux) {
  std::ostringstream s;
  s.precision(17);
  int mirrors = 0;
  for (auto x : d.xi) mirrors += x;
  s << "regime: " << to_string(regime) << '\n'
    << "status: " << to_string(d.status) << '\n'
    << "objective_phi: " << d.objective_phi << '\n'
    << "mirrors: " << mirrors << '\n'
    << "nodes: " << d.nodes << '\n';
  if (lux.size() > 0) {
    s << "lux_min: " << lux.minCoeff() << '\n'
      << "lux_mean: " << lux.mean() << '\n'
      << "lux_max: " << lux.maxCoeff() << '\n'
      << "uniformity: " << (lux.maxCoeff() > 0.0 ? uniformity(lux) : 0.0) << '\n';
  }
  if (!d.certificate.empty()) s << "certificate: " << d.certificate << '\n';
  return s.str();
}

std::string powers_csv(const MirrorDesign& d) {
  std::ostringstream s;
  s.precision(17);
  s << "led,power_w\n";
  for (int m = 0; m < d.powers_prev.size(); ++m) s << m << ',' << d.powers_prev(m) << '\n';
  return s.str();
}

int cmd_design(const Common& c, std::ostream& out) {
  const Scenario s = scenario_of(c);
  Experiment e(s);
  const DesignModel model = e.design_model(s.regime);
  if (!c.export_path.empty()) {
    export_model(model, c.export_path);
    out << "exported " << model.lp.variable_count() << " variables and " << model.lp.row_count()
        << " rows to " << c.export_path << '\n';
  }
  MirrorDesign design = c.import_path.empty() ? solve_design(model, s.design_options())
                                              : import_solution(model, c.import_path);
  const Eigen::VectorXd lux = design.has_solution() ? design_lux(model, design) : Eigen::VectorXd();
  const std::string summary = design_summary(s.regime, design, lux);
  out << summary;
  if (!c.out_dir.empty()) {
    const fs::path dir = output_dir(c.out_dir);
    write_file(dir / "design.txt", summary);
    if (design.has_solution()) {
      std::ostringstream heat;
      emit_heatmap(e.geometry().room, design.xi, heat);
      write_file(dir / "heatmap.txt", heat.str());
      write_file(dir / "powers.csv", powers_csv(design));
    }
  }
  if (!design.has_solution()) throw StageOneInfeasible(s.regime, design.certificate, design.infeasible_sensor);
  return 0;
}

const StageOne& stage_one_for(Experiment& e, const Common& c) {
  const MirrorRegime regime = e.scenario().regime;
  if (c.import_path.empty()) return e.stage_one(regime);
  return e.set_stage_one(regime, import_solution(e.design_model(regime), c.import_path));
}

int cmd_run(const Common& c, std::ostream& out) {
  const Scenario s = scenario_of(c);
  const Heuristic h = parse_heuristic(c.heuristic.empty() ? "ssa-user" : c.heuristic);
  Experiment e(s);
  const StageOne& stage = stage_one_for(e, c);
  const TrialReport report = e.run(h, s.regime);
  const fs::path dir = output_dir(c.out_dir.empty() ? "." : c.out_dir);
  emit_results(report, dir / "results.csv");
  emit_heatmap(e.geometry().room, stage.design.xi, dir / "heatmap.txt");
  out << "regime " << to_string(s.regime) << ", heuristic " << to_string(h) << ", users " << s.users
      << ", trials " << s.trials << ", seed " << s.seed << '\n'
      << "min throughput  " << number(report.mean.min_tp_bps / 1e6) << " Mbit/s (se "
      << number(report.std_error.min_tp_bps / 1e6) << ")\n"
      << "avg throughput  " << number(report.mean.avg_tp_bps / 1e6) << " Mbit/s (se "
      << number(report.std_error.avg_tp_bps / 1e6) << ")\n"
      << "avg illuminance " << number(report.mean.avg_lux) << " lux\n"
      << "uniformity      " << number(report.mean.uniformity) << '\n'
      << "wrote " << (dir / "results.csv").string() << " and " << (dir / "heatmap.txt").string() << '\n';
  return 0;
}

int cmd_sweep(const Common& c, std::ostream& out) {
  const Scenario s = scenario_of(c);
  std::vector<Heuristic> hs;
  if (c.heuristic.empty()) {
    hs = {Heuristic::Nua, Heuristic::SsaUser, Heuristic::SsaLed};
  } else {
    hs = {parse_heuristic(c.heuristic)};
  }
  const int top = c.users ? *c.users : 12;
  std::vector<int> users;
  for (int u = 2; u <= top; ++u) users.push_back(u);
  if (users.empty()) throw std::invalid_argument("sweep needs --users of at least 2");
  const std::vector<double> divergences{20.0, 30.0, 40.0, 50.0};
  const auto points = run_sweep(s, s.regime, divergences, users, hs);
  const fs::path dir = output_dir(c.out_dir.empty() ? "." : c.out_dir);
  std::ostringstream csv;
  emit_sweep(points, csv);
  write_file(dir / "sweep.csv", csv.str());
  out << "wrote " << points.size() << " sweep points to " << (dir / "sweep.csv").string() << '\n';
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mirror placement and LED association for multi-element VLC rooms", "mirrorvlc"};
  app.require_subcommand(1);
  Common design_opts;
  Common run_opts;
  Common sweep_opts;
  CLI::App* design = app.add_subcommand("design", "solve stage 1 (mirror placement and powers)");
  add_common(design, design_opts, false);
  design->add_option("--export", design_opts.export_path, "write the stage-1 model as an LP file");
  design->add_option("--import", design_opts.import_path, "use a solver's solution file instead of solving");
  CLI::App* run = app.add_subcommand("run", "Monte-Carlo trials for one heuristic");
  add_common(run, run_opts, true);
  run->add_option("--import", run_opts.import_path, "stage-1 solution file to use");
  CLI::App* sweep = app.add_subcommand("sweep", "users 2..N and divergence 20..50 degrees");
  add_common(sweep, sweep_opts, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }
  try {
    if (design->parsed()) return cmd_design(design_opts, out);
    if (run->parsed()) return cmd_run(run_opts, out);
    return cmd_sweep(sweep_opts, out);
  } catch (const StageOneInfeasible& e) {
    err << "mirrorvlc: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "mirrorvlc: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace mirrorvlc
