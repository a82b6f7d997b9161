#include <doctest.h>

#include "mirrorvlc/cli.hpp"
#include "mirrorvlc/harness.hpp"
#include "mirrorvlc/lp_format.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mirrorvlc;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mirrorvlc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / "mirrorvlc_test_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kTiny =
    "room_width = 3\nroom_depth = 2.5\nroom_height = 2.2\nbulb_radius = 0.2\n"
    "layers = 1,5,7\ndivergence_deg = 35\ngrid_x = 2\ngrid_y = 2\nsensing_points = 16\n"
    "phi2 = 0.5\nphi1 = 1e6\nmu = 0.3\nusers = 3\ntrials = 4\n";

}  // namespace

TEST_CASE("usage errors") {
  CHECK(cli({}).code == 1);
  CHECK(cli({"launch"}).code == 1);
  CHECK(cli({"run", "--regime", "three"}).code == 1);
  CHECK(cli({"run", "--heuristic", "best"}).code == 1);
  CHECK(cli({"run", "--trials", "0"}).code == 1);
  const Result missing = cli({"design", "--config", "/nonexistent/x.cfg"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("/nonexistent/x.cfg") != std::string::npos);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("design writes the summary, heatmap and powers") {
  const fs::path dir = scratch();
  write_file(dir / "tiny.cfg", kTiny);
  const Result r = cli({"design", "--config", (dir / "tiny.cfg").string(), "--regime", "adjacent",
                        "--out", (dir / "d").string(), "--export", (dir / "m.lp").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("status: optimal") != std::string::npos);
  CHECK(r.out.find("regime: adjacent") != std::string::npos);
  CHECK(fs::exists(dir / "d" / "design.txt"));
  CHECK(fs::exists(dir / "d" / "powers.csv"));

  const Scenario s = load_scenario(dir / "tiny.cfg");
  const Room room = make_room(s.room_width, s.room_depth, s.room_height, s.grid_x, s.grid_y);
  std::ifstream heat(dir / "d" / "heatmap.txt");
  const MirrorVector xi = read_heatmap(room, heat);
  const MirrorVector mask = regime_cell_mask(room, MirrorRegime::Adjacent);
  for (std::size_t z = 0; z < xi.size(); ++z) CHECK(xi[z] <= mask[z]);

  // The exported file parses back into the model that was solved.
  Experiment e(s, 1);
  const DesignModel model = e.design_model(MirrorRegime::Adjacent);
  std::ifstream lp_in(dir / "m.lp");
  CHECK(read_lp(lp_in) == model.lp);
}

TEST_CASE("design and run accept an imported solution") {
  const fs::path dir = scratch();
  write_file(dir / "tiny.cfg", kTiny);
  const Scenario s = load_scenario(dir / "tiny.cfg");
  Experiment e(s, 1);
  const DesignModel model = e.design_model(MirrorRegime::Four);
  const MirrorDesign d = solve_design(model);
  REQUIRE(d.has_solution());
  std::ostringstream sol;
  sol.precision(17);
  const Eigen::VectorXd x = design_point(model, d);
  for (int j = 0; j < model.lp.variable_count(); ++j) sol << model.lp.vars[j].name << " = " << x(j) << '\n';
  write_file(dir / "s.sol", sol.str());

  const Result r = cli({"design", "--config", (dir / "tiny.cfg").string(), "--import", (dir / "s.sol").string(),
                        "--out", (dir / "d").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("status: feasible") != std::string::npos);

  const Result a = cli({"run", "--config", (dir / "tiny.cfg").string(), "--import", (dir / "s.sol").string(),
                        "--out", (dir / "a").string(), "--seed", "5"});
  const Result b = cli({"run", "--config", (dir / "tiny.cfg").string(), "--out", (dir / "b").string(), "--seed", "5"});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(slurp(dir / "a" / "results.csv") == slurp(dir / "b" / "results.csv"));
  CHECK(slurp(dir / "a" / "heatmap.txt") == slurp(dir / "b" / "heatmap.txt"));

  write_file(dir / "bad.sol", "no_such_variable = 1\n");
  const Result bad = cli({"design", "--config", (dir / "tiny.cfg").string(), "--import", (dir / "bad.sol").string()});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("bad.sol") != std::string::npos);
}

TEST_CASE("run flags override the configuration") {
  const fs::path dir = scratch();
  write_file(dir / "tiny.cfg", kTiny);
  const Result r = cli({"run", "--config", (dir / "tiny.cfg").string(), "--heuristic", "ssa-led", "--users", "0",
                        "--trials", "3", "--regime", "none", "--out", (dir / "o").string()});
  REQUIRE(r.code == 0);
  std::ifstream in(dir / "o" / "results.csv");
  const ResultsTable t = read_results(in);
  CHECK(t.trials.size() == 3);
  CHECK(std::isnan(t.mean.min_tp_bps));
  std::ifstream heat(dir / "o" / "heatmap.txt");
  std::string line;
  while (std::getline(heat, line)) CHECK(line == "0 0");
}

TEST_CASE("infeasible stage 1 exits with status 2") {
  const fs::path dir = scratch();
  write_file(dir / "tiny.cfg", std::string(kTiny) + "phi2 = 1e5\n");
  // phi2 appears twice: rejected as a duplicate key.
  CHECK(cli({"run", "--config", (dir / "tiny.cfg").string()}).code == 1);
  std::string text = kTiny;
  text.replace(text.find("phi2 = 0.5"), 10, "phi2 = 1e5");
  write_file(dir / "tiny.cfg", text);
  const Result r = cli({"run", "--config", (dir / "tiny.cfg").string(), "--out", (dir / "o").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("lux_lo_") != std::string::npos);
  const Result d = cli({"design", "--config", (dir / "tiny.cfg").string(), "--out", (dir / "d").string()});
  CHECK(d.code == 2);
  CHECK(slurp(dir / "d" / "design.txt").find("status: infeasible") != std::string::npos);
}

TEST_CASE("sweep covers every divergence and user count") {
  const fs::path dir = scratch();
  write_file(dir / "tiny.cfg", std::string(kTiny) + "seed = 3\n");
  const Result r = cli({"sweep", "--config", (dir / "tiny.cfg").string(), "--users", "3", "--trials", "2",
                        "--heuristic", "nua", "--out", (dir / "s").string()});
  REQUIRE(r.code == 0);
  std::ifstream in(dir / "s" / "sweep.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("divergence_deg,users,heuristic,regime,", 0) == 0);
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(line.find(",nua,four,") != std::string::npos);
  }
  CHECK(rows == 4 * 2);
}
