#include <doctest.h>

#include "mirrorvlc/design.hpp"
#include "mirrorvlc/lp_format.hpp"
#include "support/instances.hpp"

#include <sstream>

using namespace mirrorvlc;
using mirrorvlc::testing::model_of;
using mirrorvlc::testing::random_tiny_design;

namespace {

// Hand-built tensor with unit lux conversion (raw flux, efficacy 1).
ChannelTensor hand_tensor(Eigen::MatrixXd los, int cells, std::vector<NlosEntry> nlos,
                          std::vector<std::vector<int>> masks) {
  ChannelTensor t;
  t.los = std::move(los);
  t.cell_count = cells;
  t.nlos = std::move(nlos);
  t.reflection_masks = std::move(masks);
  return t;
}

DesignParams raw_params(double lux_min, double lux_max, double mu = 0.1, double p_max = 1.0) {
  DesignParams p;
  p.p_min = 0.0;
  p.p_max = p_max;
  p.mu = mu;
  p.lux_min = lux_min;
  p.lux_max = lux_max;
  p.photometry = {1.0, LuxConvention::Raw};
  return p;
}

double rel_gap(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("regimes") {
  CHECK(parse_regime("none") == MirrorRegime::None);
  CHECK(parse_regime("four") == MirrorRegime::Four);
  CHECK(std::string(to_string(parse_regime("adjacent"))) == "adjacent");
  CHECK_THROWS_AS((void)parse_regime("three"), std::invalid_argument);

  const Room room = make_room(6.0, 6.0, 3.0, 12, 6);
  const auto count = [](const MirrorVector& v) { return std::count(v.begin(), v.end(), 1); };
  CHECK(count(regime_cell_mask(room, MirrorRegime::None)) == 0);
  CHECK(count(regime_cell_mask(room, MirrorRegime::Adjacent)) == 144);
  CHECK(count(regime_cell_mask(room, MirrorRegime::Four)) == 288);
  const MirrorVector opp = regime_cell_mask(room, MirrorRegime::Opposite);
  for (int z = 0; z < room.cell_count(); ++z) {
    const WallId w = cell_ref(room, z).wall;
    CHECK(static_cast<bool>(opp[z]) == (w == WallId::XZ || w == WallId::XZFar));
  }
}

TEST_CASE("model shape follows the closed-form counts") {
  const Room room = make_room(6.0, 6.0, 3.0, 12, 6);
  const std::vector<LedPose> leds = {{0, Vector3(3, 3, 2.9), Vector3(0, 0, -1)}};
  const std::vector<ReceiverNode> sensors = {
      {0, NodeKind::SensingPoint, Vector3(3, 3, 0), Vector3(0, 0, 1), 1e-3, std::numbers::pi / 2}};
  Beam beam{30 * std::numbers::pi / 180, 4.818};
  const auto t = build_channel_tensor(room, leds, beam, sensors, 0.95);
  const DesignModel m = build_design_model(t, Eigen::VectorXd::Constant(1, 1e-3),
                                           regime_cell_mask(room, MirrorRegime::Four), {});
  int binaries = 0;
  for (const auto& v : m.lp.vars) binaries += v.binary && v.name.rfind("xi_", 0) == 0;
  CHECK(binaries == 288);

  std::mt19937_64 rng(17);
  for (int i = 0; i < 40; ++i) {
    const auto tiny = random_tiny_design(rng);
    const DesignModel dm = model_of(tiny);
    std::size_t pairs = 0;
    for (const auto& mask : tiny.tensor.reflection_masks) pairs += mask.size();
    CHECK(dm.pair_count() == static_cast<int>(pairs));
    CHECK(dm.lp.variable_count() ==
          design_variable_count(dm.led_count, dm.cell_count, dm.pair_count()));
    CHECK(dm.lp.row_count() == design_row_count(dm.sensor_count, dm.pair_count()));
    CHECK(dm.lp.vars[dm.phi_var()].name == "phi");
    for (int z = 0; z < dm.cell_count; ++z) CHECK(dm.lp.vars[z].upper == dm.allowed[z]);
  }
}

TEST_CASE("fixed-mirror LP") {
  SUBCASE("one LED, one sensor") {
    const auto t = hand_tensor(Eigen::MatrixXd::Constant(1, 1, 20.0), 0, {}, {{}});
    const Eigen::VectorXd area = Eigen::VectorXd::Ones(1);
    // Generous cap: full power.
    auto d = solve_lp(build_design_model(t, area, {}, raw_params(0.0, 100.0)), {});
    REQUIRE(d.status == DesignStatus::Optimal);
    CHECK(d.powers_prev(0) == doctest::Approx(1.0));
    CHECK(d.objective_phi == doctest::Approx(20.0));
    // Binding cap: P = 15 / 20.
    d = solve_lp(build_design_model(t, area, {}, raw_params(0.0, 15.0)), {});
    REQUIRE(d.status == DesignStatus::Optimal);
    CHECK(d.powers_prev(0) == doctest::Approx(0.75));
    CHECK(d.objective_phi == doctest::Approx(15.0));
  }
  SUBCASE("empty lux window") {
    const auto t = hand_tensor(Eigen::MatrixXd::Constant(1, 1, 20.0), 0, {}, {{}});
    const auto d = solve_lp(build_design_model(t, Eigen::VectorXd::Ones(1), {}, raw_params(7.0, 6.0)), {});
    CHECK(d.status == DesignStatus::Infeasible);
    CHECK_FALSE(d.certificate.empty());
    CHECK(d.infeasible_sensor == 0);
  }
  SUBCASE("two LEDs, two sensors, hand tableau") {
    // lux0 = 2 P0 + P1 <= 2.5, lux1 = P0 + 3 P1; P in [0, 1].
    // max min(lux0, lux1) -> phi = 2.5 (lux0 cap binds; lux1 >= 2.5 is reachable).
    Eigen::MatrixXd los(2, 2);
    los << 2.0, 1.0, 1.0, 3.0;
    const auto t = hand_tensor(los, 0, {}, {{}, {}});
    const auto model = build_design_model(t, Eigen::VectorXd::Ones(2), {}, raw_params(0.0, 2.5));
    const auto d = solve_lp(model, {});
    REQUIRE(d.status == DesignStatus::Optimal);
    CHECK(d.objective_phi == doctest::Approx(2.5).epsilon(1e-9));
    const Eigen::VectorXd lux = design_lux(model, d);
    CHECK(lux(0) <= 2.5 + 1e-9);
    CHECK(lux(1) >= 2.5 - 1e-9);
    CHECK(lp::check_feasibility(model.lp, design_point(model, d), true).max_violation < 1e-9);
  }
  SUBCASE("mirror vector validation") {
    const auto t = hand_tensor(Eigen::MatrixXd::Constant(1, 1, 1.0), 2, {}, {{0, 1}});
    const auto model = build_design_model(t, Eigen::VectorXd::Ones(1), {1, 0}, raw_params(0, 10));
    CHECK_THROWS_AS((void)solve_lp(model, {0}), std::invalid_argument);
    CHECK_THROWS_AS((void)solve_lp(model, {0, 1}), std::invalid_argument);
    CHECK(solve_lp(model, {1, 0}).status == DesignStatus::Optimal);
  }
}

TEST_CASE("exhaustive design oracle") {
  SUBCASE("single helpful mirror") {
    const auto t = hand_tensor(Eigen::MatrixXd::Constant(1, 1, 1.0), 1, {{0, 0, 0, 0.5}}, {{0}});
    const auto model = build_design_model(t, Eigen::VectorXd::Ones(1), {1}, raw_params(0, 10));
    const auto d = brute_force_design(model);
    REQUIRE(d.status == DesignStatus::Optimal);
    CHECK(d.xi == MirrorVector{1});
    CHECK(d.objective_phi == doctest::Approx(1.5));
    CHECK(d.rho(0) == doctest::Approx(1.0));
  }
  SUBCASE("a cell outside every reflection area ties at 0") {
    const auto t = hand_tensor(Eigen::MatrixXd::Constant(1, 1, 1.0), 2, {{0, 0, 0, 0.5}}, {{0}});
    const auto model = build_design_model(t, Eigen::VectorXd::Ones(1), {1, 1}, raw_params(0, 10));
    const auto d = brute_force_design(model);
    CHECK(d.xi == MirrorVector{1, 0});
    CHECK(solve_lp(model, {1, 1}).objective_phi == d.objective_phi);
    CHECK(solve_design(model).objective_phi == doctest::Approx(d.objective_phi));
  }
  SUBCASE("guard") {
    const auto t = hand_tensor(Eigen::MatrixXd::Constant(1, 1, 1.0), 21, {}, {{}});
    const auto model = build_design_model(t, Eigen::VectorXd::Ones(1), MirrorVector(21, 1),
                                          raw_params(0, 10));
    CHECK_THROWS_AS((void)brute_force_design(model), std::invalid_argument);
  }
}

TEST_CASE("presolve certificate for a dark sensor") {
  Eigen::MatrixXd los(1, 2);
  los << 1.0, 0.0;
  const auto t = hand_tensor(los, 1, {}, {{0}});
  const auto model = build_design_model(t, Eigen::VectorXd::Ones(2), {1}, raw_params(0.5, 10));
  const auto d = solve_design(model);
  CHECK(d.status == DesignStatus::Infeasible);
  CHECK(d.certificate == "lux_lo_1");
  CHECK(d.infeasible_sensor == 1);
}

TEST_CASE("no-mirror regime reduces to the fixed LP") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    const auto tiny = random_tiny_design(rng);
    const auto model = model_of(tiny, MirrorRegime::None);
    const auto a = solve_design(model);
    const auto b = solve_lp(model, MirrorVector(model.cell_count, 0));
    REQUIRE(a.status == (b.status == DesignStatus::Optimal ? DesignStatus::Optimal : DesignStatus::Infeasible));
    if (b.has_solution()) CHECK(a.objective_phi == doctest::Approx(b.objective_phi).epsilon(1e-9));
  }
}

TEST_CASE("tree search matches enumeration on random tiny instances") {
  std::mt19937_64 rng(99);
  int feasible = 0;
  for (int i = 0; i < 60; ++i) {
    const auto tiny = random_tiny_design(rng);
    const auto model = model_of(tiny);
    const auto bb = solve_design(model);
    DesignOptions plain;
    plain.heuristics = false;
    const auto tree = solve_design(model, plain);
    const auto bf = brute_force_design(model);
    CAPTURE(i);
    CHECK(tree.has_solution() == bf.has_solution());
    if (bf.has_solution()) CHECK(rel_gap(tree.objective_phi, bf.objective_phi) <= 1e-6);
    REQUIRE(bb.status != DesignStatus::IterationLimit);
    CHECK(bb.has_solution() == bf.has_solution());
    if (!bf.has_solution()) continue;
    ++feasible;
    CHECK(bb.status == DesignStatus::Optimal);
    CHECK(rel_gap(bb.objective_phi, bf.objective_phi) <= 1e-6);
  }
  CHECK(feasible >= 20);
}

TEST_CASE("accepted designs satisfy every row and the linearization") {
  std::mt19937_64 rng(2024);
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    const auto tiny = random_tiny_design(rng);
    const auto model = model_of(tiny);
    const auto d = solve_design(model);
    if (!d.has_solution()) continue;
    ++checked;
    const Eigen::VectorXd x = design_point(model, d);
    CHECK(lp::check_feasibility(model.lp, x, true).max_violation <= 1e-7);
    for (int k = 0; k < model.pair_count(); ++k) {
      CHECK(std::abs(x(model.rho_var(k)) - x(model.chi_var(k)) * x(model.p_var(model.pairs[k].led))) <= 1e-6);
    }
    // The continuous relaxation bounds every integer point.
    const auto relax = lp::solve(model.lp);
    REQUIRE(relax.status == lp::Status::Optimal);
    CHECK(relax.objective >= d.objective_phi - 1e-7 * std::max(1.0, d.objective_phi));

    const Eigen::VectorXd lux = design_lux(model, d);
    CHECK(lux.minCoeff() >= tiny.params.lux_min - 1e-7 * std::max(1.0, tiny.params.lux_min));
    CHECK(lux.maxCoeff() <= tiny.params.lux_max + 1e-7 * std::max(1.0, tiny.params.lux_max));
    CHECK(lux.minCoeff() >= tiny.params.mu * lux.mean() - 1e-7 * std::max(1.0, lux.mean()));
  }
  CHECK(checked >= 60);
}

TEST_CASE("regimes are nested") {
  std::mt19937_64 rng(8);
  int compared = 0;
  for (int i = 0; i < 40; ++i) {
    const auto tiny = random_tiny_design(rng);
    auto phi = [&](MirrorRegime r) {
      const auto d = solve_design(model_of(tiny, r));
      return d.has_solution() ? d.objective_phi : -1.0;
    };
    const double none = phi(MirrorRegime::None);
    const double adj = phi(MirrorRegime::Adjacent);
    const double opp = phi(MirrorRegime::Opposite);
    const double four = phi(MirrorRegime::Four);
    const double tol = 1e-7 * std::max(1.0, four);
    CHECK(none <= adj + tol);
    CHECK(none <= opp + tol);
    CHECK(adj <= four + tol);
    CHECK(opp <= four + tol);
    compared += none >= 0.0;
  }
  CHECK(compared > 10);
}

TEST_CASE("solve_design is deterministic") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 10; ++i) {
    const auto model = model_of(random_tiny_design(rng));
    const auto a = solve_design(model);
    const auto b = solve_design(model);
    CHECK(a.xi == b.xi);
    CHECK(a.status == b.status);
    if (a.has_solution()) CHECK(a.powers_prev == b.powers_prev);
  }
}

TEST_CASE("LP file round trip") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 20; ++i) {
    const auto model = model_of(random_tiny_design(rng));
    std::stringstream buf;
    write_lp(model.lp, buf);
    const lp::LinearModel back = read_lp(buf);
    CHECK(back == model.lp);
  }

  lp::LinearModel m;
  const int x = m.add_variable("x", -lp::kInf, lp::kInf);
  const int y = m.add_variable("y", -2.5, 1e-7);
  const int b = m.add_variable("b", 0, 1, true);
  m.objective = {{x, -1.0}, {y, 0.1}};
  m.sense = lp::Sense::Minimize;
  m.add_row("e", {{x, 1.0}, {b, -3e-12}}, -4.0, -4.0);
  m.add_row("g", {{y, 1.0}, {x, 1.0}}, 1.0 / 3.0, lp::kInf);
  std::stringstream buf;
  write_lp(m, buf);
  CHECK(read_lp(buf) == m);

  m.add_row("r", {{x, 1.0}}, 0.0, 1.0);
  std::stringstream bad;
  CHECK_THROWS_AS(write_lp(m, bad), std::invalid_argument);

  std::istringstream generals("Maximize\n obj: x\nSubject To\n c: x <= 1\nGenerals\n x\nEnd\n");
  CHECK_THROWS_AS((void)read_lp(generals), FormatError);
  std::istringstream no_end("Maximize\n obj: x\nSubject To\n c: x <= 1\n");
  CHECK_THROWS_AS((void)read_lp(no_end), FormatError);
  std::istringstream loose("Maximize\n obj: 2 x + y\nSubject To\n c1: x + y<=4\n c2: x - y >= -1\n"
                           "Bounds\n x <= 3\nEnd\n");
  const auto parsed = read_lp(loose);
  REQUIRE(parsed.variable_count() == 2);
  CHECK(parsed.vars[0].name == "x");
  CHECK(parsed.vars[0].upper == 3.0);
  CHECK(parsed.rows[1].lower == -1.0);
  CHECK(lp::solve(parsed).objective == doctest::Approx(7.0));
}

TEST_CASE("solution import validation") {
  std::mt19937_64 rng(77);
  mirrorvlc::testing::TinyDesign tiny;
  DesignModel model;
  MirrorDesign d;
  do {
    tiny = random_tiny_design(rng);
    model = model_of(tiny, MirrorRegime::Four);
    d = solve_design(model);
  } while (!d.has_solution() || model.pair_count() == 0 ||
           std::count(d.xi.begin(), d.xi.end(), 1) == 0);

  const Eigen::VectorXd x = design_point(model, d);
  std::map<std::string, double> values;
  for (int j = 0; j < model.lp.variable_count(); ++j) {
    if (x(j) != 0.0) values[model.lp.vars[j].name] = x(j);
  }
  const MirrorDesign back = accept_solution(model, values);
  CHECK(back.status == DesignStatus::Feasible);
  CHECK(back.xi == d.xi);
  CHECK(back.objective_phi == d.objective_phi);

  // Break rho = chi * P on a pair whose cell holds a mirror.
  for (int k = 0; k < model.pair_count(); ++k) {
    if (!d.xi[model.pairs[k].cell]) continue;
    auto broken = values;
    const std::string name = model.lp.vars[model.rho_var(k)].name;
    broken[name] = x(model.rho_var(k)) - 1e-5;
    CHECK_THROWS_AS((void)accept_solution(model, broken), FormatError);
    break;
  }
  auto unknown = values;
  unknown["psi"] = 1.0;
  CHECK_THROWS_AS((void)accept_solution(model, unknown), FormatError);

  std::istringstream text("# external solver output\nphi = 1.5\nP_0 0.25\n\nxi_1=1 # mirror\n");
  const auto parsed = read_solution(text);
  CHECK(parsed.at("phi") == 1.5);
  CHECK(parsed.at("P_0") == 0.25);
  CHECK(parsed.at("xi_1") == 1.0);
  std::istringstream malformed("phi = 1\nP_0 = abc\n");
  try {
    (void)read_solution(malformed);
    FAIL("expected a parse error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::istringstream dup("phi=1\nphi=2\n");
  CHECK_THROWS_AS((void)read_solution(dup), FormatError);
}
