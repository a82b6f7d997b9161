#include <doctest.h>

#include "mirrorvlc/lp.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

using namespace mirrorvlc::lp;

namespace {

// Vertex enumeration over all n-subsets of the constraint hyperplanes
// (rows and finite variable bounds). Independent of the simplex code.
struct Halfspace {
  Eigen::VectorXd a;
  double b;  // a.x <= b
};

std::vector<Halfspace> halfspaces(const LinearModel& model) {
  const int n = model.variable_count();
  std::vector<Halfspace> hs;
  for (const Row& row : model.rows) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    for (const Term& t : row.terms) a(t.var) += t.coef;
    if (std::isfinite(row.upper)) hs.push_back({a, row.upper});
    if (std::isfinite(row.lower)) hs.push_back({-a, -row.lower});
  }
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e(j) = 1.0;
    if (std::isfinite(model.vars[j].upper)) hs.push_back({e, model.vars[j].upper});
    if (std::isfinite(model.vars[j].lower)) hs.push_back({-e, -model.vars[j].lower});
  }
  return hs;
}

// Best objective over feasible vertices; NaN when none is feasible.
double vertex_oracle(const LinearModel& model) {
  const int n = model.variable_count();
  const auto hs = halfspaces(model);
  const int k = static_cast<int>(hs.size());
  double best = std::nan("");
  std::vector<int> pick(n);
  std::vector<bool> mask(k, false);
  std::fill(mask.begin(), mask.begin() + n, true);
  do {
    Eigen::MatrixXd a(n, n);
    Eigen::VectorXd b(n);
    int r = 0;
    for (int i = 0; i < k; ++i) {
      if (!mask[i]) continue;
      a.row(r) = hs[i].a.transpose();
      b(r) = hs[i].b;
      ++r;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (lu.rank() < n) continue;
    const Eigen::VectorXd x = lu.solve(b);
    bool feasible = true;
    for (const auto& h : hs) feasible = feasible && h.a.dot(x) <= h.b + 1e-9;
    if (!feasible) continue;
    const double v = objective_value(model, x);
    const bool better = model.sense == Sense::Maximize ? v > best : v < best;
    if (std::isnan(best) || better) best = v;
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return best;
}

}  // namespace

TEST_CASE("two-variable textbook LP") {
  // max 3x + 5y  s.t.  x <= 4, 2y <= 12, 3x + 2y <= 18
  LinearModel m;
  const int x = m.add_variable("x", 0.0, kInf);
  const int y = m.add_variable("y", 0.0, kInf);
  m.objective = {{x, 3.0}, {y, 5.0}};
  m.add_row("c1", {{x, 1.0}}, -kInf, 4.0);
  m.add_row("c2", {{y, 2.0}}, -kInf, 12.0);
  m.add_row("c3", {{x, 3.0}, {y, 2.0}}, -kInf, 18.0);
  const Solution s = solve(m);
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.x(x) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(s.x(y) == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(s.objective == doctest::Approx(36.0).epsilon(1e-12));
  CHECK(s.objective == doctest::Approx(vertex_oracle(m)).epsilon(1e-12));
}

TEST_CASE("infeasible rows report a certificate row") {
  LinearModel m;
  const int x = m.add_variable("x", 0.0, 10.0);
  m.add_row("low", {{x, 1.0}}, 5.0, kInf);
  m.add_row("high", {{x, 1.0}}, -kInf, 3.0);
  const Solution s = solve(m);
  CHECK(s.status == Status::Infeasible);
  CHECK((s.infeasible_row == 0 || s.infeasible_row == 1));
}

TEST_CASE("unbounded objective") {
  LinearModel m;
  const int x = m.add_variable("x", 0.0, kInf);
  const int y = m.add_variable("y", 0.0, kInf);
  m.objective = {{x, 1.0}};
  m.add_row("r", {{x, 1.0}, {y, -1.0}}, -kInf, 1.0);
  CHECK(solve(m).status == Status::Unbounded);
}

TEST_CASE("equality, ranged rows and free variables") {
  // min x + y with x free, x + y = 3, 1 <= x - y <= 2
  LinearModel m;
  m.sense = Sense::Minimize;
  const int x = m.add_variable("x", -kInf, kInf);
  const int y = m.add_variable("y", -kInf, kInf);
  m.objective = {{x, 1.0}, {y, 2.0}};
  m.add_row("sum", {{x, 1.0}, {y, 1.0}}, 3.0, 3.0);
  m.add_row("gap", {{x, 1.0}, {y, -1.0}}, 1.0, 2.0);
  const Solution s = solve(m);
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.x(x) == doctest::Approx(2.5));
  CHECK(s.x(y) == doctest::Approx(0.5));
  CHECK(s.objective == doctest::Approx(3.5));
}

TEST_CASE("Beale's cycling example terminates at the optimum") {
  LinearModel m;
  m.sense = Sense::Minimize;
  const int x4 = m.add_variable("x4", 0.0, kInf);
  const int x5 = m.add_variable("x5", 0.0, kInf);
  const int x6 = m.add_variable("x6", 0.0, kInf);
  const int x7 = m.add_variable("x7", 0.0, kInf);
  m.objective = {{x4, -0.75}, {x5, 20.0}, {x6, -0.5}, {x7, 6.0}};
  m.add_row("r1", {{x4, 0.25}, {x5, -8.0}, {x6, -1.0}, {x7, 9.0}}, -kInf, 0.0);
  m.add_row("r2", {{x4, 0.5}, {x5, -12.0}, {x6, -0.5}, {x7, 3.0}}, -kInf, 0.0);
  m.add_row("r3", {{x6, 1.0}}, -kInf, 1.0);
  const Solution s = solve(m);
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.objective == doctest::Approx(-1.25).epsilon(1e-12));
}

TEST_CASE("random boxed LPs agree with vertex enumeration") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  std::uniform_int_distribution<int> dims(2, 4);
  int feasible = 0;
  for (int trial = 0; trial < 150; ++trial) {
    LinearModel m;
    m.sense = trial % 2 == 0 ? Sense::Maximize : Sense::Minimize;
    const int n = dims(rng);
    const int rows = dims(rng);
    for (int j = 0; j < n; ++j) {
      const double lo = std::floor(coef(rng));
      m.add_variable("x" + std::to_string(j), lo, lo + 1.0 + std::abs(coef(rng)));
      m.objective.push_back({j, coef(rng)});
    }
    for (int i = 0; i < rows; ++i) {
      std::vector<Term> terms;
      for (int j = 0; j < n; ++j) terms.push_back({j, coef(rng)});
      const double b = coef(rng);
      if (i % 3 == 0) m.add_row("r", terms, b, b + 2.0);
      else if (i % 3 == 1) m.add_row("r", terms, -kInf, b);
      else m.add_row("r", terms, b, kInf);
    }
    const double expected = vertex_oracle(m);
    const Solution s = solve(m);
    if (std::isnan(expected)) {
      CHECK(s.status == Status::Infeasible);
      continue;
    }
    ++feasible;
    REQUIRE(s.status == Status::Optimal);
    CHECK(s.objective == doctest::Approx(expected).epsilon(1e-9));
    CHECK(check_feasibility(m, s.x, false).max_violation <= 1e-9);
  }
  CHECK(feasible > 30);
}
