#include "mirrorvlc/design.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <stdexcept>

namespace mirrorvlc {

MirrorRegime parse_regime(std::string_view name) {
  if (name == "none") return MirrorRegime::None;
  if (name == "adjacent") return MirrorRegime::Adjacent;
  if (name == "opposite") return MirrorRegime::Opposite;
  if (name == "four") return MirrorRegime::Four;
  throw std::invalid_argument("unknown mirror regime '" + std::string(name) +
                              "' (expected none, adjacent, opposite or four)");
}

const char* to_string(MirrorRegime regime) {
  switch (regime) {
    case MirrorRegime::None: return "none";
    case MirrorRegime::Adjacent: return "adjacent";
    case MirrorRegime::Opposite: return "opposite";
    case MirrorRegime::Four: return "four";
  }
  return "?";
}

MirrorVector regime_cell_mask(const Room& room, MirrorRegime regime, const RegimeWalls& walls) {
  std::array<bool, kWallCount> on{};
  switch (regime) {
    case MirrorRegime::None: break;
    case MirrorRegime::Adjacent:
      for (WallId w : walls.adjacent) on[static_cast<int>(w)] = true;
      break;
    case MirrorRegime::Opposite:
      for (WallId w : walls.opposite) on[static_cast<int>(w)] = true;
      break;
    case MirrorRegime::Four: on.fill(true); break;
  }
  MirrorVector mask(room.cell_count(), 0);
  for (int z = 0; z < room.cell_count(); ++z) {
    mask[z] = on[static_cast<int>(cell_ref(room, z).wall)] ? 1 : 0;
  }
  return mask;
}

int design_variable_count(int leds, int cells, int pairs) { return cells + 2 * pairs + leds + 1; }

int design_row_count(int sensors, int pairs) { return 3 * sensors + 1 + 4 * pairs; }

const char* to_string(DesignStatus status) {
  switch (status) {
    case DesignStatus::Optimal: return "optimal";
    case DesignStatus::Feasible: return "feasible";
    case DesignStatus::Infeasible: return "infeasible";
    case DesignStatus::IterationLimit: return "iteration-limit";
  }
  return "?";
}

namespace {

std::string pair_suffix(const DesignPair& p) {
  return std::to_string(p.led) + "_" + std::to_string(p.cell);
}

void render(DesignModel& model) {
  using lp::kInf;
  using lp::Term;
  lp::LinearModel& lp = model.lp;
  const DesignParams& prm = model.params;
  const int n_sensors = model.sensor_count;
  lp.sense = lp::Sense::Maximize;

  for (int z = 0; z < model.cell_count; ++z) {
    lp.add_variable("xi_" + std::to_string(z), 0.0, model.allowed[z] ? 1.0 : 0.0, true);
  }
  for (const DesignPair& p : model.pairs) lp.add_variable("chi_" + pair_suffix(p), 0.0, 1.0, true);
  for (int m = 0; m < model.led_count; ++m) {
    lp.add_variable("P_" + std::to_string(m), prm.p_min, prm.p_max);
  }
  for (const DesignPair& p : model.pairs) lp.add_variable("rho_" + pair_suffix(p), 0.0, kInf);
  const int phi = lp.add_variable("phi", 0.0, kInf);
  lp.objective = {{phi, 1.0}};

  // Per-sensor illuminance as a linear form.
  std::vector<std::vector<Term>> lux(n_sensors);
  for (int n = 0; n < n_sensors; ++n) {
    for (int m = 0; m < model.led_count; ++m) {
      if (model.los_lux(m, n) != 0.0) lux[n].push_back({model.p_var(m), model.los_lux(m, n)});
    }
  }
  for (int k = 0; k < model.pair_count(); ++k) {
    for (const auto& [n, c] : model.pairs[k].lux) lux[n].push_back({model.rho_var(k), c});
  }
  for (auto& terms : lux) {
    std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
  }

  for (int n = 0; n < n_sensors; ++n) {
    std::vector<Term> row{{phi, 1.0}};
    for (const Term& t : lux[n]) row.push_back({t.var, -t.coef});
    lp.add_row("link_" + std::to_string(n), std::move(row), -kInf, 0.0);
  }
  {
    std::vector<double> agg(lp.variable_count(), 0.0);
    for (const auto& terms : lux) {
      for (const Term& t : terms) agg[t.var] += t.coef;
    }
    std::vector<Term> row{{phi, 1.0}};
    const double w = prm.mu / std::max(1, n_sensors);
    for (int j = 0; j < lp.variable_count(); ++j) {
      if (agg[j] != 0.0) row.push_back({j, -w * agg[j]});
    }
    lp.add_row("uniformity", std::move(row), 0.0, kInf);
  }
  for (int n = 0; n < n_sensors; ++n) {
    lp.add_row("lux_lo_" + std::to_string(n), lux[n], prm.lux_min, kInf);
    lp.add_row("lux_hi_" + std::to_string(n), lux[n], -kInf, prm.lux_max);
  }
  for (int k = 0; k < model.pair_count(); ++k) {
    const DesignPair& p = model.pairs[k];
    const std::string s = pair_suffix(p);
    const int chi = model.chi_var(k);
    const int pw = model.p_var(p.led);
    const int rho = model.rho_var(k);
    lp.add_row("chi_" + s, {{chi, 1.0}, {model.xi_var(p.cell), -1.0}}, 0.0, 0.0);
    lp.add_row("rho_p_" + s, {{rho, 1.0}, {pw, -1.0}}, -kInf, 0.0);
    lp.add_row("rho_lo_" + s, {{rho, 1.0}, {chi, -prm.p_max}, {pw, -1.0}}, -prm.p_max, kInf);
    lp.add_row("rho_chi_" + s, {{rho, 1.0}, {chi, -prm.p_max}}, -kInf, 0.0);
  }
}

// Cells and pairs that can influence some sensor.
struct Presolve {
  std::vector<std::uint8_t> pair_relevant;
  std::vector<std::uint8_t> cell_relevant;
  std::vector<int> relevant_cells;
  int relevant_pairs{0};
  std::string certificate;
  int sensor{-1};
};

Presolve presolve(const DesignModel& model) {
  Presolve pre;
  pre.pair_relevant.assign(model.pair_count(), 0);
  pre.cell_relevant.assign(model.cell_count, 0);
  for (int k = 0; k < model.pair_count(); ++k) {
    const DesignPair& p = model.pairs[k];
    if (!p.lux.empty() && model.allowed[p.cell]) {
      pre.pair_relevant[k] = 1;
      pre.cell_relevant[p.cell] = 1;
      ++pre.relevant_pairs;
    }
  }
  for (int z = 0; z < model.cell_count; ++z) {
    if (pre.cell_relevant[z]) pre.relevant_cells.push_back(z);
  }

  const DesignParams& prm = model.params;
  Eigen::VectorXd best = model.los_lux.colwise().sum().transpose();
  const Eigen::VectorXd least = prm.p_min * best;
  for (int k = 0; k < model.pair_count(); ++k) {
    if (!pre.pair_relevant[k]) continue;
    for (const auto& [n, c] : model.pairs[k].lux) best(n) += c;
  }
  best *= prm.p_max;
  for (int n = 0; n < model.sensor_count; ++n) {
    if (best(n) < prm.lux_min - 1e-9 * std::max(1.0, std::abs(prm.lux_min))) {
      pre.certificate = "lux_lo_" + std::to_string(n);
      pre.sensor = n;
      break;
    }
    if (least(n) > prm.lux_max + 1e-9 * std::max(1.0, std::abs(prm.lux_max))) {
      pre.certificate = "lux_hi_" + std::to_string(n);
      pre.sensor = n;
      break;
    }
  }
  return pre;
}

// LP over the powers (scaled to p = P / p_max), phi, the free xi and the rho
// of free pairs. Pairs whose cell is fixed are folded into the power terms.
struct NodeLp {
  lp::LinearModel lp;
  std::vector<int> xi_col;  // per cell, -1 when fixed
  int phi{};
};

constexpr std::int8_t kFree = -1;

NodeLp build_node_lp(const DesignModel& model, const Presolve& pre,
                     const std::vector<std::int8_t>& fixed) {
  using lp::kInf;
  using lp::Term;
  const DesignParams& prm = model.params;
  const int n_sensors = model.sensor_count;
  const int n_leds = model.led_count;
  NodeLp node;
  lp::LinearModel& lp = node.lp;
  lp.sense = lp::Sense::Maximize;

  for (int m = 0; m < n_leds; ++m) {
    lp.add_variable("P_" + std::to_string(m), prm.p_min / prm.p_max, 1.0);
  }
  node.phi = lp.add_variable("phi", 0.0, kInf);
  lp.objective = {{node.phi, 1.0}};
  node.xi_col.assign(model.cell_count, -1);
  for (int z : pre.relevant_cells) {
    if (fixed[z] == kFree) node.xi_col[z] = lp.add_variable("xi_" + std::to_string(z), 0.0, 1.0);
  }

  Eigen::MatrixXd power_coef = prm.p_max * model.los_lux.transpose();  // sensors x leds
  std::vector<std::vector<Term>> free_terms(n_sensors);
  std::vector<int> free_pairs;
  std::vector<int> rho_col;
  for (int k = 0; k < model.pair_count(); ++k) {
    if (!pre.pair_relevant[k]) continue;
    const DesignPair& p = model.pairs[k];
    if (fixed[p.cell] == 1) {
      for (const auto& [n, c] : p.lux) power_coef(n, p.led) += prm.p_max * c;
    } else if (fixed[p.cell] == kFree) {
      const int col = lp.add_variable("rho_" + pair_suffix(p), 0.0, 1.0);
      free_pairs.push_back(k);
      rho_col.push_back(col);
      for (const auto& [n, c] : p.lux) free_terms[n].push_back({col, prm.p_max * c});
    }
  }

  std::vector<std::vector<Term>> lux(n_sensors);
  for (int n = 0; n < n_sensors; ++n) {
    for (int m = 0; m < n_leds; ++m) {
      if (power_coef(n, m) != 0.0) lux[n].push_back({m, power_coef(n, m)});
    }
    lux[n].insert(lux[n].end(), free_terms[n].begin(), free_terms[n].end());
  }
  for (int n = 0; n < n_sensors; ++n) {
    std::vector<Term> row{{node.phi, 1.0}};
    for (const Term& t : lux[n]) row.push_back({t.var, -t.coef});
    lp.add_row("link_" + std::to_string(n), std::move(row), -kInf, 0.0);
  }
  {
    std::vector<double> agg(lp.variable_count(), 0.0);
    for (const auto& terms : lux) {
      for (const Term& t : terms) agg[t.var] += t.coef;
    }
    std::vector<Term> row{{node.phi, 1.0}};
    const double w = prm.mu / std::max(1, n_sensors);
    for (int j = 0; j < lp.variable_count(); ++j) {
      if (agg[j] != 0.0) row.push_back({j, -w * agg[j]});
    }
    lp.add_row("uniformity", std::move(row), 0.0, kInf);
  }
  for (int n = 0; n < n_sensors; ++n) {
    lp.add_row("lux_lo_" + std::to_string(n), lux[n], prm.lux_min, kInf);
    lp.add_row("lux_hi_" + std::to_string(n), lux[n], -kInf, prm.lux_max);
  }
  for (std::size_t i = 0; i < free_pairs.size(); ++i) {
    const DesignPair& p = model.pairs[free_pairs[i]];
    const std::string s = pair_suffix(p);
    const int r = rho_col[i];
    const int xi = node.xi_col[p.cell];
    lp.add_row("rho_p_" + s, {{r, 1.0}, {p.led, -1.0}}, -kInf, 0.0);
    lp.add_row("rho_lo_" + s, {{r, 1.0}, {xi, -1.0}, {p.led, -1.0}}, -1.0, kInf);
    lp.add_row("rho_chi_" + s, {{r, 1.0}, {xi, -1.0}}, -kInf, 0.0);
  }
  return node;
}

lp::SimplexOptions node_options() {
  lp::SimplexOptions o;
  o.feasibility_tol = 1e-9;
  o.optimality_tol = 1e-9;
  return o;
}

int sensor_of(const std::string& row) {
  for (const char* prefix : {"link_", "lux_lo_", "lux_hi_"}) {
    const std::string p(prefix);
    if (row.rfind(p, 0) == 0) return std::stoi(row.substr(p.size()));
  }
  return -1;
}

bool improves(const MirrorDesign& cand, const MirrorDesign& best) {
  if (!cand.has_solution()) return false;
  if (!best.has_solution()) return true;
  return cand.objective_phi > best.objective_phi + 1e-12 * std::max(1.0, std::abs(best.objective_phi));
}

MirrorDesign solve_fixed(const DesignModel& model, const Presolve& pre, const MirrorVector& xi) {
  std::vector<std::int8_t> fixed(model.cell_count);
  for (int z = 0; z < model.cell_count; ++z) fixed[z] = xi[z] ? 1 : 0;
  const NodeLp node = build_node_lp(model, pre, fixed);
  const lp::Solution s = lp::solve(node.lp, node_options());

  MirrorDesign d;
  d.xi = xi;
  d.nodes = 1;
  if (s.status != lp::Status::Optimal) {
    d.status = s.status == lp::Status::Infeasible ? DesignStatus::Infeasible
                                                  : DesignStatus::IterationLimit;
    if (s.infeasible_row >= 0) {
      d.certificate = node.lp.rows[s.infeasible_row].name;
      d.infeasible_sensor = sensor_of(d.certificate);
    }
    d.xi.clear();
    return d;
  }
  d.status = DesignStatus::Optimal;
  d.powers_prev = model.params.p_max * s.x.head(model.led_count);
  d.powers_prev = d.powers_prev.cwiseMax(model.params.p_min).cwiseMin(model.params.p_max);
  d.rho = Eigen::VectorXd::Zero(model.pair_count());
  for (int k = 0; k < model.pair_count(); ++k) {
    if (xi[model.pairs[k].cell]) d.rho(k) = d.powers_prev(model.pairs[k].led);
  }
  d.objective_phi = s.x(node.phi);
  return d;
}

void check_mirror_vector(const DesignModel& model, const MirrorVector& xi) {
  if (static_cast<int>(xi.size()) != model.cell_count) {
    throw std::invalid_argument("mirror vector length must equal the cell count");
  }
  for (int z = 0; z < model.cell_count; ++z) {
    if (xi[z] > 1) throw std::invalid_argument("mirror vector entries must be 0 or 1");
    if (xi[z] && !model.allowed[z]) {
      throw std::invalid_argument("cell " + std::to_string(z) + " is excluded by the regime");
    }
  }
}

MirrorDesign greedy_incumbent(const DesignModel& model, const Presolve& pre, long& solves) {
  MirrorVector xi(model.cell_count, 0);
  MirrorDesign best = solve_fixed(model, pre, xi);
  ++solves;
  MirrorVector ones = xi;
  for (int z : pre.relevant_cells) ones[z] = 1;
  MirrorDesign all = solve_fixed(model, pre, ones);
  ++solves;
  if (improves(all, best)) {
    best = all;
    xi = ones;
  }
  for (int pass = 0; pass < 2; ++pass) {
    bool changed = false;
    for (int z : pre.relevant_cells) {
      xi[z] ^= 1;
      MirrorDesign cand = solve_fixed(model, pre, xi);
      ++solves;
      if (improves(cand, best)) {
        best = std::move(cand);
        changed = true;
      } else {
        xi[z] ^= 1;
      }
    }
    if (!changed) break;
  }
  return best;
}

struct Node {
  std::vector<std::int8_t> fixed;
  double bound{};
  long id{};
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    return a.id > b.id;
  }
};

}  // namespace

DesignModel build_design_model(const ChannelTensor& tensor, const Eigen::VectorXd& sensor_area,
                               const MirrorVector& allowed, const DesignParams& params) {
  if (sensor_area.size() != tensor.node_count()) {
    throw std::invalid_argument("sensor area count must equal the tensor node count");
  }
  if (static_cast<int>(allowed.size()) != tensor.cell_count) {
    throw std::invalid_argument("regime mask length must equal the cell count");
  }
  if (!(params.p_max > 0.0) || params.p_min < 0.0 || params.p_min > params.p_max) {
    throw std::invalid_argument("power bounds must satisfy 0 <= p_min <= p_max, p_max > 0");
  }
  if (!(params.mu > 0.0 && params.mu <= 1.0)) {
    throw std::invalid_argument("uniformity floor must lie in (0, 1]");
  }

  DesignModel model;
  model.params = params;
  model.led_count = tensor.led_count();
  model.cell_count = tensor.cell_count;
  model.sensor_count = tensor.node_count();
  model.allowed = allowed;
  model.los_lux = tensor.los;
  for (int n = 0; n < model.sensor_count; ++n) {
    model.los_lux.col(n) *= params.photometry.lux_per_watt(sensor_area(n));
  }

  std::vector<int> first_pair(model.led_count + 1, 0);
  for (int m = 0; m < model.led_count; ++m) {
    first_pair[m] = model.pair_count();
    for (int z : tensor.reflection_masks[m]) model.pairs.push_back({m, z, {}});
  }
  first_pair[model.led_count] = model.pair_count();
  for (const NlosEntry& e : tensor.nlos) {
    const auto& mask = tensor.reflection_masks[e.led];
    const auto it = std::lower_bound(mask.begin(), mask.end(), e.cell);
    const int k = first_pair[e.led] + static_cast<int>(it - mask.begin());
    model.pairs[k].lux.emplace_back(e.node,
                                    e.gain * params.photometry.lux_per_watt(sensor_area(e.node)));
  }
  for (auto& p : model.pairs) std::sort(p.lux.begin(), p.lux.end());

  render(model);
  return model;
}

MirrorDesign solve_lp(const DesignModel& model, const MirrorVector& xi) {
  check_mirror_vector(model, xi);
  return solve_fixed(model, presolve(model), xi);
}

MirrorDesign solve_design(const DesignModel& model, const DesignOptions& options) {
  const Presolve pre = presolve(model);
  if (!pre.certificate.empty()) {
    MirrorDesign d;
    d.status = DesignStatus::Infeasible;
    d.certificate = pre.certificate;
    d.infeasible_sensor = pre.sensor;
    return d;
  }

  long solves = 0;
  MirrorDesign incumbent;
  if (options.heuristics) incumbent = greedy_incumbent(model, pre, solves);

  const int root_rows = 3 * model.sensor_count + 1 + 3 * pre.relevant_pairs;
  if (root_rows > options.max_relaxation_rows) {
    incumbent.nodes = solves;
    incumbent.status = incumbent.has_solution() ? DesignStatus::Feasible
                                                : DesignStatus::IterationLimit;
    return incumbent;
  }

  auto prunable = [&](double bound) {
    if (!incumbent.has_solution()) return false;
    const double inc = incumbent.objective_phi;
    return bound <= inc + 1e-7 * std::max(1.0, std::abs(inc));
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  long next_id = 0;
  std::vector<std::int8_t> root(model.cell_count, 0);
  for (int z : pre.relevant_cells) root[z] = kFree;
  open.push({root, std::numeric_limits<double>::infinity(), next_id++});

  bool exhausted = true;
  bool proven = true;
  std::string root_certificate;
  long nodes = 0;
  while (!open.empty()) {
    if (nodes >= options.node_budget) {
      exhausted = false;
      break;
    }
    Node node = open.top();
    open.pop();
    if (prunable(node.bound)) continue;

    const NodeLp nlp = build_node_lp(model, pre, node.fixed);
    const lp::Solution s = lp::solve(nlp.lp, node_options());
    ++nodes;
    if (s.status == lp::Status::Infeasible) {
      if (node.id == 0 && s.infeasible_row >= 0) root_certificate = nlp.lp.rows[s.infeasible_row].name;
      continue;
    }
    if (s.status != lp::Status::Optimal) {
      proven = false;
      continue;
    }
    const double bound = s.x(nlp.phi);
    if (prunable(bound)) continue;

    int branch = -1;
    double frac_best = 1e-7;
    MirrorVector rounded(model.cell_count, 0);
    for (int z = 0; z < model.cell_count; ++z) {
      if (node.fixed[z] != kFree) {
        rounded[z] = static_cast<std::uint8_t>(node.fixed[z]);
        continue;
      }
      const double v = s.x(nlp.xi_col[z]);
      rounded[z] = v >= 0.5 ? 1 : 0;
      const double frac = std::min(v, 1.0 - v);
      if (frac > frac_best) {
        frac_best = frac;
        branch = z;
      }
    }

    if (branch < 0 || options.heuristics) {
      MirrorDesign cand = solve_fixed(model, pre, rounded);
      ++solves;
      if (improves(cand, incumbent)) incumbent = std::move(cand);
    }
    if (branch < 0) continue;

    for (std::int8_t value : {std::int8_t{0}, std::int8_t{1}}) {
      Node child{node.fixed, bound, next_id++};
      child.fixed[branch] = value;
      open.push(std::move(child));
    }
  }

  incumbent.nodes = nodes;
  if (!incumbent.has_solution()) {
    MirrorDesign d;
    d.nodes = nodes;
    if (exhausted && proven) {
      d.status = DesignStatus::Infeasible;
      d.certificate = root_certificate;
      d.infeasible_sensor = sensor_of(root_certificate);
    } else {
      d.status = DesignStatus::IterationLimit;
    }
    return d;
  }
  incumbent.status = exhausted && proven ? DesignStatus::Optimal : DesignStatus::IterationLimit;
  return incumbent;
}

MirrorDesign brute_force_design(const DesignModel& model) {
  std::vector<int> cells;
  for (int z = 0; z < model.cell_count; ++z) {
    if (model.allowed[z]) cells.push_back(z);
  }
  const int k = static_cast<int>(cells.size());
  if (k > 20) throw std::invalid_argument("exhaustive design search is limited to 20 cells");

  const Presolve pre = presolve(model);
  MirrorDesign best;
  MirrorDesign first_failure;
  long solves = 0;
  for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << k); ++mask) {
    MirrorVector xi(model.cell_count, 0);
    for (int i = 0; i < k; ++i) xi[cells[i]] = (mask >> (k - 1 - i)) & 1U;
    MirrorDesign cand = solve_fixed(model, pre, xi);
    ++solves;
    if (improves(cand, best)) best = std::move(cand);
    else if (solves == 1) first_failure = std::move(cand);
  }
  if (!best.has_solution()) {
    first_failure.status = DesignStatus::Infeasible;
    first_failure.xi.clear();
    best = std::move(first_failure);
  }
  best.nodes = solves;
  return best;
}

Eigen::VectorXd design_point(const DesignModel& model, const MirrorDesign& design) {
  if (!design.has_solution()) throw std::invalid_argument("design carries no solution");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(model.lp.variable_count());
  for (int z = 0; z < model.cell_count; ++z) x(model.xi_var(z)) = design.xi[z];
  for (int k = 0; k < model.pair_count(); ++k) {
    x(model.chi_var(k)) = design.xi[model.pairs[k].cell];
    x(model.rho_var(k)) = design.rho(k);
  }
  for (int m = 0; m < model.led_count; ++m) x(model.p_var(m)) = design.powers_prev(m);
  x(model.phi_var()) = design.objective_phi;
  return x;
}

Eigen::VectorXd design_lux(const DesignModel& model, const MirrorDesign& design) {
  Eigen::VectorXd lux = model.los_lux.transpose() * design.powers_prev;
  for (int k = 0; k < model.pair_count(); ++k) {
    for (const auto& [n, c] : model.pairs[k].lux) lux(n) += c * design.rho(k);
  }
  return lux;
}

}  // namespace mirrorvlc
