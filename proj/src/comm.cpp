#include "mirrorvlc/comm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mirrorvlc {

double CommProblem::default_power(int m) const { return std::min(p_prev(m) * (1.0 + tau), p_max); }

CommProblem make_comm_problem(const ChannelTensor& tensor, const MirrorVector& xi,
                              const Room& room, std::span<const LedPose> leds, const Beam& beam,
                              std::span<const ReceiverNode> users, const Eigen::VectorXd& p_prev,
                              double p_max) {
  if (static_cast<int>(leds.size()) != tensor.led_count() ||
      static_cast<int>(users.size()) != tensor.node_count() || p_prev.size() != tensor.led_count()) {
    throw std::invalid_argument("LED, user and power counts must match the tensor");
  }
  CommProblem p;
  p.gains = total_gain_matrix(tensor, xi);
  p.p_prev = p_prev;
  p.p_max = p_max;
  const double inf = std::numeric_limits<double>::infinity();
  p.axis_offset = Eigen::MatrixXd::Constant(p.led_count(), p.user_count(), inf);
  for (int m = 0; m < p.led_count(); ++m) {
    for (int u = 0; u < p.user_count(); ++u) {
      if (tensor.los(m, u) > 0.0) {
        p.axis_offset(m, u) = angle_between(leds[m].orientation, Vector3(users[u].position - leds[m].position));
      }
    }
  }
  for (const NlosEntry& e : tensor.nlos) {
    if (!xi[e.cell] || tensor.los(e.led, e.node) > 0.0) continue;
    const MirrorPath path = mirror_path(leds[e.led], beam.divergence, e.cell, users[e.node], room);
    if (path.valid) p.axis_offset(e.led, e.node) = std::min(p.axis_offset(e.led, e.node), path.irradiance_angle);
  }
  return p;
}

double sinr(int u, std::span<const int> eps, const Eigen::VectorXd& powers,
            const Eigen::MatrixXd& gains, double noise_power) {
  const int users = static_cast<int>(gains.cols());
  std::vector<double> stream(users, 0.0);
  for (int m = 0; m < static_cast<int>(eps.size()); ++m) {
    if (eps[m] != kUnassigned) stream[eps[m]] += gains(m, u) * powers(m);
  }
  double interference = 0.0;
  for (int k = 0; k < users; ++k) {
    if (k != u) interference += stream[k] * stream[k];
  }
  return stream[u] * stream[u] / (noise_power + interference);
}

Eigen::VectorXd all_sinr(std::span<const int> eps, const Eigen::VectorXd& powers,
                         const Eigen::MatrixXd& gains, double noise_power) {
  const int users = static_cast<int>(gains.cols());
  // received(k, u): stream k's power at user u.
  Eigen::MatrixXd received = Eigen::MatrixXd::Zero(users, users);
  for (int m = 0; m < static_cast<int>(eps.size()); ++m) {
    if (eps[m] != kUnassigned) received.row(eps[m]) += powers(m) * gains.row(m);
  }
  Eigen::VectorXd out(users);
  for (int u = 0; u < users; ++u) {
    const double total = received.col(u).squaredNorm();
    const double signal = received(u, u) * received(u, u);
    out(u) = signal / (noise_power + std::max(0.0, total - signal));
  }
  return out;
}

double throughput(double sinr, double bandwidth) { return bandwidth * std::log2(1.0 + sinr); }

void evaluate(Assignment& a, const CommProblem& problem) {
  a.per_user_sinr = all_sinr(a.eps, a.powers, problem.gains, problem.noise_power());
  a.per_user_throughput = a.per_user_sinr.unaryExpr(
      [&](double g) { return throughput(g, problem.bandwidth); });
}

int default_crowd_threshold(int users) {
  return std::max(1, static_cast<int>(std::ceil(0.03 * users)));
}

double min_sinr(const Assignment& a) {
  if (a.per_user_sinr.size() == 0) return std::numeric_limits<double>::quiet_NaN();
  return a.per_user_sinr.minCoeff();
}

namespace {

Assignment untouched(const CommProblem& p) {
  Assignment a;
  a.tau = p.tau;
  a.eps.assign(p.led_count(), kUnassigned);
  a.powers.resize(p.led_count());
  for (int m = 0; m < p.led_count(); ++m) a.powers(m) = p.default_power(m);
  return a;
}

double discounted(const CommProblem& p, int m, double kappa) {
  return std::max(p.p_prev(m) * (1.0 - kappa), p.p_prev(m) * (1.0 - p.tau));
}

}  // namespace

Assignment nua_assign(const CommProblem& p) {
  Assignment a = untouched(p);
  for (int m = 0; m < p.led_count(); ++m) {
    int nearest = -1;
    int second = -1;
    int covered = 0;
    for (int u = 0; u < p.user_count(); ++u) {
      if (!p.covers(m, u)) continue;
      ++covered;
      const double d = p.axis_offset(m, u);
      if (nearest < 0 || d < p.axis_offset(m, nearest)) {
        second = nearest;
        nearest = u;
      } else if (second < 0 || d < p.axis_offset(m, second)) {
        second = u;
      }
    }
    if (covered == 0) continue;
    a.eps[m] = nearest;
    if (covered > 1) a.powers(m) = discounted(p, m, p.gains(m, second) / p.gains(m, nearest));
  }
  return a;
}

Assignment ssa_user_assign(const CommProblem& p) {
  Assignment a = untouched(p);
  std::vector<int> incoming;
  for (int u = 0; u < p.user_count(); ++u) {
    incoming.clear();
    for (int m = 0; m < p.led_count(); ++m) {
      if (p.covers(m, u)) incoming.push_back(m);
    }
    if (incoming.empty()) continue;
    int strongest = -1;
    int strongest_free = -1;
    bool conflict = false;
    for (int m : incoming) {
      if (strongest < 0 || p.gains(m, u) > p.gains(strongest, u)) strongest = m;
      if (a.eps[m] != kUnassigned) {
        conflict = true;
      } else if (strongest_free < 0 || p.gains(m, u) > p.gains(strongest_free, u)) {
        strongest_free = m;
      }
    }
    if (strongest_free < 0) continue;  // every incoming LED already serves someone
    for (int m : incoming) {
      if (a.eps[m] == kUnassigned) a.eps[m] = u;
    }
    if (conflict && incoming.size() > 1) {
      const double kappa = p.gains(strongest, u) / p.gains(strongest_free, u);
      a.powers(strongest_free) = discounted(p, strongest_free, kappa);
    }
  }
  return a;
}

Assignment ssa_led_assign(const CommProblem& p, int crowd_threshold) {
  if (crowd_threshold < 0) crowd_threshold = default_crowd_threshold(p.user_count());
  Assignment a = untouched(p);
  for (int m = 0; m < p.led_count(); ++m) {
    // Selects instead of branches: coverage is data dependent and poorly predicted.
    int best = -1;
    int second = -1;
    double g_best = 0.0;
    double g_second = 0.0;
    int covered = 0;
    for (int u = 0; u < p.user_count(); ++u) {
      const double g = p.gains(m, u);
      covered += g > 0.0;
      const bool top = g > g_best;
      const bool next = !top & (g > g_second);
      second = top ? best : (next ? u : second);
      g_second = top ? g_best : (next ? g : g_second);
      best = top ? u : best;
      g_best = top ? g : g_best;
    }
    a.eps[m] = covered == 1 ? best : a.eps[m];
    if (covered > 1 && covered <= crowd_threshold) {
      a.eps[m] = best;
      a.powers(m) = discounted(p, m, g_second / g_best);
    }
  }
  return a;
}

namespace {

class AssignSearch {
 public:
  explicit AssignSearch(const CommProblem& p) : p_(p), m_(p.led_count()), u_(p.user_count()) {
    for (int m = 0; m < m_; ++m) {
      levels_.push_back({p.p_prev(m) * (1.0 - p.tau), p.p_prev(m), p.default_power(m)});
    }
    // suffix(m, u): most signal user u can still collect from LEDs m..M-1.
    suffix_ = Eigen::MatrixXd::Zero(m_ + 1, std::max(u_, 1));
    for (int m = m_ - 1; m >= 0; --m) {
      for (int u = 0; u < u_; ++u) {
        suffix_(m, u) = suffix_(m + 1, u) + (usable(m, u) ? p.gains(m, u) * levels_[m][2] : 0.0);
      }
    }
    received_ = Eigen::MatrixXd::Zero(u_, u_);
    eps_.assign(m_, kUnassigned);
    power_ = Eigen::VectorXd::Zero(m_);
  }

  Assignment run() {
    Assignment best = untouched(p_);
    best_eps_ = best.eps;
    best_power_ = best.powers;
    best_value_ = u_ > 0 ? 0.0 : -1.0;
    if (u_ > 0) dfs(0);
    best.eps = best_eps_;
    for (int m = 0; m < m_; ++m) {
      if (best_eps_[m] != kUnassigned) best.powers(m) = best_power_(m);
    }
    return best;
  }

 private:
  [[nodiscard]] bool usable(int m, int u) const { return p_.gains(m, u) > 0.0 && p_.p_prev(m) > 0.0; }

  [[nodiscard]] double value_bound(int next) const {
    double bound = std::numeric_limits<double>::infinity();
    for (int u = 0; u < u_; ++u) {
      const double signal = received_(u, u) + suffix_(next, u);
      const double interference = received_.col(u).squaredNorm() - received_(u, u) * received_(u, u);
      bound = std::min(bound, signal * signal / (p_.noise_power() + std::max(0.0, interference)));
    }
    return bound;
  }

  void dfs(int m) {
    if (m == m_) {
      const Eigen::VectorXd g = value_at_leaf();
      const double v = g.minCoeff();
      if (v > best_value_) {
        best_value_ = v;
        best_eps_ = eps_;
        best_power_ = power_;
      }
      return;
    }
    // Slack keeps rounding in the incremental sums from cutting a tying leaf.
    if (value_bound(m) * (1.0 + 1e-9) <= best_value_) return;
    dfs(m + 1);  // unassigned first: lexicographically smallest
    for (int u = 0; u < u_; ++u) {
      if (!usable(m, u)) continue;
      for (double level : levels_[m]) {
        eps_[m] = u;
        power_(m) = level;
        received_.row(u) += level * p_.gains.row(m);
        dfs(m + 1);
        received_.row(u) -= level * p_.gains.row(m);
      }
      eps_[m] = kUnassigned;
      power_(m) = 0.0;
    }
  }

  [[nodiscard]] Eigen::VectorXd value_at_leaf() const {
    return all_sinr(eps_, power_, p_.gains, p_.noise_power());
  }

  const CommProblem& p_;
  int m_;
  int u_;
  std::vector<std::array<double, 3>> levels_;
  Eigen::MatrixXd suffix_;
  Eigen::MatrixXd received_;
  std::vector<int> eps_;
  Eigen::VectorXd power_;
  std::vector<int> best_eps_;
  Eigen::VectorXd best_power_;
  double best_value_{0.0};
};

}  // namespace

Assignment brute_force_assign(const CommProblem& problem) {
  if (problem.led_count() > 8 || problem.user_count() > 3) {
    throw std::invalid_argument("exhaustive assignment is limited to 8 LEDs and 3 users");
  }
  Assignment a = AssignSearch(problem).run();
  evaluate(a, problem);
  return a;
}

}  // namespace mirrorvlc
