#include "mirrorvlc/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace mirrorvlc::lp {

int LinearModel::add_variable(std::string name, double lower, double upper, bool binary) {
  vars.push_back({std::move(name), lower, upper, binary});
  return static_cast<int>(vars.size()) - 1;
}

int LinearModel::add_row(std::string name, std::vector<Term> terms, double lower,
                         double upper) {
  rows.push_back({std::move(name), std::move(terms), lower, upper});
  return static_cast<int>(rows.size()) - 1;
}

std::unordered_map<std::string, int> LinearModel::variable_index() const {
  std::unordered_map<std::string, int> index;
  index.reserve(vars.size());
  for (int j = 0; j < variable_count(); ++j) index.emplace(vars[j].name, j);
  return index;
}

double activity(const Row& row, const Eigen::VectorXd& x) {
  double sum = 0.0;
  for (const Term& t : row.terms) sum += t.coef * x(t.var);
  return sum;
}

double objective_value(const LinearModel& model, const Eigen::VectorXd& x) {
  double sum = 0.0;
  for (const Term& t : model.objective) sum += t.coef * x(t.var);
  return sum;
}

FeasibilityReport check_feasibility(const LinearModel& model, const Eigen::VectorXd& x,
                                    bool require_integral) {
  if (x.size() != model.variable_count()) {
    throw std::invalid_argument("point dimension does not match the model");
  }
  FeasibilityReport report;
  auto scale = [](double lo, double hi) {
    double s = 1.0;
    if (std::isfinite(lo)) s = std::max(s, std::abs(lo));
    if (std::isfinite(hi)) s = std::max(s, std::abs(hi));
    return s;
  };
  for (int i = 0; i < model.row_count(); ++i) {
    const Row& row = model.rows[i];
    const double a = activity(row, x);
    const double v = std::max(row.lower - a, a - row.upper) / scale(row.lower, row.upper);
    if (v > report.max_violation) {
      report.max_violation = v;
      report.worst_row = i;
      report.worst_variable = -1;
    }
  }
  for (int j = 0; j < model.variable_count(); ++j) {
    const Variable& var = model.vars[j];
    double v = std::max(var.lower - x(j), x(j) - var.upper) / scale(var.lower, var.upper);
    if (require_integral && var.binary) v = std::max(v, std::abs(x(j) - std::round(x(j))));
    if (v > report.max_violation) {
      report.max_violation = v;
      report.worst_row = -1;
      report.worst_variable = j;
    }
  }
  return report;
}

const char* to_string(Status status) {
  switch (status) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::IterationLimit: return "iteration-limit";
  }
  return "unknown";
}

namespace {

enum class VarState : std::uint8_t { Basic, AtLower, AtUpper, FreeZero };

// Computational form: A x - s = 0 with row activities s boxed by the row
// bounds, plus one artificial column per row whose starting activity falls
// outside its box. Columns are structural [0, n), slack [n, n + m) and
// artificial [n + m, total).
class RevisedSimplex {
 public:
  RevisedSimplex(const LinearModel& model, const SimplexOptions& options)
      : model_(model), opt_(options) {
    n_ = model.variable_count();
    m_ = model.row_count();
    build_columns();
    iteration_cap_ = opt_.max_iterations > 0 ? opt_.max_iterations
                                             : 50 * (n_ + m_) + 1000;
    refactor_interval_ = std::max(100, m_);
  }

  Solution run() {
    Solution sol;
    initialise();
    const int art_begin = n_ + m_;
    if (total_ > art_begin) {
      std::fill(cost_.begin(), cost_.end(), 0.0);
      for (int j = art_begin; j < total_; ++j) cost_[j] = 1.0;
      const Status phase1 = iterate();
      if (phase1 == Status::IterationLimit) return finish(sol, Status::IterationLimit);
      refactor();
      double infeasibility = 0.0;
      int worst = -1;
      double worst_value = 0.0;
      for (int j = art_begin; j < total_; ++j) {
        const double v = x_[j];
        infeasibility += v;
        if (v > worst_value) {
          worst_value = v;
          worst = art_row_[j - art_begin];
        }
      }
      if (infeasibility > 1e-7 * bound_scale_) {
        sol.infeasible_row = worst;
        return finish(sol, Status::Infeasible);
      }
      for (int j = art_begin; j < total_; ++j) {
        lo_[j] = hi_[j] = 0.0;
        if (state_[j] != VarState::Basic) {
          x_[j] = 0.0;
          state_[j] = VarState::AtLower;
        }
      }
    }
    const double sign = model_.sense == Sense::Maximize ? -1.0 : 1.0;
    std::fill(cost_.begin(), cost_.end(), 0.0);
    for (const Term& t : model_.objective) cost_[t.var] += sign * t.coef;
    const Status phase2 = iterate();
    if (phase2 == Status::Optimal) refactor();
    return finish(sol, phase2);
  }

 private:
  void build_columns() {
    std::vector<int> counts(n_, 0);
    for (const Row& row : model_.rows) {
      for (const Term& t : row.terms) {
        if (t.var < 0 || t.var >= n_) throw std::out_of_range("row term references unknown variable");
        ++counts[t.var];
      }
    }
    col_start_.assign(n_ + 1, 0);
    for (int j = 0; j < n_; ++j) col_start_[(j) + 1] = col_start_[j] + counts[j];
    col_row_.resize(col_start_.back());
    col_val_.resize(col_start_.back());
    std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
    for (int i = 0; i < m_; ++i) {
      for (const Term& t : model_.rows[i].terms) {
        const int k = fill[t.var]++;
        col_row_[k] = i;
        col_val_[k] = t.coef;
      }
    }
  }

  void initialise() {
    lo_.clear();
    hi_.clear();
    x_.clear();
    state_.clear();
    art_row_.clear();
    art_sign_.clear();
    bound_scale_ = 1.0;
    for (const Variable& v : model_.vars) {
      if (v.lower > v.upper) {
        throw std::invalid_argument("variable '" + v.name + "' has lower > upper");
      }
      lo_.push_back(v.lower);
      hi_.push_back(v.upper);
      if (std::isfinite(v.lower)) {
        x_.push_back(v.lower);
        state_.push_back(VarState::AtLower);
      } else if (std::isfinite(v.upper)) {
        x_.push_back(v.upper);
        state_.push_back(VarState::AtUpper);
      } else {
        x_.push_back(0.0);
        state_.push_back(VarState::FreeZero);
      }
    }
    Eigen::VectorXd r = Eigen::VectorXd::Zero(m_);
    for (int j = 0; j < n_; ++j) {
      const double xj = x_[j];
      if (xj == 0.0) continue;
      for (int k = col_start_[j]; k < col_start_[(j) + 1]; ++k) {
        r(col_row_[k]) += col_val_[k] * xj;
      }
    }
    basis_.assign(m_, -1);
        for (int i = 0; i < m_; ++i) {
      const Row& row = model_.rows[i];
      if (row.lower > row.upper) throw std::invalid_argument("row '" + row.name + "' has lower > upper");
      if (std::isfinite(row.lower)) bound_scale_ = std::max(bound_scale_, std::abs(row.lower));
      if (std::isfinite(row.upper)) bound_scale_ = std::max(bound_scale_, std::abs(row.upper));
      lo_.push_back(row.lower);
      hi_.push_back(row.upper);
      const double ri = r(i);
      if (ri >= row.lower - opt_.feasibility_tol && ri <= row.upper + opt_.feasibility_tol) {
        x_.push_back(ri);
        state_.push_back(VarState::Basic);
        basis_[i] = n_ + i;
      } else {
        const bool below = ri < row.lower;
        const double b = below ? row.lower : row.upper;
        x_.push_back(b);
        state_.push_back(below ? VarState::AtLower : VarState::AtUpper);
        art_row_.push_back(i);
        // r - b + sign * t = 0 with t >= 0
        art_sign_.push_back(b > ri ? 1.0 : -1.0);
      }
    }
    const int art_begin = n_ + m_;
    total_ = art_begin + static_cast<int>(art_row_.size());
    for (int k = 0; k < static_cast<int>(art_row_.size()); ++k) {
      const int i = art_row_[k];
      lo_.push_back(0.0);
      hi_.push_back(kInf);
      x_.push_back(std::abs(x_[n_ + i] - r(i)));
      state_.push_back(VarState::Basic);
      basis_[i] = art_begin + static_cast<int>(k);
    }
    cost_.assign(total_, 0.0);
    binv_ = Eigen::MatrixXd::Zero(m_, m_);
    for (int i = 0; i < m_; ++i) {
      const int b = basis_[i];
      binv_(i, i) = b < art_begin ? -1.0 : art_sign_[b - art_begin];
    }
    iterations_ = 0;
  }

  // alpha = B^-1 A_j
  void ftran(int j, Eigen::VectorXd& alpha) const {
    if (j < n_) {
      alpha.setZero(m_);
      for (int k = col_start_[j]; k < col_start_[(j) + 1]; ++k) {
        alpha.noalias() += col_val_[k] * binv_.col(col_row_[k]);
      }
    } else if (j < n_ + m_) {
      alpha = -binv_.col(j - n_);
    } else {
      const int k = j - n_ - m_;
      alpha = art_sign_[k] * binv_.col(art_row_[k]);
    }
  }

  [[nodiscard]] double column_dot(int j, const Eigen::VectorXd& y) const {
    if (j < n_) {
      double s = 0.0;
      for (int k = col_start_[j]; k < col_start_[(j) + 1]; ++k) {
        s += col_val_[k] * y(col_row_[k]);
      }
      return s;
    }
    if (j < n_ + m_) return -y(j - n_);
    const int k = j - n_ - m_;
    return art_sign_[k] * y(art_row_[k]);
  }

  void add_column(int j, double scale, Eigen::VectorXd& v) const {
    if (j < n_) {
      for (int k = col_start_[j]; k < col_start_[(j) + 1]; ++k) {
        v(col_row_[k]) += scale * col_val_[k];
      }
    } else if (j < n_ + m_) {
      v(j - n_) -= scale;
    } else {
      const int k = j - n_ - m_;
      v(art_row_[k]) += scale * art_sign_[k];
    }
  }

  void refactor() {
    if (m_ == 0) return;
    Eigen::MatrixXd basis_matrix = Eigen::MatrixXd::Zero(m_, m_);
    Eigen::VectorXd col = Eigen::VectorXd::Zero(m_);
    for (int i = 0; i < m_; ++i) {
      col.setZero();
      add_column(basis_[i], 1.0, col);
      basis_matrix.col(i) = col;
    }
    binv_ = basis_matrix.partialPivLu().inverse();
    recompute_basics();
  }

  // B x_B = -N x_N
  void recompute_basics() {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
    for (int j = 0; j < total_; ++j) {
      if (state_[j] == VarState::Basic || x_[j] == 0.0) continue;
      add_column(j, -x_[j], rhs);
    }
    const Eigen::VectorXd xb = binv_ * rhs;
    for (int i = 0; i < m_; ++i) x_[basis_[i]] = xb(i);
  }

  Status iterate() {
    Eigen::VectorXd cb(m_);
    Eigen::VectorXd y(m_);
    Eigen::VectorXd alpha(m_);
    int degenerate_run = 0;
    bool bland = false;
    int since_refactor = 0;
    while (true) {
      if (iterations_ >= iteration_cap_) return Status::IterationLimit;
      if (since_refactor >= refactor_interval_) {
        refactor();
        since_refactor = 0;
      }
      for (int i = 0; i < m_; ++i) cb(i) = cost_[basis_[i]];
      y.noalias() = binv_.transpose() * cb;

      // Pricing.
      int entering = -1;
      double best_score = 0.0;
      double entering_dj = 0.0;
      for (int j = 0; j < total_; ++j) {
        const VarState st = state_[j];
        if (st == VarState::Basic || lo_[j] == hi_[j]) continue;
        const double dj = cost_[j] - column_dot(j, y);
        bool attractive = false;
        if (st == VarState::AtLower) attractive = dj < -opt_.optimality_tol;
        else if (st == VarState::AtUpper) attractive = dj > opt_.optimality_tol;
        else attractive = std::abs(dj) > opt_.optimality_tol;
        if (!attractive) continue;
        if (bland) {
          entering = j;
          entering_dj = dj;
          break;
        }
        if (std::abs(dj) > best_score) {
          best_score = std::abs(dj);
          entering = j;
          entering_dj = dj;
        }
      }
      if (entering < 0) return Status::Optimal;

      const int q = entering;
      const double dir = entering_dj < 0.0 ? 1.0 : -1.0;
      ftran(entering, alpha);

      // Ratio test (two-pass Harris, or plain minimum ratio under Bland).
      auto true_ratio = [&](int i, double rate) {
        const int b = basis_[i];
        return rate < 0.0 ? (x_[b] - lo_[b]) / -rate : (hi_[b] - x_[b]) / rate;
      };
      auto limited = [&](int i, double rate) {
        const int b = basis_[i];
        return rate < 0.0 ? std::isfinite(lo_[b]) : std::isfinite(hi_[b]);
      };
      const double range = hi_[q] - lo_[q];
      int leave = -1;
      double theta = kInf;
      if (!bland) {
        double theta_max = kInf;
        for (int i = 0; i < m_; ++i) {
          const double rate = -dir * alpha(i);
          if (std::abs(alpha(i)) <= opt_.pivot_tol || !limited(i, rate)) continue;
          const int b = basis_[i];
          const double relaxed = rate < 0.0
                                     ? (x_[b] - lo_[b] + opt_.feasibility_tol) / -rate
                                     : (hi_[b] - x_[b] + opt_.feasibility_tol) / rate;
          theta_max = std::min(theta_max, relaxed);
        }
        if (range <= theta_max) {
          theta = range;
        } else {
          double best_pivot = 0.0;
          for (int i = 0; i < m_; ++i) {
            const double rate = -dir * alpha(i);
            if (std::abs(alpha(i)) <= opt_.pivot_tol || !limited(i, rate)) continue;
            if (true_ratio(i, rate) <= theta_max && std::abs(alpha(i)) > best_pivot) {
              best_pivot = std::abs(alpha(i));
              leave = i;
            }
          }
          if (leave >= 0) theta = std::max(0.0, true_ratio(leave, -dir * alpha(leave)));
        }
      } else {
        for (int i = 0; i < m_; ++i) {
          const double rate = -dir * alpha(i);
          if (std::abs(alpha(i)) <= opt_.pivot_tol || !limited(i, rate)) continue;
          const double t = std::max(0.0, true_ratio(i, rate));
          if (t < theta || (t == theta && leave >= 0 &&
                            basis_[i] < basis_[leave])) {
            theta = t;
            leave = i;
          }
        }
        if (range <= theta) {
          theta = range;
          leave = -1;
        }
      }
      if (!std::isfinite(theta)) return Status::Unbounded;

      ++iterations_;
      ++since_refactor;
      if (theta <= 1e-12) {
        if (++degenerate_run > 30) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }

      x_[q] += dir * theta;
      for (int i = 0; i < m_; ++i) {
        x_[basis_[i]] -= dir * theta * alpha(i);
      }
      if (leave < 0) {
        x_[q] = dir > 0.0 ? hi_[q] : lo_[q];
        state_[q] = dir > 0.0 ? VarState::AtUpper : VarState::AtLower;
        continue;
      }
      const int sl = basis_[leave];
      const double rate = -dir * alpha(leave);
      if (rate < 0.0 || lo_[sl] == hi_[sl]) {
        x_[sl] = lo_[sl];
        state_[sl] = VarState::AtLower;
      } else {
        x_[sl] = hi_[sl];
        state_[sl] = VarState::AtUpper;
      }
      basis_[leave] = entering;
      state_[q] = VarState::Basic;

      const Eigen::RowVectorXd pivot_row = binv_.row(leave) / alpha(leave);
      alpha(leave) = 0.0;
      binv_.noalias() -= alpha * pivot_row;
      binv_.row(leave) = pivot_row;
    }
  }

  Solution& finish(Solution& sol, Status status) {
    sol.status = status;
    sol.iterations = iterations_;
    sol.x = Eigen::VectorXd::Zero(n_);
    for (int j = 0; j < n_; ++j) sol.x(j) = x_[j];
    sol.objective = objective_value(model_, sol.x);
    return sol;
  }

  const LinearModel& model_;
  SimplexOptions opt_;
  int n_{};
  int m_{};
  int total_{};
  int iterations_{};
  int iteration_cap_{};
  int refactor_interval_{};
  double bound_scale_{1.0};
  std::vector<int> col_start_;
  std::vector<int> col_row_;
  std::vector<double> col_val_;
  std::vector<double> lo_;
  std::vector<double> hi_;
  std::vector<double> cost_;
  std::vector<double> x_;
  std::vector<VarState> state_;
  std::vector<int> art_row_;
  std::vector<double> art_sign_;
  std::vector<int> basis_;
  Eigen::MatrixXd binv_;
};

}  // namespace

Solution solve(const LinearModel& model, const SimplexOptions& options) {
  RevisedSimplex simplex(model, options);
  return simplex.run();
}

}  // namespace mirrorvlc::lp
