#pragma once

// Generic sparse linear model and a deterministic bounded-variable primal
// simplex. Binary markers are carried for export and validation; the solver
// itself only ever sees the continuous relaxation.

#include <Eigen/Dense>

#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

namespace mirrorvlc::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { Minimize, Maximize };

struct Term {
  int var{};
  double coef{};
  bool operator==(const Term&) const = default;
};

struct Variable {
  std::string name;
  double lower{0.0};
  double upper{kInf};
  bool binary{false};
  bool operator==(const Variable&) const = default;
};

/// lower <= sum(terms) <= upper; equality when lower == upper.
struct Row {
  std::string name;
  std::vector<Term> terms;
  double lower{-kInf};
  double upper{kInf};
  bool operator==(const Row&) const = default;
};

struct LinearModel {
  Sense sense{Sense::Maximize};
  std::string objective_name{"obj"};
  std::vector<Term> objective;
  std::vector<Variable> vars;
  std::vector<Row> rows;

  int add_variable(std::string name, double lower, double upper, bool binary = false);
  int add_row(std::string name, std::vector<Term> terms, double lower, double upper);

  [[nodiscard]] int variable_count() const { return static_cast<int>(vars.size()); }
  [[nodiscard]] int row_count() const { return static_cast<int>(rows.size()); }

  /// Name -> index map over the variables.
  [[nodiscard]] std::unordered_map<std::string, int> variable_index() const;

  bool operator==(const LinearModel&) const = default;
};

[[nodiscard]] double activity(const Row& row, const Eigen::VectorXd& x);
[[nodiscard]] double objective_value(const LinearModel& model, const Eigen::VectorXd& x);

/// Largest scaled violation over rows, bounds and (optionally) integrality.
/// Each row's violation is divided by max(1, |finite bounds|).
struct FeasibilityReport {
  double max_violation{0.0};
  int worst_row{-1};       // -1 when the worst violation is not a row
  int worst_variable{-1};  // bound or integrality culprit
};
[[nodiscard]] FeasibilityReport check_feasibility(const LinearModel& model,
                                                  const Eigen::VectorXd& x,
                                                  bool require_integral);

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

[[nodiscard]] const char* to_string(Status status);

struct SimplexOptions {
  double feasibility_tol{1e-9};
  double optimality_tol{1e-9};
  double pivot_tol{1e-9};
  int max_iterations{0};  // 0: scaled to the problem size
};

struct Solution {
  Status status{Status::IterationLimit};
  Eigen::VectorXd x;  // structural values
  double objective{0.0};
  int infeasible_row{-1};  // row with the largest residual infeasibility
  int iterations{0};
};

/// Solves the continuous relaxation (binary markers are ignored).
[[nodiscard]] Solution solve(const LinearModel& model, const SimplexOptions& options = {});

}  // namespace mirrorvlc::lp
