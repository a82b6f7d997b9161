#pragma once

// Stage 2: LED-to-user association and power tuning around the stage-1
// powers, plus the SINR and throughput metrics.

#include "mirrorvlc/channel.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace mirrorvlc {

inline constexpr int kUnassigned = -1;

/// Immutable per-trial inputs shared by every heuristic.
struct CommProblem {
  Eigen::MatrixXd gains;        // leds x users, total channel under the placed mirrors
  Eigen::MatrixXd axis_offset;  // leds x users, radians from the cone axis; inf if uncovered
  Eigen::VectorXd p_prev;       // stage-1 watts per LED
  double p_max{0.1};
  double tau{0.1};
  double bandwidth{20e6};       // Hz
  double noise_psd{2.5e-20};    // W/Hz

  [[nodiscard]] int led_count() const { return static_cast<int>(gains.rows()); }
  [[nodiscard]] int user_count() const { return static_cast<int>(gains.cols()); }
  [[nodiscard]] double noise_power() const { return noise_psd * bandwidth; }
  [[nodiscard]] bool covers(int m, int u) const { return gains(m, u) > 0.0; }
  /// min(P^prev (1 + tau), p_max): power of every LED a heuristic leaves alone.
  [[nodiscard]] double default_power(int m) const;
};

/// `tensor` must have the users as its nodes. Coverage is H > 0; the axis
/// offset is the LoS emission angle, or for mirror-only users the smallest
/// emission angle over valid paths through placed mirrors.
[[nodiscard]] CommProblem make_comm_problem(const ChannelTensor& tensor, const MirrorVector& xi,
                                            const Room& room, std::span<const LedPose> leds,
                                            const Beam& beam,
                                            std::span<const ReceiverNode> users,
                                            const Eigen::VectorXd& p_prev, double p_max);

struct Assignment {
  std::vector<int> eps;  // per LED: user index or kUnassigned
  Eigen::VectorXd powers;
  double tau{0.1};
  Eigen::VectorXd per_user_sinr;
  Eigen::VectorXd per_user_throughput;  // bit/s
};

/// (sum_m eps_mu H_mu P_m)^2 / (noise + sum_{k != u} (sum_m eps_mk H_mu P_m)^2).
[[nodiscard]] double sinr(int u, std::span<const int> eps, const Eigen::VectorXd& powers,
                          const Eigen::MatrixXd& gains, double noise_power);

/// Every user's SINR in O(MU + U^2).
[[nodiscard]] Eigen::VectorXd all_sinr(std::span<const int> eps, const Eigen::VectorXd& powers,
                                       const Eigen::MatrixXd& gains, double noise_power);

/// Shannon rate B log2(1 + sinr).
[[nodiscard]] double throughput(double sinr, double bandwidth);

/// Fills per-user SINR and throughput.
void evaluate(Assignment& a, const CommProblem& problem);

/// Heuristics return powers and association only; call evaluate() for metrics.
[[nodiscard]] Assignment nua_assign(const CommProblem& problem);
/// Users are served in index order.
[[nodiscard]] Assignment ssa_user_assign(const CommProblem& problem);
/// crowd_threshold < 0 selects default_crowd_threshold(U).
[[nodiscard]] Assignment ssa_led_assign(const CommProblem& problem, int crowd_threshold = -1);

/// max(1, ceil(0.03 U)).
[[nodiscard]] int default_crowd_threshold(int users);

/// NaN when there are no users.
[[nodiscard]] double min_sinr(const Assignment& a);

/// Exhaustive max-min SINR over associations and the power grid
/// {P(1 - tau), P, min(P(1 + tau), p_max)}; M <= 8, U <= 3.
[[nodiscard]] Assignment brute_force_assign(const CommProblem& problem);

}  // namespace mirrorvlc
