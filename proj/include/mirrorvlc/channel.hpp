#pragma once

// Lambertian line-of-sight gains, single-bounce mirror gains and the gated
// total channel H = h_los + sum_z chi_mz h_nlos(z).

#include "mirrorvlc/geometry.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

namespace mirrorvlc {

/// Lambertian radiant intensity (q + 1) / (2 pi) cos^q(phi), zero past the
/// horizon.
template <typename Scalar>
Scalar lambertian_q0(Scalar phi, Scalar order) {
  using std::cos;
  using std::pow;
  if (!(order > 0)) throw std::invalid_argument("Lambertian order must be positive");
  const Scalar c = cos(phi);
  if (c <= Scalar(0)) return Scalar(0);
  return (order + Scalar(1)) / (Scalar(2) * std::numbers::pi_v<Scalar>) * pow(c, order);
}

template <typename Scalar>
Scalar los_gain(const LedPoseT<Scalar>& led, const BeamT<Scalar>& beam,
                const ReceiverNodeT<Scalar>& node) {
  using std::cos;
  const Vec3<Scalar> to = node.position - led.position;
  const Scalar d2 = to.squaredNorm();
  if (d2 == Scalar(0)) throw std::domain_error("LED and receiver coincide");
  if (!beam_covers(led, beam.divergence, node.position)) return Scalar(0);
  const Scalar incidence = angle_between<Scalar>(node.normal, Vec3<Scalar>(-to));
  if (incidence > node.fov) return Scalar(0);
  const Scalar irradiance = angle_between<Scalar>(led.orientation, to);
  const Scalar c = cos(incidence);
  if (c <= Scalar(0)) return Scalar(0);
  return node.area / d2 * lambertian_q0(irradiance, beam.lambertian_order) * c;
}

/// eta A / dhat^2 Q0(irradiance) cos(incidence) along the mirror path via
/// cell z; zero when the path is invalid.
template <typename Scalar>
Scalar nlos_gain(const MirrorPathT<Scalar>& path, const BeamT<Scalar>& beam,
                 const ReceiverNodeT<Scalar>& node, Scalar eta) {
  using std::cos;
  if (!path.valid) return Scalar(0);
  if (path.total_distance == Scalar(0)) {
    throw std::domain_error("zero-length mirror path");
  }
  const Scalar c = cos(path.incidence_angle);
  if (c <= Scalar(0)) return Scalar(0);
  return eta * node.area / (path.total_distance * path.total_distance) *
         lambertian_q0(path.irradiance_angle, beam.lambertian_order) * c;
}

template <typename Scalar>
Scalar nlos_gain(const LedPoseT<Scalar>& led, const BeamT<Scalar>& beam, int z,
                 const ReceiverNodeT<Scalar>& node, const RoomT<Scalar>& room,
                 Scalar eta) {
  return nlos_gain(mirror_path(led, beam.divergence, z, node, room), beam, node, eta);
}

/// One stored mirror gain h_nlos[led][node][cell].
struct NlosEntry {
  int led;
  int node;
  int cell;
  double gain;
};

/// Precomputed gains for a fixed set of LEDs and receiver nodes. Mirror
/// entries exist only for cells inside the LED's reflection area with a
/// valid, positive-gain path; they are sorted by (led, node, cell).
struct ChannelTensor {
  Eigen::MatrixXd los;  // leds x nodes
  std::vector<NlosEntry> nlos;
  std::vector<std::vector<int>> reflection_masks;  // per LED, ascending cells
  double eta{1.0};
  int cell_count{0};

  [[nodiscard]] int led_count() const { return static_cast<int>(los.rows()); }
  [[nodiscard]] int node_count() const { return static_cast<int>(los.cols()); }
  [[nodiscard]] bool in_reflection_area(int led, int cell) const;
};

/// Binary mirror vector, one entry per wall cell.
using MirrorVector = std::vector<std::uint8_t>;

/// Builds the tensor; `threads` <= 0 picks the library default. The result
/// does not depend on the thread count.
ChannelTensor build_channel_tensor(const Room& room, std::span<const LedPose> leds,
                                   const Beam& beam,
                                   std::span<const ReceiverNode> nodes, double eta,
                                   int threads = 0);

/// H_ml for one pair under mirror vector xi (entries outside Upsilon_m are
/// gated off).
double total_gain(const ChannelTensor& tensor, int led, int node,
                  std::span<const std::uint8_t> xi);

/// Full leds x nodes matrix of H under mirror vector xi.
Eigen::MatrixXd total_gain_matrix(const ChannelTensor& tensor,
                                  std::span<const std::uint8_t> xi);

/// Debug dump: header "m,l,z,gain"; LoS rows use z = -1.
void write_tensor_csv(const ChannelTensor& tensor, std::ostream& out);

}  // namespace mirrorvlc
