#include "mirrorvlc/channel.hpp"

#include "mirrorvlc/parallel.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>

namespace mirrorvlc {

bool ChannelTensor::in_reflection_area(int led, int cell) const {
  const auto& mask = reflection_masks.at(static_cast<std::size_t>(led));
  return std::binary_search(mask.begin(), mask.end(), cell);
}

ChannelTensor build_channel_tensor(const Room& room, std::span<const LedPose> leds,
                                   const Beam& beam,
                                   std::span<const ReceiverNode> nodes, double eta,
                                   int threads) {
  if (!(eta > 0.0) || eta > 1.0) {
    throw std::invalid_argument("mirror reflectivity must lie in (0, 1]");
  }
  const int m_count = static_cast<int>(leds.size());
  const int l_count = static_cast<int>(nodes.size());

  ChannelTensor tensor;
  tensor.los = Eigen::MatrixXd::Zero(m_count, l_count);
  tensor.reflection_masks.resize(leds.size());
  tensor.eta = eta;
  tensor.cell_count = room.cell_count();

  std::vector<std::vector<NlosEntry>> per_led(leds.size());
  parallel_for(m_count, threads, [&](int m) {
    const LedPose& led = leds[static_cast<std::size_t>(m)];
    auto& mask = tensor.reflection_masks[static_cast<std::size_t>(m)];
    mask = reflection_area(led, beam.divergence, room);
    auto& entries = per_led[static_cast<std::size_t>(m)];
    for (int l = 0; l < l_count; ++l) {
      const ReceiverNode& node = nodes[static_cast<std::size_t>(l)];
      tensor.los(m, l) = los_gain(led, beam, node);
      for (int z : mask) {
        const double g = nlos_gain(led, beam, z, node, room, eta);
        if (g > 0.0) entries.push_back({m, l, z, g});
      }
    }
  });
  for (auto& entries : per_led) {
    tensor.nlos.insert(tensor.nlos.end(), entries.begin(), entries.end());
  }
  return tensor;
}

namespace {

void check_mirror_vector(const ChannelTensor& tensor, std::span<const std::uint8_t> xi) {
  if (static_cast<int>(xi.size()) != tensor.cell_count) {
    throw std::invalid_argument("mirror vector length must equal the cell count");
  }
}

}  // namespace

double total_gain(const ChannelTensor& tensor, int led, int node,
                  std::span<const std::uint8_t> xi) {
  check_mirror_vector(tensor, xi);
  double h = tensor.los(led, node);
  const auto first = std::lower_bound(
      tensor.nlos.begin(), tensor.nlos.end(), std::pair{led, node},
      [](const NlosEntry& e, const std::pair<int, int>& key) {
        return std::pair{e.led, e.node} < key;
      });
  for (auto it = first; it != tensor.nlos.end() && it->led == led && it->node == node;
       ++it) {
    if (xi[static_cast<std::size_t>(it->cell)] != 0) h += it->gain;
  }
  return h;
}

Eigen::MatrixXd total_gain_matrix(const ChannelTensor& tensor,
                                  std::span<const std::uint8_t> xi) {
  check_mirror_vector(tensor, xi);
  Eigen::MatrixXd h = tensor.los;
  for (const NlosEntry& e : tensor.nlos) {
    if (xi[static_cast<std::size_t>(e.cell)] != 0) h(e.led, e.node) += e.gain;
  }
  return h;
}

void write_tensor_csv(const ChannelTensor& tensor, std::ostream& out) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << "m,l,z,gain\n" << std::setprecision(17);
  auto entry = tensor.nlos.begin();
  for (int m = 0; m < tensor.led_count(); ++m) {
    for (int l = 0; l < tensor.node_count(); ++l) {
      out << m << ',' << l << ",-1," << tensor.los(m, l) << '\n';
      for (; entry != tensor.nlos.end() && entry->led == m && entry->node == l; ++entry) {
        out << m << ',' << l << ',' << entry->cell << ',' << entry->gain << '\n';
      }
    }
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace mirrorvlc
