#pragma once

// Room, wall grid, hemispherical bulb and mirror-image path geometry.
//
// Everything here is a pure function of its inputs and is templated on the
// scalar type; the rest of the library uses the double aliases at the bottom.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace mirrorvlc {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

/// Walls in heatmap order: the XZ plane (y = 0), the YZ plane (x = 0), and
/// their parallel counterparts at y = depth and x = width.
enum class WallId : int { XZ = 0, YZ = 1, XZFar = 2, YZFar = 3 };

inline constexpr int kWallCount = 4;

template <typename Scalar>
struct WallT {
  WallId id;
  Vec3<Scalar> anchor;  // floor-level corner where column 0 starts
  Vec3<Scalar> normal;  // unit, points into the room
  Vec3<Scalar> u_axis;  // unit, horizontal along the wall
  Vec3<Scalar> v_axis;  // unit, vertical (+z)
  Scalar length;
  Scalar height;
};

template <typename Scalar>
struct CellRefT {
  WallId wall;
  int column;  // along u_axis, [0, grid_x)
  int row;     // along v_axis from the floor, [0, grid_y)
};

/// Rectangular room with every wall divided into grid_x by grid_y cells.
/// Cell index z = wall * grid_x * grid_y + row * grid_x + column.
template <typename Scalar>
struct RoomT {
  Scalar width_x{};
  Scalar depth_y{};
  Scalar height_z{};
  int grid_x{};
  int grid_y{};
  std::array<WallT<Scalar>, kWallCount> walls{};

  [[nodiscard]] int cells_per_wall() const { return grid_x * grid_y; }
  [[nodiscard]] int cell_count() const { return kWallCount * grid_x * grid_y; }
  [[nodiscard]] const WallT<Scalar>& wall(WallId id) const {
    return walls[static_cast<int>(id)];
  }
};

template <typename Scalar>
RoomT<Scalar> make_room(Scalar width_x, Scalar depth_y, Scalar height_z,
                        int grid_x, int grid_y) {
  if (!(width_x > 0) || !(depth_y > 0) || !(height_z > 0)) {
    throw std::invalid_argument("room dimensions must be positive");
  }
  if (grid_x < 1 || grid_y < 1) {
    throw std::invalid_argument("wall grid needs at least one cell per axis");
  }
  using V = Vec3<Scalar>;
  const V ez(0, 0, 1);
  RoomT<Scalar> room;
  room.width_x = width_x;
  room.depth_y = depth_y;
  room.height_z = height_z;
  room.grid_x = grid_x;
  room.grid_y = grid_y;
  room.walls[0] = {WallId::XZ, V(0, 0, 0), V(0, 1, 0), V(1, 0, 0), ez,
                   width_x, height_z};
  room.walls[1] = {WallId::YZ, V(0, 0, 0), V(1, 0, 0), V(0, 1, 0), ez,
                   depth_y, height_z};
  room.walls[2] = {WallId::XZFar, V(0, depth_y, 0), V(0, -1, 0), V(1, 0, 0),
                   ez, width_x, height_z};
  room.walls[3] = {WallId::YZFar, V(width_x, 0, 0), V(-1, 0, 0), V(0, 1, 0),
                   ez, depth_y, height_z};
  return room;
}

template <typename Scalar>
CellRefT<Scalar> cell_ref(const RoomT<Scalar>& room, int z) {
  if (z < 0 || z >= room.cell_count()) {
    throw std::out_of_range("wall cell index out of range");
  }
  const int per_wall = room.cells_per_wall();
  const int local = z % per_wall;
  return {static_cast<WallId>(z / per_wall), local % room.grid_x,
          local / room.grid_x};
}

template <typename Scalar>
int cell_index(const RoomT<Scalar>& room, WallId wall, int column, int row) {
  return static_cast<int>(wall) * room.cells_per_wall() + row * room.grid_x +
         column;
}

template <typename Scalar>
Vec3<Scalar> cell_center(const RoomT<Scalar>& room, int z) {
  const auto ref = cell_ref(room, z);
  const auto& w = room.wall(ref.wall);
  const Scalar du = w.length / room.grid_x;
  const Scalar dv = w.height / room.grid_y;
  return w.anchor + w.u_axis * (du * (ref.column + Scalar(0.5))) +
         w.v_axis * (dv * (ref.row + Scalar(0.5)));
}

/// Whether a point on the wall plane of cell z falls inside the cell's
/// closed rectangle, with a small absolute slack for points on the edges.
template <typename Scalar>
bool cell_contains(const RoomT<Scalar>& room, int z, const Vec3<Scalar>& p,
                   Scalar slack = Scalar(1e-12)) {
  const auto ref = cell_ref(room, z);
  const auto& w = room.wall(ref.wall);
  const Scalar du = w.length / room.grid_x;
  const Scalar dv = w.height / room.grid_y;
  const Vec3<Scalar> rel = p - w.anchor;
  const Scalar u = rel.dot(w.u_axis);
  const Scalar v = rel.dot(w.v_axis);
  return u >= du * ref.column - slack && u <= du * (ref.column + 1) + slack &&
         v >= dv * ref.row - slack && v <= dv * (ref.row + 1) + slack;
}

/// Angle between two non-zero vectors, robust near 0 and pi.
template <typename Scalar>
Scalar angle_between(const Vec3<Scalar>& a, const Vec3<Scalar>& b) {
  using std::atan2;
  return atan2(a.cross(b).norm(), a.dot(b));
}

template <typename Scalar>
struct BulbT {
  Vec3<Scalar> center;            // on the ceiling
  Scalar radius{};                // hemisphere radius R
  std::vector<int> layer_counts;  // LEDs per layer, innermost first
  Scalar divergence{};            // beam cone half-angle, radians
  Scalar half_power_semiangle{};  // radians

  [[nodiscard]] int led_count() const {
    int total = 0;
    for (int k : layer_counts) total += k;
    return total;
  }

  /// q = -ln 2 / ln cos(half-power semi-angle).
  [[nodiscard]] Scalar lambertian_order() const {
    using std::cos;
    using std::log;
    return -std::numbers::ln2_v<Scalar> / log(cos(half_power_semiangle));
  }
};

/// Emission parameters shared by every LED of a bulb.
template <typename Scalar>
struct BeamT {
  Scalar divergence{};
  Scalar lambertian_order{};
};

template <typename Scalar>
BeamT<Scalar> beam_of(const BulbT<Scalar>& bulb) {
  return {bulb.divergence, bulb.lambertian_order()};
}

template <typename Scalar>
struct LedPoseT {
  int index{};
  Vec3<Scalar> position;
  Vec3<Scalar> orientation;  // unit cone axis, radially outward
};

/// Polar angle (from the downward axis) of layer `layer` (0-based) out of
/// `layers`: evenly spaced from the nadir towards the horizon.
template <typename Scalar>
Scalar layer_polar_angle(int layer, int layers) {
  return Scalar(layer) * (std::numbers::pi_v<Scalar> / 2) / Scalar(layers);
}

/// Places the LEDs on the lower hemisphere, layer by layer. The first layer
/// sits at the nadir and must hold exactly one LED; LEDs of each further
/// layer are equally spaced in azimuth with a golden-angle phase per layer.
template <typename Scalar>
std::vector<LedPoseT<Scalar>> build_bulb(const BulbT<Scalar>& bulb) {
  using std::cos;
  using std::sin;
  if (!(bulb.radius > 0)) {
    throw std::invalid_argument("bulb radius must be positive");
  }
  if (bulb.layer_counts.empty()) {
    throw std::invalid_argument("bulb needs at least one layer");
  }
  for (int k : bulb.layer_counts) {
    if (k < 1) throw std::invalid_argument("every layer needs at least one LED");
  }
  if (bulb.layer_counts.front() != 1) {
    throw std::invalid_argument("the nadir layer holds exactly one LED");
  }
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar golden = pi * (Scalar(3) - std::sqrt(Scalar(5)));
  const int layers = static_cast<int>(bulb.layer_counts.size());

  std::vector<LedPoseT<Scalar>> poses;
  poses.reserve(static_cast<std::size_t>(bulb.led_count()));
  int index = 0;
  for (int l = 0; l < layers; ++l) {
    const int k = bulb.layer_counts[static_cast<std::size_t>(l)];
    const Scalar theta = layer_polar_angle<Scalar>(l, layers);
    const Scalar phase = golden * Scalar(l);
    for (int j = 0; j < k; ++j) {
      const Scalar azimuth = Scalar(2) * pi * Scalar(j) / Scalar(k) + phase;
      Vec3<Scalar> dir(sin(theta) * cos(azimuth), sin(theta) * sin(azimuth),
                       -cos(theta));
      dir.normalize();
      poses.push_back({index++, bulb.center + bulb.radius * dir, dir});
    }
  }
  return poses;
}

enum class NodeKind { User, SensingPoint };

template <typename Scalar>
struct ReceiverNodeT {
  int index{};
  NodeKind kind{NodeKind::User};
  Vec3<Scalar> position;
  Vec3<Scalar> normal;  // unit photodetector normal
  Scalar area{};        // m^2
  Scalar fov{};         // radians, in (0, pi/2]
};

/// True iff `point` lies inside the LED's beam cone (on the forward side).
template <typename Scalar>
bool beam_covers(const LedPoseT<Scalar>& led, Scalar divergence,
                 const Vec3<Scalar>& point) {
  const Vec3<Scalar> to = point - led.position;
  if (to.squaredNorm() == Scalar(0)) return false;
  if (led.orientation.dot(to) <= Scalar(0)) return false;
  return angle_between<Scalar>(led.orientation, to) <= divergence;
}

/// Reflection of `point` across the plane of `wall`.
template <typename Scalar>
Vec3<Scalar> mirror_image(const Vec3<Scalar>& point, const WallT<Scalar>& wall) {
  const Scalar offset = (point - wall.anchor).dot(wall.normal);
  return point - Scalar(2) * offset * wall.normal;
}

/// Reflection of a direction (no translation) across the wall plane.
template <typename Scalar>
Vec3<Scalar> mirror_direction(const Vec3<Scalar>& dir, const WallT<Scalar>& wall) {
  return dir - Scalar(2) * dir.dot(wall.normal) * wall.normal;
}

/// Wall cells whose centers lie inside the LED's beam cone, ascending.
template <typename Scalar>
std::vector<int> reflection_area(const LedPoseT<Scalar>& led, Scalar divergence,
                                 const RoomT<Scalar>& room) {
  std::vector<int> cells;
  for (int z = 0; z < room.cell_count(); ++z) {
    if (beam_covers(led, divergence, cell_center(room, z))) cells.push_back(z);
  }
  return cells;
}

template <typename Scalar>
struct MirrorPathT {
  int led{};
  int cell{};
  Vec3<Scalar> reflection_point;
  Scalar total_distance{};    // |LED - image|, equals the two-leg length
  Scalar irradiance_angle{};  // at the LED, from its axis
  Scalar incidence_angle{};   // at the PD, from its normal
  bool valid{false};
};

/// Single-bounce path LED -> mirror in cell z -> receiver, built from the
/// receiver's mirror image across the cell's wall. Invalid paths are
/// flagged rather than rejected.
template <typename Scalar>
MirrorPathT<Scalar> mirror_path(const LedPoseT<Scalar>& led, Scalar divergence,
                                int z, const ReceiverNodeT<Scalar>& receiver,
                                const RoomT<Scalar>& room) {
  const auto ref = cell_ref(room, z);
  const auto& wall = room.wall(ref.wall);

  MirrorPathT<Scalar> path;
  path.led = led.index;
  path.cell = z;
  const Vec3<Scalar> image = mirror_image(receiver.position, wall);
  const Vec3<Scalar> seg = image - led.position;
  path.total_distance = seg.norm();

  const Scalar led_side = (led.position - wall.anchor).dot(wall.normal);
  const Scalar image_side = (image - wall.anchor).dot(wall.normal);
  // Both endpoints must sit strictly on opposite sides of the plane.
  if (!(led_side > Scalar(0)) || !(image_side < Scalar(0))) return path;

  const Scalar t = led_side / (led_side - image_side);
  path.reflection_point = led.position + t * seg;
  const Vec3<Scalar> to_mirror = path.reflection_point - led.position;
  const Vec3<Scalar> from_pd = path.reflection_point - receiver.position;
  if (to_mirror.squaredNorm() == Scalar(0) || from_pd.squaredNorm() == Scalar(0)) {
    return path;
  }
  path.irradiance_angle = angle_between<Scalar>(led.orientation, to_mirror);
  path.incidence_angle = angle_between<Scalar>(receiver.normal, from_pd);
  path.valid = cell_contains(room, z, path.reflection_point) &&
               led.orientation.dot(to_mirror) > Scalar(0) &&
               path.irradiance_angle <= divergence &&
               path.incidence_angle <= receiver.fov;
  return path;
}

using Room = RoomT<double>;
using Wall = WallT<double>;
using CellRef = CellRefT<double>;
using Bulb = BulbT<double>;
using Beam = BeamT<double>;
using LedPose = LedPoseT<double>;
using ReceiverNode = ReceiverNodeT<double>;
using MirrorPath = MirrorPathT<double>;
using Vector3 = Vec3<double>;

}  // namespace mirrorvlc
