#include <doctest.h>

#include "mirrorvlc/photometry.hpp"

#include <random>

using namespace mirrorvlc;

TEST_CASE("illumination is linear in power") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1e-4);
  Eigen::MatrixXd h(4, 3);
  for (int i = 0; i < h.size(); ++i) h.data()[i] = u(rng);
  const Eigen::VectorXd area = Eigen::VectorXd::Constant(3, 5e-4);
  const Photometry ph;

  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(4);
  CHECK(illumination(h, zero, area, ph).lux.isZero());

  Eigen::VectorXd p(4);
  p << 0.1, 0.05, 0.0, 0.2;
  Eigen::VectorXd q(4);
  q << 0.02, 0.0, 0.3, 0.1;
  const auto a = illumination(h, p, area, ph);
  const auto b = illumination(h, q, area, ph);
  const auto ab = illumination(h, 2.0 * p + q, area, ph);
  CHECK((ab.lux - (2.0 * a.lux + b.lux)).cwiseAbs().maxCoeff() < 1e-9);

  for (int n = 0; n < 3; ++n) {
    double flux = 0.0;
    for (int m = 0; m < 4; ++m) flux += 169.0 * p(m) * h(m, n);
    CHECK(a.flux(n) == doctest::Approx(flux).epsilon(1e-14));
    CHECK(a.lux(n) == doctest::Approx(flux / 5e-4).epsilon(1e-14));
    CHECK(illumination_at(n, h, p, area, ph) == doctest::Approx(a.lux(n)).epsilon(1e-14));
  }

  const Photometry raw{169.0, LuxConvention::Raw};
  CHECK(illumination(h, p, area, raw).lux.isApprox(a.flux));

  CHECK_THROWS_AS(illumination(h, -p, area, ph), std::invalid_argument);
  CHECK_THROWS_AS(illumination(h, Eigen::VectorXd::Zero(3), area, ph), std::invalid_argument);
}

TEST_CASE("uniformity") {
  Eigen::VectorXd lux(3);
  lux << 1.0, 1.0, 2.0;
  CHECK(uniformity(lux) == doctest::Approx(0.75));
  CHECK(uniformity(Eigen::VectorXd(lux * 37.5)) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(uniformity(Eigen::VectorXd::Constant(5, 3.0)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(uniformity(Eigen::VectorXd::Zero(3)), std::domain_error);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int t = 0; t < 50; ++t) {
    Eigen::VectorXd v(6);
    for (int i = 0; i < 6; ++i) v(i) = u(rng);
    const double w = uniformity(v);
    CHECK(w >= 0.0);
    CHECK(w <= 1.0 + 1e-15);
  }
}

TEST_CASE("tensor-based illumination") {
  const Room room = make_room(6.0, 6.0, 3.0, 6, 3);
  Bulb bulb;
  bulb.center = Vector3(3, 3, 3);
  bulb.radius = 0.4;
  bulb.layer_counts = {1, 6, 12, 15, 19};
  bulb.divergence = bulb.half_power_semiangle = 30 * std::numbers::pi / 180.0;
  const auto leds = build_bulb(bulb);
  std::vector<ReceiverNode> sensors;
  for (int i = 0; i < 4; ++i) {
    sensors.push_back({i, NodeKind::SensingPoint, Vector3(1.0 + i, 2.0 + 0.5 * i, 0.0),
                       Vector3(0, 0, 1), 5e-4, std::numbers::pi / 2});
  }
  const auto t = build_channel_tensor(room, leds, beam_of(bulb), sensors, 0.95);
  MirrorVector xi(room.cell_count(), 0);
  for (int z = 0; z < room.cell_count(); z += 3) xi[z] = 1;
  const Eigen::VectorXd p = Eigen::VectorXd::Constant(t.led_count(), 0.1);
  const Eigen::VectorXd area = Eigen::VectorXd::Constant(4, 5e-4);
  const Photometry ph;
  const auto field = illumination(total_gain_matrix(t, xi), p, area, ph);
  for (int n = 0; n < 4; ++n) {
    CHECK(illumination_at(n, p, t, xi, area, ph) == doctest::Approx(field.lux(n)).epsilon(1e-13));
  }
  CHECK(uniformity(p, t, xi, area, ph) == doctest::Approx(uniformity(field.lux)).epsilon(1e-13));
}
