#include "mirrorvlc/photometry.hpp"

#include <stdexcept>

namespace mirrorvlc {

namespace {

void check_shapes(const Eigen::MatrixXd& gains, const Eigen::VectorXd& power,
                  const Eigen::VectorXd& sensor_area) {
  if (gains.rows() != power.size()) {
    throw std::invalid_argument("power vector length must equal the LED count");
  }
  if (gains.cols() != sensor_area.size()) {
    throw std::invalid_argument("sensor area count must equal the sensor count");
  }
  if ((power.array() < 0.0).any()) {
    throw std::invalid_argument("LED powers must be non-negative");
  }
}

}  // namespace

IlluminationField illumination(const Eigen::MatrixXd& gains,
                               const Eigen::VectorXd& power,
                               const Eigen::VectorXd& sensor_area,
                               const Photometry& photometry) {
  check_shapes(gains, power, sensor_area);
  IlluminationField field;
  field.luminous_efficacy = photometry.luminous_efficacy;
  field.flux = photometry.luminous_efficacy * (gains.transpose() * power);
  field.lux = field.flux;
  if (photometry.convention == LuxConvention::AreaDivided) {
    field.lux = field.flux.cwiseQuotient(sensor_area);
  }
  return field;
}

double illumination_at(int sensor, const Eigen::MatrixXd& gains,
                       const Eigen::VectorXd& power,
                       const Eigen::VectorXd& sensor_area,
                       const Photometry& photometry) {
  check_shapes(gains, power, sensor_area);
  return photometry.lux_per_watt(sensor_area(sensor)) * gains.col(sensor).dot(power);
}

double illumination_at(int sensor, const Eigen::VectorXd& power,
                       const ChannelTensor& tensor, std::span<const std::uint8_t> xi,
                       const Eigen::VectorXd& sensor_area,
                       const Photometry& photometry) {
  double sum = 0.0;
  for (int m = 0; m < tensor.led_count(); ++m) {
    sum += power(m) * total_gain(tensor, m, sensor, xi);
  }
  return photometry.lux_per_watt(sensor_area(sensor)) * sum;
}

double uniformity(const Eigen::VectorXd& lux) {
  if (lux.size() == 0 || !(lux.sum() > 0.0)) {
    throw std::domain_error("uniformity is undefined for a dark field");
  }
  return lux.minCoeff() / lux.mean();
}

double uniformity(const Eigen::VectorXd& power, const ChannelTensor& tensor,
                  std::span<const std::uint8_t> xi,
                  const Eigen::VectorXd& sensor_area, const Photometry& photometry) {
  return uniformity(
      illumination(total_gain_matrix(tensor, xi), power, sensor_area, photometry).lux);
}

}  // namespace mirrorvlc
