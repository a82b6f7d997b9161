#pragma once

#include "mirrorvlc/channel.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>

namespace mirrorvlc {

/// How alpha0 * P * H is turned into the value compared against lux bounds.
/// AreaDivided divides the received flux by the sensor area (lux); Raw uses
/// the received flux in lumens unchanged.
enum class LuxConvention { AreaDivided, Raw };

struct Photometry {
  double luminous_efficacy{169.0};  // lm/W
  LuxConvention convention{LuxConvention::AreaDivided};

  /// Factor turning P * H (watts) into the illuminance value at a sensor.
  [[nodiscard]] double lux_per_watt(double sensor_area) const {
    return convention == LuxConvention::AreaDivided ? luminous_efficacy / sensor_area
                                                    : luminous_efficacy;
  }
};

struct IlluminationField {
  Eigen::VectorXd flux;  // lumens per sensor
  Eigen::VectorXd lux;   // per the photometry convention
  double luminous_efficacy{};
};

/// `gains` is the leds x sensors total channel, `power` the per-LED watts.
IlluminationField illumination(const Eigen::MatrixXd& gains,
                               const Eigen::VectorXd& power,
                               const Eigen::VectorXd& sensor_area,
                               const Photometry& photometry);

double illumination_at(int sensor, const Eigen::MatrixXd& gains,
                       const Eigen::VectorXd& power,
                       const Eigen::VectorXd& sensor_area,
                       const Photometry& photometry);

/// Same, reading sensors straight from a tensor whose nodes are the sensors.
double illumination_at(int sensor, const Eigen::VectorXd& power,
                       const ChannelTensor& tensor, std::span<const std::uint8_t> xi,
                       const Eigen::VectorXd& sensor_area,
                       const Photometry& photometry);

/// min / mean of the field. Throws std::domain_error for an all-dark field.
double uniformity(const Eigen::VectorXd& lux);

double uniformity(const Eigen::VectorXd& power, const ChannelTensor& tensor,
                  std::span<const std::uint8_t> xi,
                  const Eigen::VectorXd& sensor_area, const Photometry& photometry);

}  // namespace mirrorvlc
