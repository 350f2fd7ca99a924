#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include <Eigen/Core>

#include "trapline/error.hpp"

namespace trapline::reid {

/// Binary raster, rows = image height, cols = image width; nonzero pixels
/// belong to the animal. Row-major so it shares layout with an 8-bit image.
using Mask = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Masks closer to round than this axis ratio have no usable orientation.
inline constexpr double kCircularAxisRatio = 1.05;

/// Area, centroid and area-normalised second central moments of a region,
/// in pixel coordinates (x right, y down).
template <typename Scalar>
struct CentralMoments {
  Scalar area{0};
  Scalar cx{0}, cy{0};
  Scalar mu20{0}, mu02{0}, mu11{0};

  /// Angle of the major axis in radians, measured from +x towards +y.
  Scalar major_axis_angle() const { return Scalar(0.5) * std::atan2(Scalar(2) * mu11, mu20 - mu02); }

  /// sqrt(lambda_max / lambda_min) of the covariance; infinite for a line.
  Scalar axis_ratio() const {
    Scalar mean = (mu20 + mu02) / Scalar(2);
    Scalar half_diff = (mu20 - mu02) / Scalar(2);
    Scalar spread = std::sqrt(half_diff * half_diff + mu11 * mu11);
    Scalar lo = mean - spread;
    if (lo <= Scalar(0)) return std::numeric_limits<Scalar>::infinity();
    return std::sqrt((mean + spread) / lo);
  }
};

template <typename Scalar = double, typename Derived>
CentralMoments<Scalar> central_moments(const Eigen::DenseBase<Derived>& mask) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const auto weights = (mask.derived().array() != 0).template cast<Scalar>().matrix().eval();
  CentralMoments<Scalar> m;
  m.area = weights.sum();
  if (m.area <= Scalar(0)) return m;

  const Vec col_mass = weights.colwise().sum().transpose();
  const Vec row_mass = weights.rowwise().sum();
  const Vec xs = Vec::LinSpaced(weights.cols(), Scalar(0), Scalar(weights.cols() - 1));
  const Vec ys = Vec::LinSpaced(weights.rows(), Scalar(0), Scalar(weights.rows() - 1));
  m.cx = col_mass.dot(xs) / m.area;
  m.cy = row_mass.dot(ys) / m.area;

  const Vec dx = xs.array() - m.cx;
  const Vec dy = ys.array() - m.cy;
  m.mu20 = col_mass.dot(dx.cwiseProduct(dx)) / m.area;
  m.mu02 = row_mass.dot(dy.cwiseProduct(dy)) / m.area;
  m.mu11 = dy.dot(weights * dx) / m.area;
  return m;
}

/// Counter-clockwise rotation in degrees, folded into (-90, 90], that
/// brings the major axis to vertical. Near-circular regions return 0.
template <typename Scalar>
Scalar vertical_rotation(const CentralMoments<Scalar>& m) {
  if (m.area <= Scalar(0)) throw ValidationError("empty mask");
  if (m.axis_ratio() < Scalar(kCircularAxisRatio)) return Scalar(0);
  const Scalar theta = m.major_axis_angle() * Scalar(180) / std::numbers::pi_v<Scalar>;
  // Image y points down, so a CCW turn by a adds a to -theta; vertical is 90.
  Scalar rotation = Scalar(90) + theta;
  while (rotation > Scalar(90)) rotation -= Scalar(180);
  while (rotation <= Scalar(-90)) rotation += Scalar(180);
  return rotation;
}

/// Rotation (degrees, CCW positive) that makes the mask's ellipse-fit major
/// axis vertical. Throws ValidationError for a mask with no set pixel.
template <typename Derived>
double mask_orientation(const Eigen::DenseBase<Derived>& mask) {
  return vertical_rotation(central_moments<double>(mask));
}

}  // namespace trapline::reid
