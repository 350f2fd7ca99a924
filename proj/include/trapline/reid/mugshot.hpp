#pragma once

#include <cstddef>
#include <string>

#include <opencv2/core.hpp>

#include "trapline/reid/moments.hpp"

namespace trapline::reid {

inline constexpr int kMugshotSize = 299;
inline constexpr double kCropMargin = 0.05;

struct MugshotSource {
  std::string recording_id;
  std::size_t frame_index = 0;
  std::size_t detection = 0;
};

/// Square crop of one animal with its major axis vertical.
struct Mugshot {
  cv::Mat image;  // kMugshotSize x kMugshotSize
  Mask mask;      // the input mask carried through the same transform
  MugshotSource source;
  double applied_rotation = 0.0;  // degrees, CCW positive
};

/// Wraps a mask's storage as an 8-bit single-channel cv::Mat (no copy).
cv::Mat as_cv(Mask& mask);
Mask from_cv(const cv::Mat& binary);

/// Rotates a mask CCW about its centroid onto a canvas large enough to hold
/// the result (nearest-neighbour).
Mask rotate_mask(const Mask& mask, double degrees);

/// Rotates by mask_orientation, crops to the rotated mask's bounding box
/// grown by kCropMargin on each side, and letterboxes into a 299x299 square.
/// Throws ValidationError when the mask is empty or does not match the image.
Mugshot canonicalize_mugshot(const cv::Mat& image, const Mask& mask, MugshotSource source = {});

}  // namespace trapline::reid
