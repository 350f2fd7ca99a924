#include "trapline/reid/mugshot.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <opencv2/imgproc.hpp>

namespace trapline::reid {

cv::Mat as_cv(Mask& mask) {
  return cv::Mat(static_cast<int>(mask.rows()), static_cast<int>(mask.cols()), CV_8UC1, mask.data());
}

Mask from_cv(const cv::Mat& binary) {
  CV_Assert(binary.type() == CV_8UC1);
  Mask mask(binary.rows, binary.cols);
  for (int r = 0; r < binary.rows; ++r) {
    const auto* row = binary.ptr<std::uint8_t>(r);
    for (int c = 0; c < binary.cols; ++c) mask(r, c) = row[c] ? 1 : 0;
  }
  return mask;
}

namespace {

// Corners of the pixels on the region's convex hull; the bounds of any
// rigid transform of the region are attained there.
std::vector<cv::Point2f> pixel_corners(const Mask& mask) {
  Mask copy = mask;
  std::vector<cv::Point> set_pixels, hull;
  cv::findNonZero(as_cv(copy), set_pixels);
  cv::convexHull(set_pixels, hull);
  std::vector<cv::Point2f> points;
  points.reserve(hull.size() * 4);
  for (const auto& p : hull) {
    float x = static_cast<float>(p.x), y = static_cast<float>(p.y);
    points.insert(points.end(), {{x - 0.5f, y - 0.5f}, {x + 0.5f, y - 0.5f},
                                 {x - 0.5f, y + 0.5f}, {x + 0.5f, y + 0.5f}});
  }
  return points;
}

// Bounds of the transformed pixel footprints.
cv::Rect2d transformed_bounds(const Mask& mask, const cv::Mat& affine) {
  auto points = pixel_corners(mask);
  std::vector<cv::Point2f> moved;
  cv::transform(points, moved, affine);
  float x0 = moved[0].x, x1 = moved[0].x, y0 = moved[0].y, y1 = moved[0].y;
  for (const auto& p : moved) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  return {x0, y0, x1 - x0, y1 - y0};
}

}  // namespace

Mask rotate_mask(const Mask& mask, double degrees) {
  auto m = central_moments<double>(mask);
  if (m.area <= 0) throw ValidationError("empty mask");
  cv::Mat affine = cv::getRotationMatrix2D(cv::Point2f(float(m.cx), float(m.cy)), degrees, 1.0);
  auto bounds = transformed_bounds(mask, affine);
  const int pad = 2;
  affine.at<double>(0, 2) -= std::floor(bounds.x) - pad;
  affine.at<double>(1, 2) -= std::floor(bounds.y) - pad;
  cv::Size size(static_cast<int>(std::ceil(bounds.width)) + 2 * pad + 1,
                static_cast<int>(std::ceil(bounds.height)) + 2 * pad + 1);
  Mask copy = mask;
  cv::Mat out;
  cv::warpAffine(as_cv(copy), out, affine, size, cv::INTER_NEAREST, cv::BORDER_CONSTANT, 0);
  return from_cv(out);
}

Mugshot canonicalize_mugshot(const cv::Mat& image, const Mask& mask, MugshotSource source) {
  if (mask.rows() != image.rows || mask.cols() != image.cols) {
    throw ValidationError("mask outside image");
  }
  const auto m = central_moments<double>(mask);
  const double rotation = vertical_rotation(m);  // throws on an empty mask

  cv::Mat affine = cv::getRotationMatrix2D(cv::Point2f(float(m.cx), float(m.cy)), rotation, 1.0);
  auto box = transformed_bounds(mask, affine);
  box.x -= kCropMargin * box.width;
  box.y -= kCropMargin * box.height;
  box.width *= 1.0 + 2 * kCropMargin;
  box.height *= 1.0 + 2 * kCropMargin;

  // Fold crop and letterbox into the same affine map: shift the box to the
  // origin, scale its long side to the mugshot size, centre the short side.
  const double scale = kMugshotSize / std::max(box.width, box.height);
  const double off_x = (kMugshotSize - box.width * scale) / 2.0;
  const double off_y = (kMugshotSize - box.height * scale) / 2.0;
  cv::Mat full = cv::Mat::eye(3, 3, CV_64F);
  affine.copyTo(full.rowRange(0, 2));
  cv::Mat place = (cv::Mat_<double>(3, 3) << scale, 0, off_x - box.x * scale,  //
                   0, scale, off_y - box.y * scale,                            //
                   0, 0, 1);
  cv::Mat product = place * full;
  cv::Mat combined = product.rowRange(0, 2).clone();

  Mugshot mug;
  mug.source = std::move(source);
  mug.applied_rotation = rotation;
  const cv::Size size(kMugshotSize, kMugshotSize);
  cv::warpAffine(image, mug.image, combined, size, cv::INTER_LINEAR, cv::BORDER_CONSTANT, cv::Scalar::all(0));
  Mask copy = mask;
  cv::Mat warped_mask;
  cv::warpAffine(as_cv(copy), warped_mask, combined, size, cv::INTER_NEAREST, cv::BORDER_CONSTANT, 0);
  mug.mask = from_cv(warped_mask);
  return mug;
}

}  // namespace trapline::reid
