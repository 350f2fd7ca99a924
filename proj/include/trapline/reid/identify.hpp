#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "trapline/reid/retrieval.hpp"
#include "trapline/segmenter.hpp"

namespace trapline::reid {

/// Produces one animal mask per detection in a frame.
class MaskProvider {
 public:
  virtual ~MaskProvider() = default;
  virtual std::vector<Mask> masks(const cv::Mat& image, const FrameDetections& detections) = 0;
};

/// Stand-in for an instance-segmentation model: the ellipse inscribed in
/// each detection box, clipped to the image.
class BoxEllipseMaskProvider : public MaskProvider {
 public:
  std::vector<Mask> masks(const cv::Mat& image, const FrameDetections& detections) override;
};

/// Masks stored as `{dir}/{frame_index}_{detection}.png` (nonzero = animal).
class DirectoryMaskProvider : public MaskProvider {
 public:
  explicit DirectoryMaskProvider(std::filesystem::path dir) : dir_(std::move(dir)) {}
  std::vector<Mask> masks(const cv::Mat& image, const FrameDetections& detections) override;

 private:
  std::filesystem::path dir_;
};

/// Top-k prediction for one animal in one sampled frame of a segment.
struct FramePrediction {
  std::string recording_id;
  std::size_t start_frame = 0;
  std::size_t end_frame = 0;
  std::size_t frame_index = 0;
  std::size_t detection = 0;
  Prediction ranked;

  bool operator==(const FramePrediction&) const = default;
};

struct IdentifyOptions {
  std::size_t k = kDefaultTopK;
  std::size_t frames_per_segment = kDefaultFramesPerSegment;
  Metric metric = Metric::Euclidean;
  double threshold = 0.90;  // detections below this confidence are ignored
};

struct IdentifyReport {
  std::vector<FramePrediction> predictions;
  std::vector<std::string> warnings;  // frames skipped and why
};

/// Frame source: path of frame `index` of a recording, or empty if absent.
using FrameLocator = std::function<std::filesystem::path(const std::string& recording_id, std::size_t index)>;
/// Detections of frame `index` of a recording.
using DetectionLookup = std::function<FrameDetections(const std::string& recording_id, std::size_t index)>;

/// For each segment: sample frames, canonicalize every detected animal into
/// a mugshot and query the library. Per-frame failures become warnings.
IdentifyReport identify_segments(const ReferenceLibrary& library, const std::vector<Segment>& segments,
                                 const FrameLocator& frames, const DetectionLookup& detections,
                                 MaskProvider& masks, EmbeddingProvider& embedder,
                                 const IdentifyOptions& options = {});

/// Prediction cache CSV:
/// `recording_id,start_frame,end_frame,frame_index,detection,rank,individual_id,distance`.
void write_predictions(std::ostream& out, const std::vector<FramePrediction>& predictions);
std::vector<FramePrediction> read_predictions(std::istream& in);

}  // namespace trapline::reid
