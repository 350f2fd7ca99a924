#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trapline/segmenter.hpp"

namespace trapline {

class Subprocess;

struct FrameRef {
  std::size_t index = 0;
  std::filesystem::path path;
};

/// Anything that turns a frame into detections. Implementations throw
/// ProviderError from the constructor when unusable and from detect() when
/// a single frame fails.
class DetectionProvider {
 public:
  virtual ~DetectionProvider() = default;
  virtual FrameDetections detect(const FrameRef& frame) = 0;
  /// Whether detect() may be called from several threads at once.
  virtual bool concurrent() const { return true; }
};

/// Serves precomputed detections from a detections CSV.
class CsvDetectionProvider : public DetectionProvider {
 public:
  explicit CsvDetectionProvider(const std::filesystem::path& csv);
  explicit CsvDetectionProvider(std::vector<Detection> detections);

  FrameDetections detect(const FrameRef& frame) override;

 private:
  std::map<std::size_t, FrameDetections> by_frame_;
};

/// Line-protocol bridge to an external detector process:
///   -> `DETECT <image path>`
///   <- `OK <n>` then n lines `x y w h confidence label`, or `ERR <message>`
class SubprocessDetectionProvider : public DetectionProvider {
 public:
  explicit SubprocessDetectionProvider(std::vector<std::string> argv);
  ~SubprocessDetectionProvider() override;

  FrameDetections detect(const FrameRef& frame) override;
  bool concurrent() const override { return false; }

 private:
  std::vector<std::string> argv_;
  std::unique_ptr<Subprocess> child_;
  std::mutex mutex_;
};

/// Deterministic stand-in detector for tests and dry runs.
class SyntheticDetectionProvider : public DetectionProvider {
 public:
  struct Options {
    /// Inclusive frame intervals that contain an animal.
    std::vector<std::pair<std::size_t, std::size_t>> present;
    double confidence = 0.95;
    std::string label = "tortoise";
    /// Frames whose detect() call fails.
    std::set<std::size_t> fail_frames;
  };

  SyntheticDetectionProvider() = default;
  explicit SyntheticDetectionProvider(Options options) : options_(std::move(options)) {}

  /// Animal-present runs scattered pseudo-randomly over `frames` frames.
  static SyntheticDetectionProvider random(std::uint64_t seed, std::size_t frames,
                                           double presence = 0.1);

  FrameDetections detect(const FrameRef& frame) override;

 private:
  Options options_;
};

struct DetectionPass {
  /// One list per input frame, in frame order; unscanned frames are empty.
  std::vector<FrameDetections> frames;
  std::vector<std::size_t> unscanned;
  std::vector<std::string> diagnostics;
  double elapsed = 0.0;

  std::size_t scanned() const { return frames.size() - unscanned.size(); }
};

/// Runs the provider over every frame. Frames may be processed in parallel
/// when the provider allows it; results are stored in frame order. A frame
/// whose detect() throws is marked unscanned and the pass continues.
DetectionPass run_detection_pass(std::span<const FrameRef> frames, DetectionProvider& provider,
                                 std::size_t workers = 1);

}  // namespace trapline
