#pragma once

#include <cstddef>
#include <filesystem>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include "trapline/error.hpp"
#include "trapline/timeutil.hpp"

namespace trapline::annotation {

class FrameRangeError : public Error {
 public:
  using Error::Error;
};

/// Serves individual frames of `{videos}/{recording_id}.mp4` as JPEG.
/// Payloads are cached, so repeated requests return identical bytes.
class FrameServer {
 public:
  explicit FrameServer(std::filesystem::path videos_dir, std::size_t cache_entries = 256,
                       std::optional<std::filesystem::path> archive = std::nullopt);
  ~FrameServer();

  /// Throws NotFoundError for a missing video and FrameRangeError for an
  /// index outside [0, frame count).
  std::string jpeg(const std::string& recording_id, std::size_t frame);

  /// Frame count from the container; throws NotFoundError.
  std::size_t frame_count(const std::string& recording_id);

  bool has_video(const std::string& recording_id) const;

  /// Capture time of a frame: the archived image's timestamp when the
  /// archive is known, otherwise day start + n x 5 s.
  LocalTime capture_time(const std::string& recording_id, std::size_t frame) const;

  std::filesystem::path video_file(const std::string& recording_id) const;

 private:
  struct Decoder;

  std::filesystem::path videos_;
  std::optional<std::filesystem::path> archive_;
  std::size_t capacity_;
  std::mutex mutex_;
  std::unique_ptr<Decoder> decoder_;
  std::list<std::pair<std::string, std::string>> lru_;  // key, payload
  std::map<std::string, std::list<std::pair<std::string, std::string>>::iterator> cache_;
};

}  // namespace trapline::annotation
