#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trapline/capture.hpp"

namespace trapline {

inline constexpr double kDefaultFps = 30.0;

struct PlanFrame {
  std::filesystem::path path;
  LocalTime timestamp{};
};

/// Timestamp-ordered images of one camera-day. Position in `frames` is the
/// frame index used everywhere downstream.
struct EncodePlan {
  std::string recording_id;
  std::vector<PlanFrame> frames;
  double fps = kDefaultFps;
  /// File names that were skipped because they are not canonical names.
  std::vector<std::string> warnings;

  std::size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }
};

/// Lists the recording's directory in timestamp order. A missing or empty
/// directory yields an empty plan.
EncodePlan plan_day(const std::filesystem::path& archive, const RecordingId& id,
                    double fps = kDefaultFps);

/// How the external encoder is invoked. `output_args` select codec and
/// quality and are passed through verbatim.
struct EncoderConfig {
  std::string binary = "ffmpeg";
  std::vector<std::string> output_args = {"-c:v", "libx264", "-preset", "veryfast",
                                          "-crf", "23", "-pix_fmt", "yuv420p"};
  std::vector<std::string> extra_args;

  /// Defaults, with the binary taken from TRAPLINE_FFMPEG when set.
  static EncoderConfig from_environment();
};

/// True when `binary -version` runs successfully.
bool encoder_available(const EncoderConfig& encoder);

struct VideoAsset {
  std::filesystem::path path;
  std::size_t frames = 0;
  double fps = 0.0;
  double duration = 0.0;  // seconds
  int width = 0;
  int height = 0;
};

/// Decodes the whole file to count frames exactly.
VideoAsset probe_video(const std::filesystem::path& path);

struct EncodeResult {
  std::optional<VideoAsset> asset;  // empty for an empty day
  bool empty_day() const { return !asset; }
};

/// Pipes the plan's JPEGs through the encoder into an MP4 at plan.fps. The
/// output appears atomically; an empty plan writes nothing.
EncodeResult encode_day(const EncodePlan& plan, const std::filesystem::path& out,
                        const EncoderConfig& encoder);

/// One output frame of a side-by-side composite; nullopt is a filler cell.
struct AlignedFrame {
  std::size_t output = 0;
  std::optional<std::size_t> overhead;
  std::optional<std::size_t> front;

  bool operator==(const AlignedFrame&) const = default;
};

using AlignmentMap = std::vector<AlignedFrame>;

/// Greedy two-pointer merge: heads within `tolerance` seconds pair up,
/// otherwise the earlier head is emitted against a filler.
AlignmentMap align_timestamps(std::span<const LocalTime> overhead, std::span<const LocalTime> front,
                              double tolerance = 2.5);
AlignmentMap align_streams(const EncodePlan& overhead, const EncodePlan& front,
                           double tolerance = 2.5);

enum class FillPolicy {
  RepeatLast,  // previous real frame of that camera, black before the first
  Black,
};

/// Overhead on the left, front on the right, top-aligned. Width is the sum
/// of input widths and height the larger input height; the output has
/// exactly |map| frames.
VideoAsset compose_side_by_side(const VideoAsset& overhead, const VideoAsset& front,
                                const AlignmentMap& map, const std::filesystem::path& out,
                                const EncoderConfig& encoder,
                                FillPolicy fill = FillPolicy::RepeatLast, double fps = kDefaultFps);

std::filesystem::path video_path(const std::filesystem::path& dir, const RecordingId& id);
std::filesystem::path composite_path(const std::filesystem::path& dir, const std::string& burrow_id,
                                     Date date);

struct BurrowDayVideos {
  std::optional<VideoAsset> overhead;
  std::optional<VideoAsset> front;
  std::optional<VideoAsset> composite;
  std::size_t encoded = 0;  // files written by this call
};

/// Encodes both camera-days of a burrow and, optionally, their composite.
/// Outputs that already exist are probed instead of re-encoded.
BurrowDayVideos encode_burrow_day(const std::filesystem::path& archive,
                                  const std::filesystem::path& out_dir, const std::string& burrow_id,
                                  Date date, const EncoderConfig& encoder, bool composite = true,
                                  double fps = kDefaultFps);

}  // namespace trapline
