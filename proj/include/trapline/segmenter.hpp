#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <memory>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace trapline {

struct BoundingBox {
  double x = 0, y = 0, w = 0, h = 0;

  bool operator==(const BoundingBox&) const = default;
};

/// One object found by a detection provider.
struct Detection {
  std::size_t frame_index = 0;
  BoundingBox bbox;
  double confidence = 0.0;
  std::string label;

  bool operator==(const Detection&) const = default;
};

using FrameDetections = std::vector<Detection>;

enum class SegmentSource { Auto, Human };

const char* to_string(SegmentSource source);
SegmentSource parse_segment_source(const std::string& text);

/// Inclusive frame interval of one recording.
struct Segment {
  std::string recording_id;
  std::size_t start_frame = 0;
  std::size_t end_frame = 0;
  SegmentSource source = SegmentSource::Auto;
  std::set<std::string> animal_ids;

  std::size_t length() const { return end_frame - start_frame + 1; }
  bool contains(std::size_t frame) const { return start_frame <= frame && frame <= end_frame; }

  bool operator==(const Segment&) const = default;
};

/// Canonical ordering: recording, start, end, source.
bool segment_less(const Segment& a, const Segment& b);

struct GroupingParams {
  double threshold = 0.90;
  std::size_t gap = 2;      // negative frames tolerated inside a segment
  std::size_t min_len = 1;  // positive frames required to keep a segment
};

/// A frame is positive when it holds a detection with confidence at or
/// above the threshold. Positive frames separated by at most `gap`
/// negative frames share a segment spanning first to last positive frame;
/// segments with fewer than `min_len` positive frames are dropped. The
/// position in `frames` is the frame index.
std::vector<Segment> group_detections(const std::vector<FrameDetections>& frames,
                                      const GroupingParams& params,
                                      const std::string& recording_id = {});

/// Segment CSV: `recording_id,start_frame,end_frame,source,animal_ids`.
void write_segments(std::ostream& out, const std::vector<Segment>& segments);
/// Returns segments in canonical order; throws ParseError naming the line.
std::vector<Segment> read_segments(std::istream& in);
std::vector<Segment> read_segments_file(const std::filesystem::path& path);
void write_segments_file(const std::filesystem::path& path, const std::vector<Segment>& segments);

/// Detections CSV: `frame_index,x,y,w,h,confidence,label`.
void write_detections(std::ostream& out, const std::vector<FrameDetections>& frames);
std::vector<Detection> read_detections(std::istream& in);

/// Throws ValidationError for confidence outside [0,1] or a non-positive box.
void validate_detection(const Detection& d);

}  // namespace trapline
