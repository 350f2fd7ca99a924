#include "trapline/segmenter.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <tuple>

#include "trapline/csv.hpp"
#include "trapline/error.hpp"

namespace trapline {

const char* to_string(SegmentSource source) { return source == SegmentSource::Auto ? "Auto" : "Human"; }

SegmentSource parse_segment_source(const std::string& text) {
  if (text == "Auto") return SegmentSource::Auto;
  if (text == "Human") return SegmentSource::Human;
  throw ParseError("invalid source '" + text + "'");
}

bool segment_less(const Segment& a, const Segment& b) {
  return std::tie(a.recording_id, a.start_frame, a.end_frame, a.source) <
         std::tie(b.recording_id, b.start_frame, b.end_frame, b.source);
}

std::vector<Segment> group_detections(const std::vector<FrameDetections>& frames,
                                      const GroupingParams& params, const std::string& recording_id) {
  std::vector<Segment> segments;
  const std::size_t min_len = std::max<std::size_t>(params.min_len, 1);
  std::size_t first = 0, last = 0, positives = 0;

  auto close = [&] {
    if (positives >= min_len) {
      segments.push_back({recording_id, first, last, SegmentSource::Auto, {}});
    }
    positives = 0;
  };

  for (std::size_t frame = 0; frame < frames.size(); ++frame) {
    bool positive = std::any_of(frames[frame].begin(), frames[frame].end(),
                                [&](const Detection& d) { return d.confidence >= params.threshold; });
    if (!positive) continue;
    if (positives > 0 && frame - last - 1 > params.gap) close();
    if (positives == 0) first = frame;
    last = frame;
    ++positives;
  }
  if (positives > 0) close();
  return segments;
}

namespace {

std::string join_ids(const std::set<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) {
    if (!out.empty()) out.push_back(';');
    out += id;
  }
  return out;
}

std::set<std::string> split_ids(const std::string& text) {
  std::set<std::string> ids;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ';')) {
    if (!token.empty()) ids.insert(token);
  }
  return ids;
}

std::string number(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

void write_segments(std::ostream& out, const std::vector<Segment>& segments) {
  csv::Writer writer(out);
  writer.write({"recording_id", "start_frame", "end_frame", "source", "animal_ids"});
  for (const auto& s : segments) {
    writer.write({s.recording_id, std::to_string(s.start_frame), std::to_string(s.end_frame),
                  to_string(s.source), join_ids(s.animal_ids)});
  }
}

std::vector<Segment> read_segments(std::istream& in) {
  csv::Reader reader(in);
  reader.expect_header({"recording_id", "start_frame", "end_frame", "source", "animal_ids"});
  std::vector<Segment> segments;
  while (auto row = reader.next()) {
    auto line = reader.line();
    if (row->size() != reader.header().size()) {
      throw ParseError("expected " + std::to_string(reader.header().size()) + " columns", line);
    }
    Segment s;
    s.recording_id = reader.field(*row, "recording_id");
    if (s.recording_id.empty()) throw ParseError("missing recording_id", line);
    auto start = csv::to_int(reader.field(*row, "start_frame"), "start_frame", line);
    auto end = csv::to_int(reader.field(*row, "end_frame"), "end_frame", line);
    if (start < 0 || end < 0) throw ParseError("negative frame", line);
    if (start > end) throw ParseError("start > end", line);
    s.start_frame = static_cast<std::size_t>(start);
    s.end_frame = static_cast<std::size_t>(end);
    try {
      s.source = parse_segment_source(reader.field(*row, "source"));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line);
    }
    s.animal_ids = split_ids(reader.field(*row, "animal_ids"));
    segments.push_back(std::move(s));
  }
  std::stable_sort(segments.begin(), segments.end(), segment_less);
  return segments;
}

std::vector<Segment> read_segments_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path.string());
  return read_segments(in);
}

void write_segments_file(const std::filesystem::path& path, const std::vector<Segment>& segments) {
  if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_segments(out, segments);
}

void write_detections(std::ostream& out, const std::vector<FrameDetections>& frames) {
  csv::Writer writer(out);
  writer.write({"frame_index", "x", "y", "w", "h", "confidence", "label"});
  for (std::size_t frame = 0; frame < frames.size(); ++frame) {
    for (const auto& d : frames[frame]) {
      writer.write({std::to_string(frame), number(d.bbox.x), number(d.bbox.y), number(d.bbox.w),
                    number(d.bbox.h), number(d.confidence), d.label});
    }
  }
}

std::vector<Detection> read_detections(std::istream& in) {
  csv::Reader reader(in);
  reader.expect_header({"frame_index", "x", "y", "w", "h", "confidence", "label"});
  std::vector<Detection> detections;
  while (auto row = reader.next()) {
    auto line = reader.line();
    if (row->size() != reader.header().size()) {
      throw ParseError("expected " + std::to_string(reader.header().size()) + " columns", line);
    }
    Detection d;
    auto frame = csv::to_int(reader.field(*row, "frame_index"), "frame_index", line);
    if (frame < 0) throw ParseError("negative frame_index", line);
    d.frame_index = static_cast<std::size_t>(frame);
    d.bbox.x = csv::to_real(reader.field(*row, "x"), "x", line);
    d.bbox.y = csv::to_real(reader.field(*row, "y"), "y", line);
    d.bbox.w = csv::to_real(reader.field(*row, "w"), "w", line);
    d.bbox.h = csv::to_real(reader.field(*row, "h"), "h", line);
    d.confidence = csv::to_real(reader.field(*row, "confidence"), "confidence", line);
    d.label = reader.field(*row, "label");
    try {
      validate_detection(d);
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), line);
    }
    detections.push_back(std::move(d));
  }
  return detections;
}

void validate_detection(const Detection& d) {
  if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
    throw ValidationError("confidence outside [0,1]");
  }
  if (!(d.bbox.w > 0 && d.bbox.h > 0)) throw ValidationError("bounding box must have positive size");
  if (d.bbox.x < 0 || d.bbox.y < 0) throw ValidationError("bounding box outside image");
}

}  // namespace trapline
