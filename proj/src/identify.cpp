#include "trapline/reid/identify.hpp"

#include <algorithm>
#include <charconv>
#include <tuple>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "trapline/csv.hpp"
#include "trapline/error.hpp"

namespace trapline::reid {

std::vector<Mask> BoxEllipseMaskProvider::masks(const cv::Mat& image, const FrameDetections& detections) {
  std::vector<Mask> out;
  for (const auto& d : detections) {
    cv::Mat canvas = cv::Mat::zeros(image.rows, image.cols, CV_8UC1);
    cv::Point center(cvRound(d.bbox.x + d.bbox.w / 2), cvRound(d.bbox.y + d.bbox.h / 2));
    cv::Size axes(std::max(1, cvRound(d.bbox.w / 2)), std::max(1, cvRound(d.bbox.h / 2)));
    cv::ellipse(canvas, center, axes, 0, 0, 360, cv::Scalar(1), cv::FILLED);
    out.push_back(from_cv(canvas));
  }
  return out;
}

std::vector<Mask> DirectoryMaskProvider::masks(const cv::Mat&, const FrameDetections& detections) {
  std::vector<Mask> out;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    auto path = dir_ / (std::to_string(detections[i].frame_index) + "_" + std::to_string(i) + ".png");
    cv::Mat raw = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
    if (raw.empty()) throw ProviderError("missing mask " + path.string());
    out.push_back(from_cv(raw));
  }
  return out;
}

IdentifyReport identify_segments(const ReferenceLibrary& library, const std::vector<Segment>& segments,
                                 const FrameLocator& frames, const DetectionLookup& detections,
                                 MaskProvider& masks, EmbeddingProvider& embedder,
                                 const IdentifyOptions& options) {
  if (library.empty()) throw ValidationError("empty reference library");
  IdentifyReport report;
  for (const auto& segment : segments) {
    for (auto frame : sample_segment_frames(segment, options.frames_per_segment)) {
      auto where = segment.recording_id + " frame " + std::to_string(frame);
      try {
        FrameDetections dets;
        for (auto& d : detections(segment.recording_id, frame)) {
          if (d.confidence >= options.threshold) dets.push_back(std::move(d));
        }
        if (dets.empty()) continue;
        auto path = frames(segment.recording_id, frame);
        cv::Mat image = path.empty() ? cv::Mat() : cv::imread(path.string(), cv::IMREAD_COLOR);
        if (image.empty()) throw NotFoundError("frame image unavailable");
        auto found = masks.masks(image, dets);
        for (std::size_t i = 0; i < found.size(); ++i) {
          auto mug = canonicalize_mugshot(image, found[i], {segment.recording_id, frame, i});
          report.predictions.push_back({segment.recording_id, segment.start_frame, segment.end_frame,
                                        frame, i,
                                        query_topk(library, mug, embedder, options.k, options.metric)});
        }
      } catch (const Error& e) {
        report.warnings.push_back(where + ": " + e.what());
      }
    }
  }
  return report;
}

void write_predictions(std::ostream& out, const std::vector<FramePrediction>& predictions) {
  csv::Writer writer(out);
  writer.write({"recording_id", "start_frame", "end_frame", "frame_index", "detection", "rank",
                "individual_id", "distance"});
  for (const auto& p : predictions) {
    for (std::size_t r = 0; r < p.ranked.size(); ++r) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", p.ranked[r].distance);
      writer.write({p.recording_id, std::to_string(p.start_frame), std::to_string(p.end_frame),
                    std::to_string(p.frame_index), std::to_string(p.detection), std::to_string(r + 1),
                    p.ranked[r].individual_id, buf});
    }
  }
}

std::vector<FramePrediction> read_predictions(std::istream& in) {
  csv::Reader reader(in);
  reader.expect_header({"recording_id", "start_frame", "end_frame", "frame_index", "detection", "rank",
                        "individual_id", "distance"});
  std::vector<FramePrediction> out;
  auto index = [&](const csv::Row& row, const char* name) {
    auto v = csv::to_int(reader.field(row, name), name, reader.line());
    if (v < 0) throw ParseError(std::string("negative ") + name, reader.line());
    return static_cast<std::size_t>(v);
  };
  while (auto row = reader.next()) {
    FramePrediction key;
    key.recording_id = reader.field(*row, "recording_id");
    key.start_frame = index(*row, "start_frame");
    key.end_frame = index(*row, "end_frame");
    key.frame_index = index(*row, "frame_index");
    key.detection = index(*row, "detection");
    auto rank = index(*row, "rank");
    RankedId entry{reader.field(*row, "individual_id"),
                   csv::to_real(reader.field(*row, "distance"), "distance", reader.line())};
    auto same = [&](const FramePrediction& p) {
      return std::tie(p.recording_id, p.start_frame, p.end_frame, p.frame_index, p.detection) ==
             std::tie(key.recording_id, key.start_frame, key.end_frame, key.frame_index, key.detection);
    };
    if (out.empty() || !same(out.back())) out.push_back(key);
    if (rank != out.back().ranked.size() + 1) {
      throw ParseError("rank " + std::to_string(rank) + " out of sequence", reader.line());
    }
    out.back().ranked.push_back(std::move(entry));
  }
  return out;
}

}  // namespace trapline::reid
