#include "trapline/detection_provider.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <random>
#include <sstream>

#include "trapline/error.hpp"
#include "trapline/parallel.hpp"
#include "trapline/subprocess.hpp"

namespace trapline {

CsvDetectionProvider::CsvDetectionProvider(const std::filesystem::path& csv) {
  std::ifstream in(csv);
  if (!in) throw ProviderError("cannot open detections file " + csv.string());
  try {
    for (auto& d : read_detections(in)) by_frame_[d.frame_index].push_back(std::move(d));
  } catch (const ParseError& e) {
    throw ProviderError(csv.string() + ": " + e.what());
  }
}

CsvDetectionProvider::CsvDetectionProvider(std::vector<Detection> detections) {
  for (auto& d : detections) by_frame_[d.frame_index].push_back(std::move(d));
}

FrameDetections CsvDetectionProvider::detect(const FrameRef& frame) {
  auto it = by_frame_.find(frame.index);
  return it == by_frame_.end() ? FrameDetections{} : it->second;
}

SubprocessDetectionProvider::SubprocessDetectionProvider(std::vector<std::string> argv)
    : argv_(std::move(argv)) {
  try {
    child_ = std::make_unique<Subprocess>(argv_);
  } catch (const Error& e) {
    throw ProviderError(std::string("detection provider unavailable: ") + e.what());
  }
}

SubprocessDetectionProvider::~SubprocessDetectionProvider() = default;

FrameDetections SubprocessDetectionProvider::detect(const FrameRef& frame) {
  std::lock_guard lock(mutex_);
  try {
    child_->write("DETECT " + frame.path.string() + "\n");
  } catch (const Error& e) {
    throw ProviderError(std::string("detector exited: ") + e.what());
  }
  auto header = child_->read_line();
  if (!header) throw ProviderError("detector closed its output");
  if (header->rfind("ERR", 0) == 0) {
    throw ProviderError(header->size() > 4 ? header->substr(4) : "detector error");
  }
  std::istringstream hs(*header);
  std::string ok;
  long count = -1;
  if (!(hs >> ok >> count) || ok != "OK" || count < 0) {
    throw ProviderError("malformed detector response '" + *header + "'");
  }
  FrameDetections out;
  for (long i = 0; i < count; ++i) {
    auto line = child_->read_line();
    if (!line) throw ProviderError("detector response truncated");
    std::istringstream ls(*line);
    Detection d;
    d.frame_index = frame.index;
    if (!(ls >> d.bbox.x >> d.bbox.y >> d.bbox.w >> d.bbox.h >> d.confidence)) {
      throw ProviderError("malformed detection line '" + *line + "'");
    }
    std::getline(ls >> std::ws, d.label);
    try {
      validate_detection(d);
    } catch (const ValidationError& e) {
      throw ProviderError(e.what());
    }
    out.push_back(std::move(d));
  }
  return out;
}

SyntheticDetectionProvider SyntheticDetectionProvider::random(std::uint64_t seed, std::size_t frames,
                                                              double presence) {
  Options options;
  std::mt19937_64 rng(seed);
  // Alternate absent/present runs with geometric lengths; mean present run
  // 40 frames, absent runs sized to hit the requested presence fraction.
  const double mean_present = 40.0;
  const double mean_absent = mean_present * (1.0 - presence) / std::max(presence, 1e-6);
  std::geometric_distribution<std::size_t> present_len(1.0 / mean_present);
  std::geometric_distribution<std::size_t> absent_len(1.0 / std::max(mean_absent, 1.0));
  std::size_t frame = absent_len(rng);
  while (frame < frames) {
    std::size_t end = std::min(frames - 1, frame + present_len(rng));
    options.present.emplace_back(frame, end);
    frame = end + 2 + absent_len(rng);
  }
  return SyntheticDetectionProvider(std::move(options));
}

FrameDetections SyntheticDetectionProvider::detect(const FrameRef& frame) {
  if (options_.fail_frames.count(frame.index)) {
    throw ProviderError("synthetic failure on frame " + std::to_string(frame.index));
  }
  for (const auto& [first, last] : options_.present) {
    if (first <= frame.index && frame.index <= last) {
      return {Detection{frame.index, {100, 100, 400, 300}, options_.confidence, options_.label}};
    }
  }
  return {};
}

DetectionPass run_detection_pass(std::span<const FrameRef> frames, DetectionProvider& provider,
                                 std::size_t workers) {
  auto started = std::chrono::steady_clock::now();
  DetectionPass pass;
  pass.frames.resize(frames.size());
  std::vector<std::string> failures(frames.size());
  std::vector<char> failed(frames.size(), 0);

  parallel_for(frames.size(), provider.concurrent() ? workers : 1, [&](std::size_t i) {
    try {
      pass.frames[i] = provider.detect(frames[i]);
    } catch (const Error& e) {
      pass.frames[i].clear();
      failed[i] = 1;
      failures[i] = e.what();
    }
  });

  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (!failed[i]) continue;
    pass.unscanned.push_back(frames[i].index);
    pass.diagnostics.push_back("frame " + std::to_string(frames[i].index) + ": " + failures[i]);
  }
  pass.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return pass;
}

}  // namespace trapline
