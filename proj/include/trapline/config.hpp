#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "trapline/detection_provider.hpp"
#include "trapline/reid/embedder.hpp"
#include "trapline/reid/library.hpp"
#include "trapline/schedule.hpp"
#include "trapline/segmenter.hpp"
#include "trapline/videopack.hpp"

namespace trapline {

struct PathsConfig {
  std::filesystem::path archive = "archive";
  std::filesystem::path videos = "videos";
  std::filesystem::path store = "store";
  /// Detections and draft segment CSVs, one pair per overhead recording.
  std::filesystem::path segments = "segments";
  std::filesystem::path schema;  // empty: only the built-in event
};

struct IngestConfig {
  std::size_t workers = 1;
  std::filesystem::path manifest;  // empty: `manifest.csv` at each card root
};

struct EncodeConfig {
  EncoderConfig encoder = EncoderConfig::from_environment();
  double fps = kDefaultFps;
  bool composite = true;
  std::size_t workers = 1;
};

struct SegmentConfig {
  /// `synthetic`, `csv` or `process`.
  std::string provider = "synthetic";
  /// For `process`: the detector command line, split on whitespace.
  std::string command;
  /// For `csv`: directory holding `{recording}.detections.csv`.
  std::filesystem::path detections;
  GroupingParams grouping;
  std::size_t workers = 1;
  std::uint64_t seed = 1;
  double presence = 0.1;
};

struct ReidConfig {
  std::filesystem::path library;
  /// `synthetic`, `csv` or `process`.
  std::string embedder = "synthetic";
  std::string command;
  std::filesystem::path embeddings;
  std::filesystem::path masks;  // empty: box-inscribed ellipses
  reid::Metric metric = reid::Metric::Euclidean;
  std::size_t k = 5;
  std::size_t frames_per_segment = 5;
};

struct ServeConfig {
  int port = 8080;
  std::filesystem::path static_dir;
};

struct Config {
  PathsConfig paths;
  IngestConfig ingest;
  EncodeConfig encode;
  SegmentConfig segment;
  ReidConfig reid;
  ServeConfig serve;
  WorkloadSpec workload = WorkloadSpec::field_defaults();
  StageWorkers workers;

  /// Sections `[paths] [ingest] [encode] [segment] [reid] [serve] [schedule]`
  /// of `key = value` lines. Unknown sections or keys are errors; relative
  /// paths resolve against `base`.
  static Config parse(std::istream& in, const std::filesystem::path& base = {});
  static Config load(const std::filesystem::path& file);
};

/// Whitespace-separated command line.
std::vector<std::string> split_command(const std::string& command);

/// Detector for one overhead recording of `frames` frames. Throws
/// ProviderError when the configured provider cannot be used.
std::unique_ptr<DetectionProvider> make_detection_provider(const SegmentConfig& config,
                                                           const std::string& recording_id,
                                                           std::size_t frames);

std::unique_ptr<reid::EmbeddingProvider> make_embedder(const ReidConfig& config);

}  // namespace trapline
