#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trapline/reid/identify.hpp"

namespace trapline::annotation {

inline constexpr const char* kSuggestionsFile = "suggestions.csv";

struct Suggestions {
  /// False when the recording was never processed by re-identification.
  bool available = false;
  std::optional<std::size_t> sampled_frame;
  /// Ranking for the first animal in the sampled frame (at most 5 entries).
  reid::Prediction ranked;
  /// Rankings for every animal in the sampled frame, by detection ordinal.
  std::vector<reid::Prediction> per_detection;
};

/// Cached re-identification results keyed by (recording, sampled frame).
class SuggestionIndex {
 public:
  SuggestionIndex() = default;
  explicit SuggestionIndex(std::vector<reid::FramePrediction> predictions);

  /// Loads `path` if it exists; a missing file gives an empty index.
  static SuggestionIndex load(const std::filesystem::path& path);

  /// Inside a segment with cached predictions, the prediction of the
  /// nearest sampled frame (earlier one on a tie); otherwise empty.
  Suggestions lookup(const std::string& recording_id, std::size_t frame) const;

  bool has_recording(const std::string& recording_id) const { return by_recording_.count(recording_id) != 0; }
  std::vector<std::string> recordings() const;

 private:
  std::map<std::string, std::vector<reid::FramePrediction>> by_recording_;
};

}  // namespace trapline::annotation
