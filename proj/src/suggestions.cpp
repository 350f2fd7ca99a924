#include "trapline/annotation/suggestions.hpp"

#include <algorithm>
#include <fstream>
#include <tuple>

#include "trapline/error.hpp"

namespace trapline::annotation {

SuggestionIndex::SuggestionIndex(std::vector<reid::FramePrediction> predictions) {
  for (auto& p : predictions) by_recording_[p.recording_id].push_back(std::move(p));
  for (auto& [id, list] : by_recording_) {
    std::stable_sort(list.begin(), list.end(), [](const auto& a, const auto& b) {
      return std::tie(a.frame_index, a.detection) < std::tie(b.frame_index, b.detection);
    });
  }
}

SuggestionIndex SuggestionIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return {};
  return SuggestionIndex(reid::read_predictions(in));
}

Suggestions SuggestionIndex::lookup(const std::string& recording_id, std::size_t frame) const {
  Suggestions out;
  auto it = by_recording_.find(recording_id);
  if (it == by_recording_.end()) return out;
  out.available = true;

  const reid::FramePrediction* nearest = nullptr;
  std::size_t best_gap = 0;
  for (const auto& p : it->second) {
    if (frame < p.start_frame || frame > p.end_frame) continue;
    std::size_t gap = p.frame_index > frame ? p.frame_index - frame : frame - p.frame_index;
    if (!nearest || gap < best_gap) {
      nearest = &p;
      best_gap = gap;
    }
  }
  if (!nearest) return out;

  out.sampled_frame = nearest->frame_index;
  for (const auto& p : it->second) {
    if (p.frame_index == nearest->frame_index && p.start_frame == nearest->start_frame &&
        p.end_frame == nearest->end_frame) {
      out.per_detection.push_back(p.ranked);
    }
  }
  out.ranked = out.per_detection.front();
  if (out.ranked.size() > 5) out.ranked.resize(5);
  return out;
}

std::vector<std::string> SuggestionIndex::recordings() const {
  std::vector<std::string> ids;
  for (const auto& [id, list] : by_recording_) ids.push_back(id);
  return ids;
}

}  // namespace trapline::annotation
