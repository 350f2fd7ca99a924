#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "trapline/reid/embedder.hpp"
#include "trapline/reid/library.hpp"
#include "trapline/reid/mugshot.hpp"
#include "trapline/segmenter.hpp"

namespace trapline::reid {

inline constexpr std::size_t kDefaultTopK = 5;
inline constexpr std::size_t kDefaultFramesPerSegment = 5;

struct RankedId {
  std::string individual_id;
  double distance = 0.0;

  bool operator==(const RankedId&) const = default;
};

/// Distinct individuals by non-decreasing distance (ties by id), at most k.
using Prediction = std::vector<RankedId>;

/// Scores each individual by its minimum distance over all its embeddings
/// and all query embeddings, and returns the k best.
Prediction rank_individuals(const LibraryIndex& index, std::span<const Embedding> queries,
                            std::size_t k = kDefaultTopK, Metric metric = Metric::Euclidean);

/// Embeds the mugshot and its 180-degree rotation and min-merges both
/// rankings. Throws ValidationError for an empty library or k == 0.
Prediction query_topk(const ReferenceLibrary& library, const cv::Mat& mugshot,
                      EmbeddingProvider& embedder, std::size_t k = kDefaultTopK,
                      Metric metric = Metric::Euclidean, const std::string& ref = {});
Prediction query_topk(const ReferenceLibrary& library, const Mugshot& mugshot,
                      EmbeddingProvider& embedder, std::size_t k = kDefaultTopK,
                      Metric metric = Metric::Euclidean);

/// A labelled validation query; `views` are the orientations embedded for
/// it (one, or a mugshot and its 180-degree rotation).
struct ValidationItem {
  std::string label;
  std::vector<Embedding> views;
};

/// Validation queries from a labelled embedding table: one item per
/// image_ref, with `{ref}@180` rows joining their base ref as a second view.
std::vector<ValidationItem> validation_items(const ReferenceLibrary& labelled);

double top1_accuracy(const ReferenceLibrary& library, std::span<const ValidationItem> validation,
                     Metric metric = Metric::Euclidean);

struct PruneResult {
  ReferenceLibrary library;
  double initial_accuracy = 0.0;
  double final_accuracy = 0.0;
  std::size_t removed = 0;
  std::size_t passes = 0;
  /// Accuracy after each accepted removal.
  std::vector<double> accuracy_trace;
};

/// Visits embeddings in seed-determined random order and drops each one
/// whose removal does not lower top-1 validation accuracy, never removing an
/// individual's last embedding. Passes repeat until one removes nothing.
PruneResult prune_library(const ReferenceLibrary& library, std::span<const ValidationItem> validation,
                          std::uint64_t seed, Metric metric = Metric::Euclidean);

/// n frame indices evenly spaced over the segment (floor of linear
/// interpolation, both ends included); all frames when the segment is no
/// longer than n; the middle frame when n == 1.
std::vector<std::size_t> sample_segment_frames(const Segment& segment,
                                               std::size_t n = kDefaultFramesPerSegment);

}  // namespace trapline::reid
