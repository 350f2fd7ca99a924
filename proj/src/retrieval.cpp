#include "trapline/reid/retrieval.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include <opencv2/core.hpp>

#include "trapline/error.hpp"

namespace trapline::reid {

namespace {

using DistanceRow = Eigen::Matrix<double, 1, Eigen::Dynamic>;

DistanceRow distances_to(const LibraryIndex& index, const Embedding& query, Metric metric) {
  if (metric == Metric::Euclidean) return (index.embeddings.colwise() - query).colwise().norm();
  const DistanceRow norms = index.embeddings.colwise().norm() * query.norm();
  DistanceRow dots = query.transpose() * index.embeddings;
  return (norms.array() > 0).select(1.0 - dots.array() / norms.array(), 1.0);
}

// Per-individual minimum over columns and queries.
std::vector<double> individual_scores(const LibraryIndex& index, std::span<const Embedding> queries,
                                      Metric metric) {
  std::vector<double> best(index.ids.size(), std::numeric_limits<double>::infinity());
  for (const auto& q : queries) {
    const DistanceRow d = distances_to(index, q, metric);
    for (Eigen::Index c = 0; c < d.size(); ++c) {
      auto& slot = best[index.owner[static_cast<std::size_t>(c)]];
      slot = std::min(slot, d[c]);
    }
  }
  return best;
}

}  // namespace

Prediction rank_individuals(const LibraryIndex& index, std::span<const Embedding> queries,
                            std::size_t k, Metric metric) {
  auto best = individual_scores(index, queries, metric);
  std::vector<std::size_t> order(best.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t keep = std::min(k, order.size());
  // ids are sorted, so comparing positions breaks distance ties by id.
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return best[a] != best[b] ? best[a] < best[b] : a < b;
                    });
  Prediction out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.push_back({index.ids[order[i]], best[order[i]]});
  return out;
}

Prediction query_topk(const ReferenceLibrary& library, const cv::Mat& mugshot,
                      EmbeddingProvider& embedder, std::size_t k, Metric metric,
                      const std::string& ref) {
  if (library.empty()) throw ValidationError("empty reference library");
  if (k == 0) throw ValidationError("k must be at least 1");
  cv::Mat flipped;
  cv::rotate(mugshot, flipped, cv::ROTATE_180);
  const Embedding views[2] = {embedder.embed(mugshot, ref), embedder.embed(flipped, ref + "@180")};
  return rank_individuals(LibraryIndex(library), views, k, metric);
}

Prediction query_topk(const ReferenceLibrary& library, const Mugshot& mugshot,
                      EmbeddingProvider& embedder, std::size_t k, Metric metric) {
  std::string ref = mugshot.source.recording_id + "#" + std::to_string(mugshot.source.frame_index) +
                    "#" + std::to_string(mugshot.source.detection);
  return query_topk(library, mugshot.image, embedder, k, metric, ref);
}

namespace {

// Validation distances precomputed once: rows are items, columns library
// entries, each cell the minimum over the item's views.
class ValidationTable {
 public:
  ValidationTable(const LibraryIndex& index, std::span<const ValidationItem> validation, Metric metric)
      : index_(index), distances_(static_cast<Eigen::Index>(validation.size()), index.embeddings.cols()) {
    for (std::size_t i = 0; i < validation.size(); ++i) {
      const auto& item = validation[i];
      if (item.views.empty()) throw ValidationError("validation item without embeddings");
      auto it = std::lower_bound(index.ids.begin(), index.ids.end(), item.label);
      if (it == index.ids.end() || *it != item.label) {
        throw ValidationError("validation label '" + item.label + "' absent from library");
      }
      truth_.push_back(static_cast<std::size_t>(it - index.ids.begin()));
      DistanceRow row = distances_to(index, item.views.front(), metric);
      for (std::size_t v = 1; v < item.views.size(); ++v) {
        row = row.cwiseMin(distances_to(index, item.views[v], metric));
      }
      distances_.row(static_cast<Eigen::Index>(i)) = row;
    }
  }

  double top1(const std::vector<char>& active) const {
    if (truth_.empty()) return 0.0;
    std::size_t correct = 0;
    for (Eigen::Index r = 0; r < distances_.rows(); ++r) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t winner = std::numeric_limits<std::size_t>::max();
      for (Eigen::Index c = 0; c < distances_.cols(); ++c) {
        if (!active[static_cast<std::size_t>(c)]) continue;
        const double d = distances_(r, c);
        const std::size_t who = index_.owner[static_cast<std::size_t>(c)];
        if (d < best || (d == best && who < winner)) {
          best = d;
          winner = who;
        }
      }
      if (winner == truth_[static_cast<std::size_t>(r)]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(truth_.size());
  }

 private:
  const LibraryIndex& index_;
  Eigen::MatrixXd distances_;
  std::vector<std::size_t> truth_;
};

}  // namespace

std::vector<ValidationItem> validation_items(const ReferenceLibrary& labelled) {
  std::map<std::pair<std::string, std::string>, ValidationItem> items;
  for (const auto& [id, entries] : labelled.entries()) {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      std::string ref = entries[i].image_ref;
      if (ref.ends_with("@180")) ref.resize(ref.size() - 4);
      if (ref.empty()) ref = "#" + std::to_string(i);
      auto& item = items[{id, ref}];
      item.label = id;
      item.views.push_back(entries[i].embedding);
    }
  }
  std::vector<ValidationItem> out;
  for (auto& [key, item] : items) out.push_back(std::move(item));
  return out;
}

double top1_accuracy(const ReferenceLibrary& library, std::span<const ValidationItem> validation,
                     Metric metric) {
  if (validation.empty()) throw ValidationError("empty validation set");
  LibraryIndex index(library);
  ValidationTable table(index, validation, metric);
  return table.top1(std::vector<char>(index.owner.size(), 1));
}

PruneResult prune_library(const ReferenceLibrary& library, std::span<const ValidationItem> validation,
                          std::uint64_t seed, Metric metric) {
  if (validation.empty()) throw ValidationError("empty validation set");
  LibraryIndex index(library);
  ValidationTable table(index, validation, metric);

  const std::size_t columns = index.owner.size();
  std::vector<char> active(columns, 1);
  std::vector<std::size_t> remaining(index.ids.size(), 0);
  for (auto who : index.owner) ++remaining[who];

  PruneResult result;
  result.initial_accuracy = table.top1(active);
  double accuracy = result.initial_accuracy;

  std::mt19937_64 rng(seed);
  for (;;) {
    ++result.passes;
    std::vector<std::size_t> order;
    for (std::size_t c = 0; c < columns; ++c) {
      if (active[c]) order.push_back(c);
    }
    // Fisher-Yates on the raw engine output keeps the order identical across
    // standard library implementations.
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

    std::size_t removed_this_pass = 0;
    for (auto c : order) {
      if (remaining[index.owner[c]] <= 1) continue;
      active[c] = 0;
      const double candidate = table.top1(active);
      if (candidate >= accuracy) {
        accuracy = candidate;
        --remaining[index.owner[c]];
        ++removed_this_pass;
        result.accuracy_trace.push_back(candidate);
      } else {
        active[c] = 1;
      }
    }
    result.removed += removed_this_pass;
    if (removed_this_pass == 0) break;
  }
  result.final_accuracy = accuracy;

  std::size_t c = 0;
  for (const auto& [id, list] : library.entries()) {
    for (const auto& entry : list) {
      if (active[c++]) result.library.add(id, entry.embedding, entry.image_ref);
    }
  }
  return result;
}

std::vector<std::size_t> sample_segment_frames(const Segment& segment, std::size_t n) {
  std::vector<std::size_t> frames;
  if (n == 0) return frames;
  const std::size_t span = segment.end_frame - segment.start_frame;
  if (segment.length() <= n) {
    for (std::size_t f = segment.start_frame; f <= segment.end_frame; ++f) frames.push_back(f);
    return frames;
  }
  if (n == 1) return {segment.start_frame + span / 2};
  for (std::size_t i = 0; i < n; ++i) frames.push_back(segment.start_frame + i * span / (n - 1));
  return frames;
}

}  // namespace trapline::reid
