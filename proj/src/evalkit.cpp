#include "trapline/evalkit.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "trapline/csv.hpp"

namespace trapline::eval {

std::string format_metric(const Metric& m, int decimals) {
  if (!m) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, *m);
  return buf;
}

namespace {

// Sorted starts plus running maximum of ends: an interval [a,b] overlaps
// some reference interval iff, among references starting at or before b,
// the largest end reaches a.
class OverlapIndex {
 public:
  explicit OverlapIndex(const std::vector<Segment>& reference) {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    spans.reserve(reference.size());
    for (const auto& s : reference) spans.emplace_back(s.start_frame, s.end_frame);
    std::sort(spans.begin(), spans.end());
    std::size_t running = 0;
    for (const auto& [start, end] : spans) {
      starts_.push_back(start);
      running = std::max(running, end);
      max_end_.push_back(running);
    }
  }

  bool overlaps(const Segment& s) const {
    auto it = std::upper_bound(starts_.begin(), starts_.end(), s.end_frame);
    if (it == starts_.begin()) return false;
    return max_end_[static_cast<std::size_t>(it - starts_.begin()) - 1] >= s.start_frame;
  }

 private:
  std::vector<std::size_t> starts_;
  std::vector<std::size_t> max_end_;
};

}  // namespace

ConfusionCounts match_segments(const std::vector<Segment>& predicted, const std::vector<Segment>& truth) {
  ConfusionCounts c;
  OverlapIndex truth_index(truth), predicted_index(predicted);
  for (const auto& p : predicted) {
    if (truth_index.overlaps(p)) ++c.tp;
  }
  c.fp = predicted.size() - c.tp;
  for (const auto& t : truth) {
    if (!predicted_index.overlaps(t)) ++c.fn;
  }
  return c;
}

PrecisionRecall precision_recall(const ConfusionCounts& c) {
  auto ratio = [](std::size_t num, std::size_t den) -> Metric {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  PrecisionRecall out;
  out.precision = ratio(c.tp, c.tp + c.fp);
  out.recall = ratio(c.tp, c.tp + c.fn);
  if (out.precision && out.recall && (*out.precision + *out.recall) > 0) {
    out.f1 = 2.0 * *out.precision * *out.recall / (*out.precision + *out.recall);
  } else if (out.precision && out.recall) {
    out.f1 = 0.0;
  }
  return out;
}

Metric topk_accuracy(const std::vector<std::pair<std::string, reid::Prediction>>& predictions, std::size_t k) {
  if (predictions.empty()) return std::nullopt;
  std::size_t hits = 0;
  for (const auto& [truth, ranked] : predictions) {
    const auto limit = std::min(k, ranked.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (ranked[i].individual_id == truth) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

std::vector<RecordingEvaluation> evaluate_recordings(const std::vector<Segment>& predicted,
                                                     const std::vector<Segment>& truth) {
  std::map<std::string, std::pair<std::vector<Segment>, std::vector<Segment>>> grouped;
  for (const auto& s : predicted) grouped[s.recording_id].first.push_back(s);
  for (const auto& s : truth) grouped[s.recording_id].second.push_back(s);
  std::vector<RecordingEvaluation> rows;
  for (const auto& [id, lists] : grouped) {
    auto counts = match_segments(lists.first, lists.second);
    rows.push_back({id, counts, precision_recall(counts)});
  }
  return rows;
}

void write_evaluation_csv(std::ostream& out, const std::vector<RecordingEvaluation>& rows) {
  csv::Writer writer(out);
  writer.write({"recording_id", "tp", "fp", "fn", "precision", "recall", "f1"});
  for (const auto& r : rows) {
    writer.write({r.recording_id, std::to_string(r.counts.tp), std::to_string(r.counts.fp),
                  std::to_string(r.counts.fn), format_metric(r.metrics.precision, 4),
                  format_metric(r.metrics.recall, 4), format_metric(r.metrics.f1, 4)});
  }
}

}  // namespace trapline::eval
