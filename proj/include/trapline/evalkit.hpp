#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "trapline/reid/retrieval.hpp"
#include "trapline/segmenter.hpp"

namespace trapline::eval {

/// A ratio that may be undefined (zero denominator). Never coerced to 0/1.
using Metric = std::optional<double>;

std::string format_metric(const Metric& m, int decimals = 3);

/// tp and fp count predicted segments; fn counts ground-truth segments.
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

/// Overlap means at least one shared frame (inclusive intervals). A
/// predicted segment is a true positive if it overlaps any truth segment; a
/// truth segment is a false negative if no predicted segment overlaps it.
ConfusionCounts match_segments(const std::vector<Segment>& predicted, const std::vector<Segment>& truth);

struct PrecisionRecall {
  Metric precision;
  Metric recall;
  Metric f1;
};

PrecisionRecall precision_recall(const ConfusionCounts& c);

/// Fraction of queries whose true id is among the first min(k, |ranked|)
/// entries. Undefined for an empty query set.
Metric topk_accuracy(const std::vector<std::pair<std::string, reid::Prediction>>& predictions, std::size_t k);

struct RecordingEvaluation {
  std::string recording_id;
  ConfusionCounts counts;
  PrecisionRecall metrics;
};

/// Matches per recording id (union of both lists' ids, sorted).
std::vector<RecordingEvaluation> evaluate_recordings(const std::vector<Segment>& predicted,
                                                     const std::vector<Segment>& truth);

/// `recording_id,tp,fp,fn,precision,recall,f1`; undefined metrics print as
/// `undefined`.
void write_evaluation_csv(std::ostream& out, const std::vector<RecordingEvaluation>& rows);

}  // namespace trapline::eval
