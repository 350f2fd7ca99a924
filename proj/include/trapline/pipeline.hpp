#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "trapline/config.hpp"
#include "trapline/ingest.hpp"
#include "trapline/reportgen.hpp"

namespace trapline {

struct CardSource {
  std::filesystem::path dir;
  /// Empty: the configured manifest, else `manifest.csv` at the card root.
  std::filesystem::path manifest;
};

enum class StageOutcome { Done, NoOp, Failed };

std::string_view to_string(StageOutcome outcome);

struct StageResult {
  std::string burrow_id;
  Date date{};
  Stage stage = Stage::Ingested;
  StageOutcome outcome = StageOutcome::Done;
  std::size_t items = 0;
  std::string message;
};

struct CardResult {
  CardSource card;
  IngestReport report;
  std::string failure;  // set when the card could not be read at all
};

struct PipelineReport {
  std::vector<CardResult> cards;
  /// Per burrow-day in (burrow, date) order, stages in pipeline order.
  std::vector<StageResult> stages;

  std::size_t failures() const;
};

/// Ingests the cards, then for every burrow-day they touch (every burrow-day
/// in the archive when no cards are given) runs segmentation of the overhead
/// recording and video encoding. Segmentation writes
/// `{segments}/{recording}.detections.csv` and `.segments.csv` and imports
/// the draft segments into the store. Stages already in `{store}/status.csv`
/// are skipped; a failing stage affects only its own burrow-day and stage.
PipelineReport run_pipeline(const Config& config, const std::vector<CardSource>& cards,
                            const std::function<UtcTime()>& clock = utc_now);

/// Burrow-days with at least one recording directory under the archive.
std::vector<std::pair<std::string, Date>> archived_days(const std::filesystem::path& archive);

}  // namespace trapline
