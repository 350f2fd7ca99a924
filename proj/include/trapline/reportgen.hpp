#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "trapline/annotation/store.hpp"
#include "trapline/timeutil.hpp"

namespace trapline {

struct AnnotationFilter {
  std::optional<std::string> burrow_id;
  std::optional<Date> date;
  std::optional<std::string> event;
  std::optional<std::string> animal_id;

  bool matches(const annotation::Annotation& a) const;
};

/// `annotation_id,recording_id,start_frame,end_frame,event,animal_id,author,modified_utc`
inline constexpr const char* kAnnotationReportHeader =
    "annotation_id,recording_id,start_frame,end_frame,event,animal_id,author,modified_utc";

/// Header plus one row per matching live annotation, stable-sorted by
/// (recording_id, start_frame).
std::string annotation_report(std::vector<annotation::Annotation> current, const AnnotationFilter& filter);

enum class Stage { Ingested, Segmented, Encoded, Verified };

std::string_view to_string(Stage stage);
Stage parse_stage(std::string_view text);

struct StatusRecord {
  std::string burrow_id;
  Date date{};
  Stage stage = Stage::Ingested;
  std::size_t items = 0;
  UtcTime completed_utc{};

  bool operator==(const StatusRecord&) const = default;
};

inline constexpr const char* kStatusFile = "status.csv";

/// Backlog deadline: a burrow-day not Encoded this long after its first
/// record is flagged.
inline constexpr std::chrono::hours kBacklogDeadline{48};

/// `burrow_id,date,stage,items,completed_utc`
std::vector<StatusRecord> read_status(std::istream& in);
void write_status_header(std::ostream& out);
void write_status_record(std::ostream& out, const StatusRecord& record);

/// Append-only status file. Each stage is recorded at most once per
/// burrow-day; a later stage may be recorded while an earlier one is absent
/// (the earlier stage failed and the day moved on).
class StatusLog {
 public:
  explicit StatusLog(std::filesystem::path file);

  std::vector<StatusRecord> records() const;
  bool has(const std::string& burrow_id, Date date, Stage stage) const;
  /// False, and nothing written, when the stage is already recorded.
  bool record(const StatusRecord& record);

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::vector<StatusRecord> records_;
};

/// `burrow_id,date,stage,items,first_utc,last_utc,age_hours,backlog`
/// One row per burrow-day, ordered by (burrow, date); `stage` is the latest
/// stage reached and `items` its count.
std::string status_report(const std::vector<StatusRecord>& records, UtcTime now);

}  // namespace trapline
