#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "trapline/annotation/schema.hpp"
#include "trapline/segmenter.hpp"
#include "trapline/timeutil.hpp"

namespace trapline::annotation {

struct Annotation {
  std::string annotation_id;
  std::string recording_id;
  std::size_t start_frame = 0;
  std::size_t end_frame = 0;
  std::string event;
  std::optional<std::string> animal_id;
  std::string author;
  UtcTime modified_utc{};
  std::uint64_t revision = 0;

  bool operator==(const Annotation&) const = default;
};

/// One line of the log.
struct LogRecord {
  Annotation annotation;
  bool tombstone = false;

  bool operator==(const LogRecord&) const = default;
};

/// Throws ValidationError for start > end, an unknown event, a missing
/// required animal id, or empty identifiers.
void validate(const Annotation& a, const EventSchema& schema);

/// Highest revision per annotation id, tombstones included.
std::map<std::string, LogRecord> fold(std::span<const LogRecord> log);

/// Live annotations of a folded state, ordered by (recording, start, id).
std::vector<Annotation> live(const std::map<std::string, LogRecord>& state);

/// `annotation_id,recording_id,start_frame,end_frame,event,animal_id,author,modified_utc,revision,tombstone`
/// Strict by default; with `skipped` given, malformed lines (a torn final
/// write) are skipped and described there instead of throwing.
std::vector<LogRecord> read_log(std::istream& in, std::vector<std::string>* skipped = nullptr);
void write_log_header(std::ostream& out);
void write_log_record(std::ostream& out, const LogRecord& record);

inline constexpr const char* kLogFile = "annotations.csv";

/// Append-only annotation log under a store directory. Every mutation
/// appends one record and flushes before returning; the in-memory state is
/// the fold of the log. Safe for concurrent use.
class AnnotationStore {
 public:
  /// Opens (creating if needed) `dir/annotations.csv` and folds it. A
  /// torn final line left by a crash is ignored.
  explicit AnnotationStore(const std::filesystem::path& dir);

  AnnotationStore(const AnnotationStore&) = delete;
  AnnotationStore& operator=(const AnnotationStore&) = delete;

  /// Validates, assigns the next revision and the modification time, and
  /// appends. Returns the stored record. The store is untouched on error.
  Annotation upsert(Annotation annotation, const EventSchema& schema);

  /// Appends a tombstone. Returns false for an unknown or already deleted id.
  bool remove(const std::string& annotation_id, const std::string& author);

  std::optional<Annotation> get(const std::string& annotation_id) const;
  /// True for any id ever written, deleted or not.
  bool known(const std::string& annotation_id) const;

  std::vector<Annotation> current() const;
  std::vector<Annotation> for_recording(const std::string& recording_id) const;
  std::vector<std::string> recordings() const;

  /// Re-reads the log file from disk.
  std::vector<LogRecord> log() const;

  /// Imports draft segments as `animal-present` annotations with ids
  /// `auto:{recording}:{start}-{end}`. Ids seen before (even deleted ones)
  /// are skipped. Returns how many were added.
  std::size_t import_segments(const std::vector<Segment>& segments, const EventSchema& schema,
                              const std::string& author = "segmenter");

  void set_clock(std::function<UtcTime()> clock);

  const std::filesystem::path& path() const { return path_; }
  /// Log lines that could not be parsed when the store was opened.
  const std::vector<std::string>& skipped() const { return skipped_; }

 private:
  void append(const LogRecord& record);

  std::filesystem::path path_;
  std::ofstream out_;
  std::map<std::string, LogRecord> state_;
  std::function<UtcTime()> clock_;
  std::vector<std::string> skipped_;
  mutable std::shared_mutex mutex_;
};

}  // namespace trapline::annotation
