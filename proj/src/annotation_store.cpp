#include "trapline/annotation/store.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <tuple>

#include "trapline/csv.hpp"
#include "trapline/error.hpp"

namespace fs = std::filesystem;

namespace trapline::annotation {

void validate(const Annotation& a, const EventSchema& schema) {
  if (a.annotation_id.empty()) throw ValidationError("empty annotation_id");
  if (a.recording_id.empty()) throw ValidationError("empty recording_id");
  if (a.start_frame > a.end_frame) throw ValidationError("start_frame > end_frame");
  const EventDef* event = schema.find(a.event);
  if (!event) throw ValidationError("unknown event '" + a.event + "'");
  if (event->id_required && (!a.animal_id || a.animal_id->empty())) {
    throw ValidationError("event '" + a.event + "' requires an animal_id");
  }
}

std::map<std::string, LogRecord> fold(std::span<const LogRecord> log) {
  std::map<std::string, LogRecord> state;
  for (const auto& record : log) {
    auto [it, inserted] = state.try_emplace(record.annotation.annotation_id, record);
    if (!inserted && record.annotation.revision > it->second.annotation.revision) it->second = record;
  }
  return state;
}

std::vector<Annotation> live(const std::map<std::string, LogRecord>& state) {
  std::vector<Annotation> out;
  for (const auto& [id, record] : state) {
    if (!record.tombstone) out.push_back(record.annotation);
  }
  std::stable_sort(out.begin(), out.end(), [](const Annotation& a, const Annotation& b) {
    return std::tie(a.recording_id, a.start_frame, a.annotation_id) <
           std::tie(b.recording_id, b.start_frame, b.annotation_id);
  });
  return out;
}

namespace {

const std::vector<std::string> kColumns{"annotation_id", "recording_id", "start_frame", "end_frame",
                                        "event",         "animal_id",    "author",      "modified_utc",
                                        "revision",      "tombstone"};

LogRecord parse_record(const csv::Reader& reader, const csv::Row& row) {
  const auto line = reader.line();
  if (row.size() != kColumns.size()) {
    throw ParseError("expected " + std::to_string(kColumns.size()) + " columns", line);
  }
  auto count = [&](const char* name) {
    auto v = csv::to_int(reader.field(row, name), name, line);
    if (v < 0) throw ParseError(std::string("negative ") + name, line);
    return static_cast<std::uint64_t>(v);
  };
  LogRecord r;
  auto& a = r.annotation;
  a.annotation_id = reader.field(row, "annotation_id");
  a.recording_id = reader.field(row, "recording_id");
  a.start_frame = count("start_frame");
  a.end_frame = count("end_frame");
  a.event = reader.field(row, "event");
  if (const auto& animal = reader.field(row, "animal_id"); !animal.empty()) a.animal_id = animal;
  a.author = reader.field(row, "author");
  try {
    a.modified_utc = parse_utc(reader.field(row, "modified_utc"));
  } catch (const ParseError& e) {
    throw ParseError(e.what(), line);
  }
  a.revision = count("revision");
  const auto& tomb = reader.field(row, "tombstone");
  if (tomb != "0" && tomb != "1") throw ParseError("invalid tombstone flag", line);
  r.tombstone = tomb == "1";
  if (a.annotation_id.empty() || a.revision == 0) throw ParseError("invalid record", line);
  return r;
}

}  // namespace

std::vector<LogRecord> read_log(std::istream& in, std::vector<std::string>* skipped) {
  csv::Reader reader(in);
  std::vector<LogRecord> records;
  if (in.peek() == std::char_traits<char>::eof()) return records;
  reader.expect_header(kColumns);
  while (auto row = reader.next()) {
    try {
      records.push_back(parse_record(reader, *row));
    } catch (const ParseError& e) {
      if (!skipped) throw;
      skipped->push_back(e.what());
    }
  }
  return records;
}

void write_log_header(std::ostream& out) { csv::Writer(out).write(kColumns); }

void write_log_record(std::ostream& out, const LogRecord& record) {
  const auto& a = record.annotation;
  csv::Writer(out).write({a.annotation_id, a.recording_id, std::to_string(a.start_frame),
                          std::to_string(a.end_frame), a.event, a.animal_id.value_or(""), a.author,
                          format_utc(a.modified_utc), std::to_string(a.revision),
                          record.tombstone ? "1" : "0"});
}

AnnotationStore::AnnotationStore(const fs::path& dir) : path_(dir / kLogFile), clock_(utc_now) {
  fs::create_directories(dir);
  bool torn_tail = false;
  if (fs::exists(path_) && fs::file_size(path_) > 0) {
    std::ifstream in(path_, std::ios::binary);
    auto log = read_log(in, &skipped_);
    state_ = fold(log);
    std::ifstream tail(path_, std::ios::binary);
    tail.seekg(-1, std::ios::end);
    torn_tail = tail.get() != '\n';
  }
  bool fresh = !fs::exists(path_) || fs::file_size(path_) == 0;
  out_.open(path_, std::ios::app | std::ios::binary);
  if (!out_) throw Error("cannot open annotation log " + path_.string());
  if (fresh) write_log_header(out_);
  // Terminate a torn final line so the next record starts cleanly.
  if (torn_tail) out_ << '\n';
  out_.flush();
}

void AnnotationStore::append(const LogRecord& record) {
  std::ostringstream line;
  write_log_record(line, record);
  out_ << line.str();
  out_.flush();
  if (!out_) throw Error("append to " + path_.string() + " failed");
  state_[record.annotation.annotation_id] = record;
}

Annotation AnnotationStore::upsert(Annotation annotation, const EventSchema& schema) {
  validate(annotation, schema);
  std::unique_lock lock(mutex_);
  auto it = state_.find(annotation.annotation_id);
  annotation.revision = it == state_.end() ? 1 : it->second.annotation.revision + 1;
  annotation.modified_utc = clock_();
  append({annotation, false});
  return annotation;
}

bool AnnotationStore::remove(const std::string& annotation_id, const std::string& author) {
  std::unique_lock lock(mutex_);
  auto it = state_.find(annotation_id);
  if (it == state_.end() || it->second.tombstone) return false;
  LogRecord record = it->second;
  record.tombstone = true;
  record.annotation.revision += 1;
  record.annotation.author = author;
  record.annotation.modified_utc = clock_();
  append(record);
  return true;
}

std::optional<Annotation> AnnotationStore::get(const std::string& annotation_id) const {
  std::shared_lock lock(mutex_);
  auto it = state_.find(annotation_id);
  if (it == state_.end() || it->second.tombstone) return std::nullopt;
  return it->second.annotation;
}

bool AnnotationStore::known(const std::string& annotation_id) const {
  std::shared_lock lock(mutex_);
  return state_.count(annotation_id) != 0;
}

std::vector<Annotation> AnnotationStore::current() const {
  std::shared_lock lock(mutex_);
  return live(state_);
}

std::vector<Annotation> AnnotationStore::for_recording(const std::string& recording_id) const {
  auto all = current();
  std::erase_if(all, [&](const Annotation& a) { return a.recording_id != recording_id; });
  return all;
}

std::vector<std::string> AnnotationStore::recordings() const {
  std::set<std::string> ids;
  for (const auto& a : current()) ids.insert(a.recording_id);
  return {ids.begin(), ids.end()};
}

std::vector<LogRecord> AnnotationStore::log() const {
  std::shared_lock lock(mutex_);
  std::ifstream in(path_, std::ios::binary);
  std::vector<std::string> skipped;
  return read_log(in, &skipped);
}

std::size_t AnnotationStore::import_segments(const std::vector<Segment>& segments,
                                             const EventSchema& schema, const std::string& author) {
  std::size_t added = 0;
  for (const auto& s : segments) {
    Annotation a;
    a.annotation_id = "auto:" + s.recording_id + ":" + std::to_string(s.start_frame) + "-" +
                      std::to_string(s.end_frame);
    if (known(a.annotation_id)) continue;
    a.recording_id = s.recording_id;
    a.start_frame = s.start_frame;
    a.end_frame = s.end_frame;
    a.event = std::string(kAnimalPresent);
    if (s.animal_ids.size() == 1) a.animal_id = *s.animal_ids.begin();
    a.author = author;
    upsert(std::move(a), schema);
    ++added;
  }
  return added;
}

void AnnotationStore::set_clock(std::function<UtcTime()> clock) {
  std::unique_lock lock(mutex_);
  clock_ = std::move(clock);
}

}  // namespace trapline::annotation
