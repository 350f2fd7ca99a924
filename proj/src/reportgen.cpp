#include "trapline/reportgen.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "trapline/capture.hpp"
#include "trapline/csv.hpp"
#include "trapline/error.hpp"

namespace fs = std::filesystem;

namespace trapline {

bool AnnotationFilter::matches(const annotation::Annotation& a) const {
  if (event && a.event != *event) return false;
  if (animal_id && a.animal_id != *animal_id) return false;
  if (burrow_id || date) {
    RecordingId id;
    try {
      id = RecordingId::parse(a.recording_id);
    } catch (const Error&) {
      return false;
    }
    if (burrow_id && id.burrow_id != *burrow_id) return false;
    if (date && id.date != *date) return false;
  }
  return true;
}

std::string annotation_report(std::vector<annotation::Annotation> current, const AnnotationFilter& filter) {
  std::erase_if(current, [&](const auto& a) { return !filter.matches(a); });
  std::stable_sort(current.begin(), current.end(), [](const auto& a, const auto& b) {
    return std::tie(a.recording_id, a.start_frame) < std::tie(b.recording_id, b.start_frame);
  });
  std::ostringstream out;
  out << kAnnotationReportHeader << '\n';
  csv::Writer writer(out);
  for (const auto& a : current) {
    writer.write({a.annotation_id, a.recording_id, std::to_string(a.start_frame), std::to_string(a.end_frame),
                  a.event, a.animal_id.value_or(""), a.author, format_utc(a.modified_utc)});
  }
  return out.str();
}

namespace {
constexpr std::array<std::string_view, 4> kStageNames{"Ingested", "Segmented", "Encoded", "Verified"};
const std::vector<std::string> kStatusColumns{"burrow_id", "date", "stage", "items", "completed_utc"};
}  // namespace

std::string_view to_string(Stage stage) { return kStageNames[static_cast<std::size_t>(stage)]; }

Stage parse_stage(std::string_view text) {
  for (std::size_t i = 0; i < kStageNames.size(); ++i) {
    if (kStageNames[i] == text) return static_cast<Stage>(i);
  }
  throw ParseError("unknown stage '" + std::string(text) + "'");
}

std::vector<StatusRecord> read_status(std::istream& in) {
  csv::Reader reader(in);
  reader.expect_header(kStatusColumns);
  std::vector<StatusRecord> out;
  while (auto row = reader.next()) {
    try {
      StatusRecord r;
      r.burrow_id = reader.field(*row, "burrow_id");
      r.date = parse_compact_date(reader.field(*row, "date"));
      r.stage = parse_stage(reader.field(*row, "stage"));
      auto items = csv::to_int(reader.field(*row, "items"), "items", reader.line());
      if (items < 0) throw ParseError("negative items", reader.line());
      r.items = static_cast<std::size_t>(items);
      r.completed_utc = parse_utc(reader.field(*row, "completed_utc"));
      out.push_back(std::move(r));
    } catch (const ParseError& e) {
      if (e.line() != 0) throw;
      throw ParseError(e.what(), reader.line());
    }
  }
  return out;
}

void write_status_header(std::ostream& out) { csv::Writer(out).write(kStatusColumns); }

void write_status_record(std::ostream& out, const StatusRecord& r) {
  csv::Writer(out).write({r.burrow_id, format_compact_date(r.date), std::string(to_string(r.stage)),
                          std::to_string(r.items), format_utc(r.completed_utc)});
}

StatusLog::StatusLog(fs::path file) : path_(std::move(file)) {
  std::ifstream in(path_);
  if (in) records_ = read_status(in);
}

std::vector<StatusRecord> StatusLog::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

bool StatusLog::has(const std::string& burrow_id, Date date, Stage stage) const {
  std::lock_guard lock(mutex_);
  return std::any_of(records_.begin(), records_.end(), [&](const auto& r) {
    return r.burrow_id == burrow_id && r.date == date && r.stage == stage;
  });
}

bool StatusLog::record(const StatusRecord& record) {
  std::lock_guard lock(mutex_);
  for (const auto& r : records_) {
    if (r.burrow_id == record.burrow_id && r.date == record.date && r.stage == record.stage) return false;
  }
  const bool fresh = !fs::exists(path_) || fs::file_size(path_) == 0;
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::app);
  if (!out) throw Error("cannot append to " + path_.string());
  if (fresh) write_status_header(out);
  write_status_record(out, record);
  out.flush();
  if (!out) throw Error("write failed for " + path_.string());
  records_.push_back(record);
  return true;
}

std::string status_report(const std::vector<StatusRecord>& records, UtcTime now) {
  struct Day {
    Stage latest = Stage::Ingested;
    std::size_t items = 0;
    UtcTime first = UtcTime::max();
    UtcTime last = UtcTime::min();
    bool encoded = false;
  };
  std::map<std::pair<std::string, Date>, Day> days;
  for (const auto& r : records) {
    auto [it, inserted] = days.try_emplace({r.burrow_id, r.date});
    auto& d = it->second;
    if (inserted || r.stage >= d.latest) {
      d.latest = r.stage;
      d.items = r.items;
    }
    d.first = std::min(d.first, r.completed_utc);
    d.last = std::max(d.last, r.completed_utc);
    if (r.stage >= Stage::Encoded) d.encoded = true;
  }

  std::ostringstream out;
  csv::Writer writer(out);
  writer.write({"burrow_id", "date", "stage", "items", "first_utc", "last_utc", "age_hours", "backlog"});
  for (const auto& [key, d] : days) {
    const auto age = now - d.first;
    const bool backlog = !d.encoded && age > kBacklogDeadline;
    char hours[32];
    std::snprintf(hours, sizeof hours, "%.1f", std::chrono::duration<double, std::ratio<3600>>(age).count());
    writer.write({key.first, format_compact_date(key.second), std::string(to_string(d.latest)),
                  std::to_string(d.items), format_utc(d.first), format_utc(d.last), hours,
                  backlog ? "1" : "0"});
  }
  return out.str();
}

}  // namespace trapline
