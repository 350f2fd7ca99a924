#include "trapline/capture.hpp"

#include <cctype>

#include "trapline/error.hpp"

namespace trapline {

char view_code(View view) { return view == View::Overhead ? 'O' : 'F'; }

View parse_view_code(std::string_view code) {
  if (code == "O") return View::Overhead;
  if (code == "F") return View::Front;
  if (code.empty()) throw ParseError("missing view");
  throw ParseError("invalid view '" + std::string(code) + "'");
}

bool valid_burrow_id(std::string_view id) {
  if (id.empty()) return false;
  for (unsigned char c : id) {
    if (!std::isalnum(c)) return false;
  }
  return true;
}

std::string RecordingId::str() const {
  return burrow_id + '-' + view_code(view) + '-' + format_compact_date(date);
}

RecordingId RecordingId::parse(std::string_view text) {
  auto first = text.find('-');
  auto second = first == std::string_view::npos ? first : text.find('-', first + 1);
  if (second == std::string_view::npos || text.find('-', second + 1) != std::string_view::npos) {
    throw ParseError("invalid recording id '" + std::string(text) + "'");
  }
  RecordingId id;
  id.burrow_id = std::string(text.substr(0, first));
  if (!valid_burrow_id(id.burrow_id)) {
    throw ParseError("invalid recording id '" + std::string(text) + "'");
  }
  id.view = parse_view_code(text.substr(first + 1, second - first - 1));
  id.date = parse_compact_date(text.substr(second + 1));
  return id;
}

RecordingId RecordingId::of(const CaptureMeta& meta) {
  return RecordingId{meta.burrow_id, meta.view, date_of(meta.timestamp)};
}

std::string canonical_name(const CaptureMeta& meta) {
  return RecordingId::of(meta).str() + '-' + format_compact_time(meta.timestamp) + ".jpg";
}

std::optional<CaptureMeta> parse_canonical_name(std::string_view name) {
  constexpr std::string_view kExt = ".jpg";
  if (name.size() <= kExt.size() || name.substr(name.size() - kExt.size()) != kExt) return std::nullopt;
  name.remove_suffix(kExt.size());
  auto last = name.rfind('-');
  if (last == std::string_view::npos) return std::nullopt;
  try {
    auto id = RecordingId::parse(name.substr(0, last));
    auto clock = name.substr(last + 1);
    if (clock.size() != 6) return std::nullopt;
    std::string stamp = format_local_time(LocalTime{std::chrono::local_days{id.date}});
    stamp = stamp.substr(0, 11) + std::string(clock.substr(0, 2)) + ':' +
            std::string(clock.substr(2, 2)) + ':' + std::string(clock.substr(4, 2));
    return CaptureMeta{id.burrow_id, id.view, parse_local_time(stamp)};
  } catch (const ParseError&) {
    return std::nullopt;
  }
}

std::filesystem::path recording_dir(const std::filesystem::path& archive, const RecordingId& id) {
  return archive / id.burrow_id / std::string(1, view_code(id.view)) / format_compact_date(id.date);
}

bool out_of_schedule(LocalTime t) {
  auto tod = time_of_day(t);
  return tod < kScheduleStart || tod > std::chrono::seconds{kScheduleEnd};
}

}  // namespace trapline
