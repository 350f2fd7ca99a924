#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace trapline::annotation {

/// Built-in event carried by imported draft segments; always valid.
inline constexpr std::string_view kAnimalPresent = "animal-present";

struct EventDef {
  std::string name;
  bool id_required = false;

  bool operator==(const EventDef&) const = default;
};

/// Annotation events configured from a text file, one per line:
///
///     # comment
///     event basking
///     event mating id-required
class EventSchema {
 public:
  /// Throws ParseError for malformed lines (with line number) and duplicates.
  static EventSchema parse(std::string_view text);
  static EventSchema load(const std::string& path);

  const std::vector<EventDef>& events() const { return events_; }

  /// Declared events plus the built-in animal-present event.
  const EventDef* find(std::string_view name) const;

 private:
  std::vector<EventDef> events_;
};

}  // namespace trapline::annotation
