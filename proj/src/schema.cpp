#include "trapline/annotation/schema.hpp"

#include <fstream>
#include <sstream>

#include "trapline/error.hpp"

namespace trapline::annotation {

EventSchema EventSchema::parse(std::string_view text) {
  EventSchema schema;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream words(line);
    std::vector<std::string> tokens;
    for (std::string w; words >> w;) tokens.push_back(w);
    if (tokens.empty()) continue;
    if (tokens[0] != "event" || tokens.size() < 2 || tokens.size() > 3 ||
        (tokens.size() == 3 && tokens[2] != "id-required")) {
      throw ParseError("malformed event line '" + line + "'", number);
    }
    const auto& name = tokens[1];
    if (name.find(',') != std::string::npos) throw ParseError("event name contains a comma", number);
    for (const auto& e : schema.events_) {
      if (e.name == name) throw ParseError("duplicate event '" + name + "'", number);
    }
    schema.events_.push_back({name, tokens.size() == 3});
  }
  return schema;
}

EventSchema EventSchema::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open schema " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const EventDef* EventSchema::find(std::string_view name) const {
  for (const auto& e : events_) {
    if (e.name == name) return &e;
  }
  static const EventDef builtin{std::string(kAnimalPresent), false};
  if (name == kAnimalPresent) return &builtin;
  return nullptr;
}

}  // namespace trapline::annotation
