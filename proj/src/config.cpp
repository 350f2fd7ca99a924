#include "trapline/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "trapline/error.hpp"

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace trapline {

std::vector<std::string> split_command(const std::string& command) {
  std::istringstream in(command);
  std::vector<std::string> out;
  for (std::string word; in >> word;) out.push_back(word);
  return out;
}

namespace {

template <typename T>
T number(const std::string& key, const std::string& text) {
  T value{};
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw ValidationError("config: invalid value '" + text + "' for " + key);
  }
  return value;
}

bool boolean(const std::string& key, const std::string& text) {
  if (text == "true" || text == "yes" || text == "1" || text == "on") return true;
  if (text == "false" || text == "no" || text == "0" || text == "off") return false;
  throw ValidationError("config: invalid boolean '" + text + "' for " + key);
}

std::size_t positive(const std::string& key, const std::string& text) {
  auto v = number<std::size_t>(key, text);
  if (v == 0) throw ValidationError("config: " + key + " must be positive");
  return v;
}

}  // namespace

Config Config::parse(std::istream& in, const fs::path& base) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError("config: " + e.message(), e.line());
  }

  Config c;
  auto path = [&](const std::string& text) {
    fs::path p(text);
    return p.empty() || p.is_absolute() || base.empty() ? p : base / p;
  };

  using Setter = std::function<void(const std::string& key, const std::string& value)>;
  const std::map<std::string, std::map<std::string, Setter>> sections{
      {"paths",
       {{"archive", [&](auto&, auto& v) { c.paths.archive = path(v); }},
        {"videos", [&](auto&, auto& v) { c.paths.videos = path(v); }},
        {"store", [&](auto&, auto& v) { c.paths.store = path(v); }},
        {"segments", [&](auto&, auto& v) { c.paths.segments = path(v); }},
        {"schema", [&](auto&, auto& v) { c.paths.schema = path(v); }}}},
      {"ingest",
       {{"workers", [&](auto& k, auto& v) { c.ingest.workers = positive(k, v); }},
        {"manifest", [&](auto&, auto& v) { c.ingest.manifest = path(v); }}}},
      {"encode",
       {{"binary", [&](auto&, auto& v) { c.encode.encoder.binary = v; }},
        {"output_args", [&](auto&, auto& v) { c.encode.encoder.output_args = split_command(v); }},
        {"extra_args", [&](auto&, auto& v) { c.encode.encoder.extra_args = split_command(v); }},
        {"fps",
         [&](auto& k, auto& v) {
           c.encode.fps = number<double>(k, v);
           if (!(c.encode.fps > 0)) throw ValidationError("config: fps must be positive");
         }},
        {"composite", [&](auto& k, auto& v) { c.encode.composite = boolean(k, v); }},
        {"workers", [&](auto& k, auto& v) { c.encode.workers = positive(k, v); }}}},
      {"segment",
       {{"provider", [&](auto&, auto& v) { c.segment.provider = v; }},
        {"command", [&](auto&, auto& v) { c.segment.command = v; }},
        {"detections", [&](auto&, auto& v) { c.segment.detections = path(v); }},
        {"threshold", [&](auto& k, auto& v) { c.segment.grouping.threshold = number<double>(k, v); }},
        {"gap", [&](auto& k, auto& v) { c.segment.grouping.gap = number<std::size_t>(k, v); }},
        {"min_len", [&](auto& k, auto& v) { c.segment.grouping.min_len = number<std::size_t>(k, v); }},
        {"workers", [&](auto& k, auto& v) { c.segment.workers = positive(k, v); }},
        {"seed", [&](auto& k, auto& v) { c.segment.seed = number<std::uint64_t>(k, v); }},
        {"presence", [&](auto& k, auto& v) { c.segment.presence = number<double>(k, v); }}}},
      {"reid",
       {{"library", [&](auto&, auto& v) { c.reid.library = path(v); }},
        {"embedder", [&](auto&, auto& v) { c.reid.embedder = v; }},
        {"command", [&](auto&, auto& v) { c.reid.command = v; }},
        {"embeddings", [&](auto&, auto& v) { c.reid.embeddings = path(v); }},
        {"masks", [&](auto&, auto& v) { c.reid.masks = path(v); }},
        {"metric", [&](auto&, auto& v) { c.reid.metric = reid::parse_metric(v); }},
        {"k", [&](auto& k, auto& v) { c.reid.k = positive(k, v); }},
        {"frames_per_segment", [&](auto& k, auto& v) { c.reid.frames_per_segment = positive(k, v); }}}},
      {"serve",
       {{"port", [&](auto& k, auto& v) { c.serve.port = number<int>(k, v); }},
        {"static", [&](auto&, auto& v) { c.serve.static_dir = path(v); }}}},
      {"schedule",
       {{"burrows", [&](auto& k, auto& v) { c.workload.burrows = number<double>(k, v); }},
        {"days", [&](auto& k, auto& v) { c.workload.days = number<double>(k, v); }},
        {"overhead_images", [&](auto& k, auto& v) { c.workload.overhead_images = number<double>(k, v); }},
        {"front_images", [&](auto& k, auto& v) { c.workload.front_images = number<double>(k, v); }},
        {"segmentation_rate", [&](auto& k, auto& v) { c.workload.segmentation_rate = number<double>(k, v); }},
        {"copy_rate", [&](auto& k, auto& v) { c.workload.copy_rate = number<double>(k, v); }},
        {"compression_minutes",
         [&](auto& k, auto& v) { c.workload.compression_minutes = number<double>(k, v); }},
        {"segmentation_workers", [&](auto& k, auto& v) { c.workers.segmentation = positive(k, v); }},
        {"copy_workers", [&](auto& k, auto& v) { c.workers.copy = positive(k, v); }},
        {"compression_workers", [&](auto& k, auto& v) { c.workers.compression = positive(k, v); }}}},
  };

  for (const auto& [section, entries] : tree) {
    auto s = sections.find(section);
    if (s == sections.end()) throw ValidationError("config: unknown section [" + section + "]");
    if (!entries.data().empty()) throw ValidationError("config: key '" + section + "' outside a section");
    for (const auto& [key, value] : entries) {
      auto setter = s->second.find(key);
      if (setter == s->second.end()) throw ValidationError("config: unknown key " + section + "." + key);
      setter->second(section + "." + key, value.data());
    }
  }
  c.workload.validate();
  return c;
}

Config Config::load(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw NotFoundError("cannot read config " + file.string());
  return parse(in, file.parent_path());
}

std::unique_ptr<DetectionProvider> make_detection_provider(const SegmentConfig& config,
                                                           const std::string& recording_id,
                                                           std::size_t frames) {
  if (config.provider == "synthetic") {
    // Per-recording seed so different days get different presence patterns.
    std::uint64_t seed = config.seed;
    for (unsigned char ch : recording_id) seed = (seed ^ ch) * 0x100000001b3ULL;
    return std::make_unique<SyntheticDetectionProvider>(
        SyntheticDetectionProvider::random(seed, frames, config.presence));
  }
  if (config.provider == "csv") {
    auto file = config.detections / (recording_id + ".detections.csv");
    if (!fs::exists(file)) throw ProviderError("no detections file " + file.string());
    return std::make_unique<CsvDetectionProvider>(file);
  }
  if (config.provider == "process") {
    auto argv = split_command(config.command);
    if (argv.empty()) throw ProviderError("segment.command is empty");
    return std::make_unique<SubprocessDetectionProvider>(argv);
  }
  throw ProviderError("unknown detection provider '" + config.provider + "'");
}

std::unique_ptr<reid::EmbeddingProvider> make_embedder(const ReidConfig& config) {
  if (config.embedder == "synthetic") return std::make_unique<reid::SyntheticEmbedder>();
  if (config.embedder == "csv") return std::make_unique<reid::CsvEmbedder>(config.embeddings);
  if (config.embedder == "process") {
    auto argv = split_command(config.command);
    if (argv.empty()) throw ProviderError("reid.command is empty");
    return std::make_unique<reid::SubprocessEmbedder>(argv);
  }
  throw ProviderError("unknown embedder '" + config.embedder + "'");
}

}  // namespace trapline
