#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "trapline/capture.hpp"

namespace trapline {

/// One metadata record resolved for one source image.
struct ParsedCapture {
  std::string filename;
  CaptureMeta meta;
  bool out_of_schedule = false;
};

/// Parses one manifest line `filename,burrow,view,timestamp`. Throws
/// ParseError ("missing view", "invalid timestamp ...") on malformed input.
ParsedCapture parse_capture_meta(std::string_view record, std::size_t line = 0);

/// Source of capture metadata for card images. The reference implementation
/// reads per-card manifests; an OCR backend would implement the same call.
class MetadataProvider {
 public:
  virtual ~MetadataProvider() = default;
  /// Throws ParseError / NotFoundError for images it cannot describe.
  virtual ParsedCapture lookup(const std::filesystem::path& image) const = 0;
};

/// CSV manifest with header `filename,burrow,view,timestamp`, keyed by the
/// image's file name. Malformed lines do not abort loading; lookups of the
/// affected file rethrow the line's error.
class ManifestProvider : public MetadataProvider {
 public:
  ManifestProvider() = default;

  static ManifestProvider from_file(const std::filesystem::path& manifest);
  void load(std::istream& in, std::string_view origin = "manifest");

  ParsedCapture lookup(const std::filesystem::path& image) const override;
  std::size_t size() const { return records_.size(); }

 private:
  struct Entry {
    std::optional<ParsedCapture> capture;
    std::string error;
  };
  std::map<std::string, Entry, std::less<>> records_;
};

struct IngestError {
  std::filesystem::path source;
  std::string reason;
};

struct IngestReport {
  std::size_t copied = 0;
  std::size_t skipped_duplicates = 0;
  std::vector<IngestError> errors;
  std::size_t out_of_schedule = 0;
  double elapsed = 0.0;  // seconds
  double rate = 0.0;     // images per second
  /// Images copied or already present, per recording id.
  std::map<std::string, std::size_t> per_recording;

  std::size_t examined() const { return copied + skipped_duplicates + errors.size(); }
};

struct IngestOptions {
  std::size_t workers = 1;
};

/// Card images are the regular files below `source` with a .jpg/.jpeg
/// extension, in path order.
std::vector<std::filesystem::path> list_card_images(const std::filesystem::path& source);

/// Copies every card image to `archive/{burrow}/{V}/{YYYYMMDD}/{canonical}`.
/// Byte-identical existing files are skipped; a same-named file with other
/// content is an error and is never overwritten. Per-file failures are
/// recorded and never abort the card.
IngestReport ingest_card(const std::filesystem::path& source, const std::filesystem::path& archive,
                         const MetadataProvider& provider, const IngestOptions& options = {});

}  // namespace trapline
