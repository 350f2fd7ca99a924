#include "trapline/ingest.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <fstream>
#include <iterator>
#include <mutex>
#include <set>

#include "trapline/csv.hpp"
#include "trapline/error.hpp"
#include "trapline/parallel.hpp"

namespace fs = std::filesystem;

namespace trapline {

ParsedCapture parse_capture_meta(std::string_view record, std::size_t line) {
  auto fields = csv::split(record);
  if (fields.size() != 4) throw ParseError("expected 4 fields, got " + std::to_string(fields.size()), line);
  ParsedCapture out;
  out.filename = fields[0];
  if (out.filename.empty()) throw ParseError("missing filename", line);
  if (fields[1].empty()) throw ParseError("missing burrow", line);
  if (!valid_burrow_id(fields[1])) throw ParseError("invalid burrow '" + fields[1] + "'", line);
  out.meta.burrow_id = fields[1];
  try {
    out.meta.view = parse_view_code(fields[2]);
    if (fields[3].empty()) throw ParseError("missing timestamp");
    out.meta.timestamp = parse_local_time(fields[3]);
  } catch (const ParseError& e) {
    throw ParseError(e.what(), line);
  }
  out.out_of_schedule = out_of_schedule(out.meta.timestamp);
  return out;
}

ManifestProvider ManifestProvider::from_file(const fs::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw NotFoundError("cannot open manifest " + manifest.string());
  ManifestProvider provider;
  provider.load(in, manifest.string());
  return provider;
}

void ManifestProvider::load(std::istream& in, std::string_view origin) {
  csv::Reader reader(in);
  reader.expect_header({"filename", "burrow", "view", "timestamp"});
  while (auto row = reader.next()) {
    if (row->size() < reader.header().size()) row->resize(reader.header().size());
    // Re-join so parse_capture_meta sees the canonical column order.
    csv::Row ordered{reader.field(*row, "filename"), reader.field(*row, "burrow"),
                     reader.field(*row, "view"), reader.field(*row, "timestamp")};
    Entry entry;
    try {
      entry.capture = parse_capture_meta(csv::join(ordered), reader.line());
    } catch (const ParseError& e) {
      entry.error = std::string(origin) + ": " + e.what();
    }
    records_[ordered[0]] = std::move(entry);
  }
}

ParsedCapture ManifestProvider::lookup(const fs::path& image) const {
  auto it = records_.find(image.filename().string());
  if (it == records_.end()) throw NotFoundError("no manifest entry for " + image.filename().string());
  if (!it->second.capture) throw ParseError(it->second.error);
  return *it->second.capture;
}

namespace {

bool has_jpeg_extension(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".jpg" || ext == ".jpeg";
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("unreadable file");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error("read error");
  return bytes;
}

// SOI at the start and EOI at the end (cameras may zero-pad the tail).
void check_jpeg_complete(const std::string& bytes) {
  if (bytes.size() < 4 || static_cast<unsigned char>(bytes[0]) != 0xFF ||
      static_cast<unsigned char>(bytes[1]) != 0xD8) {
    throw Error("not a JPEG file");
  }
  auto end = bytes.find_last_not_of('\0');
  if (end == std::string::npos || end < 3 || static_cast<unsigned char>(bytes[end - 1]) != 0xFF ||
      static_cast<unsigned char>(bytes[end]) != 0xD9) {
    throw Error("truncated JPEG (no end-of-image marker)");
  }
}

enum class Placement { Copied, Duplicate };

Placement compare_existing(const fs::path& dest, const std::string& bytes) {
  std::error_code ec;
  auto size = fs::file_size(dest, ec);
  if (!ec && size == bytes.size() && read_bytes(dest) == bytes) return Placement::Duplicate;
  throw Error("name collision with different content at " + dest.string());
}

// Write-temp-then-link: the final name appears atomically and is never
// clobbered, so concurrent writers of one name resolve to a single winner.
Placement place_file(const fs::path& dest, const std::string& bytes) {
  if (fs::exists(dest)) return compare_existing(dest, bytes);
  fs::create_directories(dest.parent_path());

  static std::atomic<unsigned long> counter{0};
  auto temp = dest.parent_path() /
              ("." + dest.filename().string() + ".tmp-" + std::to_string(::getpid()) + "-" +
               std::to_string(counter.fetch_add(1)));
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot create " + temp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out) {
      std::error_code ec;
      fs::remove(temp, ec);
      throw Error("write failed for " + temp.string());
    }
  }
  std::error_code ec;
  fs::create_hard_link(temp, dest, ec);
  std::error_code ignored;
  fs::remove(temp, ignored);
  if (!ec) return Placement::Copied;
  if (ec == std::errc::file_exists) return compare_existing(dest, bytes);
  throw Error("cannot create " + dest.string() + ": " + ec.message());
}

}  // namespace

std::vector<fs::path> list_card_images(const fs::path& source) {
  std::vector<fs::path> images;
  for (const auto& entry : fs::recursive_directory_iterator(source)) {
    if (entry.is_regular_file() && has_jpeg_extension(entry.path()) &&
        entry.path().filename().string().front() != '.') {
      images.push_back(entry.path());
    }
  }
  std::sort(images.begin(), images.end());
  return images;
}

IngestReport ingest_card(const fs::path& source, const fs::path& archive,
                         const MetadataProvider& provider, const IngestOptions& options) {
  auto started = std::chrono::steady_clock::now();
  IngestReport report;
  std::vector<fs::path> images;
  try {
    images = list_card_images(source);
  } catch (const fs::filesystem_error& e) {
    report.errors.push_back({source, std::string("unreadable source: ") + e.what()});
    return report;
  }

  std::mutex mutex;
  parallel_for(images.size(), options.workers, [&](std::size_t i) {
    const auto& image = images[i];
    try {
      auto capture = provider.lookup(image);
      auto bytes = read_bytes(image);
      check_jpeg_complete(bytes);
      auto id = RecordingId::of(capture.meta);
      auto dest = recording_dir(archive, id) / canonical_name(capture.meta);
      auto placed = place_file(dest, bytes);
      std::lock_guard lock(mutex);
      if (placed == Placement::Copied) ++report.copied;
      else ++report.skipped_duplicates;
      if (capture.out_of_schedule) ++report.out_of_schedule;
      ++report.per_recording[id.str()];
    } catch (const std::exception& e) {
      std::lock_guard lock(mutex);
      report.errors.push_back({image, e.what()});
    }
  });
  std::sort(report.errors.begin(), report.errors.end(),
            [](const IngestError& a, const IngestError& b) { return a.source < b.source; });

  report.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (report.elapsed > 0) {
    report.rate = static_cast<double>(report.copied + report.skipped_duplicates) / report.elapsed;
  }
  return report;
}

}  // namespace trapline
