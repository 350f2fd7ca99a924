#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "trapline/capture.hpp"
#include "trapline/timeutil.hpp"
#include "trapline/videopack.hpp"

namespace fs = std::filesystem;

namespace testing {

/// Fresh directory under the system temp dir, removed with its contents.
class TempDir {
 public:
  TempDir() {
    std::string pattern = (fs::temp_directory_path() / "trapline-test-XXXXXX").string();
    if (!mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline void write_file(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << bytes;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Small colourful JPEG whose content depends on `seed`.
inline std::string jpeg_bytes(int width, int height, std::uint32_t seed) {
  cv::Mat image(height, width, CV_8UC3);
  std::mt19937 rng(seed);
  cv::randu(image, cv::Scalar::all(0), cv::Scalar::all(255));
  cv::rectangle(image, {2, 2}, {width / 2, height / 2}, cv::Scalar(seed % 255, 40, 200), cv::FILLED);
  std::vector<uchar> buf;
  cv::imencode(".jpg", image, buf, {cv::IMWRITE_JPEG_QUALITY, 80});
  return {buf.begin(), buf.end()};
}

inline trapline::LocalTime at(const std::string& text) { return trapline::parse_local_time(text); }

/// Writes `count` images named IMG_nnnnn.JPG at 5 s cadence from `start`
/// plus a manifest.csv describing them. Returns the card directory.
inline fs::path make_card(const fs::path& dir, const std::string& burrow, char view, const std::string& start,
                          std::size_t count, int width = 64, int height = 48, std::uint32_t seed = 1) {
  fs::create_directories(dir);
  std::ofstream manifest(dir / "manifest.csv");
  manifest << "filename,burrow,view,timestamp\n";
  auto t = at(start);
  for (std::size_t i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "IMG_%05zu.JPG", i);
    write_file(dir / name, jpeg_bytes(width, height, seed * 7919u + static_cast<std::uint32_t>(i)));
    manifest << name << ',' << burrow << ',' << view << ',' << trapline::format_local_time(t) << '\n';
    t += trapline::kCaptureInterval;
  }
  return dir;
}

/// Archive-side camera-day written directly under canonical names.
inline void make_archive_day(const fs::path& archive, const std::string& burrow, trapline::View view,
                             const std::string& start, std::size_t count, int width = 64, int height = 48,
                             std::chrono::seconds step = trapline::kCaptureInterval) {
  auto t = at(start);
  for (std::size_t i = 0; i < count; ++i) {
    trapline::CaptureMeta meta{burrow, view, t};
    write_file(trapline::recording_dir(archive, trapline::RecordingId::of(meta)) / trapline::canonical_name(meta),
               jpeg_bytes(width, height, static_cast<std::uint32_t>(i) + (view == trapline::View::Front ? 500u : 0u)));
    t += step;
  }
}

inline trapline::EncoderConfig test_encoder() {
  trapline::EncoderConfig e;
  e.binary = TRAPLINE_TEST_FFMPEG;
  return e;
}

inline bool have_encoder() { return std::string(TRAPLINE_TEST_FFMPEG).size() > 0; }

}  // namespace testing
