#include "trapline/annotation/frame_server.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/videoio.hpp>

#include "trapline/capture.hpp"
#include "trapline/videopack.hpp"

namespace fs = std::filesystem;

namespace trapline::annotation {

// One open capture, positioned just after the last frame it returned, so
// forward scrubbing does not restart decoding.
struct FrameServer::Decoder {
  std::string recording_id;
  fs::file_time_type stamp;
  cv::VideoCapture capture;
  long next = 0;
  std::size_t frames = 0;
};

FrameServer::FrameServer(fs::path videos_dir, std::size_t cache_entries, std::optional<fs::path> archive)
    : videos_(std::move(videos_dir)), archive_(std::move(archive)), capacity_(cache_entries) {}

FrameServer::~FrameServer() = default;

fs::path FrameServer::video_file(const std::string& recording_id) const {
  return videos_ / (recording_id + ".mp4");
}

bool FrameServer::has_video(const std::string& recording_id) const {
  std::error_code ec;
  return fs::is_regular_file(video_file(recording_id), ec);
}

std::size_t FrameServer::frame_count(const std::string& recording_id) {
  auto path = video_file(recording_id);
  if (!has_video(recording_id)) throw NotFoundError("no video for " + recording_id);
  cv::VideoCapture cap(path.string(), cv::CAP_FFMPEG);
  if (!cap.isOpened()) throw NotFoundError("cannot open video for " + recording_id);
  auto count = cap.get(cv::CAP_PROP_FRAME_COUNT);
  if (count > 0) return static_cast<std::size_t>(count);
  return probe_video(path).frames;
}

std::string FrameServer::jpeg(const std::string& recording_id, std::size_t frame) {
  auto path = video_file(recording_id);
  if (!has_video(recording_id)) throw NotFoundError("no video for " + recording_id);
  const auto stamp = fs::last_write_time(path);
  const std::string key = recording_id + "#" + std::to_string(frame) + "#" +
                          std::to_string(stamp.time_since_epoch().count());

  std::lock_guard lock(mutex_);
  if (auto it = cache_.find(key); it != cache_.end()) {
    lru_.splice(lru_.begin(), lru_, it->second);
    return it->second->second;
  }

  if (!decoder_ || decoder_->recording_id != recording_id || decoder_->stamp != stamp ||
      decoder_->next > static_cast<long>(frame)) {
    auto fresh = std::make_unique<Decoder>();
    fresh->recording_id = recording_id;
    fresh->stamp = stamp;
    fresh->capture.open(path.string(), cv::CAP_FFMPEG);
    if (!fresh->capture.isOpened()) throw NotFoundError("cannot open video for " + recording_id);
    auto count = fresh->capture.get(cv::CAP_PROP_FRAME_COUNT);
    fresh->frames = count > 0 ? static_cast<std::size_t>(count) : probe_video(path).frames;
    decoder_ = std::move(fresh);
  }
  if (frame >= decoder_->frames) {
    throw FrameRangeError("frame " + std::to_string(frame) + " out of range (video has " +
                          std::to_string(decoder_->frames) + " frames)");
  }
  cv::Mat image;
  while (decoder_->next <= static_cast<long>(frame)) {
    if (!decoder_->capture.read(image)) {
      decoder_.reset();
      throw FrameRangeError("frame " + std::to_string(frame) + " could not be decoded");
    }
    ++decoder_->next;
  }
  std::vector<uchar> bytes;
  cv::imencode(".jpg", image, bytes, {cv::IMWRITE_JPEG_QUALITY, 90});
  std::string payload(bytes.begin(), bytes.end());

  lru_.emplace_front(key, payload);
  cache_[key] = lru_.begin();
  while (lru_.size() > capacity_) {
    cache_.erase(lru_.back().first);
    lru_.pop_back();
  }
  return payload;
}

LocalTime FrameServer::capture_time(const std::string& recording_id, std::size_t frame) const {
  auto id = RecordingId::parse(recording_id);
  if (archive_) {
    auto plan = plan_day(*archive_, id);
    if (frame < plan.size()) return plan.frames[frame].timestamp;
  }
  return LocalTime{std::chrono::local_days{id.date}} + kScheduleStart +
         kCaptureInterval * static_cast<long>(frame);
}

}  // namespace trapline::annotation
