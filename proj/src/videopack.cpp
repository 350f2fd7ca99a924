#include "trapline/videopack.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>

#include <opencv2/core.hpp>
#include <opencv2/videoio.hpp>

#include "trapline/error.hpp"
#include "trapline/subprocess.hpp"

namespace fs = std::filesystem;

namespace trapline {

EncodePlan plan_day(const fs::path& archive, const RecordingId& id, double fps) {
  EncodePlan plan;
  plan.recording_id = id.str();
  plan.fps = fps;
  auto dir = recording_dir(archive, id);
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return plan;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto name = entry.path().filename().string();
    if (name.front() == '.') continue;
    auto meta = parse_canonical_name(name);
    if (!meta || RecordingId::of(*meta) != id) {
      plan.warnings.push_back(name);
      continue;
    }
    plan.frames.push_back({entry.path(), meta->timestamp});
  }
  std::sort(plan.frames.begin(), plan.frames.end(),
            [](const PlanFrame& a, const PlanFrame& b) { return a.timestamp < b.timestamp; });
  std::sort(plan.warnings.begin(), plan.warnings.end());
  return plan;
}

EncoderConfig EncoderConfig::from_environment() {
  EncoderConfig config;
  if (const char* env = std::getenv("TRAPLINE_FFMPEG"); env && *env) config.binary = env;
  return config;
}

bool encoder_available(const EncoderConfig& encoder) {
  try {
    Subprocess child({encoder.binary, "-version"}, {.pipe_stdin = false, .pipe_stdout = false});
    return child.wait() == 0;
  } catch (const Error&) {
    return false;
  }
}

VideoAsset probe_video(const fs::path& path) {
  if (!fs::exists(path)) throw NotFoundError("missing video " + path.string());
  cv::VideoCapture cap(path.string(), cv::CAP_FFMPEG);
  if (!cap.isOpened()) throw Error("cannot open video " + path.string());
  VideoAsset asset;
  asset.path = path;
  asset.fps = cap.get(cv::CAP_PROP_FPS);
  cv::Mat frame;
  while (cap.read(frame)) {
    if (asset.frames == 0) {
      asset.width = frame.cols;
      asset.height = frame.rows;
    }
    ++asset.frames;
  }
  asset.duration = asset.fps > 0 ? static_cast<double>(asset.frames) / asset.fps : 0.0;
  return asset;
}

namespace {

std::string fps_text(double fps) {
  std::ostringstream ss;
  ss << fps;
  return ss.str();
}

fs::path partial_path(const fs::path& out) {
  return out.parent_path() / ("." + out.filename().string() + ".partial");
}

std::vector<std::string> encoder_command(const EncoderConfig& encoder,
                                         const std::vector<std::string>& input_args,
                                         const fs::path& target) {
  std::vector<std::string> argv{encoder.binary, "-hide_banner", "-loglevel", "error", "-y"};
  argv.insert(argv.end(), input_args.begin(), input_args.end());
  argv.insert(argv.end(), {"-i", "pipe:0", "-an", "-vf", "pad=ceil(iw/2)*2:ceil(ih/2)*2"});
  argv.insert(argv.end(), encoder.output_args.begin(), encoder.output_args.end());
  argv.insert(argv.end(), encoder.extra_args.begin(), encoder.extra_args.end());
  argv.insert(argv.end(), {"-f", "mp4", target.string()});
  return argv;
}

// Runs the encoder, feeding stdin through `feed`, and renames the partial
// output into place once the encoder reports success.
template <typename Feed>
void run_encoder(const EncoderConfig& encoder, const std::vector<std::string>& input_args,
                 const fs::path& out, Feed&& feed) {
  if (!out.parent_path().empty()) fs::create_directories(out.parent_path());
  auto partial = partial_path(out);
  std::optional<Subprocess> child;
  try {
    child.emplace(encoder_command(encoder, input_args, partial),
                  Subprocess::Options{.pipe_stdin = true, .pipe_stdout = false});
  } catch (const Error& e) {
    throw EncoderError(std::string("encoder unavailable: ") + e.what());
  }
  std::string feed_error;
  try {
    feed(*child);
  } catch (const Error& e) {
    feed_error = e.what();
  }
  int status = child->wait();
  if (status != 0 || !feed_error.empty()) {
    std::error_code ec;
    fs::remove(partial, ec);
    std::string message = "encoder failed (exit " + std::to_string(status) + ")";
    if (!feed_error.empty()) message += ": " + feed_error;
    auto diag = child->diagnostics();
    if (!diag.empty()) message += "\n" + diag;
    throw EncoderError(message);
  }
  fs::rename(partial, out);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

EncodeResult encode_day(const EncodePlan& plan, const fs::path& out, const EncoderConfig& encoder) {
  if (plan.empty()) return {};
  std::vector<std::string> input{"-f", "image2pipe", "-c:v", "mjpeg", "-framerate", fps_text(plan.fps)};
  run_encoder(encoder, input, out, [&](Subprocess& child) {
    for (const auto& frame : plan.frames) child.write(read_file(frame.path));
  });
  auto asset = probe_video(out);
  asset.fps = plan.fps;
  asset.duration = static_cast<double>(asset.frames) / plan.fps;
  return {asset};
}

AlignmentMap align_timestamps(std::span<const LocalTime> overhead, std::span<const LocalTime> front,
                              double tolerance) {
  AlignmentMap map;
  map.reserve(std::max(overhead.size(), front.size()));
  std::size_t i = 0, j = 0;
  auto emit = [&](std::optional<std::size_t> o, std::optional<std::size_t> f) {
    map.push_back({map.size(), o, f});
  };
  while (i < overhead.size() || j < front.size()) {
    if (i == overhead.size()) {
      emit(std::nullopt, j++);
    } else if (j == front.size()) {
      emit(i++, std::nullopt);
    } else {
      auto delta = std::chrono::duration<double>(overhead[i] - front[j]).count();
      if (std::abs(delta) <= tolerance) {
        emit(i++, j++);
      } else if (delta < 0) {
        emit(i++, std::nullopt);
      } else {
        emit(std::nullopt, j++);
      }
    }
  }
  return map;
}

AlignmentMap align_streams(const EncodePlan& overhead, const EncodePlan& front, double tolerance) {
  auto stamps = [](const EncodePlan& plan) {
    std::vector<LocalTime> out;
    out.reserve(plan.size());
    for (const auto& f : plan.frames) out.push_back(f.timestamp);
    return out;
  };
  auto o = stamps(overhead);
  auto f = stamps(front);
  return align_timestamps(o, f, tolerance);
}

namespace {

// Sequential decoder that only moves forward; the alignment map guarantees
// each column's indices increase.
class ForwardReader {
 public:
  explicit ForwardReader(const VideoAsset& asset) : cap_(asset.path.string(), cv::CAP_FFMPEG) {
    if (!cap_.isOpened()) throw Error("cannot open video " + asset.path.string());
  }

  const cv::Mat& at(std::size_t index) {
    while (position_ <= static_cast<long>(index)) {
      if (!cap_.read(frame_)) throw Error("video ended before frame " + std::to_string(index));
      ++position_;
    }
    return frame_;
  }

 private:
  cv::VideoCapture cap_;
  cv::Mat frame_;
  long position_ = 0;
};

}  // namespace

VideoAsset compose_side_by_side(const VideoAsset& overhead, const VideoAsset& front,
                                const AlignmentMap& map, const fs::path& out,
                                const EncoderConfig& encoder, FillPolicy fill, double fps) {
  for (std::size_t k = 0; k < map.size(); ++k) {
    const auto& cell = map[k];
    if (cell.output != k) throw Error("alignment map output indices are not contiguous");
    if ((cell.overhead && *cell.overhead >= overhead.frames) ||
        (cell.front && *cell.front >= front.frames)) {
      throw Error("alignment index out of bounds at output " + std::to_string(k));
    }
  }
  const int width = overhead.width + front.width;
  const int height = std::max(overhead.height, front.height);
  if (width <= 0 || height <= 0) throw Error("composite inputs have no frames");

  std::vector<std::string> input{"-f", "rawvideo", "-pix_fmt", "bgr24", "-s",
                                 std::to_string(width) + "x" + std::to_string(height),
                                 "-framerate", fps_text(fps)};
  run_encoder(encoder, input, out, [&](Subprocess& child) {
    ForwardReader left(overhead), right(front);
    cv::Mat canvas(height, width, CV_8UC3);
    cv::Mat last_left = cv::Mat::zeros(overhead.height, overhead.width, CV_8UC3);
    cv::Mat last_right = cv::Mat::zeros(front.height, front.width, CV_8UC3);
    const std::size_t bytes = static_cast<std::size_t>(width) * height * 3;
    for (const auto& cell : map) {
      canvas.setTo(cv::Scalar::all(0));
      if (cell.overhead) left.at(*cell.overhead).copyTo(last_left);
      else if (fill == FillPolicy::Black) last_left.setTo(cv::Scalar::all(0));
      if (cell.front) right.at(*cell.front).copyTo(last_right);
      else if (fill == FillPolicy::Black) last_right.setTo(cv::Scalar::all(0));
      last_left.copyTo(canvas(cv::Rect(0, 0, overhead.width, overhead.height)));
      last_right.copyTo(canvas(cv::Rect(overhead.width, 0, front.width, front.height)));
      child.write(std::string_view(reinterpret_cast<const char*>(canvas.data), bytes));
    }
  });
  auto asset = probe_video(out);
  asset.fps = fps;
  asset.duration = static_cast<double>(asset.frames) / fps;
  return asset;
}

fs::path video_path(const fs::path& dir, const RecordingId& id) { return dir / (id.str() + ".mp4"); }

fs::path composite_path(const fs::path& dir, const std::string& burrow_id, Date date) {
  return dir / (burrow_id + "-" + format_compact_date(date) + "-composite.mp4");
}

BurrowDayVideos encode_burrow_day(const fs::path& archive, const fs::path& out_dir,
                                  const std::string& burrow_id, Date date,
                                  const EncoderConfig& encoder, bool composite, double fps) {
  BurrowDayVideos result;
  RecordingId o_id{burrow_id, View::Overhead, date};
  RecordingId f_id{burrow_id, View::Front, date};
  auto o_plan = plan_day(archive, o_id, fps);
  auto f_plan = plan_day(archive, f_id, fps);

  auto encode_one = [&](const EncodePlan& plan, const RecordingId& id) -> std::optional<VideoAsset> {
    auto path = video_path(out_dir, id);
    if (fs::exists(path)) return probe_video(path);
    auto encoded = encode_day(plan, path, encoder);
    if (encoded.asset) ++result.encoded;
    return encoded.asset;
  };
  result.overhead = encode_one(o_plan, o_id);
  result.front = encode_one(f_plan, f_id);

  if (composite && result.overhead && result.front) {
    auto path = composite_path(out_dir, burrow_id, date);
    if (fs::exists(path)) {
      result.composite = probe_video(path);
    } else {
      auto map = align_streams(o_plan, f_plan);
      result.composite = compose_side_by_side(*result.overhead, *result.front, map, path, encoder,
                                              FillPolicy::RepeatLast, fps);
      ++result.encoded;
    }
  }
  return result;
}

}  // namespace trapline
