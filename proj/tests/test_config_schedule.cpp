#include <random>
#include <sstream>

#include "doctest.h"
#include "support.hpp"

#include "trapline/config.hpp"
#include "trapline/error.hpp"
#include "trapline/schedule.hpp"

using namespace trapline;

namespace {

Config parse(const std::string& text, const fs::path& base = {}) {
  std::istringstream in(text);
  return Config::parse(in, base);
}

// Hours per stage computed by hand from the field numbers: 12 burrows x
// 20,000 overhead images at 10/s, 12 x 20,000 front images at 30/s, and 34 min
// per burrow-day for 24 burrow-days.
constexpr double kSegmentationHours = 12.0 * 20000 / 10 / 3600;
constexpr double kCopyHours = 12.0 * 20000 / 30 / 3600;
constexpr double kCompressionHours = 24.0 * 34 / 60;

}  // namespace

TEST_CASE("config defaults") {
  auto c = parse("");
  CHECK(c.paths.archive == "archive");
  CHECK(c.segment.provider == "synthetic");
  CHECK(c.segment.grouping.threshold == 0.90);
  CHECK(c.reid.k == 5);
  CHECK(c.serve.port == 8080);
  CHECK(c.encode.composite);
  CHECK(c.workload.burrows == 12);
}

TEST_CASE("config sections set their fields") {
  auto c = parse(
      "[paths]\narchive = data/archive\nvideos = /abs/videos\nschema = events.txt\n"
      "[ingest]\nworkers = 4\n"
      "[encode]\nbinary = /opt/ffmpeg\nextra_args = -threads 1\nfps = 12.5\ncomposite = no\nworkers = 2\n"
      "[segment]\nprovider = process\ncommand = python3 detect.py --gpu\nthreshold = 0.8\ngap = 4\nmin_len = 2\n"
      "[reid]\nlibrary = lib.csv\nmetric = cosine\nk = 3\nframes_per_segment = 7\n"
      "[serve]\nport = 9000\nstatic = ui\n"
      "[schedule]\nburrows = 6\ncopy_workers = 3\n",
      "/base");
  CHECK(c.paths.archive == fs::path("/base/data/archive"));
  CHECK(c.paths.videos == fs::path("/abs/videos"));
  CHECK(c.paths.schema == fs::path("/base/events.txt"));
  CHECK(c.ingest.workers == 4);
  CHECK(c.encode.encoder.binary == "/opt/ffmpeg");
  CHECK(c.encode.encoder.extra_args == std::vector<std::string>{"-threads", "1"});
  CHECK(c.encode.fps == 12.5);
  CHECK_FALSE(c.encode.composite);
  CHECK(split_command(c.segment.command) == std::vector<std::string>{"python3", "detect.py", "--gpu"});
  CHECK(c.segment.grouping.gap == 4);
  CHECK(c.segment.grouping.min_len == 2);
  CHECK(c.reid.metric == reid::Metric::Cosine);
  CHECK(c.reid.k == 3);
  CHECK(c.reid.library == fs::path("/base/lib.csv"));
  CHECK(c.serve.port == 9000);
  CHECK(c.serve.static_dir == fs::path("/base/ui"));
  CHECK(c.workload.burrows == 6);
  CHECK(c.workers.copy == 3);
}

TEST_CASE("config rejects unknown names and bad values") {
  CHECK_THROWS_WITH_AS(parse("[paths]\narchiv = x\n"), doctest::Contains("paths.archiv"), ValidationError);
  CHECK_THROWS_WITH_AS(parse("[extras]\na = 1\n"), doctest::Contains("[extras]"), ValidationError);
  CHECK_THROWS_AS(parse("[ingest]\nworkers = 0\n"), ValidationError);
  CHECK_THROWS_AS(parse("[ingest]\nworkers = two\n"), ValidationError);
  CHECK_THROWS_AS(parse("[encode]\ncomposite = maybe\n"), ValidationError);
  CHECK_THROWS_AS(parse("[schedule]\ncopy_rate = 0\n"), ValidationError);
  CHECK_THROWS_AS(parse("[reid]\nmetric = hamming\n"), ParseError);
  CHECK_THROWS_AS(parse("[paths\narchive = x\n"), ParseError);
  CHECK_THROWS_AS(Config::load("/nonexistent/trapline.ini"), NotFoundError);
}

TEST_CASE("config load resolves paths against the file") {
  testing::TempDir tmp;
  testing::write_file(tmp / "conf" / "trapline.ini", "[paths]\nstore = s\n");
  auto c = Config::load(tmp / "conf" / "trapline.ini");
  CHECK(c.paths.store == tmp / "conf" / "s");
}

TEST_CASE("providers from config") {
  SegmentConfig s;
  auto synthetic = make_detection_provider(s, "B07-O-20210314", 50);
  REQUIRE(synthetic);
  auto again = make_detection_provider(s, "B07-O-20210314", 50);
  for (std::size_t f = 0; f < 50; ++f) CHECK(synthetic->detect({f, {}}) == again->detect({f, {}}));
  s.provider = "csv";
  s.detections = "/nonexistent";
  CHECK_THROWS_AS(make_detection_provider(s, "B07-O-20210314", 50), ProviderError);
  s.provider = "process";
  CHECK_THROWS_AS(make_detection_provider(s, "B07-O-20210314", 50), ProviderError);
  s.provider = "magic";
  CHECK_THROWS_AS(make_detection_provider(s, "B07-O-20210314", 50), ProviderError);

  ReidConfig r;
  CHECK(make_embedder(r));
  r.embedder = "process";
  CHECK_THROWS_AS(make_embedder(r), ProviderError);
}

TEST_CASE("field workload fits the deadline") {
  auto e = estimate_schedule(WorkloadSpec::field_defaults());
  CHECK(e.segmentation_hours == doctest::Approx(kSegmentationHours));
  CHECK(e.copy_hours == doctest::Approx(kCopyHours));
  CHECK(e.compression_hours == doctest::Approx(kCompressionHours));
  CHECK(e.makespan_hours == doctest::Approx(kSegmentationHours + kCopyHours + kCompressionHours));
  CHECK(e.makespan_hours >= 22.0);
  CHECK(e.makespan_hours <= 24.0);
  CHECK(e.deadline_hours == 48.0);
  CHECK(e.pass);
}

TEST_CASE("schedule properties") {
  WorkloadSpec zero = WorkloadSpec::field_defaults();
  zero.burrows = 0;
  CHECK(estimate_schedule(zero).makespan_hours == 0.0);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.5, 4.0);
  for (int trial = 0; trial < 200; ++trial) {
    auto w = WorkloadSpec::field_defaults();
    w.burrows = std::round(u(rng) * 10);
    w.days = std::round(u(rng));
    const auto base = estimate_schedule(w);
    auto doubled = w;
    doubled.burrows *= 2;
    CHECK(estimate_schedule(doubled).makespan_hours == doctest::Approx(2 * base.makespan_hours));
    StageWorkers more{1 + rng() % 4, 1 + rng() % 4, 1 + rng() % 4};
    auto parallel = estimate_schedule(w, more);
    CHECK(parallel.makespan_hours <= base.makespan_hours + 1e-9);
    CHECK(parallel.compression_hours == doctest::Approx(base.compression_hours / double(more.compression)));
    CHECK(base.pass == (base.makespan_hours <= 48.0));
  }

  auto heavy = WorkloadSpec::field_defaults();
  heavy.burrows = 40;
  CHECK_FALSE(estimate_schedule(heavy).pass);
  auto bad = WorkloadSpec::field_defaults();
  bad.segmentation_rate = 0;
  CHECK_THROWS_AS(estimate_schedule(bad), ValidationError);
  bad = WorkloadSpec::field_defaults();
  bad.days = -1;
  CHECK_THROWS_AS(estimate_schedule(bad), ValidationError);
  CHECK_THROWS_AS(estimate_schedule(WorkloadSpec::field_defaults(), {0, 1, 1}), ValidationError);
}
