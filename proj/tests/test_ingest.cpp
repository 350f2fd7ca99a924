#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "support.hpp"

#include "trapline/capture.hpp"
#include "trapline/error.hpp"
#include "trapline/ingest.hpp"

using namespace trapline;
using testing::TempDir;

namespace {

std::map<std::string, std::string> tree_snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = testing::read_file(e.path());
  }
  return out;
}

}  // namespace

TEST_CASE("parse_capture_meta maps manifest fields") {
  auto p = parse_capture_meta("IMG_0001.JPG,B07,O,2021-03-14 09:15:05");
  CHECK(p.filename == "IMG_0001.JPG");
  CHECK(p.meta.burrow_id == "B07");
  CHECK(p.meta.view == View::Overhead);
  CHECK(format_local_time(p.meta.timestamp) == "2021-03-14 09:15:05");
  CHECK_FALSE(p.out_of_schedule);

  auto late = parse_capture_meta("IMG_0002.JPG,B07,O,2021-03-14 22:00:00");
  CHECK(late.out_of_schedule);

  CHECK_THROWS_WITH_AS(parse_capture_meta("IMG_0003.JPG,B07,,2021-03-14 09:15:10", 4),
                       doctest::Contains("missing view"), ParseError);
  CHECK_THROWS_AS(parse_capture_meta("IMG_0004.JPG,B-7,O,2021-03-14 09:15:10"), ParseError);
  CHECK_THROWS_AS(parse_capture_meta("IMG_0005.JPG,B07,X,2021-03-14 09:15:10"), ParseError);
  CHECK_THROWS_AS(parse_capture_meta("IMG_0006.JPG,B07,F,"), ParseError);
}

TEST_CASE("canonical names") {
  auto t = testing::at("2021-03-14 09:15:05");
  CHECK(canonical_name({"B07", View::Overhead, t}) == "B07-O-20210314-091505.jpg");
  CHECK(canonical_name({"B07", View::Front, t}) == "B07-F-20210314-091505.jpg");
  CHECK(canonical_name({"B07", View::Overhead, t + std::chrono::seconds(1)}) !=
        canonical_name({"B07", View::Overhead, t}));
  auto back = parse_canonical_name("B07-O-20210314-091505.jpg");
  REQUIRE(back);
  CHECK(*back == CaptureMeta{"B07", View::Overhead, t});
  CHECK_FALSE(parse_canonical_name("IMG_0001.JPG"));
  CHECK_FALSE(parse_canonical_name("B07-O-20210314-0915.jpg"));
}

TEST_CASE("canonical_name is injective and invertible over random metas") {
  std::mt19937_64 rng(11);
  const std::vector<std::string> burrows{"B1", "B07", "B7", "X12", "b07"};
  std::map<std::string, CaptureMeta> seen;
  auto base = testing::at("2020-01-01 00:00:00");
  for (int i = 0; i < 20000; ++i) {
    CaptureMeta m{burrows[rng() % burrows.size()], rng() % 2 ? View::Overhead : View::Front,
                  base + std::chrono::seconds(rng() % (86400ull * 800))};
    auto name = canonical_name(m);
    auto [it, inserted] = seen.emplace(name, m);
    if (!inserted) CHECK(it->second == m);
    CHECK(parse_canonical_name(name) == m);
  }
}

TEST_CASE("manifest provider isolates bad lines") {
  std::istringstream in(
      "filename,burrow,view,timestamp\n"
      "IMG_0001.JPG,B07,O,2021-03-14 09:15:05\n"
      "IMG_0003.JPG,B07,,2021-03-14 09:15:10\n"
      "IMG_0004.JPG,B07\n");
  ManifestProvider provider;
  provider.load(in);
  CHECK(provider.size() == 3);
  CHECK(provider.lookup("card/IMG_0001.JPG").meta.burrow_id == "B07");
  CHECK_THROWS_WITH_AS(provider.lookup("IMG_0003.JPG"), doctest::Contains("missing view"), ParseError);
  CHECK_THROWS_WITH_AS(provider.lookup("IMG_0003.JPG"), doctest::Contains("line 3"), ParseError);
  CHECK_THROWS_AS(provider.lookup("IMG_0004.JPG"), ParseError);
  CHECK_THROWS_AS(provider.lookup("IMG_9999.JPG"), NotFoundError);
}

TEST_CASE("ingest copies into the archive tree and is idempotent") {
  TempDir tmp;
  auto card = testing::make_card(tmp / "card", "B07", 'O', "2021-03-14 09:00:00", 30);
  auto provider = ManifestProvider::from_file(card / "manifest.csv");
  auto archive = tmp / "archive";

  auto first = ingest_card(card, archive, provider);
  CHECK(first.copied == 30);
  CHECK(first.errors.empty());
  CHECK(first.examined() == 30);
  CHECK(first.per_recording.at("B07-O-20210314") == 30);
  auto dest = archive / "B07" / "O" / "20210314" / "B07-O-20210314-090005.jpg";
  REQUIRE(fs::exists(dest));
  CHECK(testing::read_file(dest) == testing::read_file(card / "IMG_00001.JPG"));
  auto snapshot = tree_snapshot(archive);

  auto second = ingest_card(card, archive, provider);
  CHECK(second.copied == 0);
  CHECK(second.skipped_duplicates == 30);
  CHECK(second.errors.empty());
  CHECK(tree_snapshot(archive) == snapshot);
  CHECK(second.rate > 0);
}

TEST_CASE("ingest isolates a truncated file") {
  TempDir tmp;
  auto card = testing::make_card(tmp / "card", "B07", 'F', "2021-03-14 09:00:00", 100);
  auto bytes = testing::read_file(card / "IMG_00042.JPG");
  testing::write_file(card / "IMG_00042.JPG", bytes.substr(0, bytes.size() / 2));
  auto provider = ManifestProvider::from_file(card / "manifest.csv");
  auto report = ingest_card(card, tmp / "archive", provider);
  CHECK(report.copied == 99);
  REQUIRE(report.errors.size() == 1);
  CHECK(report.errors[0].source.filename() == "IMG_00042.JPG");
  CHECK(report.examined() == 100);
}

TEST_CASE("ingest reports collisions and metadata failures without aborting") {
  TempDir tmp;
  auto card = testing::make_card(tmp / "card", "B07", 'O', "2021-03-14 19:59:55", 4);
  {
    std::ofstream manifest(card / "manifest.csv", std::ios::app);
    manifest << "IMG_09999.JPG,B07,,2021-03-14 10:00:00\n";
  }
  testing::write_file(card / "IMG_09999.JPG", testing::jpeg_bytes(8, 8, 1));
  testing::write_file(card / "stray.jpg", testing::jpeg_bytes(8, 8, 2));
  testing::write_file(card / "notes.txt", "ignored");

  auto archive = tmp / "archive";
  auto clash = archive / "B07" / "O" / "20210314" / "B07-O-20210314-195955.jpg";
  testing::write_file(clash, "different bytes");

  auto provider = ManifestProvider::from_file(card / "manifest.csv");
  auto report = ingest_card(card, archive, provider);
  CHECK(report.examined() == 6);
  CHECK(report.copied == 3);
  CHECK(report.errors.size() == 3);
  CHECK(report.out_of_schedule == 2);  // 20:00:05 and 20:00:10
  CHECK(testing::read_file(clash) == "different bytes");
  std::set<std::string> reasons;
  for (const auto& e : report.errors) reasons.insert(e.reason);
  bool collision = false;
  for (const auto& r : reasons) collision = collision || r.find("collision") != std::string::npos;
  CHECK(collision);
}

TEST_CASE("conservation holds for random card contents") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    TempDir tmp;
    std::size_t n = 5 + rng() % 20;
    auto card = testing::make_card(tmp / "card", "B1", 'O', "2021-05-01 08:00:00", n, 16, 16, rng());
    std::size_t damaged = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (rng() % 4 == 0) {
        char name[32];
        std::snprintf(name, sizeof name, "IMG_%05zu.JPG", i);
        testing::write_file(card / name, "junk");
        ++damaged;
      }
    }
    auto provider = ManifestProvider::from_file(card / "manifest.csv");
    auto report = ingest_card(card, tmp / "archive", provider, {1 + rng() % 3});
    CHECK(report.examined() == n);
    CHECK(report.errors.size() == damaged);
    CHECK(report.copied == n - damaged);
  }
}

TEST_CASE("parallel ingestion of two cards equals sequential ingestion") {
  TempDir tmp;
  auto a = testing::make_card(tmp / "a", "B1", 'O', "2021-05-01 08:00:00", 40, 16, 16, 1);
  auto b = testing::make_card(tmp / "b", "B2", 'F', "2021-05-01 08:00:00", 40, 16, 16, 2);
  auto pa = ManifestProvider::from_file(a / "manifest.csv");
  auto pb = ManifestProvider::from_file(b / "manifest.csv");

  ingest_card(a, tmp / "seq", pa);
  ingest_card(b, tmp / "seq", pb);

  IngestReport ra, rb;
  {
    std::jthread ta([&] { ra = ingest_card(a, tmp / "par", pa, {2}); });
    std::jthread tb([&] { rb = ingest_card(b, tmp / "par", pb, {2}); });
  }
  CHECK(ra.copied == 40);
  CHECK(rb.copied == 40);
  CHECK(tree_snapshot(tmp / "par") == tree_snapshot(tmp / "seq"));

  // The same card twice at once: every name lands once, the rest are duplicates.
  IngestReport r1, r2;
  {
    std::jthread t1([&] { r1 = ingest_card(a, tmp / "race", pa, {2}); });
    std::jthread t2([&] { r2 = ingest_card(a, tmp / "race", pa, {2}); });
  }
  CHECK(r1.copied + r2.copied == 40);
  CHECK(r1.skipped_duplicates + r2.skipped_duplicates == 40);
  CHECK(r1.errors.empty());
  CHECK(r2.errors.empty());
}

TEST_CASE("card listing skips hidden files and non-images") {
  TempDir tmp;
  testing::write_file(tmp / "card" / "DCIM" / "b.JPG", "x");
  testing::write_file(tmp / "card" / "a.jpeg", "x");
  testing::write_file(tmp / "card" / ".hidden.jpg", "x");
  testing::write_file(tmp / "card" / "c.png", "x");
  auto files = list_card_images(tmp / "card");
  REQUIRE(files.size() == 2);
  CHECK(files[0].filename() == "b.JPG");
  CHECK(files[1].filename() == "a.jpeg");
}
