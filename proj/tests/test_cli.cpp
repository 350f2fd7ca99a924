#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <random>

#include "doctest.h"
#include "support.hpp"

#include "trapline/reid/library.hpp"

namespace {

struct Outcome {
  int status = -1;
  std::string output;
};

// Runs the binary through the shell, capturing stdout and stderr together.
Outcome run(const std::string& args, const std::string& env = {}) {
  std::string command = env + (env.empty() ? "" : " ") + "'" + std::string(TRAPLINE_CLI) + "' " + args + " 2>&1";
  Outcome out;
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe);
  std::array<char, 4096> buf;
  while (auto n = std::fread(buf.data(), 1, buf.size(), pipe)) out.output.append(buf.data(), n);
  const int raw = pclose(pipe);
  out.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return out;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("schedule reports pass and fail through the exit status") {
  auto ok = run("schedule");
  CHECK(ok.status == 0);
  CHECK(ok.output.find("makespan      22.49 h (deadline 48.00 h) PASS") != std::string::npos);

  auto heavy = run("schedule --burrows 40");
  CHECK(heavy.status == 1);
  CHECK(heavy.output.find("FAIL") != std::string::npos);

  CHECK(run("schedule --burrows 40 --compression-workers 4 --segmentation-workers 2").status == 0);
  CHECK(run("schedule --copy-rate 0").status == 2);
}

TEST_CASE("config file and environment feed defaults, flags override") {
  testing::TempDir tmp;
  testing::write_file(tmp / "heavy.ini", "[schedule]\nburrows = 40\n");
  CHECK(run("--config " + q(tmp / "heavy.ini") + " schedule").status == 1);
  CHECK(run("schedule", "TRAPLINE_CONFIG=" + q(tmp / "heavy.ini")).status == 1);
  CHECK(run("--config=" + q(tmp / "heavy.ini") + " schedule --burrows 12").status == 0);

  testing::write_file(tmp / "bad.ini", "[schedule]\nburows = 40\n");
  auto bad = run("--config " + q(tmp / "bad.ini") + " schedule");
  CHECK(bad.status == 2);
  CHECK(bad.output.find("schedule.burows") != std::string::npos);
}

TEST_CASE("usage errors") {
  CHECK(run("").status != 0);
  CHECK(run("frobnicate").status != 0);
  CHECK(run("evaluate --pred x.csv").status != 0);
  CHECK(run("--help").output.find("schedule") != std::string::npos);
}

TEST_CASE("evaluate prints totals and the per-recording CSV") {
  testing::TempDir tmp;
  const std::string header = "recording_id,start_frame,end_frame,source,animal_ids\n";
  testing::write_file(tmp / "pred.csv", header + "B1-O-20210314,10,20,Auto,\nB1-O-20210314,40,45,Auto,\n");
  testing::write_file(tmp / "truth.csv", header + "B1-O-20210314,15,30,Human,\nB1-O-20210314,60,70,Human,\n");
  auto r = run("evaluate --pred " + q(tmp / "pred.csv") + " --truth " + q(tmp / "truth.csv"));
  CHECK(r.status == 0);
  CHECK(r.output.find("tp 1  fp 1  fn 1  precision 0.500  recall 0.500") != std::string::npos);
  CHECK(r.output.find("B1-O-20210314,1,1,1,0.5000,0.5000,0.5000") != std::string::npos);

  CHECK(run("evaluate --pred " + q(tmp / "missing.csv") + " --truth " + q(tmp / "truth.csv")).status == 2);
}

TEST_CASE("ingest, segment, report from the command line") {
  testing::TempDir tmp;
  testing::make_card(tmp / "card", "B07", 'O', "2021-03-14 09:00:00", 30, 16, 16);
  const auto archive = tmp / "archive";
  auto ingest = run("ingest --source " + q(tmp / "card") + " --archive " + q(archive));
  CHECK(ingest.status == 0);
  CHECK(ingest.output.find("copied 30") != std::string::npos);
  CHECK(run("ingest --source " + q(tmp / "card") + " --archive " + q(archive)).output.find("copied 0") !=
        std::string::npos);

  testing::write_file(tmp / "seg.ini", "[segment]\npresence = 0.9\nseed = 3\n");
  auto seg = run("--config " + q(tmp / "seg.ini") + " segment --recording B07-O-20210314 --archive " + q(archive) +
                 " --out " + q(tmp / "segments") + " --store " + q(tmp / "store") + " --import");
  CHECK(seg.status == 0);
  CHECK(seg.output.find("30/30 frames scanned") != std::string::npos);
  CHECK(seg.output.find(" 0 segment(s)") == std::string::npos);
  CHECK(fs::exists(tmp / "segments" / "B07-O-20210314.segments.csv"));

  auto report = run("report annotations --store " + q(tmp / "store"));
  CHECK(report.status == 0);
  CHECK(report.output.starts_with("annotation_id,recording_id,start_frame,end_frame,event,animal_id,author,modified_utc\n"));
  CHECK(report.output.find("animal-present") != std::string::npos);

  auto other = run("report annotations --store " + q(tmp / "store") + " --burrow B99 --out " + q(tmp / "r.csv"));
  CHECK(other.status == 0);
  CHECK(testing::read_file(tmp / "r.csv") ==
        "annotation_id,recording_id,start_frame,end_frame,event,animal_id,author,modified_utc\n");

  CHECK(run("report status --store " + q(tmp / "store")).output.starts_with("burrow_id,date,stage,"));
  CHECK(run("report nonsense --store " + q(tmp / "store")).status != 0);
  CHECK(run("segment --recording B08-O-20210314 --archive " + q(archive)).status == 2);
}

TEST_CASE("library pruning from the command line") {
  testing::TempDir tmp;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> noise(0, 1e-3);
  trapline::reid::ReferenceLibrary lib, validation;
  for (int i = 0; i < 4; ++i) {
    trapline::reid::Embedding centre = trapline::reid::Embedding::Zero();
    centre[i] = 10;
    for (int d = 0; d < 5; ++d) {
      trapline::reid::Embedding e = centre;
      for (int k = 0; k < e.size(); ++k) e[k] += noise(rng);
      lib.add("T" + std::to_string(i), e, "img" + std::to_string(d));
    }
    validation.add("T" + std::to_string(i), centre * 0.9, "v");
  }
  lib.write_csv_file(tmp / "lib.csv");
  validation.write_csv_file(tmp / "val.csv");
  auto r = run("reid --library " + q(tmp / "lib.csv") + " --prune " + q(tmp / "val.csv") + " --seed 7 --out " +
               q(tmp / "pruned.csv"));
  CHECK(r.status == 0);
  CHECK(r.output.find("pruned 16 of 20") != std::string::npos);
  CHECK(trapline::reid::ReferenceLibrary::read_csv_file(tmp / "pruned.csv").size() == 4);
  CHECK(run("reid --library " + q(tmp / "lib.csv") + " --prune " + q(tmp / "val.csv")).status == 2);
}
