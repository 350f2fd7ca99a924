#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"

#include "trapline/evalkit.hpp"

using namespace trapline;
using namespace trapline::eval;

namespace {

Segment seg(std::size_t s, std::size_t e, const std::string& rec = "B1-O-20210314") {
  return {rec, s, e, SegmentSource::Auto, {}};
}

std::vector<Segment> random_segments(std::mt19937_64& rng, std::size_t n, std::size_t horizon) {
  std::vector<Segment> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t s = rng() % horizon;
    out.push_back(seg(s, s + rng() % 20));
  }
  return out;
}

int percent(const Metric& m) { return static_cast<int>(std::lround(*m * 100.0)); }

reid::Prediction ranked(std::initializer_list<const char*> ids) {
  reid::Prediction p;
  double d = 0;
  for (const char* id : ids) p.push_back({id, d += 1});
  return p;
}

}  // namespace

TEST_CASE("overlap examples") {
  CHECK(match_segments({seg(10, 20)}, {seg(15, 30)}) == ConfusionCounts{1, 0, 0});
  CHECK(match_segments({seg(10, 20)}, {seg(21, 30)}) == ConfusionCounts{0, 1, 1});
  CHECK(match_segments({seg(0, 5), seg(6, 10)}, {seg(0, 10)}) == ConfusionCounts{2, 0, 0});
  CHECK(match_segments({seg(20, 20)}, {seg(20, 20)}) == ConfusionCounts{1, 0, 0});
  CHECK(match_segments({}, {seg(1, 2)}) == ConfusionCounts{0, 0, 1});
  CHECK(match_segments({seg(1, 2)}, {}) == ConfusionCounts{0, 1, 0});
}

TEST_CASE("published count rows round to their printed percentages") {
  struct Row {
    ConfusionCounts counts;
    int precision, recall;
  };
  const Row rows[] = {{{135, 5, 10}, 96, 93}, {{135, 5, 10}, 96, 93}, {{138, 2, 7}, 99, 95}, {{130, 56, 15}, 70, 90}};
  for (const auto& r : rows) {
    auto pr = precision_recall(r.counts);
    CHECK(percent(pr.precision) == r.precision);
    CHECK(percent(pr.recall) == r.recall);
  }
  auto g1 = precision_recall({135, 5, 10});
  CHECK(*g1.precision == doctest::Approx(135.0 / 140));
  CHECK(*g1.recall == doctest::Approx(135.0 / 145));
  CHECK(*g1.f1 == doctest::Approx(2 * 135.0 / (2 * 135 + 5 + 10)));
}

TEST_CASE("zero denominators stay undefined") {
  auto empty = precision_recall({0, 0, 0});
  CHECK_FALSE(empty.precision);
  CHECK_FALSE(empty.recall);
  CHECK_FALSE(empty.f1);
  auto no_pred = precision_recall({0, 0, 4});
  CHECK_FALSE(no_pred.precision);
  CHECK(*no_pred.recall == 0.0);
  auto miss = precision_recall({0, 3, 4});
  CHECK(*miss.f1 == 0.0);
  CHECK(format_metric(std::nullopt) == "undefined");
  CHECK(format_metric(0.96428, 3) == "0.964");
}

TEST_CASE("matching agrees with the double loop on random instances") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t horizon = 1 + rng() % 300;
    auto predicted = random_segments(rng, rng() % 12, horizon);
    auto truth = random_segments(rng, rng() % 12, horizon);
    auto got = match_segments(predicted, truth);
    REQUIRE(got == oracle::match(predicted, truth));
    CHECK(got.tp + got.fp == predicted.size());
    CHECK(got.fn <= truth.size());
    auto self = match_segments(truth, truth);
    CHECK(self == ConfusionCounts{truth.size(), 0, 0});
  }
}

TEST_CASE("top-k accuracy") {
  std::vector<std::pair<std::string, reid::Prediction>> all_right{{"A", ranked({"A", "B"})}, {"B", ranked({"B"})}};
  CHECK(*topk_accuracy(all_right, 1) == 1.0);
  CHECK(*topk_accuracy(all_right, 5) == 1.0);

  std::vector<std::pair<std::string, reid::Prediction>> ten;
  for (int i = 0; i < 10; ++i) ten.push_back({"T", i < 7 ? ranked({"T", "U"}) : ranked({"U", "V", "T"})});
  CHECK(*topk_accuracy(ten, 1) == doctest::Approx(0.7));
  CHECK(*topk_accuracy(ten, 2) == doctest::Approx(0.7));
  CHECK(*topk_accuracy(ten, 3) == doctest::Approx(1.0));
  CHECK(*topk_accuracy(ten, 100) == doctest::Approx(1.0));
  CHECK_FALSE(topk_accuracy({}, 5));

  std::mt19937_64 rng(4);
  const std::vector<std::string> ids{"A", "B", "C", "D", "E", "F"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::pair<std::string, reid::Prediction>> preds;
    for (std::size_t q = 1 + rng() % 10; q > 0; --q) {
      auto order = ids;
      std::shuffle(order.begin(), order.end(), rng);
      reid::Prediction p;
      for (std::size_t i = 0; i < rng() % 6; ++i) p.push_back({order[i], double(i)});
      preds.push_back({ids[rng() % ids.size()], p});
    }
    double previous = 0;
    for (std::size_t k = 1; k <= 7; ++k) {
      double a = *topk_accuracy(preds, k);
      CHECK(a >= previous);
      previous = a;
    }
  }
}

TEST_CASE("per-recording evaluation and CSV") {
  std::vector<Segment> predicted{seg(0, 5, "R1"), seg(50, 60, "R1"), seg(3, 4, "R2")};
  std::vector<Segment> truth{seg(4, 9, "R1"), seg(0, 1, "R3")};
  auto rows = evaluate_recordings(predicted, truth);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].recording_id == "R1");
  CHECK(rows[0].counts == ConfusionCounts{1, 1, 0});
  CHECK(rows[1].counts == ConfusionCounts{0, 1, 0});
  CHECK(rows[2].counts == ConfusionCounts{0, 0, 1});

  std::ostringstream out;
  write_evaluation_csv(out, rows);
  CHECK(out.str() ==
        "recording_id,tp,fp,fn,precision,recall,f1\n"
        "R1,1,1,0,0.5000,1.0000,0.6667\n"
        "R2,0,1,0,0.0000,undefined,undefined\n"
        "R3,0,0,1,undefined,0.0000,undefined\n");
}
