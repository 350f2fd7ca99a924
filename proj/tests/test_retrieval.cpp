#include <random>
#include <sstream>

#include <opencv2/core.hpp>

#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"

#include "trapline/error.hpp"
#include "trapline/reid/embedder.hpp"
#include "trapline/reid/retrieval.hpp"

using namespace trapline;
using namespace trapline::reid;

namespace {

Embedding random_embedding(std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Embedding e;
  for (int i = 0; i < kEmbeddingDim; ++i) e[i] = n(rng);
  return e;
}

Embedding unit(int axis, double length = 1.0) {
  Embedding e = Embedding::Zero();
  e[axis] = length;
  return e;
}

ReferenceLibrary random_library(std::mt19937_64& rng, std::size_t individuals, std::size_t per) {
  ReferenceLibrary lib;
  for (std::size_t i = 0; i < individuals; ++i) {
    for (std::size_t j = 0; j < per; ++j) lib.add("T" + std::to_string(i), random_embedding(rng));
  }
  return lib;
}

std::vector<std::pair<std::string, double>> pairs(const Prediction& p) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& r : p) out.emplace_back(r.individual_id, r.distance);
  return out;
}

// Each individual: one embedding at its centre and nine near-copies of a
// point halfway to the origin, which add nothing for validation queries.
ReferenceLibrary redundant_library(std::mt19937_64& rng, std::size_t individuals) {
  ReferenceLibrary lib;
  for (std::size_t i = 0; i < individuals; ++i) {
    const std::string id = "T" + std::to_string(i);
    const Embedding centre = unit(static_cast<int>(i), 10.0);
    lib.add(id, centre, id + "-ref");
    for (int d = 0; d < 9; ++d) lib.add(id, centre * 0.5 + random_embedding(rng, 1e-3), id + "-dup" + std::to_string(d));
  }
  return lib;
}

std::vector<ValidationItem> queries_near_centres(std::mt19937_64& rng, std::size_t individuals, std::size_t per) {
  std::vector<ValidationItem> items;
  for (std::size_t i = 0; i < individuals; ++i) {
    for (std::size_t q = 0; q < per; ++q) {
      items.push_back({"T" + std::to_string(i), {unit(static_cast<int>(i), 10.0) + random_embedding(rng, 0.3)}});
    }
  }
  return items;
}

std::string csv_of(const ReferenceLibrary& lib) {
  std::ostringstream out;
  lib.write_csv(out);
  return out.str();
}

}  // namespace

TEST_CASE("library validates ids and embeddings and keeps the last embedding") {
  ReferenceLibrary lib;
  CHECK_THROWS_AS(lib.add("", Embedding::Zero()), ValidationError);
  CHECK_THROWS_AS(lib.add("a,b", Embedding::Zero()), ValidationError);
  Embedding bad = Embedding::Zero();
  bad[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(lib.add("T1", bad), ValidationError);

  lib.add("T1", unit(0));
  lib.add("T1", unit(1));
  CHECK(lib.size() == 2);
  CHECK(lib.remove("T1", 0));
  CHECK_FALSE(lib.remove("T1", 0));
  CHECK_FALSE(lib.remove("T9", 0));
  CHECK(lib.size() == 1);
  CHECK(lib.individuals() == 1);
}

TEST_CASE("library CSV round trip is exact") {
  std::mt19937_64 rng(1);
  auto lib = random_library(rng, 4, 3);
  lib.add("T\"q", random_embedding(rng), "ref,with comma");
  std::istringstream in(csv_of(lib));
  CHECK(ReferenceLibrary::read_csv(in) == lib);

  std::istringstream short_row("individual_id,image_ref,e00\nT1,x,1\n");
  CHECK_THROWS_AS(ReferenceLibrary::read_csv(short_row), ParseError);
  CHECK(embedding_columns().front() == "e00");
  CHECK(embedding_columns().back() == "e31");
}

TEST_CASE("ranking matches the exhaustive reference") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    auto lib = random_library(rng, 1 + rng() % 12, 1 + rng() % 5);
    std::vector<Embedding> queries{random_embedding(rng)};
    if (rng() % 2) queries.push_back(random_embedding(rng));
    const std::size_t k = 1 + rng() % 8;
    auto got = rank_individuals(LibraryIndex(lib), queries, k);
    auto expect = oracle::rank(lib, queries, k);
    REQUIRE(got.size() == expect.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].individual_id == expect[i].first);
      CHECK(got[i].distance == doctest::Approx(expect[i].second).epsilon(1e-12));
    }
  }
}

TEST_CASE("an individual's score is the minimum over its embeddings") {
  ReferenceLibrary lib;
  lib.add("A", unit(0, 5));
  lib.add("A", unit(1, 1));
  lib.add("B", unit(2, 2));
  std::vector<Embedding> q{Embedding::Zero()};
  auto r = rank_individuals(LibraryIndex(lib), q, 5);
  CHECK(pairs(r) == std::vector<std::pair<std::string, double>>{{"A", 1.0}, {"B", 2.0}});

  // Equal distances fall back to id order.
  ReferenceLibrary tie;
  tie.add("Z", unit(0));
  tie.add("M", unit(1));
  auto t = rank_individuals(LibraryIndex(tie), q, 5);
  CHECK(t[0].individual_id == "M");
  CHECK(t[1].individual_id == "Z");
}

TEST_CASE("cosine distance") {
  CHECK(distance(unit(0), unit(0, 3), Metric::Cosine) == doctest::Approx(0));
  CHECK(distance(unit(0), unit(1), Metric::Cosine) == doctest::Approx(1));
  CHECK(distance(unit(0), Embedding::Zero().eval(), Metric::Cosine) == 1.0);
  CHECK(parse_metric("cosine") == Metric::Cosine);
  CHECK(parse_metric("euclidean") == Metric::Euclidean);
  CHECK_THROWS_AS(parse_metric("manhattan"), ParseError);

  ReferenceLibrary lib;
  lib.add("far", unit(0, 100));
  lib.add("near", unit(1, 0.5));
  std::vector<Embedding> q{unit(0, 1)};
  CHECK(rank_individuals(LibraryIndex(lib), q, 1, Metric::Cosine)[0].individual_id == "far");
  CHECK(rank_individuals(LibraryIndex(lib), q, 1, Metric::Euclidean)[0].individual_id == "near");
}

TEST_CASE("a query embeds both orientations and keeps the closer") {
  cv::Mat image(4, 4, CV_8UC3, cv::Scalar::all(0));
  ReferenceLibrary lib;
  for (int i = 0; i < 7; ++i) lib.add("T" + std::to_string(i), unit(i, 10));
  lib.add("T6", unit(6, 0.1));

  // Upright view lands near T2 but the half-turned view lands on T6.
  CsvEmbedder embedder({{"q", unit(2, 9)}, {"q@180", unit(6, 0.2)}});
  auto top = query_topk(lib, image, embedder, kDefaultTopK, Metric::Euclidean, "q");
  REQUIRE(top.size() == kDefaultTopK);
  CHECK(top[0].individual_id == "T6");
  CHECK(top[0].distance == doctest::Approx(0.1));
  CHECK(top[1].individual_id == "T2");

  CsvEmbedder upright_only({{"q", unit(2, 9)}, {"q@180", unit(2, 9)}});
  CHECK(query_topk(lib, image, upright_only, 1, Metric::Euclidean, "q")[0].individual_id == "T2");

  CHECK_THROWS_AS(query_topk(ReferenceLibrary{}, image, embedder, 5, Metric::Euclidean, "q"), ValidationError);
  CHECK_THROWS_AS(query_topk(lib, image, embedder, 0, Metric::Euclidean, "q"), ValidationError);
  CHECK_THROWS_AS(query_topk(lib, image, embedder, 5, Metric::Euclidean, "unknown"), ProviderError);
}

TEST_CASE("synthetic embedder is a deterministic function of pixels") {
  cv::Mat a(8, 8, CV_8UC3, cv::Scalar(1, 2, 3)), b = a.clone(), c(8, 8, CV_8UC3, cv::Scalar(3, 2, 1));
  SyntheticEmbedder e;
  CHECK(e.embed(a, "x") == e.embed(b, "y"));
  CHECK(e.embed(a, "x") != e.embed(c, "x"));
  CHECK(e.embed(a, "x").cwiseAbs().maxCoeff() <= 1.0);
}

TEST_CASE("pruning drops redundant embeddings without losing accuracy") {
  std::mt19937_64 rng(8);
  auto lib = redundant_library(rng, 10);
  auto validation = queries_near_centres(rng, 10, 4);
  auto result = prune_library(lib, validation, 42);
  CHECK(result.initial_accuracy == 1.0);
  CHECK(result.final_accuracy >= result.initial_accuracy);
  CHECK(result.removed >= lib.size() / 2);
  CHECK(result.library.size() + result.removed == lib.size());
  CHECK(top1_accuracy(result.library, validation) == result.final_accuracy);
  for (const auto& [id, entries] : lib.entries()) {
    REQUIRE(result.library.contains(id));
    CHECK(result.library.entries().at(id).size() >= 1);
  }
  for (std::size_t i = 1; i < result.accuracy_trace.size(); ++i) {
    CHECK(result.accuracy_trace[i] >= result.accuracy_trace[i - 1]);
  }

  auto again = prune_library(lib, validation, 42);
  CHECK(csv_of(again.library) == csv_of(result.library));
}

TEST_CASE("pruning removes an exact duplicate") {
  ReferenceLibrary lib;
  lib.add("A", unit(0, 4), "a1");
  lib.add("A", unit(0, 4), "a2");
  lib.add("B", unit(1, 4), "b1");
  std::vector<ValidationItem> v{{"A", {unit(0, 3.5)}}, {"B", {unit(1, 3.5)}}};
  auto r = prune_library(lib, v, 1);
  CHECK(r.removed == 1);
  CHECK(r.library.entries().at("A").size() == 1);
  CHECK(r.final_accuracy == 1.0);
}

TEST_CASE("pruning never lowers accuracy on random libraries") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    auto lib = random_library(rng, 2 + rng() % 5, 1 + rng() % 6);
    std::vector<ValidationItem> v;
    for (const auto& [id, entries] : lib.entries()) {
      v.push_back({id, {entries.front().embedding + random_embedding(rng, 0.8)}});
    }
    auto r = prune_library(lib, v, rng());
    CHECK(r.final_accuracy >= r.initial_accuracy);
    CHECK(r.library.individuals() == lib.individuals());
  }
  ReferenceLibrary lib;
  lib.add("A", unit(0));
  CHECK_THROWS_AS(prune_library(lib, {}, 1), ValidationError);
  std::vector<ValidationItem> stray{{"Q", {unit(0)}}};
  CHECK_THROWS_AS(prune_library(lib, stray, 1), ValidationError);
}

TEST_CASE("validation items pair half-turned views with their base image") {
  ReferenceLibrary labelled;
  labelled.add("A", unit(0), "img1");
  labelled.add("A", unit(1), "img1@180");
  labelled.add("A", unit(2), "img2");
  labelled.add("B", unit(3));
  auto items = validation_items(labelled);
  REQUIRE(items.size() == 3);
  CHECK(items[0].label == "A");
  CHECK(items[0].views.size() == 2);
  CHECK(items[1].views.size() == 1);
  CHECK(items[2].label == "B");
}

TEST_CASE("segment frame sampling") {
  CHECK(sample_segment_frames({"r", 0, 99, SegmentSource::Auto, {}}) == std::vector<std::size_t>{0, 24, 49, 74, 99});
  CHECK(sample_segment_frames({"r", 10, 12, SegmentSource::Auto, {}}) == std::vector<std::size_t>{10, 11, 12});
  CHECK(sample_segment_frames({"r", 0, 100, SegmentSource::Auto, {}}, 1) == std::vector<std::size_t>{50});
  CHECK(sample_segment_frames({"r", 0, 100, SegmentSource::Auto, {}}, 0).empty());

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    std::size_t s = rng() % 1000, e = s + rng() % 300, n = 1 + rng() % 8;
    auto f = sample_segment_frames({"r", s, e, SegmentSource::Auto, {}}, n);
    CHECK(f.size() == std::min(n, e - s + 1));
    for (std::size_t i = 0; i < f.size(); ++i) {
      CHECK(f[i] >= s);
      CHECK(f[i] <= e);
      if (i > 0) CHECK(f[i] > f[i - 1]);
    }
  }
}
