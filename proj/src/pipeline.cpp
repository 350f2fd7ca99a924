#include "trapline/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "trapline/annotation/store.hpp"
#include "trapline/capture.hpp"
#include "trapline/detection_provider.hpp"
#include "trapline/error.hpp"
#include "trapline/parallel.hpp"
#include "trapline/segmenter.hpp"
#include "trapline/videopack.hpp"

namespace fs = std::filesystem;

namespace trapline {

std::string_view to_string(StageOutcome outcome) {
  switch (outcome) {
    case StageOutcome::Done: return "done";
    case StageOutcome::NoOp: return "no-op";
    case StageOutcome::Failed: return "failed";
  }
  return "?";
}

std::size_t PipelineReport::failures() const {
  auto n = static_cast<std::size_t>(std::count_if(stages.begin(), stages.end(), [](const auto& s) {
    return s.outcome == StageOutcome::Failed;
  }));
  for (const auto& c : cards) n += !c.failure.empty();
  return n;
}

std::vector<std::pair<std::string, Date>> archived_days(const fs::path& archive) {
  std::set<std::pair<std::string, Date>> days;
  std::error_code ec;
  if (!fs::is_directory(archive, ec)) return {};
  for (const auto& burrow : fs::directory_iterator(archive)) {
    if (!burrow.is_directory() || !valid_burrow_id(burrow.path().filename().string())) continue;
    for (const auto& view : fs::directory_iterator(burrow.path())) {
      if (!view.is_directory()) continue;
      for (const auto& day : fs::directory_iterator(view.path())) {
        if (!day.is_directory()) continue;
        try {
          auto id = RecordingId::parse(burrow.path().filename().string() + "-" +
                                       view.path().filename().string() + "-" + day.path().filename().string());
          days.emplace(id.burrow_id, id.date);
        } catch (const Error&) {
        }
      }
    }
  }
  return {days.begin(), days.end()};
}

namespace {

struct DayContext {
  const Config& config;
  StatusLog& status;
  annotation::AnnotationStore& store;
  const annotation::EventSchema& schema;
  const std::function<UtcTime()>& clock;
};

StageResult segment_day(const DayContext& ctx, const std::string& burrow, Date date) {
  StageResult r{burrow, date, Stage::Segmented, StageOutcome::Done, 0, {}};
  if (ctx.status.has(burrow, date, Stage::Segmented)) {
    r.outcome = StageOutcome::NoOp;
    return r;
  }
  const RecordingId id{burrow, View::Overhead, date};
  const auto rec = id.str();
  auto plan = plan_day(ctx.config.paths.archive, id);
  std::vector<FrameRef> frames;
  frames.reserve(plan.size());
  for (std::size_t i = 0; i < plan.size(); ++i) frames.push_back({i, plan.frames[i].path});

  std::vector<Segment> segments;
  if (!frames.empty()) {
    auto provider = make_detection_provider(ctx.config.segment, rec, frames.size());
    auto pass = run_detection_pass(frames, *provider, ctx.config.segment.workers);
    if (pass.scanned() == 0) {
      throw ProviderError("no frame could be scanned" +
                          (pass.diagnostics.empty() ? std::string() : ": " + pass.diagnostics.front()));
    }
    if (!pass.unscanned.empty()) {
      r.message = std::to_string(pass.unscanned.size()) + " frames unscanned";
    }
    segments = group_detections(pass.frames, ctx.config.segment.grouping, rec);

    const auto& dir = ctx.config.paths.segments;
    fs::create_directories(dir);
    {
      std::ofstream out(dir / (rec + ".detections.csv"));
      if (!out) throw Error("cannot write detections for " + rec);
      write_detections(out, pass.frames);
    }
    write_segments_file(dir / (rec + ".segments.csv"), segments);
    ctx.store.import_segments(segments, ctx.schema);
  }
  r.items = segments.size();
  ctx.status.record({burrow, date, Stage::Segmented, r.items, ctx.clock()});
  return r;
}

StageResult encode_day(const DayContext& ctx, const std::string& burrow, Date date) {
  StageResult r{burrow, date, Stage::Encoded, StageOutcome::Done, 0, {}};
  if (ctx.status.has(burrow, date, Stage::Encoded)) {
    r.outcome = StageOutcome::NoOp;
    return r;
  }
  const auto& e = ctx.config.encode;
  auto videos = encode_burrow_day(ctx.config.paths.archive, ctx.config.paths.videos, burrow, date, e.encoder,
                                  e.composite, e.fps);
  r.items = std::size_t(videos.overhead.has_value()) + videos.front.has_value() + videos.composite.has_value();
  ctx.status.record({burrow, date, Stage::Encoded, r.items, ctx.clock()});
  return r;
}

template <typename Fn>
StageResult isolated(const std::string& burrow, Date date, Stage stage, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return StageResult{burrow, date, stage, StageOutcome::Failed, 0, e.what()};
  }
}

}  // namespace

PipelineReport run_pipeline(const Config& config, const std::vector<CardSource>& cards,
                            const std::function<UtcTime()>& clock) {
  PipelineReport report;
  StatusLog status(config.paths.store / kStatusFile);

  std::map<std::pair<std::string, Date>, std::size_t> touched;
  for (const auto& card : cards) {
    CardResult result{card, {}, {}};
    try {
      fs::path manifest = !card.manifest.empty()           ? card.manifest
                          : !config.ingest.manifest.empty() ? config.ingest.manifest
                                                            : card.dir / "manifest.csv";
      auto provider = ManifestProvider::from_file(manifest);
      result.report = ingest_card(card.dir, config.paths.archive, provider, {config.ingest.workers});
      for (const auto& [rec, count] : result.report.per_recording) {
        auto id = RecordingId::parse(rec);
        touched[{id.burrow_id, id.date}] += count;
      }
    } catch (const std::exception& e) {
      result.failure = e.what();
    }
    report.cards.push_back(std::move(result));
  }
  if (cards.empty()) {
    for (const auto& day : archived_days(config.paths.archive)) touched.emplace(day, 0);
  }

  std::vector<std::pair<std::string, Date>> days;
  for (const auto& [day, count] : touched) {
    days.push_back(day);
    StageResult r{day.first, day.second, Stage::Ingested, StageOutcome::NoOp, count, {}};
    if (!cards.empty() && status.record({day.first, day.second, Stage::Ingested, count, clock()})) {
      r.outcome = StageOutcome::Done;
    }
    report.stages.push_back(r);
  }

  annotation::AnnotationStore store(config.paths.store);
  auto schema = config.paths.schema.empty() ? annotation::EventSchema::parse("")
                                            : annotation::EventSchema::load(config.paths.schema.string());
  const DayContext ctx{config, status, store, schema, clock};

  // Burrow-days run concurrently up to the encode worker count; segmentation
  // and encoding of one day depend only on ingest, not on each other.
  std::vector<std::array<StageResult, 2>> per_day(days.size());
  parallel_for(days.size(), config.encode.workers, [&](std::size_t i) {
    const auto& [burrow, date] = days[i];
    per_day[i][0] = isolated(burrow, date, Stage::Segmented, [&] { return segment_day(ctx, burrow, date); });
    per_day[i][1] = isolated(burrow, date, Stage::Encoded, [&] { return encode_day(ctx, burrow, date); });
  });

  // Ingest rows first, then each day's later stages.
  std::vector<StageResult> ordered;
  for (std::size_t i = 0; i < days.size(); ++i) {
    ordered.push_back(report.stages[i]);
    ordered.push_back(per_day[i][0]);
    ordered.push_back(per_day[i][1]);
  }
  report.stages = std::move(ordered);
  return report;
}

}  // namespace trapline
