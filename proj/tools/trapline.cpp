#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "trapline/annotation/service.hpp"
#include "trapline/annotation/store.hpp"
#include "trapline/annotation/suggestions.hpp"
#include "trapline/capture.hpp"
#include "trapline/config.hpp"
#include "trapline/error.hpp"
#include "trapline/evalkit.hpp"
#include "trapline/ingest.hpp"
#include "trapline/pipeline.hpp"
#include "trapline/reid/identify.hpp"
#include "trapline/reportgen.hpp"
#include "trapline/schedule.hpp"
#include "trapline/videopack.hpp"

namespace fs = std::filesystem;
using namespace trapline;

namespace {

// The config file must be known before options are bound, since flags
// override its values.
std::optional<fs::path> config_path(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    std::string_view arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return fs::path(argv[i + 1]);
    if (arg.starts_with("--config=")) return fs::path(std::string(arg.substr(9)));
  }
  if (const char* env = std::getenv("TRAPLINE_CONFIG"); env && *env) return fs::path(env);
  return std::nullopt;
}

void write_output(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream file(out);
  if (!file) throw Error("cannot write " + out);
  file << text;
}

Date date_option(const std::string& text) { return parse_compact_date(text); }

int cmd_ingest(const Config& cfg, const std::vector<fs::path>& sources) {
  std::size_t good = 0;
  std::size_t failed = 0;
  for (const auto& source : sources) {
    fs::path manifest = cfg.ingest.manifest.empty() ? source / "manifest.csv" : cfg.ingest.manifest;
    auto provider = ManifestProvider::from_file(manifest);
    auto report = ingest_card(source, cfg.paths.archive, provider, {cfg.ingest.workers});
    std::cout << source.string() << ": copied " << report.copied << ", duplicates "
              << report.skipped_duplicates << ", errors " << report.errors.size() << ", out-of-schedule "
              << report.out_of_schedule << ", " << std::fixed << std::setprecision(1) << report.rate
              << " images/s\n";
    for (const auto& e : report.errors) std::cerr << "  " << e.source.string() << ": " << e.reason << '\n';
    good += report.copied + report.skipped_duplicates;
    failed += report.errors.size();
  }
  return good == 0 && failed > 0 ? 1 : 0;
}

int cmd_encode(const Config& cfg, const std::string& burrow, const std::string& date, bool composite) {
  if (!encoder_available(cfg.encode.encoder)) {
    throw EncoderError("encoder '" + cfg.encode.encoder.binary + "' is not runnable");
  }
  auto videos = encode_burrow_day(cfg.paths.archive, cfg.paths.videos, burrow, date_option(date),
                                  cfg.encode.encoder, composite, cfg.encode.fps);
  auto show = [](const char* name, const std::optional<VideoAsset>& v) {
    if (!v) {
      std::cout << name << ": no images\n";
      return;
    }
    std::cout << name << ": " << v->path.string() << " (" << v->frames << " frames, " << v->width << "x"
              << v->height << ")\n";
  };
  show("overhead", videos.overhead);
  show("front", videos.front);
  if (composite) show("composite", videos.composite);
  std::cout << "encoded " << videos.encoded << " file(s)\n";
  return 0;
}

int cmd_segment(const Config& cfg, const std::string& recording, bool import) {
  auto id = RecordingId::parse(recording);
  auto plan = plan_day(cfg.paths.archive, id);
  if (plan.empty()) throw NotFoundError("no archived images for " + recording);
  std::vector<FrameRef> frames;
  for (std::size_t i = 0; i < plan.size(); ++i) frames.push_back({i, plan.frames[i].path});
  auto provider = make_detection_provider(cfg.segment, recording, frames.size());
  auto pass = run_detection_pass(frames, *provider, cfg.segment.workers);
  auto segments = group_detections(pass.frames, cfg.segment.grouping, recording);

  fs::create_directories(cfg.paths.segments);
  std::ofstream detections(cfg.paths.segments / (recording + ".detections.csv"));
  write_detections(detections, pass.frames);
  auto segments_file = cfg.paths.segments / (recording + ".segments.csv");
  write_segments_file(segments_file, segments);

  std::cout << recording << ": " << pass.scanned() << "/" << frames.size() << " frames scanned, "
            << segments.size() << " segment(s) -> " << segments_file.string() << '\n';
  for (const auto& d : pass.diagnostics) std::cerr << "  " << d << '\n';
  if (import) {
    annotation::AnnotationStore store(cfg.paths.store);
    auto schema = cfg.paths.schema.empty() ? annotation::EventSchema::parse("")
                                           : annotation::EventSchema::load(cfg.paths.schema.string());
    std::cout << "imported " << store.import_segments(segments, schema) << " draft segment(s)\n";
  }
  return pass.scanned() == 0 ? 1 : 0;
}

int cmd_prune(const Config& cfg, const fs::path& validation_file, std::uint64_t seed, const fs::path& out) {
  auto library = reid::ReferenceLibrary::read_csv_file(cfg.reid.library);
  auto validation = reid::validation_items(reid::ReferenceLibrary::read_csv_file(validation_file));
  auto result = reid::prune_library(library, validation, seed, cfg.reid.metric);
  result.library.write_csv_file(out);
  std::cout << "pruned " << result.removed << " of " << library.size() << " embeddings in " << result.passes
            << " pass(es); top-1 accuracy " << std::fixed << std::setprecision(3) << result.initial_accuracy
            << " -> " << result.final_accuracy << '\n';
  return 0;
}

int cmd_reid(const Config& cfg, const fs::path& segments_file, const fs::path& out) {
  auto library = reid::ReferenceLibrary::read_csv_file(cfg.reid.library);
  auto segments = read_segments_file(segments_file);
  auto embedder = make_embedder(cfg.reid);
  std::unique_ptr<reid::MaskProvider> masks;
  if (cfg.reid.masks.empty()) {
    masks = std::make_unique<reid::BoxEllipseMaskProvider>();
  } else {
    masks = std::make_unique<reid::DirectoryMaskProvider>(cfg.reid.masks);
  }

  std::map<std::string, EncodePlan> plans;
  std::map<std::string, std::map<std::size_t, FrameDetections>> detections;
  auto locate = [&](const std::string& rec, std::size_t index) -> fs::path {
    auto it = plans.find(rec);
    if (it == plans.end()) it = plans.emplace(rec, plan_day(cfg.paths.archive, RecordingId::parse(rec))).first;
    return index < it->second.size() ? it->second.frames[index].path : fs::path();
  };
  auto lookup = [&](const std::string& rec, std::size_t index) -> FrameDetections {
    auto it = detections.find(rec);
    if (it == detections.end()) {
      it = detections.emplace(rec, std::map<std::size_t, FrameDetections>{}).first;
      std::ifstream in(cfg.paths.segments / (rec + ".detections.csv"));
      if (!in) throw NotFoundError("no detections file for " + rec);
      for (auto& d : read_detections(in)) it->second[d.frame_index].push_back(std::move(d));
    }
    auto f = it->second.find(index);
    return f == it->second.end() ? FrameDetections{} : f->second;
  };

  reid::IdentifyOptions options;
  options.k = cfg.reid.k;
  options.frames_per_segment = cfg.reid.frames_per_segment;
  options.metric = cfg.reid.metric;
  options.threshold = cfg.segment.grouping.threshold;
  auto report = reid::identify_segments(library, segments, locate, lookup, *masks, *embedder, options);

  if (!out.parent_path().empty()) fs::create_directories(out.parent_path());
  std::ofstream file(out);
  if (!file) throw Error("cannot write " + out.string());
  reid::write_predictions(file, report.predictions);
  std::cout << report.predictions.size() << " prediction(s) for " << segments.size() << " segment(s) -> "
            << out.string() << '\n';
  for (const auto& w : report.warnings) std::cerr << "  " << w << '\n';
  return 0;
}

int cmd_evaluate(const fs::path& pred, const fs::path& truth, const std::string& out) {
  auto rows = eval::evaluate_recordings(read_segments_file(pred), read_segments_file(truth));
  eval::ConfusionCounts total;
  for (const auto& r : rows) total += r.counts;
  auto m = eval::precision_recall(total);
  std::cout << "tp " << total.tp << "  fp " << total.fp << "  fn " << total.fn << "  precision "
            << eval::format_metric(m.precision) << "  recall " << eval::format_metric(m.recall) << "  f1 "
            << eval::format_metric(m.f1) << '\n';
  std::ostringstream csv;
  eval::write_evaluation_csv(csv, rows);
  if (!out.empty()) write_output(csv.str(), out);
  else std::cout << csv.str();
  return 0;
}

int cmd_report(const Config& cfg, const std::string& kind, const AnnotationFilter& filter, const std::string& out) {
  if (kind == "annotations") {
    annotation::AnnotationStore store(cfg.paths.store);
    write_output(annotation_report(store.current(), filter), out);
  } else {
    StatusLog status(cfg.paths.store / kStatusFile);
    write_output(status_report(status.records(), utc_now()), out);
  }
  return 0;
}

int cmd_schedule(const Config& cfg) {
  auto e = estimate_schedule(cfg.workload, cfg.workers);
  std::cout << std::fixed << std::setprecision(2) << "segmentation  " << e.segmentation_hours << " h\n"
            << "copy          " << e.copy_hours << " h\n"
            << "compression   " << e.compression_hours << " h\n"
            << "makespan      " << e.makespan_hours << " h (deadline " << e.deadline_hours << " h) "
            << (e.pass ? "PASS" : "FAIL") << '\n';
  return e.pass ? 0 : 1;
}

int cmd_run(const Config& cfg, const std::vector<fs::path>& cards) {
  std::vector<CardSource> sources;
  for (const auto& c : cards) sources.push_back({c, {}});
  auto report = run_pipeline(cfg, sources);
  for (const auto& c : report.cards) {
    std::cout << "card " << c.card.dir.string() << ": ";
    if (!c.failure.empty()) std::cout << "FAILED " << c.failure << '\n';
    else std::cout << "copied " << c.report.copied << ", duplicates " << c.report.skipped_duplicates
                   << ", errors " << c.report.errors.size() << '\n';
  }
  for (const auto& s : report.stages) {
    std::cout << s.burrow_id << ' ' << format_compact_date(s.date) << ' ' << std::left << std::setw(10)
              << to_string(s.stage) << std::setw(7) << to_string(s.outcome) << " items=" << s.items;
    if (!s.message.empty()) std::cout << "  " << s.message;
    std::cout << '\n';
  }
  return report.failures() == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    Config cfg;
    if (auto path = config_path(argc, argv)) cfg = Config::load(*path);

    CLI::App app{"trapline: camera-trap image pipeline"};
    app.require_subcommand(1);
    std::string config_flag;
    app.add_option("--config", config_flag, "Config file (default: $TRAPLINE_CONFIG)");

    auto path_opt = [](CLI::App* sub, const char* name, fs::path& target, const char* help) {
      return sub->add_option(name, target, help)->capture_default_str();
    };

    // ingest
    std::vector<fs::path> sources;
    auto* ingest = app.add_subcommand("ingest", "Copy and rename card images into the archive");
    ingest->add_option("--source", sources, "Card directory")->required();
    path_opt(ingest, "--archive", cfg.paths.archive, "Archive root");
    path_opt(ingest, "--manifest", cfg.ingest.manifest, "Metadata manifest CSV");
    ingest->add_option("--workers", cfg.ingest.workers)->capture_default_str();

    // encode
    std::string burrow;
    std::string date;
    bool composite = false;
    auto* encode = app.add_subcommand("encode", "Encode one burrow-day into MP4 videos");
    path_opt(encode, "--archive", cfg.paths.archive, "Archive root");
    path_opt(encode, "--out", cfg.paths.videos, "Video directory");
    encode->add_option("--burrow", burrow)->required();
    encode->add_option("--date", date, "YYYYMMDD")->required();
    encode->add_flag("--composite", composite, "Also write the side-by-side composite");
    encode->add_option("--encoder", cfg.encode.encoder.binary)->capture_default_str();
    encode->add_option("--fps", cfg.encode.fps)->capture_default_str();

    // segment
    std::string recording;
    bool import = false;
    auto* segment = app.add_subcommand("segment", "Draft-segment one overhead recording");
    segment->add_option("--recording", recording, "{burrow}-O-{YYYYMMDD}")->required();
    segment->add_option("--provider", cfg.segment.provider, "synthetic | csv | process")->capture_default_str();
    segment->add_option("--command", cfg.segment.command, "Detector command for the process provider");
    path_opt(segment, "--detections", cfg.segment.detections, "Directory of precomputed detections");
    segment->add_option("--threshold", cfg.segment.grouping.threshold)->capture_default_str();
    segment->add_option("--gap", cfg.segment.grouping.gap)->capture_default_str();
    segment->add_option("--min-len", cfg.segment.grouping.min_len)->capture_default_str();
    segment->add_option("--workers", cfg.segment.workers)->capture_default_str();
    path_opt(segment, "--archive", cfg.paths.archive, "Archive root");
    path_opt(segment, "--out", cfg.paths.segments, "Output directory for CSVs");
    path_opt(segment, "--store", cfg.paths.store, "Annotation store");
    segment->add_flag("--import", import, "Import the draft segments into the store");

    // reid
    fs::path segments_file;
    fs::path predictions_out;
    fs::path prune_file;
    std::uint64_t seed = 1;
    std::string metric;
    auto* reid_cmd = app.add_subcommand("reid", "Identify animals in segments, or prune a library");
    path_opt(reid_cmd, "--library", cfg.reid.library, "Reference library CSV")->required(cfg.reid.library.empty());
    reid_cmd->add_option("--segments", segments_file, "Segments CSV");
    reid_cmd->add_option("--embedder", cfg.reid.embedder, "synthetic | csv | process")->capture_default_str();
    reid_cmd->add_option("--command", cfg.reid.command, "Embedder command for the process embedder");
    path_opt(reid_cmd, "--embeddings", cfg.reid.embeddings, "Embedding table for the csv embedder");
    path_opt(reid_cmd, "--masks", cfg.reid.masks, "Mask directory");
    reid_cmd->add_option("--k", cfg.reid.k)->capture_default_str();
    reid_cmd->add_option("--frames-per-segment", cfg.reid.frames_per_segment)->capture_default_str();
    reid_cmd->add_option("--metric", metric, "euclidean | cosine");
    path_opt(reid_cmd, "--archive", cfg.paths.archive, "Archive root");
    path_opt(reid_cmd, "--detections", cfg.paths.segments, "Directory of detections CSVs");
    reid_cmd->add_option("--out", predictions_out, "Predictions CSV (default: {store}/suggestions.csv)");
    reid_cmd->add_option("--prune", prune_file, "Validation embeddings CSV; prune the library instead");
    reid_cmd->add_option("--seed", seed, "Pruning seed")->capture_default_str();

    // evaluate
    fs::path pred;
    fs::path truth;
    std::string eval_out;
    auto* evaluate = app.add_subcommand("evaluate", "Score predicted segments against ground truth");
    evaluate->add_option("--pred", pred)->required();
    evaluate->add_option("--truth", truth)->required();
    evaluate->add_option("--out", eval_out, "Per-recording CSV (default: stdout)");

    // serve
    auto* serve = app.add_subcommand("serve", "Run the annotation service");
    path_opt(serve, "--store", cfg.paths.store, "Annotation store");
    path_opt(serve, "--schema", cfg.paths.schema, "Event schema file");
    path_opt(serve, "--videos", cfg.paths.videos, "Video directory");
    serve->add_option("--port", cfg.serve.port)->capture_default_str();
    path_opt(serve, "--static", cfg.serve.static_dir, "Browser client directory");
    path_opt(serve, "--archive", cfg.paths.archive, "Archive root, for capture times");

    // report
    std::string kind;
    std::string report_out;
    std::string filter_burrow, filter_date, filter_event, filter_animal;
    auto* report = app.add_subcommand("report", "Write a CSV report");
    report->add_option("kind", kind, "annotations | status")
        ->required()
        ->check(CLI::IsMember({"annotations", "status"}));
    path_opt(report, "--store", cfg.paths.store, "Annotation store");
    report->add_option("--burrow", filter_burrow);
    report->add_option("--date", filter_date, "YYYYMMDD");
    report->add_option("--event", filter_event);
    report->add_option("--animal", filter_animal);
    report->add_option("--out", report_out, "Output file (default: stdout)");

    // schedule
    auto* schedule = app.add_subcommand("schedule", "Estimate batch makespan against the 48 h deadline");
    schedule->add_option("--burrows", cfg.workload.burrows)->capture_default_str();
    schedule->add_option("--days", cfg.workload.days)->capture_default_str();
    schedule->add_option("--overhead-images", cfg.workload.overhead_images)->capture_default_str();
    schedule->add_option("--front-images", cfg.workload.front_images)->capture_default_str();
    schedule->add_option("--segmentation-rate", cfg.workload.segmentation_rate)->capture_default_str();
    schedule->add_option("--copy-rate", cfg.workload.copy_rate)->capture_default_str();
    schedule->add_option("--compression-minutes", cfg.workload.compression_minutes)->capture_default_str();
    schedule->add_option("--segmentation-workers", cfg.workers.segmentation)->capture_default_str();
    schedule->add_option("--copy-workers", cfg.workers.copy)->capture_default_str();
    schedule->add_option("--compression-workers", cfg.workers.compression)->capture_default_str();

    // run
    std::vector<fs::path> cards;
    auto* run = app.add_subcommand("run", "Run ingest, segmentation and encoding for a batch of cards");
    run->add_option("--card", cards, "Card directory (none: reprocess the whole archive)");
    path_opt(run, "--manifest", cfg.ingest.manifest, "Metadata manifest CSV");

    CLI11_PARSE(app, argc, argv);

    if (*ingest) return cmd_ingest(cfg, sources);
    if (*encode) return cmd_encode(cfg, burrow, date, composite || cfg.encode.composite);
    if (*segment) return cmd_segment(cfg, recording, import);
    if (*reid_cmd) {
      if (!metric.empty()) cfg.reid.metric = reid::parse_metric(metric);
      if (!prune_file.empty()) {
        if (predictions_out.empty()) throw ValidationError("--prune needs --out for the pruned library");
        return cmd_prune(cfg, prune_file, seed, predictions_out);
      }
      if (segments_file.empty()) throw ValidationError("--segments is required");
      return cmd_reid(cfg, segments_file,
                      predictions_out.empty() ? cfg.paths.store / annotation::kSuggestionsFile : predictions_out);
    }
    if (*evaluate) return cmd_evaluate(pred, truth, eval_out);
    if (*serve) {
      std::optional<fs::path> static_dir;
      if (!cfg.serve.static_dir.empty()) static_dir = cfg.serve.static_dir;
      std::optional<fs::path> archive;
      if (fs::is_directory(cfg.paths.archive)) archive = cfg.paths.archive;
      if (cfg.paths.schema.empty()) throw ValidationError("--schema is required");
      std::cout << "serving on port " << cfg.serve.port << std::endl;
      return annotation::serve(cfg.paths.store, cfg.paths.schema, cfg.paths.videos, cfg.serve.port, static_dir,
                               archive);
    }
    if (*report) {
      AnnotationFilter filter;
      if (!filter_burrow.empty()) filter.burrow_id = filter_burrow;
      if (!filter_date.empty()) filter.date = date_option(filter_date);
      if (!filter_event.empty()) filter.event = filter_event;
      if (!filter_animal.empty()) filter.animal_id = filter_animal;
      return cmd_report(cfg, kind, filter, report_out);
    }
    if (*schedule) return cmd_schedule(cfg);
    if (*run) return cmd_run(cfg, cards);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "trapline: " << e.what() << '\n';
    return 2;
  }
}
