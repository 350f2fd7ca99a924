#include "trapline/annotation/service.hpp"

#include <set>

#include "httplib.h"
#include "json.hpp"

#include "trapline/capture.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace trapline::annotation {

namespace {

json to_json(const Annotation& a) {
  return {{"annotation_id", a.annotation_id},
          {"recording_id", a.recording_id},
          {"start_frame", a.start_frame},
          {"end_frame", a.end_frame},
          {"event", a.event},
          {"animal_id", a.animal_id ? json(*a.animal_id) : json(nullptr)},
          {"author", a.author},
          {"modified_utc", format_utc(a.modified_utc)},
          {"revision", a.revision}};
}

json to_json(const reid::Prediction& ranked) {
  json out = json::array();
  for (const auto& r : ranked) out.push_back({{"individual_id", r.individual_id}, {"distance", r.distance}});
  return out;
}

Annotation from_json(const json& body, const std::string& annotation_id) {
  if (!body.is_object()) throw ValidationError("body must be a JSON object");
  if (body.contains("annotation_id") && body["annotation_id"] != annotation_id) {
    throw ValidationError("annotation_id in body does not match the URL");
  }
  auto frame = [&](const char* name) -> std::size_t {
    if (!body.contains(name) || !body[name].is_number_integer() || body[name].get<long long>() < 0) {
      throw ValidationError(std::string(name) + " must be a non-negative integer");
    }
    return body[name].get<std::size_t>();
  };
  auto text = [&](const char* name, bool required) -> std::string {
    if (!body.contains(name) || body[name].is_null()) {
      if (required) throw ValidationError(std::string("missing ") + name);
      return {};
    }
    if (!body[name].is_string()) throw ValidationError(std::string(name) + " must be a string");
    return body[name].get<std::string>();
  };
  Annotation a;
  a.annotation_id = annotation_id;
  a.recording_id = text("recording_id", true);
  a.start_frame = frame("start_frame");
  a.end_frame = frame("end_frame");
  a.event = text("event", true);
  if (auto animal = text("animal_id", false); !animal.empty()) a.animal_id = animal;
  a.author = text("author", false);
  if (a.author.empty()) a.author = "grader";
  return a;
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", message}}.dump(), "application/json");
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

}  // namespace

AnnotationService::AnnotationService(EventSchema schema, AnnotationStore& store,
                                     SuggestionIndex suggestions, FrameServer& frames)
    : schema_(std::move(schema)), store_(store), suggestions_(std::move(suggestions)), frames_(frames) {}

void AnnotationService::install(httplib::Server& server, const std::optional<fs::path>& static_dir) {
  server.Get("/api/schema", [this](const httplib::Request&, httplib::Response& res) {
    json events = json::array();
    for (const auto& e : schema_.events()) events.push_back({{"name", e.name}, {"id_required", e.id_required}});
    send_json(res, {{"events", events}, {"builtin", {std::string(kAnimalPresent)}}});
  });

  server.Get("/api/recordings", [this](const httplib::Request&, httplib::Response& res) {
    std::set<std::string> ids;
    for (auto& id : store_.recordings()) ids.insert(id);
    for (auto& id : suggestions_.recordings()) ids.insert(id);
    // Camera-day videos only; composites have no recording id.
    std::error_code ec;
    auto videos = frames_.video_file("x").parent_path();
    if (fs::is_directory(videos, ec)) {
      for (const auto& entry : fs::directory_iterator(videos)) {
        if (entry.path().extension() != ".mp4") continue;
        auto stem = entry.path().stem().string();
        try {
          RecordingId::parse(stem);
          ids.insert(stem);
        } catch (const Error&) {
        }
      }
    }
    json out = json::array();
    for (const auto& id : ids) {
      json row{{"recording_id", id}, {"has_video", frames_.has_video(id)}, {"frames", nullptr},
               {"has_suggestions", suggestions_.has_recording(id)}};
      if (frames_.has_video(id)) {
        try {
          row["frames"] = frames_.frame_count(id);
        } catch (const Error&) {
        }
      }
      out.push_back(row);
    }
    send_json(res, out);
  });

  server.Get(R"(/api/recordings/([^/]+)/segments)", [this](const httplib::Request& req, httplib::Response& res) {
    json out = json::array();
    for (const auto& a : store_.for_recording(req.matches[1])) out.push_back(to_json(a));
    send_json(res, out);
  });

  server.Put(R"(/api/annotations/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::parse_error& e) {
      return send_error(res, 400, std::string("invalid JSON: ") + e.what());
    }
    try {
      auto stored = store_.upsert(from_json(body, req.matches[1]), schema_);
      send_json(res, to_json(stored), stored.revision == 1 ? 201 : 200);
    } catch (const ValidationError& e) {
      send_error(res, 400, e.what());
    }
  });

  server.Delete(R"(/api/annotations/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    auto author = req.has_param("author") ? req.get_param_value("author") : std::string("grader");
    if (!store_.remove(req.matches[1], author)) return send_error(res, 404, "unknown annotation");
    send_json(res, {{"annotation_id", req.matches[1]}, {"deleted", true}});
  });

  server.Get(R"(/api/recordings/([^/]+)/frames/(\d+))", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    std::size_t frame = 0;
    try {
      frame = std::stoull(req.matches[2]);
    } catch (const std::exception&) {
      return send_error(res, 400, "invalid frame index");
    }
    try {
      auto bytes = frames_.jpeg(id, frame);
      try {
        res.set_header("X-Capture-Time", format_local_time(frames_.capture_time(id, frame)));
      } catch (const Error&) {
      }
      res.set_content(bytes, "image/jpeg");
    } catch (const FrameRangeError& e) {
      send_error(res, 416, e.what());
    } catch (const NotFoundError& e) {
      send_error(res, 404, e.what());
    }
  });

  server.Get(R"(/api/recordings/([^/]+)/suggestions)", [this](const httplib::Request& req, httplib::Response& res) {
    if (!req.has_param("frame")) return send_error(res, 400, "missing frame parameter");
    std::size_t frame = 0;
    try {
      frame = std::stoull(req.get_param_value("frame"));
    } catch (const std::exception&) {
      return send_error(res, 400, "invalid frame parameter");
    }
    auto s = suggestions_.lookup(req.matches[1], frame);
    json per = json::array();
    for (const auto& p : s.per_detection) per.push_back(to_json(p));
    json body{{"recording_id", std::string(req.matches[1])},
              {"frame", frame},
              {"available", s.available},
              {"sampled_frame", s.sampled_frame ? json(*s.sampled_frame) : json(nullptr)},
              {"suggestions", to_json(s.ranked)},
              {"detections", per}};
    if (!s.available) body["message"] = "no re-id available";
    send_json(res, body);
  });

  if (static_dir) server.set_mount_point("/", static_dir->string());
}

int serve(const fs::path& store_dir, const fs::path& schema_file, const fs::path& videos_dir, int port,
          const std::optional<fs::path>& static_dir, const std::optional<fs::path>& archive) {
  auto schema = EventSchema::load(schema_file.string());
  AnnotationStore store(store_dir);
  FrameServer frames(videos_dir, 256, archive);
  AnnotationService service(std::move(schema), store, SuggestionIndex::load(store_dir / kSuggestionsFile),
                            frames);
  httplib::Server server;
  service.install(server, static_dir);
  if (!server.bind_to_port("0.0.0.0", port)) throw Error("cannot bind port " + std::to_string(port));
  return server.listen_after_bind() ? 0 : 1;
}

}  // namespace trapline::annotation
