#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "trapline/annotation/frame_server.hpp"
#include "trapline/annotation/schema.hpp"
#include "trapline/annotation/store.hpp"
#include "trapline/annotation/suggestions.hpp"

namespace httplib {
class Server;
}

namespace trapline::annotation {

/// HTTP+JSON front of the annotation store:
///
///   GET    /api/recordings
///   GET    /api/recordings/{id}/segments
///   PUT    /api/annotations/{annotation_id}
///   DELETE /api/annotations/{annotation_id}
///   GET    /api/recordings/{id}/frames/{n}          (image/jpeg)
///   GET    /api/recordings/{id}/suggestions?frame=n
///   GET    /api/schema
class AnnotationService {
 public:
  AnnotationService(EventSchema schema, AnnotationStore& store, SuggestionIndex suggestions,
                    FrameServer& frames);

  /// Registers the API routes, and a static mount for the browser client
  /// when `static_dir` is given.
  void install(httplib::Server& server,
               const std::optional<std::filesystem::path>& static_dir = std::nullopt);

  const EventSchema& schema() const { return schema_; }

 private:
  EventSchema schema_;
  AnnotationStore& store_;
  SuggestionIndex suggestions_;
  FrameServer& frames_;
};

/// Loads everything named by the store/schema/videos directories and serves
/// until the process is stopped.
int serve(const std::filesystem::path& store_dir, const std::filesystem::path& schema_file,
          const std::filesystem::path& videos_dir, int port,
          const std::optional<std::filesystem::path>& static_dir = std::nullopt,
          const std::optional<std::filesystem::path>& archive = std::nullopt);

}  // namespace trapline::annotation
