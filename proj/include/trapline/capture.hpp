#pragma once

#include <compare>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "trapline/timeutil.hpp"

namespace trapline {

enum class View { Overhead, Front };

/// `O` or `F`.
char view_code(View view);
View parse_view_code(std::string_view code);

/// Identifies one captured image.
struct CaptureMeta {
  std::string burrow_id;
  View view = View::Overhead;
  LocalTime timestamp{};

  auto operator<=>(const CaptureMeta&) const = default;
};

/// Non-empty, ASCII letters and digits only.
bool valid_burrow_id(std::string_view id);

/// One camera-day: `{burrow}-{V}-{YYYYMMDD}`.
struct RecordingId {
  std::string burrow_id;
  View view = View::Overhead;
  Date date{};

  std::string str() const;
  static RecordingId parse(std::string_view text);
  static RecordingId of(const CaptureMeta& meta);

  auto operator<=>(const RecordingId&) const = default;
};

/// `{burrow}-{V}-{YYYYMMDD}-{HHMMSS}.jpg`.
std::string canonical_name(const CaptureMeta& meta);

/// Inverse of canonical_name; nullopt for anything that is not one.
std::optional<CaptureMeta> parse_canonical_name(std::string_view name);

/// `{burrow}/{V}/{YYYYMMDD}` below an archive root.
std::filesystem::path recording_dir(const std::filesystem::path& archive, const RecordingId& id);

/// Daylight capture window; timestamps outside it are flagged, not rejected.
inline constexpr std::chrono::hours kScheduleStart{7};
inline constexpr std::chrono::hours kScheduleEnd{20};
inline constexpr std::chrono::seconds kCaptureInterval{5};

bool out_of_schedule(LocalTime t);

}  // namespace trapline
