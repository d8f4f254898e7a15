#pragma once

// Dataset layout, in-memory types and loaders for landmark tracks, embedding
// matrices and dataset manifests, plus dataset-level hand-confidence
// aggregation.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gesture_fidelity/error.hpp"

namespace gf {

inline constexpr std::size_t kLandmarkCount = 21;
inline constexpr std::size_t kMaxHandsPerFrame = 2;
inline constexpr double kDefaultConfidenceThreshold = 0.5;
inline constexpr double kDefaultFps = 30.0;

struct LandmarkPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const LandmarkPoint&, const LandmarkPoint&) = default;
};

enum class Handedness { Left, Right };

std::string_view to_string(Handedness h) noexcept;
Handedness parse_handedness(std::string_view s);

struct HandObservation {
  Handedness handedness = Handedness::Right;
  double confidence = 0.0;
  std::array<LandmarkPoint, kLandmarkCount> points{};

  friend bool operator==(const HandObservation&, const HandObservation&) = default;
};

struct FrameRecord {
  std::uint64_t frame_index = 0;
  double timestamp_s = 0.0;
  std::vector<HandObservation> hands;  // 0..2 entries, gaps allowed

  friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

struct LandmarkTrack {
  std::string video_id;
  double fps = kDefaultFps;
  std::vector<FrameRecord> frames;

  friend bool operator==(const LandmarkTrack&, const LandmarkTrack&) = default;
};

enum class Source { Real, Synthetic };

enum class Condition {
  Reference,
  StaticScene,
  NoisyScene,
  FastMotion,
  SlowMotion,
  DynamicShift,
  ColorShift,
};

inline constexpr std::array<Condition, 7> kAllConditions = {
    Condition::Reference,  Condition::StaticScene,  Condition::NoisyScene,
    Condition::FastMotion, Condition::SlowMotion,   Condition::DynamicShift,
    Condition::ColorShift,
};

std::string_view to_string(Source s) noexcept;
std::string_view to_string(Condition c) noexcept;
/// Human-readable row label as used in the report tables ("Static Scene").
std::string_view display_name(Condition c) noexcept;
Source parse_source(std::string_view s);
Condition parse_condition(std::string_view s);

enum class EmbeddingKind { FrameImage, Video, Text, Pose };

std::string_view to_string(EmbeddingKind k) noexcept;
EmbeddingKind parse_embedding_kind(std::string_view s);

struct VideoMeta {
  std::string video_id;
  Source source = Source::Real;
  Condition condition = Condition::Reference;
  std::optional<std::string> prompt_id;
  std::optional<std::string> target_object;
  std::optional<std::string> reference_video_id;
  std::optional<int> sample_index;
  // Only used to synthesize timestamps for landmark files that omit them.
  std::optional<double> fps;

  friend bool operator==(const VideoMeta&, const VideoMeta&) = default;
};

struct DatasetManifest {
  std::string name;
  std::optional<Handedness> pointing_hand;
  std::vector<VideoMeta> videos;
  std::map<std::string, std::string> landmark_paths;
  std::map<std::string, std::map<EmbeddingKind, std::string>> embedding_paths;
  std::map<std::string, std::string> text_embedding_paths;
  // Directory relative paths are resolved against; not serialized.
  std::filesystem::path base_dir;

  const VideoMeta* find(std::string_view video_id) const;
  std::filesystem::path resolve(const std::string& relative) const;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

struct EmbeddingMatrix {
  std::vector<std::string> ids;
  std::size_t dim = 0;
  std::vector<float> values;  // row-major, ids.size() * dim
  EmbeddingKind kind = EmbeddingKind::FrameImage;

  std::size_t rows() const noexcept { return ids.size(); }
  std::span<const float> row(std::size_t i) const {
    return {values.data() + i * dim, dim};
  }

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;
};

// ---------------------------------------------------------------------------
// Loaders

DatasetManifest load_manifest(const std::filesystem::path& path);
/// Parses and validates manifest JSON text; `base_dir` is attached verbatim.
DatasetManifest parse_manifest(std::string_view json_text,
                               const std::filesystem::path& base_dir);
std::string manifest_to_json(const DatasetManifest& manifest);
void save_manifest(const DatasetManifest& manifest,
                   const std::filesystem::path& path);

struct LandmarkLoadOptions {
  double confidence_threshold = kDefaultConfidenceThreshold;
  double fps = kDefaultFps;
  // Defaults to the file stem when empty.
  std::string video_id;
};

LandmarkTrack load_landmarks(const std::filesystem::path& path,
                             const LandmarkLoadOptions& options = {});
LandmarkTrack parse_landmarks(std::istream& in,
                              const LandmarkLoadOptions& options);
void write_landmarks(const LandmarkTrack& track,
                     const std::filesystem::path& path);

/// Accepts either a `.json` sidecar (payload in the sibling `.bin`) or a
/// `.csv` file. CSV carries no kind, so `csv_kind` is used for it.
EmbeddingMatrix load_embeddings(
    const std::filesystem::path& path,
    EmbeddingKind csv_kind = EmbeddingKind::FrameImage);
/// Writes `<stem>.json` and `<stem>.bin` next to each other.
void write_embeddings(const EmbeddingMatrix& matrix,
                      const std::filesystem::path& sidecar_path);

// ---------------------------------------------------------------------------
// Hand selection shared by the per-hand modules.

enum class HandPolicy {
  MostConfident,  // the handedness with the higher mean confidence in a track
  Left,
  Right,
  Both,  // each handedness treated as its own series
};

std::string_view to_string(HandPolicy p) noexcept;
HandPolicy parse_hand_policy(std::string_view s);

/// Applies the manifest's `pointing_hand`, if any, over a module default.
HandPolicy effective_policy(const DatasetManifest& manifest,
                            HandPolicy module_default);

struct HandSeries {
  Handedness hand = Handedness::Right;
  // Aligned with track.frames; nullptr where the hand is absent.
  std::vector<const HandObservation*> per_frame;
};

/// Series are empty-free: a handedness that never appears is not returned.
std::vector<HandSeries> select_hand_series(const LandmarkTrack& track,
                                           HandPolicy policy);

// ---------------------------------------------------------------------------
// Hand confidence

struct HandConfidenceSummary {
  double mean = 0.0;
  std::size_t observations = 0;
  std::vector<std::pair<std::string, double>> per_video;  // tracks with hands
};

double mean_hand_confidence(std::span<const LandmarkTrack> tracks);
HandConfidenceSummary summarize_hand_confidence(
    std::span<const LandmarkTrack> tracks);

// ---------------------------------------------------------------------------
// Validation

struct ValidationEntry {
  std::string video_id;
  std::string check;
  bool ok = true;
  std::string message;
};

struct ValidationReport {
  std::string manifest_name;
  std::vector<ValidationEntry> entries;

  std::size_t failures() const;
};

ValidationReport validate_dataset(const DatasetManifest& manifest,
                                  const LandmarkLoadOptions& options = {});

}  // namespace gf
