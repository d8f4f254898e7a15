#pragma once

// Structured four-block generation prompts, per-condition presets, and the
// generation-job manifest handed to external video-generation tooling.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gesture_fidelity/data_model.hpp"

namespace gf {

inline constexpr std::string_view kObjectPlaceholder = "{object_name}";

struct CameraSettings {
  std::string style = "Realistic";
  std::string shot_size = "Medium Shot";
  std::string camera_angle = "Eye Level";
  std::string camera_movement = "Static Shot";
  std::string motion_level = "Middle";

  friend bool operator==(const CameraSettings&, const CameraSettings&) = default;
};

struct PromptSpec {
  std::string participant;
  std::string pose_template;  // must contain {object_name}
  std::string environment;
  CameraSettings camera;

  friend bool operator==(const PromptSpec&, const PromptSpec&) = default;
};

/// The lab-recording template the synthetic dataset was generated from.
PromptSpec default_prompt_spec();

PromptSpec prompt_spec_from_json(std::string_view json_text);
std::string prompt_spec_to_json(const PromptSpec& spec);

/// Replaces every {object_name}; text without the token is returned unchanged.
std::string substitute_object(std::string_view text, std::string_view object_name);

/// Renders the Participant / Pose / Environment / Camera Settings blocks.
std::string compose_prompt(const PromptSpec& spec, std::string_view object_name);

struct PromptDelta {
  std::optional<std::string> environment;         // replaces the block
  std::optional<std::string> environment_suffix;  // appended as a sentence
  std::optional<std::string> pose_suffix;
  std::optional<std::string> camera_movement;
  std::optional<std::string> motion_level;

  bool empty() const noexcept {
    return !environment && !environment_suffix && !pose_suffix && !camera_movement &&
           !motion_level;
  }
};

PromptDelta condition_preset(Condition condition);
PromptSpec apply_delta(PromptSpec spec, const PromptDelta& delta);

struct FrameRefs {
  std::string start;
  std::string end;
};

struct GenerationJob {
  std::string prompt_id;
  std::string prompt_text;
  std::string object_name;
  Condition condition = Condition::StaticScene;
  std::string start_frame_ref;
  std::string end_frame_ref;
  int samples = 4;
  double duration_s = 8.0;

  friend bool operator==(const GenerationJob&, const GenerationJob&) = default;
};

struct JobOptions {
  int samples = 4;
  double duration_s = 8.0;
};

/// "<condition>__<object slug>", e.g. "fast_motion__red_cup".
std::string job_slug(Condition condition, std::string_view object_name);

/// One job per distinct (object, condition), ordered by condition then object.
/// `frame_refs` is keyed by object name.
std::vector<GenerationJob> emit_generation_jobs(const PromptSpec& spec,
                                                std::span<const std::string> objects,
                                                std::span<const Condition> conditions,
                                                const std::map<std::string, FrameRefs>& frame_refs,
                                                const JobOptions& options = {});

std::size_t expected_video_count(std::span<const GenerationJob> jobs);

std::string jobs_to_json(std::span<const GenerationJob> jobs);
std::vector<GenerationJob> jobs_from_json(std::string_view json_text);

}  // namespace gf
