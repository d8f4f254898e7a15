#include "gesture_fidelity/prompt_forge.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "json.hpp"

namespace gf {

using nlohmann::json;

PromptSpec default_prompt_spec() {
  PromptSpec s;
  s.participant =
      "The video shows a person in a black hoodie with a logo, standing before a table with "
      "items, including a red cup.";
  s.pose_template =
      "The person is intently pointing at the {object_name}. They maintain this pose, drawing "
      "attention to the {object_name} as the main focus. Their posture suggests the "
      "{object_name} is significant, and they remain still throughout the video. The person "
      "does not point at any other objects.";
  s.environment =
      "The scene is set in a modern office. In the background, computer monitors display data, "
      "and a group of people is seated in the distance, talking. The lighting is bright and "
      "even, creating a professional environment.";
  return s;
}

namespace {

void check_spec(const PromptSpec& spec) {
  auto blank = [](const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
  };
  if (blank(spec.participant)) throw Error(ErrorKind::EmptyBlock, "participant");
  if (blank(spec.pose_template)) throw Error(ErrorKind::EmptyBlock, "pose");
  if (blank(spec.environment)) throw Error(ErrorKind::EmptyBlock, "environment");
  const auto& c = spec.camera;
  for (const auto* field : {&c.style, &c.shot_size, &c.camera_angle, &c.camera_movement,
                            &c.motion_level}) {
    if (blank(*field)) throw Error(ErrorKind::EmptyBlock, "camera");
  }
  if (spec.pose_template.find(kObjectPlaceholder) == std::string::npos) {
    throw Error(ErrorKind::MissingPlaceholder, "pose block has no {object_name}");
  }
}

std::string append_sentence(const std::string& base, const std::string& sentence) {
  if (base.empty()) return sentence;
  return base + " " + sentence;
}

std::string get_string(const json& j, const char* key, const std::string& fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  if (!it->is_string()) {
    throw Error(ErrorKind::SchemaViolation, std::string(key) + ": expected string");
  }
  return it->get<std::string>();
}

}  // namespace

PromptSpec prompt_spec_from_json(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::SchemaViolation, std::string("template: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::SchemaViolation, "template: expected object");
  PromptSpec s;
  s.participant = get_string(j, "participant", "");
  s.pose_template = get_string(j, "pose", "");
  s.environment = get_string(j, "environment", "");
  if (auto cam = j.find("camera"); cam != j.end()) {
    if (!cam->is_object()) throw Error(ErrorKind::SchemaViolation, "camera: expected object");
    s.camera.style = get_string(*cam, "style", s.camera.style);
    s.camera.shot_size = get_string(*cam, "shot_size", s.camera.shot_size);
    s.camera.camera_angle = get_string(*cam, "camera_angle", s.camera.camera_angle);
    s.camera.camera_movement = get_string(*cam, "camera_movement", s.camera.camera_movement);
    s.camera.motion_level = get_string(*cam, "motion_level", s.camera.motion_level);
  }
  check_spec(s);
  return s;
}

std::string prompt_spec_to_json(const PromptSpec& s) {
  json j = {{"participant", s.participant},
            {"pose", s.pose_template},
            {"environment", s.environment},
            {"camera",
             {{"style", s.camera.style},
              {"shot_size", s.camera.shot_size},
              {"camera_angle", s.camera.camera_angle},
              {"camera_movement", s.camera.camera_movement},
              {"motion_level", s.camera.motion_level}}}};
  return j.dump(2) + "\n";
}

std::string substitute_object(std::string_view text, std::string_view object_name) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (true) {
    const std::size_t hit = text.find(kObjectPlaceholder, pos);
    if (hit == std::string_view::npos) break;
    out.append(text.substr(pos, hit - pos));
    out.append(object_name);
    pos = hit + kObjectPlaceholder.size();
  }
  out.append(text.substr(pos));
  return out;
}

std::string compose_prompt(const PromptSpec& spec, std::string_view object_name) {
  check_spec(spec);
  if (object_name.empty()) throw Error(ErrorKind::InvalidArgument, "object_name is empty");
  const auto& c = spec.camera;
  std::string out;
  out += "Participant Description:\n" + substitute_object(spec.participant, object_name) + "\n\n";
  out += "Pose Description:\n" + substitute_object(spec.pose_template, object_name) + "\n\n";
  out += "Environment Description:\n" + substitute_object(spec.environment, object_name) + "\n\n";
  out += "Camera Settings:\n";
  out += "Style: " + c.style + "\n";
  out += "Shot Size: " + c.shot_size + "\n";
  out += "Camera Angle: " + c.camera_angle + "\n";
  out += "Camera Movement: " + c.camera_movement + "\n";
  out += "Motion Level: " + c.motion_level + "\n";
  return out;
}

PromptDelta condition_preset(Condition condition) {
  PromptDelta d;
  switch (condition) {
    case Condition::Reference:
      throw Error(ErrorKind::InvalidCondition, "reference has no generation preset");
    case Condition::StaticScene:
      break;
    case Condition::NoisyScene:
      d.environment =
          "The scene is set in a modern office. In the background, people are walking by and "
          "moving around behind the person, and a group of people is seated in the distance, "
          "talking. The lighting is bright and even.";
      break;
    case Condition::FastMotion:
      d.pose_suffix =
          "The person raises the arm and points quickly, in a fast-forward motion, then returns "
          "the arm briskly.";
      d.motion_level = "High";
      break;
    case Condition::SlowMotion:
      d.pose_suffix =
          "The person raises the arm and points slowly, in a slow-motion movement, then lowers "
          "the arm gently.";
      d.motion_level = "Low";
      break;
    case Condition::DynamicShift:
      d.camera_movement = "Tracking Shot";
      break;
    case Condition::ColorShift:
      d.environment_suffix =
          "The scene is lit with warm, tinted lighting and a strong color grade that shifts the "
          "overall colors of the room.";
      break;
  }
  return d;
}

PromptSpec apply_delta(PromptSpec spec, const PromptDelta& delta) {
  if (delta.environment) spec.environment = *delta.environment;
  if (delta.environment_suffix) spec.environment = append_sentence(spec.environment, *delta.environment_suffix);
  if (delta.pose_suffix) spec.pose_template = append_sentence(spec.pose_template, *delta.pose_suffix);
  if (delta.camera_movement) spec.camera.camera_movement = *delta.camera_movement;
  if (delta.motion_level) spec.camera.motion_level = *delta.motion_level;
  return spec;
}

std::string job_slug(Condition condition, std::string_view object_name) {
  std::string slug;
  bool pending_sep = false;
  for (unsigned char ch : object_name) {
    if (std::isalnum(ch)) {
      if (pending_sep && !slug.empty()) slug += '_';
      pending_sep = false;
      slug += static_cast<char>(std::tolower(ch));
    } else {
      pending_sep = true;
    }
  }
  return std::string(to_string(condition)) + "__" + slug;
}

std::vector<GenerationJob> emit_generation_jobs(const PromptSpec& spec,
                                                std::span<const std::string> objects,
                                                std::span<const Condition> conditions,
                                                const std::map<std::string, FrameRefs>& frame_refs,
                                                const JobOptions& options) {
  if (options.samples < 1) throw Error(ErrorKind::InvalidArgument, "samples must be >= 1");
  if (!(options.duration_s > 0.0)) throw Error(ErrorKind::InvalidArgument, "duration must be > 0");
  check_spec(spec);

  std::set<Condition> conds(conditions.begin(), conditions.end());
  std::set<std::string> objs(objects.begin(), objects.end());
  std::vector<GenerationJob> jobs;
  std::set<std::string> seen;
  for (Condition c : conds) {
    const PromptSpec conditioned = apply_delta(spec, condition_preset(c));
    for (const auto& obj : objs) {
      GenerationJob job;
      job.prompt_id = job_slug(c, obj);
      if (!seen.insert(job.prompt_id).second) continue;  // slug collision
      auto refs = frame_refs.find(obj);
      if (refs == frame_refs.end()) throw Error(ErrorKind::MissingFrameRef, obj);
      job.prompt_text = compose_prompt(conditioned, obj);
      job.object_name = obj;
      job.condition = c;
      job.start_frame_ref = refs->second.start;
      job.end_frame_ref = refs->second.end;
      job.samples = options.samples;
      job.duration_s = options.duration_s;
      jobs.push_back(std::move(job));
    }
  }
  return jobs;
}

std::size_t expected_video_count(std::span<const GenerationJob> jobs) {
  std::size_t n = 0;
  for (const auto& j : jobs) n += static_cast<std::size_t>(j.samples);
  return n;
}

std::string jobs_to_json(std::span<const GenerationJob> jobs) {
  json arr = json::array();
  for (const auto& j : jobs) {
    arr.push_back({{"prompt_id", j.prompt_id},
                   {"prompt_text", j.prompt_text},
                   {"object_name", j.object_name},
                   {"condition", std::string(to_string(j.condition))},
                   {"start_frame_ref", j.start_frame_ref},
                   {"end_frame_ref", j.end_frame_ref},
                   {"samples", j.samples},
                   {"duration_s", j.duration_s}});
  }
  return arr.dump(2) + "\n";
}

std::vector<GenerationJob> jobs_from_json(std::string_view json_text) {
  json arr;
  try {
    arr = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::SchemaViolation, std::string("jobs: invalid JSON: ") + e.what());
  }
  if (!arr.is_array()) throw Error(ErrorKind::SchemaViolation, "jobs: expected array");
  std::vector<GenerationJob> jobs;
  for (const auto& j : arr) {
    try {
      GenerationJob job;
      job.prompt_id = j.at("prompt_id").get<std::string>();
      job.prompt_text = j.at("prompt_text").get<std::string>();
      job.object_name = j.at("object_name").get<std::string>();
      job.condition = parse_condition(j.at("condition").get<std::string>());
      job.start_frame_ref = j.at("start_frame_ref").get<std::string>();
      job.end_frame_ref = j.at("end_frame_ref").get<std::string>();
      job.samples = j.at("samples").get<int>();
      job.duration_s = j.at("duration_s").get<double>();
      if (job.samples < 1 || !(job.duration_s > 0.0)) {
        throw Error(ErrorKind::SchemaViolation, job.prompt_id + ": samples/duration out of range");
      }
      jobs.push_back(std::move(job));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::SchemaViolation, std::string("jobs: ") + e.what());
    }
  }
  return jobs;
}

}  // namespace gf
