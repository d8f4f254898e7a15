#include "gesture_fidelity/data_model.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace gf {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

[[noreturn]] void schema(const std::string& field, const std::string& reason) {
  throw Error(ErrorKind::SchemaViolation, field + ": " + reason);
}

const json& require(const json& obj, const char* key, const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end()) schema(ctx + key, "missing");
  return *it;
}

std::string require_string(const json& obj, const char* key,
                           const std::string& ctx) {
  const json& v = require(obj, key, ctx);
  if (!v.is_string()) schema(ctx + key, "expected string");
  return v.get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const char* key,
                                           const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) schema(ctx + key, "expected string");
  return it->get<std::string>();
}

std::map<std::string, std::string> string_map(const json& obj, const char* key) {
  std::map<std::string, std::string> out;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return out;
  if (!it->is_object()) schema(key, "expected object");
  for (const auto& [k, v] : it->items()) {
    if (!v.is_string()) schema(std::string(key) + "." + k, "expected string");
    out.emplace(k, v.get<std::string>());
  }
  return out;
}

bool is_finite(const LandmarkPoint& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

}  // namespace

// ---------------------------------------------------------------------------
// Enum spellings

std::string_view to_string(Handedness h) noexcept {
  return h == Handedness::Left ? "left" : "right";
}

Handedness parse_handedness(std::string_view s) {
  if (s == "left") return Handedness::Left;
  if (s == "right") return Handedness::Right;
  throw Error(ErrorKind::SchemaViolation,
              "handedness: unknown value '" + std::string(s) + "'");
}

std::string_view to_string(Source s) noexcept {
  return s == Source::Real ? "real" : "synthetic";
}

Source parse_source(std::string_view s) {
  if (s == "real") return Source::Real;
  if (s == "synthetic") return Source::Synthetic;
  throw Error(ErrorKind::SchemaViolation,
              "source: unknown value '" + std::string(s) + "'");
}

std::string_view to_string(Condition c) noexcept {
  switch (c) {
    case Condition::Reference: return "reference";
    case Condition::StaticScene: return "static_scene";
    case Condition::NoisyScene: return "noisy_scene";
    case Condition::FastMotion: return "fast_motion";
    case Condition::SlowMotion: return "slow_motion";
    case Condition::DynamicShift: return "dynamic_shift";
    case Condition::ColorShift: return "color_shift";
  }
  return "reference";
}

std::string_view display_name(Condition c) noexcept {
  switch (c) {
    case Condition::Reference: return "Ref";
    case Condition::StaticScene: return "Static Scene";
    case Condition::NoisyScene: return "Noisy Scene";
    case Condition::FastMotion: return "Fast Motion";
    case Condition::SlowMotion: return "Slow Motion";
    case Condition::DynamicShift: return "Dynamic Shift";
    case Condition::ColorShift: return "Color Shift";
  }
  return "Ref";
}

Condition parse_condition(std::string_view s) {
  for (Condition c : kAllConditions) {
    if (to_string(c) == s) return c;
  }
  throw Error(ErrorKind::InvalidCondition, "unknown condition '" + std::string(s) + "'");
}

std::string_view to_string(EmbeddingKind k) noexcept {
  switch (k) {
    case EmbeddingKind::FrameImage: return "frame_image";
    case EmbeddingKind::Video: return "video";
    case EmbeddingKind::Text: return "text";
    case EmbeddingKind::Pose: return "pose";
  }
  return "frame_image";
}

EmbeddingKind parse_embedding_kind(std::string_view s) {
  if (s == "frame_image") return EmbeddingKind::FrameImage;
  if (s == "video") return EmbeddingKind::Video;
  if (s == "text") return EmbeddingKind::Text;
  if (s == "pose") return EmbeddingKind::Pose;
  throw Error(ErrorKind::SchemaViolation,
              "kind: unknown value '" + std::string(s) + "'");
}

std::string_view to_string(HandPolicy p) noexcept {
  switch (p) {
    case HandPolicy::MostConfident: return "most_confident";
    case HandPolicy::Left: return "left";
    case HandPolicy::Right: return "right";
    case HandPolicy::Both: return "both";
  }
  return "most_confident";
}

HandPolicy parse_hand_policy(std::string_view s) {
  if (s == "most_confident") return HandPolicy::MostConfident;
  if (s == "left") return HandPolicy::Left;
  if (s == "right") return HandPolicy::Right;
  if (s == "both") return HandPolicy::Both;
  throw Error(ErrorKind::InvalidArgument, "unknown hand policy '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Manifest

const VideoMeta* DatasetManifest::find(std::string_view video_id) const {
  auto it = std::find_if(videos.begin(), videos.end(),
                         [&](const VideoMeta& v) { return v.video_id == video_id; });
  return it == videos.end() ? nullptr : &*it;
}

fs::path DatasetManifest::resolve(const std::string& relative) const {
  fs::path p(relative);
  return p.is_absolute() ? p : base_dir / p;
}

namespace {

VideoMeta parse_video(const json& v, std::size_t index) {
  const std::string ctx = "videos[" + std::to_string(index) + "].";
  if (!v.is_object()) schema(ctx.substr(0, ctx.size() - 1), "expected object");
  VideoMeta meta;
  meta.video_id = require_string(v, "video_id", ctx);
  if (meta.video_id.empty()) schema(ctx + "video_id", "empty");
  meta.source = parse_source(require_string(v, "source", ctx));
  try {
    meta.condition = parse_condition(require_string(v, "condition", ctx));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::SchemaViolation) throw;
    schema(ctx + "condition", e.detail());
  }
  meta.prompt_id = optional_string(v, "prompt_id", ctx);
  meta.target_object = optional_string(v, "target_object", ctx);
  meta.reference_video_id = optional_string(v, "reference_video_id", ctx);
  if (auto it = v.find("sample_index"); it != v.end() && !it->is_null()) {
    if (!it->is_number_integer()) schema(ctx + "sample_index", "expected integer");
    int s = it->get<int>();
    if (s < 0 || s > 3) schema(ctx + "sample_index", "must be in [0,3]");
    meta.sample_index = s;
  }
  if (auto it = v.find("fps"); it != v.end() && !it->is_null()) {
    if (!it->is_number()) schema(ctx + "fps", "expected number");
    double fps = it->get<double>();
    if (!(fps > 0.0) || !std::isfinite(fps)) schema(ctx + "fps", "must be > 0");
    meta.fps = fps;
  }
  if (meta.source == Source::Real && meta.condition != Condition::Reference) {
    schema(ctx + "condition", "real videos must use condition 'reference'");
  }
  if (meta.source == Source::Synthetic && meta.condition == Condition::Reference) {
    schema(ctx + "condition", "synthetic videos cannot use condition 'reference'");
  }
  return meta;
}

}  // namespace

DatasetManifest parse_manifest(std::string_view json_text,
                               const fs::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    schema("<root>", std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) schema("<root>", "expected object");

  DatasetManifest m;
  m.base_dir = base_dir;
  m.name = require_string(root, "name", "");
  if (auto ph = optional_string(root, "pointing_hand", "")) {
    m.pointing_hand = parse_handedness(*ph);
  }

  const json& videos = require(root, "videos", "");
  if (!videos.is_array()) schema("videos", "expected array");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < videos.size(); ++i) {
    VideoMeta meta = parse_video(videos[i], i);
    if (!ids.insert(meta.video_id).second) {
      throw Error(ErrorKind::DuplicateVideoId, meta.video_id);
    }
    m.videos.push_back(std::move(meta));
  }

  // Synthetic samples of one prompt must be distinguishable.
  std::set<std::pair<std::string, int>> samples;
  for (const auto& v : m.videos) {
    if (v.source != Source::Synthetic || !v.prompt_id || !v.sample_index) continue;
    if (!samples.emplace(*v.prompt_id, *v.sample_index).second) {
      schema("videos." + v.video_id + ".sample_index",
             "duplicate sample_index " + std::to_string(*v.sample_index) +
                 " for prompt_id '" + *v.prompt_id + "'");
    }
  }

  m.landmark_paths = string_map(root, "landmark_paths");
  for (const auto& [id, _] : m.landmark_paths) {
    if (!ids.contains(id)) {
      throw Error(ErrorKind::DanglingReference, "landmark_paths." + id);
    }
  }

  if (auto it = root.find("embedding_paths"); it != root.end() && !it->is_null()) {
    if (!it->is_object()) schema("embedding_paths", "expected object");
    for (const auto& [id, kinds] : it->items()) {
      if (!ids.contains(id)) {
        throw Error(ErrorKind::DanglingReference, "embedding_paths." + id);
      }
      if (!kinds.is_object()) schema("embedding_paths." + id, "expected object");
      auto& slot = m.embedding_paths[id];
      for (const auto& [kind, path] : kinds.items()) {
        if (!path.is_string()) {
          schema("embedding_paths." + id + "." + kind, "expected string");
        }
        slot.emplace(parse_embedding_kind(kind), path.get<std::string>());
      }
    }
  }

  m.text_embedding_paths = string_map(root, "text_embedding_paths");
  std::set<std::string> prompts;
  for (const auto& v : m.videos) {
    if (v.prompt_id) prompts.insert(*v.prompt_id);
  }
  for (const auto& [pid, _] : m.text_embedding_paths) {
    if (!prompts.contains(pid)) {
      throw Error(ErrorKind::DanglingReference, "text_embedding_paths." + pid);
    }
  }
  return m;
}

DatasetManifest load_manifest(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorKind::MissingFile, path.string());
  return parse_manifest(read_file(path), path.parent_path());
}

std::string manifest_to_json(const DatasetManifest& m) {
  json root = json::object();
  root["name"] = m.name;
  if (m.pointing_hand) root["pointing_hand"] = std::string(to_string(*m.pointing_hand));
  json videos = json::array();
  for (const auto& v : m.videos) {
    json j = json::object();
    j["video_id"] = v.video_id;
    j["source"] = std::string(to_string(v.source));
    j["condition"] = std::string(to_string(v.condition));
    if (v.prompt_id) j["prompt_id"] = *v.prompt_id;
    if (v.target_object) j["target_object"] = *v.target_object;
    if (v.reference_video_id) j["reference_video_id"] = *v.reference_video_id;
    if (v.sample_index) j["sample_index"] = *v.sample_index;
    if (v.fps) j["fps"] = *v.fps;
    videos.push_back(std::move(j));
  }
  root["videos"] = std::move(videos);
  root["landmark_paths"] = m.landmark_paths;
  json emb = json::object();
  for (const auto& [id, kinds] : m.embedding_paths) {
    json k = json::object();
    for (const auto& [kind, path] : kinds) k[std::string(to_string(kind))] = path;
    emb[id] = std::move(k);
  }
  root["embedding_paths"] = std::move(emb);
  root["text_embedding_paths"] = m.text_embedding_paths;
  return root.dump(2) + "\n";
}

void save_manifest(const DatasetManifest& manifest, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::MissingFile, path.string());
  out << manifest_to_json(manifest);
}

// ---------------------------------------------------------------------------
// Landmarks

namespace {

HandObservation parse_hand(const json& h, std::size_t line_no) {
  auto bad = [&](const std::string& why) -> Error {
    return Error(ErrorKind::MalformedLine, "line " + std::to_string(line_no) + ": " + why);
  };
  if (!h.is_object()) throw bad("hand is not an object");
  HandObservation obs;
  auto hd = h.find("handedness");
  if (hd == h.end() || !hd->is_string()) throw bad("missing handedness");
  const auto hs = hd->get<std::string>();
  if (hs == "left") {
    obs.handedness = Handedness::Left;
  } else if (hs == "right") {
    obs.handedness = Handedness::Right;
  } else {
    throw bad("unknown handedness '" + hs + "'");
  }
  auto conf = h.find("confidence");
  if (conf == h.end() || !conf->is_number()) throw bad("missing confidence");
  obs.confidence = conf->get<double>();
  if (!(obs.confidence >= 0.0 && obs.confidence <= 1.0)) {
    throw bad("confidence outside [0,1]");
  }
  auto pts = h.find("points");
  if (pts == h.end() || !pts->is_array()) throw bad("missing points");
  if (pts->size() != kLandmarkCount) {
    throw Error(ErrorKind::WrongLandmarkCount,
                "line " + std::to_string(line_no) + ": expected 21 points, got " +
                    std::to_string(pts->size()));
  }
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    const json& p = (*pts)[i];
    if (!p.is_array() || p.size() != 3 || !p[0].is_number() ||
        !p[1].is_number() || !p[2].is_number()) {
      throw bad("point " + std::to_string(i) + " is not [x,y,z]");
    }
    obs.points[i] = {p[0].get<double>(), p[1].get<double>(), p[2].get<double>()};
    if (!is_finite(obs.points[i])) {
      throw bad("point " + std::to_string(i) + " is not finite");
    }
  }
  return obs;
}

}  // namespace

LandmarkTrack parse_landmarks(std::istream& in, const LandmarkLoadOptions& options) {
  if (!(options.fps > 0.0)) throw Error(ErrorKind::InvalidArgument, "fps must be > 0");
  LandmarkTrack track;
  track.video_id = options.video_id;
  track.fps = options.fps;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error&) {
      throw Error(ErrorKind::MalformedLine, "line " + std::to_string(line_no) + ": invalid JSON");
    }
    if (!obj.is_object()) {
      throw Error(ErrorKind::MalformedLine, "line " + std::to_string(line_no) + ": not an object");
    }
    FrameRecord frame;
    auto fi = obj.find("frame_index");
    if (fi == obj.end() || !fi->is_number_integer() || fi->get<std::int64_t>() < 0) {
      throw Error(ErrorKind::MalformedLine,
                  "line " + std::to_string(line_no) + ": frame_index must be a non-negative integer");
    }
    frame.frame_index = fi->get<std::uint64_t>();
    auto ts = obj.find("timestamp_s");
    if (ts != obj.end() && !ts->is_null()) {
      if (!ts->is_number()) {
        throw Error(ErrorKind::MalformedLine, "line " + std::to_string(line_no) + ": timestamp_s not a number");
      }
      frame.timestamp_s = ts->get<double>();
      if (!std::isfinite(frame.timestamp_s) || frame.timestamp_s < 0.0) {
        throw Error(ErrorKind::MalformedLine,
                    "line " + std::to_string(line_no) + ": timestamp_s must be finite and non-negative");
      }
    } else {
      frame.timestamp_s = static_cast<double>(frame.frame_index) / options.fps;
    }
    auto hands = obj.find("hands");
    if (hands != obj.end() && !hands->is_null()) {
      if (!hands->is_array()) {
        throw Error(ErrorKind::MalformedLine, "line " + std::to_string(line_no) + ": hands not an array");
      }
      if (hands->size() > kMaxHandsPerFrame) {
        throw Error(ErrorKind::MalformedLine, "line " + std::to_string(line_no) + ": more than two hands");
      }
      for (const auto& h : *hands) {
        HandObservation obs = parse_hand(h, line_no);
        if (obs.confidence >= options.confidence_threshold) {
          frame.hands.push_back(obs);
        }
      }
    }
    if (!track.frames.empty()) {
      const auto& prev = track.frames.back();
      if (frame.frame_index <= prev.frame_index) {
        throw Error(ErrorKind::NonMonotonicFrames,
                    "line " + std::to_string(line_no) + ": frame_index " +
                        std::to_string(frame.frame_index) + " after " +
                        std::to_string(prev.frame_index));
      }
      if (frame.timestamp_s <= prev.timestamp_s) {
        throw Error(ErrorKind::NonMonotonicFrames,
                    "line " + std::to_string(line_no) + ": timestamp does not increase");
      }
    }
    track.frames.push_back(std::move(frame));
  }
  if (track.frames.empty()) throw Error(ErrorKind::EmptyInput, "landmark file has no frames");
  return track;
}

LandmarkTrack load_landmarks(const fs::path& path, const LandmarkLoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  LandmarkLoadOptions opts = options;
  if (opts.video_id.empty()) opts.video_id = path.stem().string();
  return parse_landmarks(in, opts);
}

void write_landmarks(const LandmarkTrack& track, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::MissingFile, path.string());
  for (const auto& f : track.frames) {
    json hands = json::array();
    for (const auto& h : f.hands) {
      json pts = json::array();
      for (const auto& p : h.points) pts.push_back({p.x, p.y, p.z});
      hands.push_back({{"handedness", std::string(to_string(h.handedness))},
                       {"confidence", h.confidence},
                       {"points", std::move(pts)}});
    }
    json line = {{"frame_index", f.frame_index},
                 {"timestamp_s", f.timestamp_s},
                 {"hands", std::move(hands)}};
    out << line.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Embeddings

namespace {

EmbeddingMatrix load_embeddings_csv(const fs::path& path, EmbeddingKind kind) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  EmbeddingMatrix m;
  m.kind = kind;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::SidecarMismatch, "empty CSV " + path.string());
  {
    std::stringstream header(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(header, cell, ',')) {
      if (!cell.empty() && cell.back() == '\r') cell.pop_back();
      const std::string expected = col == 0 ? "id" : "c" + std::to_string(col - 1);
      if (cell != expected) {
        throw Error(ErrorKind::SidecarMismatch,
                    "CSV header column " + std::to_string(col) + " is '" + cell +
                        "', expected '" + expected + "'");
      }
      ++col;
    }
    if (col < 2) throw Error(ErrorKind::SidecarMismatch, "CSV header has no value columns");
    m.dim = col - 1;
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    m.ids.push_back(cell);
    std::size_t n = 0;
    while (std::getline(row, cell, ',')) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw Error(ErrorKind::SidecarMismatch,
                    "CSV line " + std::to_string(line_no) + ": bad value '" + cell + "'");
      }
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::NonFiniteValue, "CSV line " + std::to_string(line_no));
      }
      m.values.push_back(static_cast<float>(v));
      ++n;
    }
    if (n != m.dim) {
      throw Error(ErrorKind::SidecarMismatch,
                  "CSV line " + std::to_string(line_no) + ": " + std::to_string(n) +
                      " values, expected " + std::to_string(m.dim));
    }
  }
  return m;
}

float read_f32le(const unsigned char* p) {
  std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                       (static_cast<std::uint32_t>(p[1]) << 8) |
                       (static_cast<std::uint32_t>(p[2]) << 16) |
                       (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

}  // namespace

EmbeddingMatrix load_embeddings(const fs::path& path, EmbeddingKind csv_kind) {
  if (!fs::exists(path)) throw Error(ErrorKind::MissingFile, path.string());
  if (path.extension() == ".csv") return load_embeddings_csv(path, csv_kind);

  json sidecar;
  try {
    sidecar = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::SidecarMismatch, path.string() + ": invalid JSON sidecar");
  }
  auto get_size = [&](const char* key) -> std::size_t {
    auto it = sidecar.find(key);
    if (it == sidecar.end() || !it->is_number_integer() || it->get<std::int64_t>() < 0) {
      throw Error(ErrorKind::SidecarMismatch, std::string(key) + " missing or invalid");
    }
    return it->get<std::size_t>();
  };
  EmbeddingMatrix m;
  const std::size_t count = get_size("count");
  m.dim = get_size("dim");
  if (m.dim == 0) throw Error(ErrorKind::SidecarMismatch, "dim must be positive");
  if (auto dt = sidecar.find("dtype"); dt != sidecar.end() && *dt != "f32le") {
    throw Error(ErrorKind::SidecarMismatch, "unsupported dtype " + dt->dump());
  }
  auto kind = sidecar.find("kind");
  if (kind == sidecar.end() || !kind->is_string()) {
    throw Error(ErrorKind::SidecarMismatch, "kind missing");
  }
  m.kind = parse_embedding_kind(kind->get<std::string>());
  auto ids = sidecar.find("ids");
  if (ids == sidecar.end() || !ids->is_array()) {
    throw Error(ErrorKind::SidecarMismatch, "ids missing");
  }
  for (const auto& id : *ids) {
    if (!id.is_string()) throw Error(ErrorKind::SidecarMismatch, "ids must be strings");
    m.ids.push_back(id.get<std::string>());
  }
  if (m.ids.size() != count) {
    throw Error(ErrorKind::SidecarMismatch,
                "declared count " + std::to_string(count) + " but " +
                    std::to_string(m.ids.size()) + " ids");
  }

  fs::path payload = path;
  payload.replace_extension(".bin");
  const std::string bytes = [&] {
    if (!fs::exists(payload)) throw Error(ErrorKind::MissingFile, payload.string());
    return read_file(payload);
  }();
  const std::size_t expected = count * m.dim * 4;
  if (bytes.size() != expected) {
    throw Error(ErrorKind::SidecarMismatch,
                "declared " + std::to_string(expected) + " bytes, payload has " +
                    std::to_string(bytes.size()));
  }
  m.values.resize(count * m.dim);
  const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data());
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    m.values[i] = read_f32le(raw + 4 * i);
    if (!std::isfinite(m.values[i])) {
      throw Error(ErrorKind::NonFiniteValue,
                  "row " + std::to_string(i / m.dim) + ", column " + std::to_string(i % m.dim));
    }
  }
  return m;
}

void write_embeddings(const EmbeddingMatrix& m, const fs::path& sidecar_path) {
  if (m.values.size() != m.rows() * m.dim) {
    throw Error(ErrorKind::SidecarMismatch, "matrix shape does not match its values");
  }
  json sidecar = {{"count", m.rows()},
                  {"dim", m.dim},
                  {"dtype", "f32le"},
                  {"kind", std::string(to_string(m.kind))},
                  {"ids", m.ids}};
  {
    std::ofstream out(sidecar_path, std::ios::binary);
    if (!out) throw Error(ErrorKind::MissingFile, sidecar_path.string());
    out << sidecar.dump() << '\n';
  }
  fs::path payload = sidecar_path;
  payload.replace_extension(".bin");
  std::ofstream out(payload, std::ios::binary);
  if (!out) throw Error(ErrorKind::MissingFile, payload.string());
  for (float v : m.values) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    const char bytes[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                           static_cast<char>((bits >> 16) & 0xff),
                           static_cast<char>((bits >> 24) & 0xff)};
    out.write(bytes, 4);
  }
}

// ---------------------------------------------------------------------------
// Hand selection

HandPolicy effective_policy(const DatasetManifest& manifest, HandPolicy module_default) {
  if (!manifest.pointing_hand) return module_default;
  return *manifest.pointing_hand == Handedness::Left ? HandPolicy::Left : HandPolicy::Right;
}

namespace {

HandSeries series_for(const LandmarkTrack& track, Handedness hand) {
  HandSeries s;
  s.hand = hand;
  s.per_frame.reserve(track.frames.size());
  for (const auto& f : track.frames) {
    const HandObservation* best = nullptr;
    for (const auto& h : f.hands) {
      if (h.handedness == hand && (!best || h.confidence > best->confidence)) best = &h;
    }
    s.per_frame.push_back(best);
  }
  return s;
}

bool has_any(const HandSeries& s) {
  return std::any_of(s.per_frame.begin(), s.per_frame.end(),
                     [](const HandObservation* h) { return h != nullptr; });
}

double mean_confidence(const HandSeries& s) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto* h : s.per_frame) {
    if (h) {
      sum += h->confidence;
      ++n;
    }
  }
  return n == 0 ? -1.0 : sum / static_cast<double>(n);
}

}  // namespace

std::vector<HandSeries> select_hand_series(const LandmarkTrack& track, HandPolicy policy) {
  std::vector<HandSeries> out;
  switch (policy) {
    case HandPolicy::Left:
    case HandPolicy::Right: {
      auto s = series_for(track, policy == HandPolicy::Left ? Handedness::Left : Handedness::Right);
      if (has_any(s)) out.push_back(std::move(s));
      break;
    }
    case HandPolicy::Both: {
      for (Handedness h : {Handedness::Left, Handedness::Right}) {
        auto s = series_for(track, h);
        if (has_any(s)) out.push_back(std::move(s));
      }
      break;
    }
    case HandPolicy::MostConfident: {
      auto left = series_for(track, Handedness::Left);
      auto right = series_for(track, Handedness::Right);
      // Ties go to the right hand.
      auto& pick = mean_confidence(left) > mean_confidence(right) ? left : right;
      if (has_any(pick)) out.push_back(std::move(pick));
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hand confidence

HandConfidenceSummary summarize_hand_confidence(std::span<const LandmarkTrack> tracks) {
  HandConfidenceSummary s;
  double total = 0.0;
  for (const auto& t : tracks) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& f : t.frames) {
      for (const auto& h : f.hands) {
        sum += h.confidence;
        ++n;
      }
    }
    if (n > 0) s.per_video.emplace_back(t.video_id, sum / static_cast<double>(n));
    total += sum;
    s.observations += n;
  }
  if (s.observations == 0) throw Error(ErrorKind::EmptyInput, "no hand observations retained");
  s.mean = total / static_cast<double>(s.observations);
  return s;
}

double mean_hand_confidence(std::span<const LandmarkTrack> tracks) {
  return summarize_hand_confidence(tracks).mean;
}

// ---------------------------------------------------------------------------
// Validation

std::size_t ValidationReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const auto& e) { return !e.ok; }));
}

ValidationReport validate_dataset(const DatasetManifest& manifest,
                                  const LandmarkLoadOptions& options) {
  ValidationReport report;
  report.manifest_name = manifest.name;
  auto add = [&](const std::string& id, std::string check, bool ok, std::string msg = {}) {
    report.entries.push_back({id, std::move(check), ok, std::move(msg)});
  };

  std::optional<std::pair<std::string, std::size_t>> frame_dim;  // first seen
  for (const auto& v : manifest.videos) {
    auto lp = manifest.landmark_paths.find(v.video_id);
    if (lp == manifest.landmark_paths.end()) {
      add(v.video_id, "landmarks", false, "no landmark path in manifest");
    } else {
      const auto path = manifest.resolve(lp->second);
      if (!fs::exists(path)) {
        add(v.video_id, "landmarks", false, "missing file " + lp->second);
      } else {
        try {
          LandmarkLoadOptions opts = options;
          opts.video_id = v.video_id;
          if (v.fps) opts.fps = *v.fps;
          auto track = load_landmarks(path, opts);
          add(v.video_id, "landmarks", true,
              std::to_string(track.frames.size()) + " frames");
        } catch (const Error& e) {
          add(v.video_id, "landmarks", false, e.what());
        }
      }
    }

    auto ep = manifest.embedding_paths.find(v.video_id);
    if (ep == manifest.embedding_paths.end()) continue;
    for (const auto& [kind, rel] : ep->second) {
      const std::string check = "embedding:" + std::string(to_string(kind));
      try {
        auto m = load_embeddings(manifest.resolve(rel), kind);
        if (m.kind != kind) {
          add(v.video_id, check, false,
              "file declares kind " + std::string(to_string(m.kind)));
          continue;
        }
        if (kind == EmbeddingKind::FrameImage) {
          if (!frame_dim) {
            frame_dim.emplace(v.video_id, m.dim);
          } else if (frame_dim->second != m.dim) {
            add(v.video_id, check, false,
                "dimension mismatch: " + std::to_string(m.dim) + " vs " +
                    std::to_string(frame_dim->second) + " (" + frame_dim->first + ")");
            continue;
          }
        }
        add(v.video_id, check, true,
            std::to_string(m.rows()) + "x" + std::to_string(m.dim));
      } catch (const Error& e) {
        add(v.video_id, check, false, e.what());
      }
    }
  }

  for (const auto& [pid, rel] : manifest.text_embedding_paths) {
    try {
      auto m = load_embeddings(manifest.resolve(rel), EmbeddingKind::Text);
      const bool ok = m.kind == EmbeddingKind::Text && m.rows() >= 1;
      add(pid, "text_embedding", ok, ok ? "" : "expected >=1 row of kind text");
    } catch (const Error& e) {
      add(pid, "text_embedding", false, e.what());
    }
  }
  return report;
}

}  // namespace gf
