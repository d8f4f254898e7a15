// Writes the small synthetic real/synthetic dataset pair used by the tests.
//
//   gesture-fidelity-fixtures <output dir>
//
// Hands are posed from a simple chain model: each finger bends out of the image
// plane at its joints, so joint angles are 180 minus the flexion. Output is a
// pure function of the built-in seeds.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "gesture_fidelity/data_model.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kFrames = 40;
constexpr double kFps = 30.0;
constexpr int kFrameStride = 5;
constexpr std::size_t kFrameDim = 8;
constexpr std::size_t kVideoDim = 6;

struct Vec3 {
  double x, y, z;
  Vec3 operator+(Vec3 o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
};

struct Motion {
  double frequency_hz;
  double amplitude;
  double index_flex_deg;   // mean flexion of the pointing finger
  double curl_flex_deg;    // mean flexion of the curled fingers
  double confidence;
  bool gaps;               // some frames without any detection
};

// Direction in the image plane at `heading`, tilted toward -z by `pitch`.
Vec3 direction(double heading, double pitch) {
  return {std::cos(pitch) * std::cos(heading), std::cos(pitch) * std::sin(heading), -std::sin(pitch)};
}

std::array<gf::LandmarkPoint, 21> pose(Vec3 wrist, double roll, const std::array<double, 5>& flex_deg,
                                       std::mt19937_64& rng) {
  std::normal_distribution<double> jitter(0.0, 0.0015);
  std::array<gf::LandmarkPoint, 21> pts{};
  pts[0] = {wrist.x, wrist.y, wrist.z};
  // Heading of each finger base relative to the hand axis (pointing up-left).
  const std::array<double, 5> spread = {0.9, 0.25, 0.0, -0.22, -0.45};
  const std::array<std::array<double, 4>, 5> lengths = {{{0.035, 0.03, 0.025, 0.02},
                                                         {0.08, 0.035, 0.022, 0.018},
                                                         {0.078, 0.038, 0.025, 0.019},
                                                         {0.072, 0.034, 0.023, 0.018},
                                                         {0.066, 0.027, 0.018, 0.016}}};
  const double axis = -std::numbers::pi / 2.0 + roll;
  constexpr double deg = std::numbers::pi / 180.0;
  for (int f = 0; f < 5; ++f) {
    const double heading = axis + spread[static_cast<std::size_t>(f)];
    Vec3 p = wrist;
    double pitch = 0.0;
    for (int s = 0; s < 4; ++s) {
      // The palm segment (s == 0) keeps the hand's pitch; later joints flex.
      if (s > 0) pitch += flex_deg[static_cast<std::size_t>(f)] * deg * (s == 1 ? 0.8 : 1.0);
      p = p + direction(heading, pitch) * lengths[static_cast<std::size_t>(f)][static_cast<std::size_t>(s)];
      const std::size_t idx = static_cast<std::size_t>(1 + f * 4 + s);
      pts[idx] = {p.x + jitter(rng), p.y + jitter(rng), p.z + jitter(rng)};
    }
  }
  return pts;
}

gf::LandmarkTrack make_track(const std::string& id, const Motion& m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double phase = uni(rng) * 2.0 * std::numbers::pi;
  gf::LandmarkTrack track;
  track.video_id = id;
  track.fps = kFps;
  for (int i = 0; i < kFrames; ++i) {
    gf::FrameRecord fr;
    fr.frame_index = static_cast<std::uint64_t>(i);
    fr.timestamp_s = i / kFps;
    const double t = fr.timestamp_s;
    const double w = 2.0 * std::numbers::pi * m.frequency_hz * t + phase;
    if (m.gaps && (i == 12 || i == 13 || i == 27)) {
      track.frames.push_back(fr);
      continue;
    }
    const Vec3 wrist{0.55 + m.amplitude * std::cos(w), 0.62 - 0.6 * m.amplitude * std::sin(w),
                     -0.02 + 0.01 * std::sin(0.5 * w)};
    const double roll = 0.15 * std::sin(w + 0.3);
    std::array<double, 5> flex{};
    flex[0] = 25.0 + 6.0 * std::sin(w) + 3.0 * noise(rng);
    flex[1] = m.index_flex_deg + 4.0 * std::sin(w + 1.0) + 3.0 * noise(rng);
    for (std::size_t f = 2; f < 5; ++f) {
      flex[f] = m.curl_flex_deg + 5.0 * static_cast<double>(f) + 6.0 * std::sin(w + static_cast<double>(f)) +
                4.0 * noise(rng);
    }
    gf::HandObservation right;
    right.handedness = gf::Handedness::Right;
    right.confidence = std::clamp(m.confidence + 0.04 * noise(rng), 0.0, 1.0);
    right.points = pose(wrist, roll, flex, rng);
    // Occasional missed detection, dropped by the 0.5 threshold.
    if (i % 11 == 7) right.confidence = 0.3;
    fr.hands.push_back(right);

    if (i % 6 == 2) {
      gf::HandObservation left;
      left.handedness = gf::Handedness::Left;
      left.confidence = std::clamp(0.62 + 0.05 * noise(rng), 0.0, 1.0);
      std::array<double, 5> rest = {30.0, 70.0, 75.0, 80.0, 85.0};
      left.points = pose({0.3, 0.8, -0.01}, 0.4, rest, rng);
      for (auto& p : left.points) p.x = 0.6 - p.x;  // mirrored
      fr.hands.push_back(left);
    }
    track.frames.push_back(fr);
  }
  return track;
}

std::vector<double> random_unit(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(dim);
  double norm = 0.0;
  for (auto& x : v) {
    x = n(rng);
    norm += x * x;
  }
  for (auto& x : v) x /= std::sqrt(norm);
  return v;
}

gf::EmbeddingMatrix frame_embeddings(const std::string& id, const std::vector<double>& base,
                                     const std::vector<double>& offset, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 0.05);
  gf::EmbeddingMatrix e;
  e.kind = gf::EmbeddingKind::FrameImage;
  e.dim = kFrameDim;
  for (int f = 0; f < kFrames; f += kFrameStride) {
    e.ids.push_back(id + "#" + std::to_string(f));
    for (std::size_t k = 0; k < kFrameDim; ++k) {
      e.values.push_back(static_cast<float>(base[k] + offset[k] + n(rng)));
    }
  }
  return e;
}

gf::EmbeddingMatrix single_row(const std::string& id, gf::EmbeddingKind kind, const std::vector<double>& v) {
  gf::EmbeddingMatrix e;
  e.kind = kind;
  e.dim = v.size();
  e.ids = {id};
  for (double x : v) e.values.push_back(static_cast<float>(x));
  return e;
}

struct VideoPlan {
  std::string id;
  gf::Condition condition;
  std::size_t object;
  int sample;
  std::string reference;
};

void write_dataset(const fs::path& dir, const std::string& name, gf::Source source,
                   const std::vector<VideoPlan>& plan, const std::vector<std::string>& objects,
                   const std::vector<std::vector<double>>& object_frames,
                   const std::vector<std::vector<double>>& object_text, std::uint64_t seed) {
  fs::create_directories(dir / "landmarks");
  fs::create_directories(dir / "embeddings");
  fs::create_directories(dir / "text");
  std::mt19937_64 rng(seed);
  gf::DatasetManifest m;
  m.name = name;

  for (const auto& v : plan) {
    const std::string prompt = std::string(gf::to_string(v.condition)) + "__" + objects[v.object];
    gf::VideoMeta meta;
    meta.video_id = v.id;
    meta.source = source;
    meta.condition = v.condition;
    meta.prompt_id = prompt;
    meta.target_object = objects[v.object];
    if (source == gf::Source::Synthetic) {
      meta.reference_video_id = v.reference;
      meta.sample_index = v.sample;
    }
    m.videos.push_back(meta);

    Motion motion{0.5, 0.05, 12.0, 70.0, 0.9, false};
    if (source == gf::Source::Synthetic) {
      motion = {0.6, 0.06, 20.0, 62.0, 0.82, true};
      if (v.condition == gf::Condition::FastMotion) motion.frequency_hz = 1.6;
    }
    const std::uint64_t vseed = rng();
    gf::write_landmarks(make_track(v.id, motion, vseed), dir / "landmarks" / (v.id + ".jsonl"));
    m.landmark_paths[v.id] = "landmarks/" + v.id + ".jsonl";

    std::vector<double> offset(kFrameDim, 0.0);
    if (source == gf::Source::Synthetic) {
      offset = random_unit(kFrameDim, rng);
      for (auto& x : offset) x *= 0.15;
    }
    gf::write_embeddings(frame_embeddings(v.id, object_frames[v.object], offset, rng()),
                         dir / "embeddings" / (v.id + "_frames.json"));
    auto video = random_unit(kVideoDim, rng);
    for (std::size_t k = 0; k < kVideoDim; ++k) video[k] += object_frames[v.object][k];
    gf::write_embeddings(single_row(v.id, gf::EmbeddingKind::Video, video),
                         dir / "embeddings" / (v.id + "_video.json"));
    m.embedding_paths[v.id][gf::EmbeddingKind::FrameImage] = "embeddings/" + v.id + "_frames.json";
    m.embedding_paths[v.id][gf::EmbeddingKind::Video] = "embeddings/" + v.id + "_video.json";

    if (!m.text_embedding_paths.contains(prompt)) {
      gf::write_embeddings(single_row(prompt, gf::EmbeddingKind::Text, object_text[v.object]),
                           dir / "text" / (prompt + ".json"));
      m.text_embedding_paths[prompt] = "text/" + prompt + ".json";
    }
  }
  gf::save_manifest(m, dir / "manifest.json");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: gesture-fidelity-fixtures <output dir>\n";
    return 2;
  }
  const fs::path out = argv[1];
  const std::vector<std::string> objects = {"red_cup", "stapler", "blue_book", "plant", "phone", "lamp"};

  std::mt19937_64 rng(20240611);
  std::vector<std::vector<double>> frames, text;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    auto f = random_unit(kFrameDim, rng);
    auto t = random_unit(kFrameDim, rng);
    // Text sits near the object's visual embedding so PAS lands well above 0.
    for (std::size_t k = 0; k < kFrameDim; ++k) t[k] = 0.8 * f[k] + 0.4 * t[k];
    frames.push_back(f);
    text.push_back(t);
  }

  std::vector<VideoPlan> real;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    real.push_back({"r0" + std::to_string(i + 1), gf::Condition::Reference, i, 0, ""});
  }
  const std::vector<VideoPlan> synth = {
      {"s01", gf::Condition::StaticScene, 0, 0, "r01"}, {"s02", gf::Condition::StaticScene, 0, 1, "r01"},
      {"s03", gf::Condition::StaticScene, 1, 0, "r02"}, {"s04", gf::Condition::StaticScene, 1, 1, "r02"},
      {"s05", gf::Condition::FastMotion, 2, 0, "r03"},  {"s06", gf::Condition::FastMotion, 3, 0, "r04"},
  };
  try {
    write_dataset(out / "real", "fixture-real", gf::Source::Real, real, objects, frames, text, 11);
    write_dataset(out / "synth", "fixture-synth", gf::Source::Synthetic, synth, objects, frames, text, 23);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cout << "wrote fixtures to " << out.string() << "\n";
  return 0;
}
