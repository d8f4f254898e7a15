#include <cmath>
#include <cstring>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "test_util.hpp"

#include "gesture_fidelity/diversity.hpp"

using namespace gf;
using testutil::error_kind;

namespace {

PoseEmbedding embedding(const std::string& id, std::vector<double> head) {
  PoseEmbedding e;
  e.video_id = id;
  for (std::size_t i = 0; i < head.size(); ++i) e.vector[i] = head[i];
  return e;
}

// Two clusters around orthogonal directions, n points each.
std::vector<PoseEmbedding> two_blocks(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<PoseEmbedding> out;
  for (std::size_t b = 0; b < 2; ++b) {
    for (std::size_t i = 0; i < n; ++i) {
      PoseEmbedding e;
      e.video_id = (b == 0 ? "a" : "b") + std::to_string(i);
      for (std::size_t k = 0; k < kPoseDim; ++k) {
        const bool on = (k < kPoseDim / 2) == (b == 0);
        e.vector[k] = (on ? 1.0 : 0.0) + noise(rng);
      }
      out.push_back(e);
    }
  }
  return out;
}

double purity(const TsneResult& r, std::size_t n) {
  std::size_t good = 0;
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    double best = INFINITY;
    std::size_t arg = 0;
    for (std::size_t j = 0; j < r.points.size(); ++j) {
      if (i == j) continue;
      const double dx = r.points[i].xy[0] - r.points[j].xy[0];
      const double dy = r.points[i].xy[1] - r.points[j].xy[1];
      if (dx * dx + dy * dy < best) {
        best = dx * dx + dy * dy;
        arg = j;
      }
    }
    if ((i < n) == (arg < n)) ++good;
  }
  return static_cast<double>(good) / static_cast<double>(r.points.size());
}

}  // namespace

TEST_CASE("mean pose embedding") {
  auto t = oracle::track_from("v", 3, 30.0, [](std::size_t i) {
    return oracle::uniform_points(static_cast<double>(i), 1.0, 2.0);
  });
  auto e = mean_pose_embedding(t);
  CHECK(e.video_id == "v");
  CHECK(e.vector[0] == doctest::Approx(1.0));
  CHECK(e.vector[1] == doctest::Approx(1.0));
  CHECK(e.vector[2] == doctest::Approx(2.0));
  CHECK(e.vector[3] == doctest::Approx(1.01));
  t.frames[2].hands.clear();
  CHECK(mean_pose_embedding(t).vector[0] == doctest::Approx(0.5));
  for (auto& f : t.frames) f.hands.clear();
  CHECK(error_kind([&] { mean_pose_embedding(t); }) == ErrorKind::NoHandFrames);
}

TEST_CASE("cosine distance matrix") {
  std::vector<PoseEmbedding> e = {embedding("a", {1, 0}), embedding("b", {1, 0}),
                                  embedding("c", {0, 1}), embedding("d", {-1, 0})};
  auto m = cosine_distance_matrix(e);
  REQUIRE(m.size() == 4);
  CHECK(m.at(0, 1) == 0.0);
  CHECK(m.at(0, 2) == doctest::Approx(1.0));
  CHECK(m.at(0, 3) == doctest::Approx(2.0));
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(m.at(i, i) == 0.0);
    for (std::size_t j = 0; j < 4; ++j) CHECK(m.at(i, j) == m.at(j, i));
  }
  e.push_back(embedding("z", {}));
  try {
    cosine_distance_matrix(e);
    FAIL("expected an error");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::ZeroVector);
    CHECK(std::string(err.what()).find("z") != std::string::npos);
  }
}

TEST_CASE("cosine distance matrix: random vectors against the oracle") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0, 1);
  std::vector<PoseEmbedding> e;
  for (int i = 0; i < 8; ++i) {
    PoseEmbedding p;
    p.video_id = "v" + std::to_string(i);
    for (auto& x : p.vector) x = n(rng);
    e.push_back(p);
  }
  auto m = cosine_distance_matrix(e);
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (std::size_t j = 0; j < e.size(); ++j) {
      if (i == j) continue;
      CHECK(std::abs(m.at(i, j) - oracle::cosine_distance({e[i].vector.begin(), e[i].vector.end()},
                                                              {e[j].vector.begin(), e[j].vector.end()})) < 1e-12);
    }
  }
}

TEST_CASE("inter/intra statistics") {
  DistanceMatrix m;
  m.ids = {"a", "b", "c"};
  m.values = {0, 0.2, 0.5, 0.2, 0, 0.7, 0.5, 0.7, 0};
  std::map<std::string, Condition> labels = {
      {"a", Condition::Reference}, {"b", Condition::Reference}, {"c", Condition::FastMotion}};
  auto s = inter_intra_stats(m, labels);
  REQUIRE(s.pairs.size() == 2);
  CHECK(s.pairs[0].intra());
  CHECK(s.pairs[0].first == Condition::Reference);
  CHECK(s.pairs[0].mean == doctest::Approx(0.2));
  CHECK(s.pairs[0].pairs == 1);
  CHECK_FALSE(s.pairs[1].intra());
  CHECK(s.pairs[1].mean == doctest::Approx(0.6));
  CHECK(s.pairs[1].std == doctest::Approx(0.1));
  CHECK(s.pairs[1].pairs == 2);
  REQUIRE(s.singleton_conditions.size() == 1);
  CHECK(s.singleton_conditions[0] == Condition::FastMotion);
  labels.erase("c");
  CHECK(error_kind([&] { inter_intra_stats(m, labels); }) == ErrorKind::UnlabeledId);
}

TEST_CASE("inter/intra statistics: random 10-point double loop") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 2);
  std::uniform_int_distribution<int> c(0, 2);
  const std::size_t n = 10;
  DistanceMatrix m;
  m.values.assign(n * n, 0.0);
  std::map<std::string, Condition> labels;
  std::vector<Condition> cond(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.ids.push_back("v" + std::to_string(i));
    cond[i] = kAllConditions[static_cast<std::size_t>(c(rng))];
    labels[m.ids[i]] = cond[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) m.values[i * n + j] = m.values[j * n + i] = u(rng);
  }
  auto s = inter_intra_stats(m, labels);
  for (const auto& p : s.pairs) {
    std::vector<double> vals;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const bool hit = (cond[i] == p.first && cond[j] == p.second) ||
                         (cond[i] == p.second && cond[j] == p.first);
        if (hit) vals.push_back(m.at(i, j));
      }
    }
    REQUIRE(vals.size() == p.pairs);
    double mean = 0, var = 0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= static_cast<double>(vals.size());
    CHECK(std::abs(p.mean - mean) < 1e-12);
    CHECK(std::abs(p.std - std::sqrt(var)) < 1e-12);
  }
}

TEST_CASE("t-SNE: shape, separation, determinism, objective decreases") {
  auto e = two_blocks(10, 8);
  auto m = cosine_distance_matrix(e);
  TsneConfig cfg;
  cfg.perplexity = 5.0;
  auto a = tsne_from_distances(m, cfg);
  REQUIRE(a.points.size() == 20);
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(a.points[i].id == m.ids[i]);
    CHECK(std::isfinite(a.points[i].xy[0]));
    CHECK(std::isfinite(a.points[i].xy[1]));
  }
  CHECK(purity(a, 10) == 1.0);
  CHECK(a.final_kl < a.initial_kl);
  auto b = tsne_from_distances(m, cfg);
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(std::memcmp(a.points[i].xy.data(), b.points[i].xy.data(), sizeof(double) * 2) == 0);
  }
  cfg.seed = 43;
  auto c = tsne_from_distances(m, cfg);
  CHECK(purity(c, 10) == 1.0);
}

TEST_CASE("t-SNE: argument checks") {
  auto m = cosine_distance_matrix(two_blocks(3, 1));
  TsneConfig cfg;
  cfg.perplexity = 10.0;
  CHECK(error_kind([&] { tsne_from_distances(m, cfg); }) == ErrorKind::PerplexityTooHigh);
  cfg.perplexity = 1.5;
  CHECK_NOTHROW(tsne_from_distances(m, cfg));
  auto three = two_blocks(3, 1);
  three.resize(3);
  auto small = cosine_distance_matrix(three);
  CHECK(error_kind([&] { tsne_from_distances(small, cfg); }) == ErrorKind::TooFewPoints);
  cfg.output_dims = 3;
  CHECK(error_kind([&] { tsne_from_distances(m, cfg); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("condition ellipse") {
  std::vector<std::array<double, 2>> cross = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  auto e = condition_ellipse(cross);
  CHECK(e.center[0] == 0.0);
  CHECK(e.cov2d[0] == doctest::Approx(2.0 / 3.0));
  CHECK(e.cov2d[2] == doctest::Approx(2.0 / 3.0));
  CHECK(e.major == doctest::Approx(std::sqrt(2.0 / 3.0)));
  CHECK(e.minor == doctest::Approx(std::sqrt(2.0 / 3.0)));

  std::vector<std::array<double, 2>> line = {{0, 0}, {1, 0}, {2, 0}};
  auto l = condition_ellipse(line);
  CHECK(l.minor == 0.0);
  CHECK(l.angle_rad == 0.0);
  CHECK(l.major == doctest::Approx(1.0));

  std::vector<std::array<double, 2>> pts = {{0.3, 1.0}, {2.0, -1.0}, {1.1, 0.4}, {-0.7, 0.2}};
  auto shifted = pts;
  for (auto& p : shifted) {
    p[0] += 5.0;
    p[1] -= 3.0;
  }
  auto a = condition_ellipse(pts), b = condition_ellipse(shifted);
  CHECK(b.center[0] == doctest::Approx(a.center[0] + 5.0));
  CHECK(b.major == doctest::Approx(a.major));
  CHECK(b.minor == doctest::Approx(a.minor));
  CHECK(b.angle_rad == doctest::Approx(a.angle_rad));
  std::vector<std::array<double, 2>> two = {{0, 0}, {1, 1}};
  CHECK(error_kind([&] { condition_ellipse(two); }) == ErrorKind::TooFewPoints);
}
