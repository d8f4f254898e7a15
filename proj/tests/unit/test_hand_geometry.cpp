#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "test_util.hpp"

#include "gesture_fidelity/hand_geometry.hpp"

using namespace gf;
using testutil::error_kind;

namespace {

// Fingers laid out along distinct rays from the wrist, every chain straight.
std::array<LandmarkPoint, 21> flat_hand() {
  std::array<LandmarkPoint, 21> p{};
  p[0] = {0, 0, 0};
  for (int f = 0; f < 5; ++f) {
    const double a = 0.3 * f;
    for (int s = 1; s <= 4; ++s) {
      p[static_cast<std::size_t>(1 + 4 * f + s - 1)] = {s * std::cos(a), s * std::sin(a), 0.0};
    }
  }
  return p;
}

LandmarkTrack flat_track(std::size_t frames) {
  return oracle::track_from("flat", frames, 30.0, [](std::size_t) { return flat_hand(); });
}

}  // namespace

TEST_CASE("joint angle: collinear and perpendicular") {
  CHECK(joint_angle({0, 0, 0}, {1, 0, 0}, {2, 0, 0}) == 180.0);
  CHECK(std::abs(joint_angle({0, 0, 0}, {1, 0, 0}, {1, 1, 0}) - 90.0) < 1e-9);
  CHECK(joint_angle({1, 0, 0}, {0, 0, 0}, {1, 0, 0}) == 0.0);
}

TEST_CASE("joint angle: matches extended-precision oracle on random triples") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    LandmarkPoint a{u(rng), u(rng), u(rng)}, b{u(rng), u(rng), u(rng)}, c{u(rng), u(rng), u(rng)};
    CHECK(std::abs(joint_angle(a, b, c) - oracle::angle_deg(a, b, c)) < 1e-9);
  }
}

TEST_CASE("joint angle: degenerate segment") {
  CHECK(error_kind([] { joint_angle({0, 0, 0}, {0, 0, 0}, {1, 0, 0}); }) == ErrorKind::DegenerateSegment);
  CHECK(error_kind([] { joint_angle({1, 0, 0}, {0, 0, 0}, {0, 0, 1e-12}); }) == ErrorKind::DegenerateSegment);
}

TEST_CASE("canonical joints") {
  CHECK(kCanonicalJoints.size() == 15);
  CHECK(kCanonicalJoints[4].triple == std::array<std::uint8_t, 3>{5, 6, 7});
  CHECK(to_string(kCanonicalJoints[4].finger) == "Index");
  CHECK(to_string(kCanonicalJoints[4].joint) == "PIP");
  CHECK(kCanonicalJoints[6].joint_landmark() == 9);
}

TEST_CASE("extraction: flat hand gives 180 everywhere, one angle per frame") {
  std::vector<LandmarkTrack> t = {flat_track(5)};
  for (const auto& j : kCanonicalJoints) {
    auto s = extract_joint_angles(t, j);
    REQUIRE(s.degrees.size() == 5);
    for (double d : s.degrees) CHECK(d == doctest::Approx(180.0));
  }
}

TEST_CASE("extraction: right angle at index PIP") {
  auto p = flat_hand();
  p[5] = {0, 0, 0.5};
  p[6] = {1, 0, 0.5};
  p[7] = {1, 1, 0.5};
  std::vector<LandmarkTrack> t = {oracle::track_from("r", 3, 30.0, [&](std::size_t) { return p; })};
  for (double d : extract_joint_angles(t, kCanonicalJoints[4]).degrees) CHECK(std::abs(d - 90.0) < 1e-9);
}

TEST_CASE("extraction: both hands and degenerate frames") {
  auto t = flat_track(4);
  t.frames[1].hands.push_back(oracle::hand(Handedness::Left, 0.7, flat_hand()));
  auto bad = flat_hand();
  bad[6] = bad[5];
  t.frames[2].hands[0].points = bad;
  std::vector<LandmarkTrack> ts = {t};
  auto s = extract_joint_angles(ts, kCanonicalJoints[4], HandPolicy::Both);
  CHECK(s.degrees.size() == 4);
  CHECK(s.degenerate_skipped == 1);
  auto r = extract_joint_angles(ts, kCanonicalJoints[4], HandPolicy::Right);
  CHECK(r.degrees.size() == 3);
  std::vector<LandmarkTrack> empty = {LandmarkTrack{}};
  CHECK(error_kind([&] { extract_joint_angles(empty, kCanonicalJoints[0]); }) == ErrorKind::EmptyInput);
}

TEST_CASE("histogram binning") {
  std::vector<double> zero = {0.0};
  auto h0 = histogram(zero, 36);
  CHECK(h0.counts[0] == 1);
  std::vector<double> top = {180.0};
  auto h1 = histogram(top, 36);
  CHECK(h1.counts[35] == 1);
  CHECK(h1.bin_width() == 5.0);
  CHECK(h1.bin_edges.size() == 37);
  // 360 angles on a uniform grid with bin-centred spacing.
  std::vector<double> grid;
  for (int i = 0; i < 360; ++i) grid.push_back((i + 0.5) * 0.5);
  auto hg = histogram(grid, 36);
  for (auto c : hg.counts) CHECK(c == 10);
  std::vector<double> edge = {5.0, 10.0, 4.999999999};
  auto he = histogram(edge, 36);
  CHECK(he.counts[0] == 1);
  CHECK(he.counts[1] == 1);
  CHECK(he.counts[2] == 1);
  CHECK(error_kind([&] { histogram(edge, 1); }) == ErrorKind::InvalidArgument);
  std::vector<double> none;
  CHECK(error_kind([&] { histogram(none, 36); }) == ErrorKind::EmptyInput);
}

TEST_CASE("KL divergence") {
  auto p = oracle::make_histogram({1, 1});
  auto q = oracle::make_histogram({3, 1});
  CHECK(kl_divergence(p, p) < 1e-9);
  CHECK(kl_divergence(p, q) == doctest::Approx(0.143841036).epsilon(1e-6));
  CHECK(kl_divergence(p, q) == doctest::Approx(oracle::kl_sum({1, 1}, {3, 1}, 1e-10)).epsilon(1e-12));
  // Empty bins stay finite thanks to the smoothing.
  auto a = oracle::make_histogram({4, 0});
  auto b = oracle::make_histogram({0, 4});
  CHECK(std::isfinite(kl_divergence(a, b)));
  CHECK(kl_divergence(a, b) == doctest::Approx(oracle::kl_sum({4, 0}, {0, 4}, 1e-10)).epsilon(1e-9));
  CHECK(error_kind([&] { kl_divergence(p, oracle::make_histogram({1, 1, 1})); }) == ErrorKind::BinMismatch);
  CHECK(error_kind([&] { kl_divergence(p, oracle::make_histogram({0, 0})); }) == ErrorKind::EmptyInput);
}

TEST_CASE("KL divergence: random pairs against direct summation") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> bins(2, 12), count(0, 20);
  for (int i = 0; i < 300; ++i) {
    const auto b = static_cast<std::size_t>(bins(rng));
    std::vector<std::uint64_t> p(b), q(b);
    for (auto& v : p) v = static_cast<std::uint64_t>(count(rng));
    for (auto& v : q) v = static_cast<std::uint64_t>(count(rng));
    p[0] += 1;
    q[0] += 1;
    const double got = kl_divergence(oracle::make_histogram(p), oracle::make_histogram(q));
    CHECK(got >= 0.0);
    CHECK(got == doctest::Approx(oracle::kl_sum(p, q, 1e-10)).epsilon(1e-9));
  }
}

TEST_CASE("EMD: point masses and symmetry") {
  auto a = oracle::make_histogram({1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0,
                                   0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0});
  auto b = a;
  b.counts[0] = 0;
  b.counts[3] = 1;
  CHECK(emd_1d(a, b) == doctest::Approx(15.0));
  CHECK(emd_1d_bins(a, b) == doctest::Approx(3.0));
  CHECK(emd_1d(a, a) == 0.0);
  CHECK(emd_1d(b, a) == emd_1d(a, b));
}

TEST_CASE("EMD: exhaustive agreement with the transport LP on small spaces") {
  // All pairs for 3 bins up to mass 6 and 4 bins up to mass 3.
  for (auto [bins, max_mass] : {std::pair<std::size_t, std::uint64_t>{3, 6}, {4, 3}}) {
    std::vector<std::vector<std::uint64_t>> all;
    for (std::uint64_t m = 1; m <= max_mass; ++m) oracle::compositions(bins, m, all);
    for (const auto& p : all) {
      for (const auto& q : all) {
        const double lp = oracle::transport_lp(p, q);
        CHECK(std::abs(emd_1d_bins(oracle::make_histogram(p), oracle::make_histogram(q)) - lp) < 1e-12);
      }
    }
  }
}

TEST_CASE("compare: identical inputs give zero divergence") {
  auto t = flat_track(6);
  for (std::size_t i = 0; i < t.frames.size(); ++i) t.frames[i].hands[0].points[7].z = 0.1 * static_cast<double>(i);
  std::vector<LandmarkTrack> ts = {t};
  auto pairs = compare_angle_distributions(ts, ts);
  REQUIRE(pairs.size() == 15);
  for (const auto& p : pairs) {
    CHECK(p.kl < 1e-9);
    CHECK(p.emd_deg == 0.0);
  }
}

TEST_CASE("compare: only the perturbed joint diverges") {
  // Index PIP bent in the synthetic set by moving landmark 7 out of line;
  // that moves the index DIP angle too, so bend it back with landmark 8.
  auto real = flat_track(10);
  auto synth = flat_track(10);
  for (auto& f : synth.frames) {
    auto& p = f.hands[0].points;
    const LandmarkPoint d{p[7].x - p[6].x, p[7].y - p[6].y, p[7].z - p[6].z};
    // Rotate segment 6->7 by 60 degrees out of plane and keep 7->8 collinear with it.
    const double len = std::sqrt(d.x * d.x + d.y * d.y);
    const LandmarkPoint bent{p[6].x + d.x * 0.5, p[6].y + d.y * 0.5, len * std::sqrt(3.0) / 2.0};
    p[7] = bent;
    p[8] = {bent.x + (bent.x - p[6].x), bent.y + (bent.y - p[6].y), bent.z * 2.0};
  }
  std::vector<LandmarkTrack> r = {real}, s = {synth};
  auto pairs = compare_angle_distributions(r, s);
  for (const auto& p : pairs) {
    const bool target = p.joint == kCanonicalJoints[4];
    if (target) {
      CHECK(p.kl > 0.01);
      CHECK(p.emd_deg > 0.01);
      // 180 and 120 degrees land 11 bins apart; the exact gap is 12 bins.
      CHECK(std::abs(p.emd_deg - 60.0) <= 5.0);
    } else {
      CHECK(p.kl < 1e-6);
      CHECK(p.emd_deg < 1e-6);
    }
  }
}

TEST_CASE("compare: errors name the joint") {
  std::vector<LandmarkTrack> good = {flat_track(3)};
  std::vector<LandmarkTrack> none = {LandmarkTrack{}};
  try {
    compare_angle_distributions(good, none);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyInput);
    CHECK(std::string(e.what()).find("Thumb") != std::string::npos);
  }
}
