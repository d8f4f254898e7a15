#pragma once

// Finger joint angles and the real-vs-synthetic comparison of their
// distributions (KL divergence and 1-D earth mover's distance).

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gesture_fidelity/data_model.hpp"

namespace gf {

enum class Finger { Thumb, Index, Middle, Ring, Pinky };
enum class JointName { CMC, MCP, PIP, DIP, IP };

std::string_view to_string(Finger f) noexcept;
std::string_view to_string(JointName j) noexcept;

struct JointSpec {
  Finger finger = Finger::Thumb;
  JointName joint = JointName::CMC;
  std::array<std::uint8_t, 3> triple{};  // prev, joint, next landmark indices

  std::uint8_t joint_landmark() const noexcept { return triple[1]; }
  friend bool operator==(const JointSpec&, const JointSpec&) = default;
};

// Ordered thumb -> pinky, proximal -> distal.
inline constexpr std::array<JointSpec, 15> kCanonicalJoints = {{
    {Finger::Thumb, JointName::CMC, {0, 1, 2}},
    {Finger::Thumb, JointName::MCP, {1, 2, 3}},
    {Finger::Thumb, JointName::IP, {2, 3, 4}},
    {Finger::Index, JointName::MCP, {0, 5, 6}},
    {Finger::Index, JointName::PIP, {5, 6, 7}},
    {Finger::Index, JointName::DIP, {6, 7, 8}},
    {Finger::Middle, JointName::MCP, {0, 9, 10}},
    {Finger::Middle, JointName::PIP, {9, 10, 11}},
    {Finger::Middle, JointName::DIP, {10, 11, 12}},
    {Finger::Ring, JointName::MCP, {0, 13, 14}},
    {Finger::Ring, JointName::PIP, {13, 14, 15}},
    {Finger::Ring, JointName::DIP, {14, 15, 16}},
    {Finger::Pinky, JointName::MCP, {0, 17, 18}},
    {Finger::Pinky, JointName::PIP, {17, 18, 19}},
    {Finger::Pinky, JointName::DIP, {18, 19, 20}},
}};

inline constexpr double kDefaultSegmentEpsilon = 1e-9;
inline constexpr std::size_t kDefaultAngleBins = 36;
inline constexpr double kDefaultKlEpsilon = 1e-10;

/// Angle at `joint` between the segments to `prev` and `next`, in degrees.
/// Throws DegenerateSegment when either segment is shorter than `eps_len`.
double joint_angle(const LandmarkPoint& prev, const LandmarkPoint& joint,
                   const LandmarkPoint& next, double eps_len = kDefaultSegmentEpsilon);

struct AngleSamples {
  std::vector<double> degrees;
  std::size_t degenerate_skipped = 0;
};

AngleSamples extract_joint_angles(std::span<const LandmarkTrack> tracks, const JointSpec& joint,
                                  HandPolicy hand = HandPolicy::Both,
                                  double eps_len = kDefaultSegmentEpsilon);

struct AngleHistogram {
  std::optional<JointSpec> joint;
  std::vector<double> bin_edges;  // bins + 1 edges over [0, 180]
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  std::size_t bins() const noexcept { return counts.size(); }
  double bin_width() const noexcept { return 180.0 / static_cast<double>(counts.size()); }
};

/// Uniform bins over [0, 180]; intervals are right-open except the last.
AngleHistogram histogram(std::span<const double> angles, std::size_t bins,
                         std::optional<JointSpec> joint = std::nullopt);

/// KL(P||Q) in nats after adding `epsilon` to every bin and renormalizing.
double kl_divergence(const AngleHistogram& p, const AngleHistogram& q,
                     double epsilon = kDefaultKlEpsilon);

/// Wasserstein-1 between the normalized histograms, in bin-index units.
double emd_1d_bins(const AngleHistogram& p, const AngleHistogram& q);
/// Same distance scaled by the bin width, in degrees.
double emd_1d(const AngleHistogram& p, const AngleHistogram& q);

struct DivergencePair {
  JointSpec joint;
  double kl = 0.0;
  double emd_deg = 0.0;
  double emd_bins = 0.0;
  std::size_t real_samples = 0;
  std::size_t synth_samples = 0;
};

struct AngleComparisonOptions {
  std::size_t bins = kDefaultAngleBins;
  HandPolicy hand = HandPolicy::Both;
  double kl_epsilon = kDefaultKlEpsilon;
  double eps_len = kDefaultSegmentEpsilon;
};

/// One pair per canonical joint, in kCanonicalJoints order.
std::vector<DivergencePair> compare_angle_distributions(
    std::span<const LandmarkTrack> real, std::span<const LandmarkTrack> synth,
    const AngleComparisonOptions& options = {});

}  // namespace gf
