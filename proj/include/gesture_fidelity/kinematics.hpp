#pragma once

// Velocity / acceleration / jerk magnitudes from landmark trajectories.
//
// Derivatives are forward differences taken over contiguous runs of frames in
// which the selected hand is present; a missing hand splits the run. Units are
// normalized image coordinates per second^order.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gesture_fidelity/data_model.hpp"

namespace gf {

enum class DerivativeOrder { Velocity = 1, Acceleration = 2, Jerk = 3 };

inline constexpr std::array<DerivativeOrder, 3> kAllOrders = {
    DerivativeOrder::Velocity, DerivativeOrder::Acceleration, DerivativeOrder::Jerk};

std::string_view to_string(DerivativeOrder order) noexcept;

// How the 21 per-landmark derivative norms collapse into one value per frame.
enum class MagnitudeAggregation { Mean, Max, WristOnly };

std::string_view to_string(MagnitudeAggregation a) noexcept;
MagnitudeAggregation parse_magnitude_aggregation(std::string_view s);

struct KinematicsOptions {
  HandPolicy hand = HandPolicy::MostConfident;
  MagnitudeAggregation aggregation = MagnitudeAggregation::Mean;
};

struct MotionSample {
  double timestamp_s = 0.0;
  double magnitude = 0.0;
};

struct MotionSeries {
  std::string video_id;
  DerivativeOrder order = DerivativeOrder::Velocity;
  std::vector<MotionSample> values;
};

/// Throws TooShort when no run has order+1 frames and ZeroTimeStep on
/// non-increasing timestamps inside a run.
MotionSeries finite_difference(const LandmarkTrack& track, DerivativeOrder order,
                               const KinematicsOptions& options = {});

/// Population (N-denominator) moments.
struct Moments {
  double mean = 0.0;
  double std = 0.0;
  std::size_t count = 0;
};

Moments population_moments(std::span<const double> values);

struct VideoKinematics {
  std::string video_id;
  std::array<std::optional<double>, 3> mean_by_order;
};

struct KinematicsSummary {
  std::array<Moments, 3> by_order;  // indexed by order - 1
  std::vector<VideoKinematics> per_video;

  const Moments& at(DerivativeOrder o) const {
    return by_order[static_cast<int>(o) - 1];
  }
};

/// Pools every per-frame magnitude of every track, reducing in video_id order.
KinematicsSummary summarize_kinematics(std::span<const LandmarkTrack> tracks,
                                       const KinematicsOptions& options = {});

}  // namespace gf
