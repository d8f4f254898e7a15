#include "gesture_fidelity/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gf {

std::string_view to_string(DerivativeOrder order) noexcept {
  switch (order) {
    case DerivativeOrder::Velocity: return "velocity";
    case DerivativeOrder::Acceleration: return "acceleration";
    case DerivativeOrder::Jerk: return "jerk";
  }
  return "velocity";
}

std::string_view to_string(MagnitudeAggregation a) noexcept {
  switch (a) {
    case MagnitudeAggregation::Mean: return "mean";
    case MagnitudeAggregation::Max: return "max";
    case MagnitudeAggregation::WristOnly: return "wrist_only";
  }
  return "mean";
}

MagnitudeAggregation parse_magnitude_aggregation(std::string_view s) {
  if (s == "mean") return MagnitudeAggregation::Mean;
  if (s == "max") return MagnitudeAggregation::Max;
  if (s == "wrist_only") return MagnitudeAggregation::WristOnly;
  throw Error(ErrorKind::InvalidArgument, "unknown aggregation '" + std::string(s) + "'");
}

namespace {

using Vec3 = std::array<double, 3>;
using HandPositions = std::array<Vec3, kLandmarkCount>;

double aggregate(const HandPositions& d, MagnitudeAggregation how) {
  auto norm = [](const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); };
  switch (how) {
    case MagnitudeAggregation::WristOnly:
      return norm(d[0]);
    case MagnitudeAggregation::Max: {
      double m = 0.0;
      for (const auto& v : d) m = std::max(m, norm(v));
      return m;
    }
    case MagnitudeAggregation::Mean:
      break;
  }
  double sum = 0.0;
  for (const auto& v : d) sum += norm(v);
  return sum / static_cast<double>(kLandmarkCount);
}

// Differences one contiguous run `order` times and appends the magnitudes.
void difference_run(std::vector<HandPositions> pos, const std::vector<double>& t,
                    int order, MagnitudeAggregation how, std::vector<MotionSample>& out) {
  for (int o = 0; o < order; ++o) {
    const std::size_t n = pos.size() - 1;
    for (std::size_t i = 0; i < n; ++i) {
      const double dt = t[i + 1] - t[i];
      if (!(dt > 0.0)) {
        throw Error(ErrorKind::ZeroTimeStep,
                    "non-increasing timestamps at t=" + std::to_string(t[i]));
      }
      for (std::size_t l = 0; l < kLandmarkCount; ++l) {
        for (int c = 0; c < 3; ++c) pos[i][l][c] = (pos[i + 1][l][c] - pos[i][l][c]) / dt;
      }
    }
    pos.pop_back();
  }
  for (std::size_t i = 0; i < pos.size(); ++i) out.push_back({t[i], aggregate(pos[i], how)});
}

}  // namespace

MotionSeries finite_difference(const LandmarkTrack& track, DerivativeOrder order,
                               const KinematicsOptions& options) {
  const int k = static_cast<int>(order);
  MotionSeries series;
  series.video_id = track.video_id;
  series.order = order;

  bool any_run = false;
  for (const auto& hand : select_hand_series(track, options.hand)) {
    std::vector<HandPositions> pos;
    std::vector<double> t;
    auto flush = [&] {
      if (pos.size() >= static_cast<std::size_t>(k + 1)) {
        any_run = true;
        difference_run(std::move(pos), t, k, options.aggregation, series.values);
      }
      pos.clear();
      t.clear();
    };
    for (std::size_t f = 0; f < track.frames.size(); ++f) {
      const HandObservation* obs = hand.per_frame[f];
      if (!obs) {
        flush();
        continue;
      }
      HandPositions p;
      for (std::size_t l = 0; l < kLandmarkCount; ++l) {
        p[l] = {obs->points[l].x, obs->points[l].y, obs->points[l].z};
      }
      pos.push_back(p);
      t.push_back(track.frames[f].timestamp_s);
    }
    flush();
  }
  if (!any_run) {
    throw Error(ErrorKind::TooShort, track.video_id + ": no run of " +
                                         std::to_string(k + 1) +
                                         " consecutive frames with the selected hand");
  }
  return series;
}

Moments population_moments(std::span<const double> values) {
  Moments m;
  m.count = values.size();
  if (values.empty()) return m;
  const double n = static_cast<double>(values.size());
  m.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - m.mean) * (v - m.mean);
  m.std = std::sqrt(ss / n);
  return m;
}

KinematicsSummary summarize_kinematics(std::span<const LandmarkTrack> tracks,
                                       const KinematicsOptions& options) {
  std::vector<const LandmarkTrack*> ordered;
  ordered.reserve(tracks.size());
  for (const auto& t : tracks) ordered.push_back(&t);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto* a, const auto* b) { return a->video_id < b->video_id; });

  KinematicsSummary summary;
  std::array<std::vector<double>, 3> pooled;
  for (const auto* track : ordered) {
    VideoKinematics vk{track->video_id, {}};
    for (DerivativeOrder o : kAllOrders) {
      const int idx = static_cast<int>(o) - 1;
      try {
        auto series = finite_difference(*track, o, options);
        std::vector<double> mags;
        mags.reserve(series.values.size());
        for (const auto& s : series.values) mags.push_back(s.magnitude);
        vk.mean_by_order[idx] = population_moments(mags).mean;
        pooled[idx].insert(pooled[idx].end(), mags.begin(), mags.end());
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::TooShort) throw;
      }
    }
    summary.per_video.push_back(std::move(vk));
  }
  for (DerivativeOrder o : kAllOrders) {
    const int idx = static_cast<int>(o) - 1;
    if (pooled[idx].empty()) {
      throw Error(ErrorKind::EmptyInput,
                  std::string("no track yields a ") + std::string(to_string(o)) + " series");
    }
    summary.by_order[idx] = population_moments(pooled[idx]);
  }
  return summary;
}

}  // namespace gf
