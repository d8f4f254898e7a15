#pragma once

// Pose-embedding diversity: mean 63-d hand vectors per video, cosine distance
// matrices and their inter/intra-condition statistics, an exact t-SNE
// projection driven directly by a precomputed distance matrix, and
// one-standard-deviation ellipses of the projected conditions.

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gesture_fidelity/data_model.hpp"

namespace gf {

inline constexpr std::size_t kPoseDim = kLandmarkCount * 3;

struct PoseEmbedding {
  std::string video_id;
  std::array<double, kPoseDim> vector{};
};

/// Per-frame vectors are the 21 (x, y, z) triples in landmark order; the
/// result is their mean over frames where the selected hand is present.
PoseEmbedding mean_pose_embedding(const LandmarkTrack& track,
                                  HandPolicy hand = HandPolicy::MostConfident);

struct DistanceMatrix {
  std::vector<std::string> ids;
  std::vector<double> values;  // row-major, n * n

  std::size_t size() const noexcept { return ids.size(); }
  double at(std::size_t i, std::size_t j) const { return values[i * ids.size() + j]; }
};

/// d(i, j) = 1 - cos(v_i, v_j); exactly symmetric with a zero diagonal.
DistanceMatrix cosine_distance_matrix(std::span<const PoseEmbedding> embeddings);

struct ConditionPairStats {
  Condition first = Condition::Reference;
  Condition second = Condition::Reference;  // first <= second
  double mean = 0.0;
  double std = 0.0;  // population
  std::size_t pairs = 0;

  bool intra() const noexcept { return first == second; }
};

struct InterIntraStats {
  std::vector<ConditionPairStats> pairs;
  // Conditions with one member: their intra statistic is undefined.
  std::vector<Condition> singleton_conditions;
};

InterIntraStats inter_intra_stats(const DistanceMatrix& m,
                                  const std::map<std::string, Condition>& labels);

struct TsneConfig {
  double perplexity = 10.0;
  int output_dims = 2;
  int iterations = 1000;
  double learning_rate = 200.0;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  int momentum_switch_iteration = 250;
  double early_exaggeration = 12.0;
  int exaggeration_iterations = 250;
  std::uint64_t seed = 42;
  double perplexity_tolerance = 1e-5;
  int bandwidth_max_iterations = 50;
};

struct TsnePoint {
  std::string id;
  std::array<double, 2> xy{};
};

struct TsneResult {
  std::vector<TsnePoint> points;  // same order as the input ids
  double initial_kl = 0.0;
  double final_kl = 0.0;
  // Ids whose bandwidth search ended without meeting the perplexity tolerance.
  std::vector<std::string> nonconvergent_bandwidth;
};

/// Exact O(N^2) t-SNE on a precomputed distance matrix. The given distances
/// take the place of squared distances in the Gaussian affinities.
/// Deterministic for a fixed seed and equivariant under input permutation.
TsneResult tsne_from_distances(const DistanceMatrix& m, const TsneConfig& cfg = {});

struct EllipseSummary {
  std::array<double, 2> center{};
  std::array<double, 3> cov2d{};  // xx, xy, yy
  double major = 0.0;
  double minor = 0.0;
  double angle_rad = 0.0;  // major-axis orientation in (-pi/2, pi/2]
};

/// Center and sample covariance of the points; axes are one standard deviation.
EllipseSummary condition_ellipse(std::span<const std::array<double, 2>> points);

}  // namespace gf
