#pragma once

// Gaussian summaries and Frechet distances over embeddings (FID / FVD math),
// cosine alignment, and the gesture alignment score (GAS) with its iso-lines.

#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gesture_fidelity/data_model.hpp"

namespace gf {

struct GaussianSummary {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  std::size_t count = 0;

  Eigen::Index dim() const noexcept { return mean.size(); }
};

/// Sample mean and (N-1)-denominator covariance, symmetrized.
GaussianSummary gaussian_summary(const EmbeddingMatrix& e);

inline constexpr double kSymmetryTolerance = 1e-8;
inline constexpr double kIndefiniteTolerance = 1e-6;

/// Principal square root of a symmetric PSD matrix via eigendecomposition;
/// eigenvalues in [-1e-6, 0) are clamped to zero.
Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& m);

/// Squared Frechet distance between two Gaussians:
///   |mu_a - mu_b|^2 + tr(S_a + S_b - 2 (S_a^1/2 S_b S_a^1/2)^1/2)
/// clamped at zero.
double frechet_distance(const GaussianSummary& a, const GaussianSummary& b);

/// Averages rows sharing a group id. Output ids are the sorted group ids.
EmbeddingMatrix group_average(const EmbeddingMatrix& e,
                              const std::map<std::string, std::string>& groups);

/// Column means of all rows.
Eigen::VectorXd centroid(const EmbeddingMatrix& e);

double cosine_similarity(std::span<const double> u, std::span<const double> v);

struct AlignmentRecord {
  std::string video_id;
  double vas = 0.0;  // visual alignment: synthetic vs reference frames
  double pas = 0.0;  // prompt alignment: frames vs text
};

/// VAS compares the mean synthetic frame with the mean reference frame; PAS
/// averages the per-frame similarity to the text embedding.
AlignmentRecord video_alignment(const EmbeddingMatrix& synth_frames,
                                const EmbeddingMatrix& real_ref_frames,
                                std::span<const double> text);

/// Same as above with the reference given directly as a mean embedding.
AlignmentRecord video_alignment(const EmbeddingMatrix& synth_frames,
                                const Eigen::VectorXd& reference_mean,
                                std::span<const double> text);

struct GasConfig {
  double alpha = 0.5;
};

/// alpha * PAS + (1 - alpha) * VAS.
double gas(const AlignmentRecord& record, const GasConfig& cfg);

/// Locus of (VAS, PAS) points with alpha*PAS + (1-alpha)*VAS = level.
/// For alpha > 0: PAS = intercept + slope * VAS. For alpha == 0 the line is
/// vertical at VAS = level.
struct IsoGasLine {
  double alpha = 0.0;
  double level = 0.0;
  bool vertical = false;
  double intercept = 0.0;
  double slope = 0.0;

  double pas_at(double vas) const { return intercept + slope * vas; }
};

inline const std::vector<double> kDefaultAlphas = {0.1, 0.2, 0.4, 0.8};

std::vector<IsoGasLine> iso_gas_lines(std::span<const AlignmentRecord> records,
                                      std::span<const double> alphas);

}  // namespace gf
