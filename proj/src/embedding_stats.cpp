#include "gesture_fidelity/embedding_stats.hpp"

#include <algorithm>
#include <cmath>

namespace gf {

namespace {

Eigen::VectorXd row_vector(const EmbeddingMatrix& e, std::size_t i) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(e.dim));
  auto r = e.row(i);
  for (std::size_t k = 0; k < e.dim; ++k) v[static_cast<Eigen::Index>(k)] = r[k];
  return v;
}

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "alpha must be in [0,1], got " + std::to_string(alpha));
  }
}

}  // namespace

GaussianSummary gaussian_summary(const EmbeddingMatrix& e) {
  const std::size_t n = e.rows();
  if (n < 2) throw Error(ErrorKind::TooFewRows, std::to_string(n) + " rows, need at least 2");
  const auto d = static_cast<Eigen::Index>(e.dim);
  Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> raw(
      e.values.data(), static_cast<Eigen::Index>(n), d);
  const Eigen::MatrixXd x = raw.cast<double>();

  GaussianSummary g;
  g.count = n;
  g.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - g.mean.transpose();
  const Eigen::MatrixXd c = (centered.transpose() * centered) / static_cast<double>(n - 1);
  g.cov = 0.5 * (c + c.transpose());
  return g;
}

Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::DimensionMismatch, "matrix is not square");
  if (m.size() == 0) return m;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTolerance * scale) {
    throw Error(ErrorKind::NotSymmetric, "max |m - m^T| = " + std::to_string(asym));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()));
  Eigen::VectorXd lambda = eig.eigenvalues();
  if (lambda.minCoeff() < -kIndefiniteTolerance) {
    throw Error(ErrorKind::TooIndefinite, "eigenvalue " + std::to_string(lambda.minCoeff()));
  }
  lambda = lambda.cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd& v = eig.eigenvectors();
  Eigen::MatrixXd s = v * lambda.asDiagonal() * v.transpose();
  return 0.5 * (s + s.transpose());
}

double frechet_distance(const GaussianSummary& a, const GaussianSummary& b) {
  if (a.dim() != b.dim() || a.cov.rows() != b.cov.rows()) {
    throw Error(ErrorKind::DimensionMismatch,
                std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
  const double mean_term = (a.mean - b.mean).squaredNorm();
  const Eigen::MatrixXd root_a = matrix_sqrt_psd(a.cov);
  Eigen::MatrixXd inner = root_a * b.cov * root_a;
  inner = 0.5 * (inner + inner.transpose());
  // Only the trace of the root is needed.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(inner, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd lambda = eig.eigenvalues();
  if (lambda.size() > 0 && lambda.minCoeff() < -kIndefiniteTolerance * std::max(1.0, lambda.cwiseAbs().maxCoeff())) {
    throw Error(ErrorKind::TooIndefinite, "cross term eigenvalue " + std::to_string(lambda.minCoeff()));
  }
  const double trace_root = lambda.cwiseMax(0.0).cwiseSqrt().sum();
  const double d2 = mean_term + a.cov.trace() + b.cov.trace() - 2.0 * trace_root;
  return std::max(d2, 0.0);
}

EmbeddingMatrix group_average(const EmbeddingMatrix& e,
                              const std::map<std::string, std::string>& groups) {
  std::map<std::string, std::pair<std::vector<double>, std::size_t>> acc;
  for (std::size_t i = 0; i < e.rows(); ++i) {
    auto it = groups.find(e.ids[i]);
    if (it == groups.end()) throw Error(ErrorKind::UnmappedId, e.ids[i]);
    auto& [sum, n] = acc[it->second];
    if (sum.empty()) sum.assign(e.dim, 0.0);
    auto r = e.row(i);
    for (std::size_t k = 0; k < e.dim; ++k) sum[k] += r[k];
    ++n;
  }
  EmbeddingMatrix out;
  out.dim = e.dim;
  out.kind = e.kind;
  out.ids.reserve(acc.size());
  out.values.reserve(acc.size() * e.dim);
  for (const auto& [gid, entry] : acc) {
    out.ids.push_back(gid);
    for (double s : entry.first) {
      out.values.push_back(static_cast<float>(s / static_cast<double>(entry.second)));
    }
  }
  return out;
}

Eigen::VectorXd centroid(const EmbeddingMatrix& e) {
  if (e.rows() == 0) throw Error(ErrorKind::EmptyFrames, "no rows");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(e.dim));
  for (std::size_t i = 0; i < e.rows(); ++i) sum += row_vector(e, i);
  return sum / static_cast<double>(e.rows());
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                std::to_string(u.size()) + " vs " + std::to_string(v.size()));
  }
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  nu = std::sqrt(nu);
  nv = std::sqrt(nv);
  if (!(nu > 1e-12) || !(nv > 1e-12)) throw Error(ErrorKind::ZeroVector, "norm below 1e-12");
  return std::clamp(dot / (nu * nv), -1.0, 1.0);
}

AlignmentRecord video_alignment(const EmbeddingMatrix& synth_frames,
                                const Eigen::VectorXd& reference_mean,
                                std::span<const double> text) {
  if (synth_frames.rows() == 0) throw Error(ErrorKind::EmptyFrames, "no synthetic frames");
  const auto d = synth_frames.dim;
  if (static_cast<std::size_t>(reference_mean.size()) != d || text.size() != d) {
    throw Error(ErrorKind::DimensionMismatch,
                "frames " + std::to_string(d) + ", reference " +
                    std::to_string(reference_mean.size()) + ", text " + std::to_string(text.size()));
  }
  AlignmentRecord rec;
  const Eigen::VectorXd synth_mean = centroid(synth_frames);
  rec.vas = cosine_similarity({synth_mean.data(), d}, {reference_mean.data(), d});
  double pas = 0.0;
  for (std::size_t i = 0; i < synth_frames.rows(); ++i) {
    const Eigen::VectorXd r = row_vector(synth_frames, i);
    pas += cosine_similarity({r.data(), d}, text);
  }
  rec.pas = pas / static_cast<double>(synth_frames.rows());
  return rec;
}

AlignmentRecord video_alignment(const EmbeddingMatrix& synth_frames,
                                const EmbeddingMatrix& real_ref_frames,
                                std::span<const double> text) {
  if (real_ref_frames.rows() == 0) throw Error(ErrorKind::EmptyFrames, "no reference frames");
  if (real_ref_frames.dim != synth_frames.dim) {
    throw Error(ErrorKind::DimensionMismatch, std::to_string(synth_frames.dim) + " vs " +
                                                  std::to_string(real_ref_frames.dim));
  }
  return video_alignment(synth_frames, centroid(real_ref_frames), text);
}

double gas(const AlignmentRecord& record, const GasConfig& cfg) {
  check_alpha(cfg.alpha);
  return cfg.alpha * record.pas + (1.0 - cfg.alpha) * record.vas;
}

std::vector<IsoGasLine> iso_gas_lines(std::span<const AlignmentRecord> records,
                                      std::span<const double> alphas) {
  if (records.empty()) throw Error(ErrorKind::EmptyInput, "no alignment records");
  std::vector<IsoGasLine> lines;
  for (double alpha : alphas) {
    check_alpha(alpha);
    if (alpha >= 1.0) {
      throw Error(ErrorKind::InvalidArgument, "alpha = 1 has no line form in the (VAS, PAS) plane");
    }
    double level = 0.0;
    for (const auto& r : records) level += gas(r, {alpha});
    level /= static_cast<double>(records.size());

    IsoGasLine line;
    line.alpha = alpha;
    line.level = level;
    if (alpha == 0.0) {
      line.vertical = true;
      line.intercept = level;  // VAS coordinate of the vertical line
    } else {
      line.intercept = level / alpha;
      line.slope = -(1.0 - alpha) / alpha;
    }
    lines.push_back(line);
  }
  return lines;
}

}  // namespace gf
