#include "gesture_fidelity/diversity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

#include "gesture_fidelity/kinematics.hpp"

namespace gf {

PoseEmbedding mean_pose_embedding(const LandmarkTrack& track, HandPolicy hand) {
  PoseEmbedding out;
  out.video_id = track.video_id;
  std::size_t n = 0;
  for (const auto& series : select_hand_series(track, hand)) {
    for (const HandObservation* h : series.per_frame) {
      if (!h) continue;
      for (std::size_t l = 0; l < kLandmarkCount; ++l) {
        out.vector[3 * l] += h->points[l].x;
        out.vector[3 * l + 1] += h->points[l].y;
        out.vector[3 * l + 2] += h->points[l].z;
      }
      ++n;
    }
  }
  if (n == 0) throw Error(ErrorKind::NoHandFrames, track.video_id);
  for (double& v : out.vector) v /= static_cast<double>(n);
  return out;
}

DistanceMatrix cosine_distance_matrix(std::span<const PoseEmbedding> embeddings) {
  const std::size_t n = embeddings.size();
  if (n < 2) throw Error(ErrorKind::EmptyInput, "need at least 2 embeddings");
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (double v : embeddings[i].vector) s += v * v;
    norms[i] = std::sqrt(s);
    if (!(norms[i] > 1e-12)) throw Error(ErrorKind::ZeroVector, embeddings[i].video_id);
  }
  DistanceMatrix m;
  m.values.assign(n * n, 0.0);
  for (const auto& e : embeddings) m.ids.push_back(e.video_id);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < kPoseDim; ++k) {
        dot += embeddings[i].vector[k] * embeddings[j].vector[k];
      }
      const double cosine = std::clamp(dot / (norms[i] * norms[j]), -1.0, 1.0);
      const double d = std::clamp(1.0 - cosine, 0.0, 2.0);
      m.values[i * n + j] = d;
      m.values[j * n + i] = d;
    }
  }
  return m;
}

InterIntraStats inter_intra_stats(const DistanceMatrix& m,
                                  const std::map<std::string, Condition>& labels) {
  const std::size_t n = m.size();
  std::vector<Condition> label(n);
  std::map<Condition, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < n; ++i) {
    auto it = labels.find(m.ids[i]);
    if (it == labels.end()) throw Error(ErrorKind::UnlabeledId, m.ids[i]);
    label[i] = it->second;
    members[it->second].push_back(i);
  }

  InterIntraStats stats;
  for (auto a = members.begin(); a != members.end(); ++a) {
    for (auto b = a; b != members.end(); ++b) {
      std::vector<double> d;
      if (a == b) {
        if (a->second.size() < 2) {
          stats.singleton_conditions.push_back(a->first);
          continue;
        }
        for (std::size_t x = 0; x < a->second.size(); ++x) {
          for (std::size_t y = x + 1; y < a->second.size(); ++y) {
            d.push_back(m.at(a->second[x], a->second[y]));
          }
        }
      } else {
        for (std::size_t i : a->second) {
          for (std::size_t j : b->second) d.push_back(m.at(i, j));
        }
      }
      const Moments mo = population_moments(d);
      stats.pairs.push_back({a->first, b->first, mo.mean, mo.std, mo.count});
    }
  }
  return stats;
}

// ---------------------------------------------------------------------------
// t-SNE

namespace {

struct Bandwidth {
  std::vector<double> row;  // conditional P(j | i)
  bool converged = false;
};

Bandwidth search_bandwidth(std::span<const double> dist, std::size_t self,
                           const TsneConfig& cfg) {
  const std::size_t n = dist.size();
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    if (j != self) dmin = std::min(dmin, dist[j]);
  }
  const double target = std::log(cfg.perplexity);
  double beta = 1.0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  Bandwidth out;
  out.row.assign(n, 0.0);
  auto evaluate = [&](double b) {
    double sum = 0.0, weighted = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == self) {
        out.row[j] = 0.0;
        continue;
      }
      const double shifted = dist[j] - dmin;
      out.row[j] = std::exp(-b * shifted);
      sum += out.row[j];
      weighted += shifted * out.row[j];
    }
    for (double& p : out.row) p /= sum;
    return std::log(sum) + b * weighted / sum;
  };

  for (int it = 0; it < cfg.bandwidth_max_iterations; ++it) {
    const double diff = evaluate(beta) - target;
    if (std::abs(diff) < cfg.perplexity_tolerance) {
      out.converged = true;
      return out;
    }
    if (diff > 0.0) {
      lo = beta;
      beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
    } else {
      hi = beta;
      beta = std::isinf(lo) ? beta * 0.5 : 0.5 * (beta + lo);
    }
  }
  // Not converged: keep the last bracket midpoint.
  evaluate(beta);
  return out;
}

double kl_of(const std::vector<double>& p, const std::vector<double>& y, std::size_t n) {
  double sum_q = 0.0;
  std::vector<double> num(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = y[2 * i] - y[2 * j], dy = y[2 * i + 1] - y[2 * j + 1];
      const double q = 1.0 / (1.0 + dx * dx + dy * dy);
      num[i * n + j] = num[j * n + i] = q;
      sum_q += 2.0 * q;
    }
  }
  double kl = 0.0;
  for (std::size_t k = 0; k < n * n; ++k) {
    if (p[k] > 0.0) kl += p[k] * std::log(p[k] / (num[k] / sum_q));
  }
  return kl;
}

}  // namespace

TsneResult tsne_from_distances(const DistanceMatrix& m, const TsneConfig& cfg) {
  const std::size_t n = m.size();
  if (cfg.output_dims != 2) throw Error(ErrorKind::InvalidArgument, "output_dims must be 2");
  if (n < 4) throw Error(ErrorKind::TooFewPoints, std::to_string(n) + " points, need at least 4");
  if (!(cfg.perplexity > 0.0) ||
      !(cfg.perplexity < static_cast<double>(n - 1) / 3.0)) {
    throw Error(ErrorKind::PerplexityTooHigh,
                "perplexity " + std::to_string(cfg.perplexity) + " requires more than " +
                    std::to_string(static_cast<std::size_t>(3.0 * cfg.perplexity + 1.0)) + " points");
  }
  if (cfg.iterations < 0 || !(cfg.learning_rate > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "iterations must be >= 0 and learning_rate > 0");
  }

  // Everything below runs in sorted-id order so the result does not depend on
  // the order of the input.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return m.ids[a] < m.ids[b]; });
  for (std::size_t k = 1; k < n; ++k) {
    if (m.ids[order[k]] == m.ids[order[k - 1]]) {
      throw Error(ErrorKind::InvalidArgument, "duplicate id " + m.ids[order[k]]);
    }
  }

  TsneResult result;
  std::vector<double> p(n * n, 0.0);
  {
    std::vector<double> dist(n);
    std::vector<double> cond(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) dist[j] = m.at(order[i], order[j]);
      auto bw = search_bandwidth(dist, i, cfg);
      if (!bw.converged) result.nonconvergent_bandwidth.push_back(m.ids[order[i]]);
      std::copy(bw.row.begin(), bw.row.end(), cond.begin() + static_cast<std::ptrdiff_t>(i * n));
    }
    const double norm = 2.0 * static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) p[i * n + j] = (cond[i * n + j] + cond[j * n + i]) / norm;
    }
  }

  std::vector<double> y(2 * n);
  {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& v : y) v = 1e-4 * normal(rng);
  }
  result.initial_kl = kl_of(p, y, n);

  std::vector<double> velocity(2 * n, 0.0), gains(2 * n, 1.0), grad(2 * n), num(n * n);
  constexpr double kMinGain = 0.01;
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    const double exaggeration = iter < cfg.exaggeration_iterations ? cfg.early_exaggeration : 1.0;
    const double momentum =
        iter < cfg.momentum_switch_iteration ? cfg.initial_momentum : cfg.final_momentum;

    double sum_q = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      num[i * n + i] = 0.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dx = y[2 * i] - y[2 * j], dy = y[2 * i + 1] - y[2 * j + 1];
        const double q = 1.0 / (1.0 + dx * dx + dy * dy);
        num[i * n + j] = num[j * n + i] = q;
        sum_q += 2.0 * q;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      double gx = 0.0, gy = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double q = num[i * n + j];
        const double w = (exaggeration * p[i * n + j] - q / sum_q) * q;
        gx += w * (y[2 * i] - y[2 * j]);
        gy += w * (y[2 * i + 1] - y[2 * j + 1]);
      }
      grad[2 * i] = 4.0 * gx;
      grad[2 * i + 1] = 4.0 * gy;
    }
    for (std::size_t k = 0; k < 2 * n; ++k) {
      // Per-coordinate adaptive gains (delta-bar-delta).
      gains[k] = (grad[k] > 0.0) != (velocity[k] > 0.0) ? gains[k] + 0.2 : gains[k] * 0.8;
      gains[k] = std::max(gains[k], kMinGain);
      velocity[k] = momentum * velocity[k] - cfg.learning_rate * gains[k] * grad[k];
      y[k] += velocity[k];
    }
    double cx = 0.0, cy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cx += y[2 * i];
      cy += y[2 * i + 1];
    }
    cx /= static_cast<double>(n);
    cy /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[2 * i] -= cx;
      y[2 * i + 1] -= cy;
    }
  }
  result.final_kl = kl_of(p, y, n);

  result.points.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    result.points[order[r]] = {m.ids[order[r]], {y[2 * r], y[2 * r + 1]}};
  }
  std::sort(result.nonconvergent_bandwidth.begin(), result.nonconvergent_bandwidth.end());
  return result;
}

// ---------------------------------------------------------------------------
// Ellipses

EllipseSummary condition_ellipse(std::span<const std::array<double, 2>> points) {
  const std::size_t n = points.size();
  if (n < 3) throw Error(ErrorKind::TooFewPoints, std::to_string(n) + " points, need at least 3");
  EllipseSummary e;
  for (const auto& p : points) {
    e.center[0] += p[0];
    e.center[1] += p[1];
  }
  e.center[0] /= static_cast<double>(n);
  e.center[1] /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : points) {
    const double dx = p[0] - e.center[0], dy = p[1] - e.center[1];
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const double denom = static_cast<double>(n - 1);
  e.cov2d = {sxx / denom, sxy / denom, syy / denom};
  const auto [a, b, d] = e.cov2d;

  const double half_trace = 0.5 * (a + d);
  const double radius = std::hypot(0.5 * (a - d), b);
  const double l1 = half_trace + radius, l2 = half_trace - radius;
  e.major = std::sqrt(std::max(l1, 0.0));
  e.minor = std::sqrt(std::max(l2, 0.0));

  // Twice the orientation angle is atan2(2b, a - d); isotropic covariances get 0.
  double angle = radius == 0.0 ? 0.0 : 0.5 * std::atan2(2.0 * b, a - d);
  if (angle <= -std::numbers::pi / 2) angle += std::numbers::pi;
  e.angle_rad = angle;
  return e;
}

}  // namespace gf
