#include "gesture_fidelity/hand_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace gf {

std::string_view to_string(Finger f) noexcept {
  switch (f) {
    case Finger::Thumb: return "Thumb";
    case Finger::Index: return "Index";
    case Finger::Middle: return "Middle";
    case Finger::Ring: return "Ring";
    case Finger::Pinky: return "Pinky";
  }
  return "Thumb";
}

std::string_view to_string(JointName j) noexcept {
  switch (j) {
    case JointName::CMC: return "CMC";
    case JointName::MCP: return "MCP";
    case JointName::PIP: return "PIP";
    case JointName::DIP: return "DIP";
    case JointName::IP: return "IP";
  }
  return "CMC";
}

double joint_angle(const LandmarkPoint& prev, const LandmarkPoint& joint,
                   const LandmarkPoint& next, double eps_len) {
  const double ax = prev.x - joint.x, ay = prev.y - joint.y, az = prev.z - joint.z;
  const double bx = next.x - joint.x, by = next.y - joint.y, bz = next.z - joint.z;
  const double na = std::sqrt(ax * ax + ay * ay + az * az);
  const double nb = std::sqrt(bx * bx + by * by + bz * bz);
  if (!(na > eps_len) || !(nb > eps_len)) {
    throw Error(ErrorKind::DegenerateSegment, "segment length below " + std::to_string(eps_len));
  }
  const double cosine = std::clamp((ax * bx + ay * by + az * bz) / (na * nb), -1.0, 1.0);
  return std::acos(cosine) * 180.0 / std::numbers::pi;
}

AngleSamples extract_joint_angles(std::span<const LandmarkTrack> tracks, const JointSpec& joint,
                                  HandPolicy hand, double eps_len) {
  AngleSamples out;
  const auto [a, b, c] = joint.triple;
  for (const auto& track : tracks) {
    const auto series = select_hand_series(track, hand);
    // Frame-major so both hands of one frame stay adjacent.
    for (std::size_t f = 0; f < track.frames.size(); ++f) {
      for (const auto& s : series) {
        const HandObservation* h = s.per_frame[f];
        if (!h) continue;
        try {
          out.degrees.push_back(joint_angle(h->points[a], h->points[b], h->points[c], eps_len));
        } catch (const Error&) {
          ++out.degenerate_skipped;
        }
      }
    }
  }
  if (out.degrees.empty()) {
    throw Error(ErrorKind::EmptyInput,
                std::string("no angles for ") + std::string(to_string(joint.finger)) + " " +
                    std::string(to_string(joint.joint)));
  }
  return out;
}

AngleHistogram histogram(std::span<const double> angles, std::size_t bins,
                         std::optional<JointSpec> joint) {
  if (angles.empty()) throw Error(ErrorKind::EmptyInput, "no angles to histogram");
  if (bins < 2) throw Error(ErrorKind::InvalidArgument, "bins must be >= 2");
  AngleHistogram h;
  h.joint = joint;
  h.counts.assign(bins, 0);
  h.bin_edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) {
    h.bin_edges[i] = 180.0 * static_cast<double>(i) / static_cast<double>(bins);
  }
  const double width = h.bin_width();
  for (double a : angles) {
    if (!(a >= 0.0 && a <= 180.0)) {
      throw Error(ErrorKind::InvalidArgument, "angle outside [0,180]: " + std::to_string(a));
    }
    auto idx = static_cast<std::size_t>(std::floor(a / width));
    // Guard the edge against rounding in a / width.
    while (idx > 0 && a < h.bin_edges[idx]) --idx;
    while (idx + 1 < bins && a >= h.bin_edges[idx + 1]) ++idx;
    h.counts[std::min(idx, bins - 1)] += 1;
  }
  h.total = angles.size();
  return h;
}

namespace {

void check_compatible(const AngleHistogram& p, const AngleHistogram& q) {
  if (p.bin_edges != q.bin_edges || p.counts.size() != q.counts.size()) {
    throw Error(ErrorKind::BinMismatch,
                std::to_string(p.bins()) + " vs " + std::to_string(q.bins()) + " bins");
  }
  if (p.total == 0 || q.total == 0) throw Error(ErrorKind::EmptyInput, "empty histogram");
}

}  // namespace

double kl_divergence(const AngleHistogram& p, const AngleHistogram& q, double epsilon) {
  check_compatible(p, q);
  const std::size_t n = p.bins();
  const double zp = static_cast<double>(p.total) + epsilon * static_cast<double>(n);
  const double zq = static_cast<double>(q.total) + epsilon * static_cast<double>(n);
  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pi = (static_cast<double>(p.counts[i]) + epsilon) / zp;
    const double qi = (static_cast<double>(q.counts[i]) + epsilon) / zq;
    kl += pi * std::log(pi / qi);
  }
  return std::max(kl, 0.0);
}

double emd_1d_bins(const AngleHistogram& p, const AngleHistogram& q) {
  check_compatible(p, q);
  const double tp = static_cast<double>(p.total);
  const double tq = static_cast<double>(q.total);
  // Cumulative counts cross-scaled by the other total; one division at the end.
  std::uint64_t cp = 0, cq = 0;
  double emd = 0.0;
  // The last CDF difference is always zero.
  for (std::size_t i = 0; i + 1 < p.bins(); ++i) {
    cp += p.counts[i];
    cq += q.counts[i];
    emd += std::abs(static_cast<double>(cp) * tq - static_cast<double>(cq) * tp);
  }
  return emd / (tp * tq);
}

double emd_1d(const AngleHistogram& p, const AngleHistogram& q) {
  return emd_1d_bins(p, q) * p.bin_width();
}

std::vector<DivergencePair> compare_angle_distributions(std::span<const LandmarkTrack> real,
                                                        std::span<const LandmarkTrack> synth,
                                                        const AngleComparisonOptions& options) {
  std::vector<DivergencePair> out;
  out.reserve(kCanonicalJoints.size());
  for (const auto& joint : kCanonicalJoints) {
    const std::string where = std::string(to_string(joint.finger)) + " " +
                              std::string(to_string(joint.joint)) + ": ";
    try {
      auto r = extract_joint_angles(real, joint, options.hand, options.eps_len);
      auto s = extract_joint_angles(synth, joint, options.hand, options.eps_len);
      auto hr = histogram(r.degrees, options.bins, joint);
      auto hs = histogram(s.degrees, options.bins, joint);
      DivergencePair pair;
      pair.joint = joint;
      // Synthetic measured against the real reference.
      pair.kl = kl_divergence(hs, hr, options.kl_epsilon);
      pair.emd_bins = emd_1d_bins(hs, hr);
      pair.emd_deg = pair.emd_bins * hs.bin_width();
      pair.real_samples = r.degrees.size();
      pair.synth_samples = s.degrees.size();
      out.push_back(pair);
    } catch (const Error& e) {
      throw Error(e.kind(), where + e.detail());
    }
  }
  return out;
}

}  // namespace gf
