#include "sidewidth/planefit.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "sidewidth/error.hpp"
#include "sidewidth/stats.hpp"

namespace sidewidth {

void RansacConfig::validate() const {
  if (iterations < 1) throw Error("ransac.iterations must be >= 1");
  if (!(clip_lo > 0.0) || !(clip_lo <= clip_hi)) throw Error("ransac clip bounds must satisfy 0 < clip_lo <= clip_hi");
  if (!(mad_multiplier > 0.0) || !(mad_consistency > 0.0)) throw Error("ransac MAD factors must be positive");
  if (min_support_points < 3) throw Error("ransac.min_support_points must be >= 3");
  if (!(min_inlier_ratio >= 0.0 && min_inlier_ratio <= 1.0)) throw Error("ransac.min_inlier_ratio must be in [0, 1]");
}

GroundPlane fit_plane_svd(std::span<const Eigen::Vector3d> points, const Eigen::Vector3d& reference) {
  if (points.size() < 3) throw DegenerateError("degenerate point set: fewer than 3 points");

  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());

  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    const Eigen::Vector3d q = p - centroid;
    scatter.noalias() += q * q.transpose();
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(scatter, Eigen::ComputeFullU);
  const Eigen::Vector3d s = svd.singularValues();
  // Second singular value of the scatter vanishes for collinear or coincident sets.
  if (!(s(0) > 0.0) || s(1) <= 1e-12 * s(0)) throw DegenerateError("degenerate point set: collinear or coincident");

  GroundPlane plane;
  plane.normal = svd.matrixU().col(2).normalized();
  plane.offset = -plane.normal.dot(centroid);
  if (plane.signed_distance(reference) < 0.0) {
    plane.normal = -plane.normal;
    plane.offset = -plane.offset;
  }
  return plane;
}

std::vector<double> point_plane_distances(std::span<const Eigen::Vector3d> points, const GroundPlane& plane) {
  std::vector<double> out(points.size());
  std::transform(points.begin(), points.end(), out.begin(),
                 [&](const Eigen::Vector3d& p) { return std::abs(plane.signed_distance(p)); });
  return out;
}

double adaptive_threshold(double mad_value, const RansacConfig& config) {
  if (!(mad_value >= 0.0)) throw Error("adaptive_threshold: MAD must be non-negative");
  return std::clamp(config.mad_multiplier * config.mad_consistency * mad_value, config.clip_lo, config.clip_hi);
}

RansacResult ransac_plane(std::span<const Eigen::Vector3d> points, double tau, const RansacConfig& config) {
  config.validate();
  if (points.size() < 3) throw DegenerateError("ransac: fewer than 3 points");
  if (!(tau > 0.0)) throw Error("ransac: threshold must be positive");

  const std::size_t n = points.size();
  std::vector<double> xs(n), ys(n), zs(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = points[i].x();
    ys[i] = points[i].y();
    zs[i] = points[i].z();
  }

  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  // Hypotheses do not depend on scores, so draw them all first and score block-wise over the points.
  struct Hypothesis {
    double a, b, c, d;
  };
  std::vector<Hypothesis> hyps;
  hyps.reserve(static_cast<std::size_t>(config.iterations));
  const long max_draws = 10L * config.iterations;
  for (long draw = 0; draw < max_draws && static_cast<int>(hyps.size()) < config.iterations; ++draw) {
    const std::size_t i0 = pick(rng);
    std::size_t i1 = pick(rng);
    std::size_t i2 = pick(rng);
    if (i0 == i1 || i0 == i2 || i1 == i2) continue;
    const Eigen::Vector3d e1 = points[i1] - points[i0];
    const Eigen::Vector3d e2 = points[i2] - points[i0];
    const Eigen::Vector3d cross = e1.cross(e2);
    const double norm = cross.norm();
    if (!(norm > 1e-12 * e1.norm() * e2.norm())) continue;
    const Eigen::Vector3d nrm = cross / norm;
    hyps.push_back({nrm.x(), nrm.y(), nrm.z(), -nrm.dot(points[i0])});
  }
  if (hyps.empty()) throw DegenerateError("ransac: no non-degenerate sample found");

  const std::size_t h_count = hyps.size();
  std::vector<double> counts(h_count, 0.0);
  std::vector<double> sqs(h_count, 0.0);
  constexpr std::size_t kBlock = 1024;
  for (std::size_t lo = 0; lo < n; lo += kBlock) {
    const std::size_t len = std::min(kBlock, n - lo);
    const double* bx = xs.data() + lo;
    const double* by = ys.data() + lo;
    const double* bz = zs.data() + lo;
    for (std::size_t h = 0; h < h_count; ++h) {
      const auto [a, b, c, d] = hyps[h];
      double cnt = 0.0;
      double sq = 0.0;
      for (std::size_t i = 0; i < len; ++i) {
        const double dist = std::abs(a * bx[i] + b * by[i] + c * bz[i] + d);
        // 1 if dist <= tau else 0, without a data-dependent branch
        const double in = std::max(0.0, std::copysign(1.0, tau - dist));
        cnt += in;
        sq += in * dist * dist;
      }
      counts[h] += cnt;
      sqs[h] += sq;
    }
  }

  RansacResult best;
  std::size_t best_count = 0;
  double best_sq = 0.0;
  for (std::size_t h = 0; h < h_count; ++h) {
    const auto count = static_cast<std::size_t>(counts[h]);
    const double sq = sqs[h];
    // Compare RMS via cross-multiplication: sq/count < best_sq/best_count.
    const bool better = count > best_count ||
                        (count == best_count && count > 0 && sq * static_cast<double>(best_count) <
                                                                 best_sq * static_cast<double>(count));
    if (best.trial < 0 || better) {
      best.trial = static_cast<int>(h);
      best.plane.normal = Eigen::Vector3d(hyps[h].a, hyps[h].b, hyps[h].c);
      best.plane.offset = hyps[h].d;
      best_count = count;
      best_sq = sq;
    }
  }
  if (best.trial < 0) throw DegenerateError("ransac: no non-degenerate sample found");

  best.inliers.reserve(best_count);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(best.plane.signed_distance(points[i])) <= tau) best.inliers.push_back(i);
  }
  best.inlier_rms = best_count > 0 ? std::sqrt(best_sq / static_cast<double>(best_count)) : 0.0;
  best.plane.inlier_count = best.inliers.size();
  best.plane.inlier_ratio = static_cast<double>(best.inliers.size()) / static_cast<double>(n);
  best.plane.threshold_used = tau;
  return best;
}

GroundPlaneFit fit_ground_plane_with_inliers(std::span<const Eigen::Vector3d> points, const RansacConfig& config,
                                             const Eigen::Vector3d& reference_centre) {
  config.validate();
  if (points.size() < config.min_support_points) {
    throw Rejected(RejectReason::TooFewSupportPoints, "too few support points: " + std::to_string(points.size()) +
                                                          " < " + std::to_string(config.min_support_points));
  }

  const GroundPlane coarse = fit_plane_svd(points, reference_centre);
  const std::vector<double> distances = point_plane_distances(points, coarse);
  const double tau = adaptive_threshold(mad(distances), config);
  RansacResult ransac = ransac_plane(points, tau, config);

  std::vector<Eigen::Vector3d> inlier_points;
  inlier_points.reserve(ransac.inliers.size());
  for (auto i : ransac.inliers) inlier_points.push_back(points[i]);

  GroundPlaneFit fit;
  fit.plane = fit_plane_svd(inlier_points, reference_centre);
  fit.plane.inlier_count = ransac.inliers.size();
  fit.plane.inlier_ratio = static_cast<double>(ransac.inliers.size()) / static_cast<double>(points.size());
  fit.plane.threshold_used = tau;
  fit.inliers = std::move(ransac.inliers);

  if (fit.plane.inlier_ratio < config.min_inlier_ratio) {
    throw Rejected(RejectReason::LowInlierRatio, "inlier ratio " + std::to_string(fit.plane.inlier_ratio) +
                                                     " below " + std::to_string(config.min_inlier_ratio));
  }
  return fit;
}

}  // namespace sidewidth
