#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "smokeflow/skeleton.hpp"

namespace smokeflow {

/// Parameters of the skeletal attraction kernel.
///
/// The spatial factor is a Gaussian centred on each destination point y with
/// standard deviation `sigma_spatial` along y's normal and `sigma_spatial * eta`
/// along y's tangent. The stability factor is a 1D Gaussian in h(x) - h(y)
/// with standard deviation `sigma_v`.
struct AttractionParams {
  double sigma_spatial = 3.0;
  double eta = 0.1;
  double sigma_v = 0.5;
  /// A point maps to nothing when its best spatial factor, relative to the
  /// kernel peak, falls below this value. Default is the level at Mahalanobis
  /// distance 3.
  double min_weight = std::exp(-4.5);
  /// Candidate cutoff in pixels; non-positive means 3 * sigma_spatial,
  /// infinity means every destination point is a candidate.
  double neighbor_radius = 0.0;

  /// sigma_v = 2 / (N - 1) for N skeleton scales.
  static double sigma_v_for_scales(int scale_count) { return 2.0 / (scale_count - 1); }

  double effective_radius() const { return neighbor_radius > 0.0 ? neighbor_radius : 3.0 * sigma_spatial; }
  void validate() const;
};

struct Cov2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  double det() const { return xx * yy - xy * xy; }
};

/// C = sigma^2 n n^T + (sigma eta)^2 t t^T.
Cov2 covariance_at(const SkeletalPoint& y, const AttractionParams& params);

struct Attraction {
  std::vector<double> probabilities;  // empty when the anchor is filtered
  bool filtered() const noexcept { return probabilities.empty(); }
};

/// Normalized bilateral weights p(y|x) over `candidates`. The caller is
/// responsible for any neighbourhood restriction.
Attraction attraction_weights(const SkeletalPoint& x, std::span<const SkeletalPoint> candidates,
                              const AttractionParams& params);

/// E[y|x] over `candidates`; false when the anchor maps to nothing.
bool expected_destination(const SkeletalPoint& x, std::span<const SkeletalPoint> candidates,
                          const AttractionParams& params, Vec2& out);

struct SparseSample {
  Vec2 anchor;
  Vec2 displacement;
  double stability = 0.0;
};

struct SparseFlow {
  int width = 0;
  int height = 0;
  std::vector<SparseSample> samples;  // row-major by anchor
  int filtered = 0;

  bool empty() const noexcept { return samples.empty(); }
  Mask anchor_mask() const;
};

/// Attracts each point of s1 towards s2 within the neighbour radius.
SparseFlow estimate_sparse(const MultiScaleSkeleton& s1, const MultiScaleSkeleton& s2,
                           const AttractionParams& params);

}  // namespace smokeflow
