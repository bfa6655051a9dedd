#pragma once

#include <vector>

#include "smokeflow/imaging.hpp"

namespace smokeflow {

/// Blur scales for the compound skeleton, strictly increasing, at least two.
class ScaleSet {
 public:
  ScaleSet();  // {2, 4, 8, 16, 32}
  explicit ScaleSet(std::vector<double> sigmas);

  const std::vector<double>& sigmas() const noexcept { return sigmas_; }
  int count() const noexcept { return static_cast<int>(sigmas_.size()); }

 private:
  std::vector<double> sigmas_;
};

struct SkeletalPoint {
  Vec2 pos;  // integer pixel centre
  double stability = 0.0;
  Vec2 tangent{1.0, 0.0};
  Vec2 normal{0.0, 1.0};
};

struct LocalFrame {
  Vec2 tangent;
  Vec2 normal;
};

/// Compound skeleton: stability(x) is the fraction of scales at which x is a ridge.
struct MultiScaleSkeleton {
  int scale_count = 0;
  Grid<double> stability;
  std::vector<SkeletalPoint> points;  // row-major order

  bool empty() const noexcept { return points.empty(); }
  Mask support() const;
};

/// Strict local maximum along x or along y, restricted to the mask.
Mask detect_ridges(const Frame& g, const Mask& mask);

inline constexpr int kDefaultFrameRadius = 5;

/// Tangent is the principal axis of the ridge pixels within `radius` of p;
/// falls back to (1,0) for fewer than two pixels or a near-isotropic scatter.
/// Tangents are sign-normalized to a non-negative x component.
LocalFrame estimate_frames(const Mask& ridge, int px, int py, int radius = kDefaultFrameRadius);

MultiScaleSkeleton build_skeleton(const Frame& f, const Mask& mask, const ScaleSet& scales,
                                  int frame_radius = kDefaultFrameRadius);

}  // namespace smokeflow
