#include "smokeflow/sparse_flow.hpp"

#include <algorithm>

namespace smokeflow {
namespace {

// log of the unnormalized spatial factor, -m^2/2 with m the Mahalanobis distance
double log_spatial(const SkeletalPoint& x, const SkeletalPoint& y, const AttractionParams& p) {
  const Vec2 d = x.pos - y.pos;
  const double dn = dot(d, y.normal) / p.sigma_spatial;
  const double dt = dot(d, y.tangent) / (p.sigma_spatial * p.eta);
  return -0.5 * (dn * dn + dt * dt);
}

double log_stability(const SkeletalPoint& x, const SkeletalPoint& y, const AttractionParams& p) {
  const double dh = (x.stability - y.stability) / p.sigma_v;
  return -0.5 * dh * dh;
}

// Uniform bucket grid over destination points.
class PointIndex {
 public:
  PointIndex(std::span<const SkeletalPoint> points, int width, int height, double radius)
      : points_(points), radius_(radius) {
    cell_ = std::max(1, static_cast<int>(std::ceil(std::min(radius, 1e6))));
    cols_ = std::max(1, (width + cell_ - 1) / cell_);
    rows_ = std::max(1, (height + cell_ - 1) / cell_);
    buckets_.resize(static_cast<std::size_t>(cols_) * rows_);
    for (std::size_t i = 0; i < points.size(); ++i) {
      buckets_[bucket_of(points[i].pos)].push_back(i);
    }
  }

  // Candidates within the radius, in the original (row-major) order.
  void query(Vec2 c, std::vector<SkeletalPoint>& out) const {
    out.clear();
    if (!std::isfinite(radius_)) {
      out.assign(points_.begin(), points_.end());
      return;
    }
    const int span = static_cast<int>(std::ceil(radius_ / cell_));
    const int cx = cell_coord(c.x, cols_);
    const int cy = cell_coord(c.y, rows_);
    scratch_.clear();
    for (int by = std::max(0, cy - span); by <= std::min(rows_ - 1, cy + span); ++by) {
      for (int bx = std::max(0, cx - span); bx <= std::min(cols_ - 1, cx + span); ++bx) {
        for (std::size_t i : buckets_[static_cast<std::size_t>(by) * cols_ + bx]) {
          const Vec2 d = points_[i].pos - c;
          if (dot(d, d) <= radius_ * radius_) scratch_.push_back(i);
        }
      }
    }
    std::sort(scratch_.begin(), scratch_.end());
    for (std::size_t i : scratch_) out.push_back(points_[i]);
  }

 private:
  int cell_coord(double v, int n) const { return std::clamp(static_cast<int>(std::floor(v / cell_)), 0, n - 1); }
  std::size_t bucket_of(Vec2 p) const {
    return static_cast<std::size_t>(cell_coord(p.y, rows_)) * cols_ + cell_coord(p.x, cols_);
  }

  std::span<const SkeletalPoint> points_;
  double radius_;
  int cell_ = 1;
  int cols_ = 1;
  int rows_ = 1;
  std::vector<std::vector<std::size_t>> buckets_;
  mutable std::vector<std::size_t> scratch_;
};

}  // namespace

void AttractionParams::validate() const {
  if (!(sigma_spatial > 0.0)) throw Error(ErrorKind::InvalidParameter, "sigma_spatial must be positive");
  if (!(eta > 0.0 && eta <= 1.0)) throw Error(ErrorKind::InvalidParameter, "eta must lie in (0,1]");
  if (!(sigma_v > 0.0)) throw Error(ErrorKind::InvalidParameter, "sigma_v must be positive");
  if (!(min_weight >= 0.0)) throw Error(ErrorKind::InvalidParameter, "min_weight must be non-negative");
  if (std::isnan(neighbor_radius)) throw Error(ErrorKind::InvalidParameter, "neighbor_radius is NaN");
}

Cov2 covariance_at(const SkeletalPoint& y, const AttractionParams& params) {
  const double vn = params.sigma_spatial * params.sigma_spatial;
  const double st = params.sigma_spatial * params.eta;
  const double vt = st * st;
  const Vec2 n = y.normal;
  const Vec2 t = y.tangent;
  return {vn * n.x * n.x + vt * t.x * t.x, vn * n.x * n.y + vt * t.x * t.y, vn * n.y * n.y + vt * t.y * t.y};
}

Attraction attraction_weights(const SkeletalPoint& x, std::span<const SkeletalPoint> candidates,
                              const AttractionParams& params) {
  Attraction out;
  if (candidates.empty()) return out;

  std::vector<double> logw(candidates.size());
  double best_spatial = -std::numeric_limits<double>::infinity();
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double ls = log_spatial(x, candidates[i], params);
    logw[i] = ls + log_stability(x, candidates[i], params);
    best_spatial = std::max(best_spatial, ls);
    best = std::max(best, logw[i]);
  }
  if (!(std::exp(best_spatial) >= params.min_weight) || !std::isfinite(best)) return out;

  out.probabilities.resize(candidates.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    out.probabilities[i] = std::exp(logw[i] - best);
    sum += out.probabilities[i];
  }
  if (!(sum > 0.0)) {
    out.probabilities.clear();
    return out;
  }
  for (double& p : out.probabilities) p /= sum;
  return out;
}

bool expected_destination(const SkeletalPoint& x, std::span<const SkeletalPoint> candidates,
                          const AttractionParams& params, Vec2& out) {
  const Attraction a = attraction_weights(x, candidates, params);
  if (a.filtered()) return false;
  Vec2 e{};
  for (std::size_t i = 0; i < candidates.size(); ++i) e = e + a.probabilities[i] * candidates[i].pos;
  out = e;
  return true;
}

Mask SparseFlow::anchor_mask() const {
  Mask m(width, height, 0);
  for (const SparseSample& s : samples) {
    m(static_cast<int>(std::lround(s.anchor.x)), static_cast<int>(std::lround(s.anchor.y))) = 1;
  }
  return m;
}

SparseFlow estimate_sparse(const MultiScaleSkeleton& s1, const MultiScaleSkeleton& s2,
                           const AttractionParams& params) {
  params.validate();
  require_same_shape(s1.stability, s2.stability, "estimate_sparse");
  SparseFlow flow;
  flow.width = s1.stability.width();
  flow.height = s1.stability.height();
  if (s2.empty()) {
    flow.filtered = static_cast<int>(s1.points.size());
    return flow;
  }

  const PointIndex index(s2.points, flow.width, flow.height, params.effective_radius());
  std::vector<SkeletalPoint> candidates;
  for (const SkeletalPoint& x : s1.points) {
    index.query(x.pos, candidates);
    Vec2 dest;
    if (!expected_destination(x, candidates, params, dest)) {
      ++flow.filtered;
      continue;
    }
    flow.samples.push_back({x.pos, dest - x.pos, x.stability});
  }
  return flow;
}

}  // namespace smokeflow
