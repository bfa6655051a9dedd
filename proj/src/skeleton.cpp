#include "smokeflow/skeleton.hpp"

#include <cmath>
#include <utility>

namespace smokeflow {

ScaleSet::ScaleSet() : sigmas_{2.0, 4.0, 8.0, 16.0, 32.0} {}

ScaleSet::ScaleSet(std::vector<double> sigmas) : sigmas_(std::move(sigmas)) {
  if (sigmas_.size() < 2) throw Error(ErrorKind::InvalidParameter, "scale set needs at least two scales");
  for (std::size_t i = 0; i < sigmas_.size(); ++i) {
    if (!(sigmas_[i] > 0.0) || !std::isfinite(sigmas_[i])) {
      throw Error(ErrorKind::InvalidParameter, "scales must be positive");
    }
    if (i > 0 && !(sigmas_[i] > sigmas_[i - 1])) {
      throw Error(ErrorKind::InvalidParameter, "scales must be strictly increasing");
    }
  }
}

Mask MultiScaleSkeleton::support() const {
  Mask m(stability.width(), stability.height(), 0);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = stability[i] > 0.0 ? 1 : 0;
  return m;
}

Mask detect_ridges(const Frame& g, const Mask& mask) {
  require_same_shape(g, mask, "detect_ridges");
  const int w = g.width();
  const int h = g.height();
  Mask ridge(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(x, y)) continue;
      const double c = g(x, y);
      const bool along_x = x > 0 && x < w - 1 && c > g(x - 1, y) && c > g(x + 1, y);
      const bool along_y = y > 0 && y < h - 1 && c > g(x, y - 1) && c > g(x, y + 1);
      ridge(x, y) = (along_x || along_y) ? 1 : 0;
    }
  }
  return ridge;
}

LocalFrame estimate_frames(const Mask& ridge, int px, int py, int radius) {
  const LocalFrame fallback{{1.0, 0.0}, {0.0, 1.0}};
  const int r2 = radius * radius;
  double sx = 0.0, sy = 0.0;
  int n = 0;
  std::vector<std::pair<int, int>> offsets;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy > r2) continue;
      const int x = px + dx;
      const int y = py + dy;
      if (!ridge.contains(x, y) || !ridge(x, y)) continue;
      offsets.emplace_back(dx, dy);
      sx += dx;
      sy += dy;
      ++n;
    }
  }
  if (n < 2) return fallback;

  const double mx = sx / n;
  const double my = sy / n;
  double cxx = 0.0, cxy = 0.0, cyy = 0.0;
  for (auto [dx, dy] : offsets) {
    const double ex = dx - mx;
    const double ey = dy - my;
    cxx += ex * ex;
    cxy += ex * ey;
    cyy += ey * ey;
  }
  const double mean = 0.5 * (cxx + cyy);
  const double spread = std::hypot(0.5 * (cxx - cyy), cxy);
  const double major = mean + spread;
  const double minor = mean - spread;
  // isotropic when major/minor < 1.05; a zero minor axis is maximally anisotropic
  if (!(major > 0.0) || major < 1.05 * minor) return fallback;

  const double theta = 0.5 * std::atan2(2.0 * cxy, cxx - cyy);
  Vec2 t{std::cos(theta), std::sin(theta)};
  if (t.x < 0.0 || (t.x == 0.0 && t.y < 0.0)) t = {-t.x, -t.y};
  return {t, {-t.y, t.x}};
}

MultiScaleSkeleton build_skeleton(const Frame& f, const Mask& mask, const ScaleSet& scales, int frame_radius) {
  require_same_shape(f, mask, "build_skeleton");
  const int w = f.width();
  const int h = f.height();
  const int n = scales.count();

  Grid<int> hits(w, h, 0);
  for (double sigma : scales.sigmas()) {
    const Mask ridge = detect_ridges(gaussian_blur(f, sigma), mask);
    for (std::size_t i = 0; i < ridge.size(); ++i) hits[i] += ridge[i];
  }

  MultiScaleSkeleton skel;
  skel.scale_count = n;
  skel.stability = Grid<double>(w, h, 0.0);
  for (std::size_t i = 0; i < hits.size(); ++i) skel.stability[i] = static_cast<double>(hits[i]) / n;

  const Mask support = skel.support();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!support(x, y)) continue;
      const LocalFrame lf = estimate_frames(support, x, y, frame_radius);
      skel.points.push_back({{static_cast<double>(x), static_cast<double>(y)}, skel.stability(x, y), lf.tangent, lf.normal});
    }
  }
  return skel;
}

}  // namespace smokeflow
