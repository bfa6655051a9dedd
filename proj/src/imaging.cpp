#include "smokeflow/imaging.hpp"

#include <algorithm>
#include <cmath>

namespace smokeflow {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::NoSparseData: return "no-sparse-data";
    case ErrorKind::EmptyRegion: return "empty-region";
    case ErrorKind::NonFinite: return "non-finite";
    case ErrorKind::FlowTooLarge: return "flow-too-large";
    case ErrorKind::Io: return "io";
    case ErrorKind::Format: return "format";
  }
  return "unknown";
}

bool FlowField::all_finite() const {
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u[i]) || !std::isfinite(v[i])) return false;
  }
  return true;
}

Mask threshold_mask(const Frame& f, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 255.0)) {
    throw Error(ErrorKind::InvalidParameter, "threshold epsilon must lie in [0,255]");
  }
  Mask m(f.width(), f.height(), 0);
  for (std::size_t i = 0; i < f.size(); ++i) m[i] = f[i] * 255.0 > epsilon ? 1 : 0;
  return m;
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorKind::InvalidParameter, "gaussian sigma must be positive");
  }
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = w;
    sum += w;
  }
  for (double& w : k) w /= sum;
  return k;
}

Frame gaussian_blur(const Frame& f, double sigma) {
  const std::vector<double> k = gaussian_kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);
  const int w = f.width();
  const int h = f.height();
  Frame tmp(w, h);
  Frame out(w, h);
  if (f.empty()) return out;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int xs = std::clamp(x + i, 0, w - 1);
        acc += k[static_cast<std::size_t>(i + radius)] * f(xs, y);
      }
      tmp(x, y) = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int ys = std::clamp(y + i, 0, h - 1);
        acc += k[static_cast<std::size_t>(i + radius)] * tmp(x, ys);
      }
      out(x, y) = acc;
    }
  }
  return out;
}

Gradient gradient(const Frame& f) {
  const int w = f.width();
  const int h = f.height();
  Gradient g{Frame(w, h), Frame(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (w >= 2) {
        if (x == 0) {
          g.dx(x, y) = f(1, y) - f(0, y);
        } else if (x == w - 1) {
          g.dx(x, y) = f(w - 1, y) - f(w - 2, y);
        } else {
          g.dx(x, y) = 0.5 * (f(x + 1, y) - f(x - 1, y));
        }
      }
      if (h >= 2) {
        if (y == 0) {
          g.dy(x, y) = f(x, 1) - f(x, 0);
        } else if (y == h - 1) {
          g.dy(x, y) = f(x, h - 1) - f(x, h - 2);
        } else {
          g.dy(x, y) = 0.5 * (f(x, y + 1) - f(x, y - 1));
        }
      }
    }
  }
  return g;
}

double sample_bilinear(const Frame& f, double x, double y) {
  const double cx = std::clamp(x, 0.0, static_cast<double>(f.width() - 1));
  const double cy = std::clamp(y, 0.0, static_cast<double>(f.height() - 1));
  const int x0 = static_cast<int>(std::floor(cx));
  const int y0 = static_cast<int>(std::floor(cy));
  const int x1 = std::min(x0 + 1, f.width() - 1);
  const int y1 = std::min(y0 + 1, f.height() - 1);
  const double ax = cx - x0;
  const double ay = cy - y0;
  const double top = f(x0, y0) + ax * (f(x1, y0) - f(x0, y0));
  const double bottom = f(x0, y1) + ax * (f(x1, y1) - f(x0, y1));
  return top + ay * (bottom - top);
}

Frame warp_backward(const Frame& f2, const FlowField& v) {
  require_same_shape(f2, v.u, "warp_backward");
  Frame out(f2.width(), f2.height());
  for (int y = 0; y < f2.height(); ++y) {
    for (int x = 0; x < f2.width(); ++x) {
      out(x, y) = std::clamp(sample_bilinear(f2, x + v.u(x, y), y + v.v(x, y)), 0.0, 1.0);
    }
  }
  return out;
}

}  // namespace smokeflow
