#pragma once

// Helpers and brute-force references shared by the unit tests.

#include <cmath>
#include <random>
#include <vector>

#include "smokeflow/imaging.hpp"

namespace testing {

using smokeflow::Frame;
using smokeflow::Grid;
using smokeflow::Mask;

inline Frame random_frame(int w, int h, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Frame f(w, h);
  for (double& v : f.values()) v = u(rng);
  return f;
}

/// Frame with few distinct levels so ties occur often.
inline Frame random_quantized(int w, int h, std::mt19937_64& rng, int levels = 4) {
  std::uniform_int_distribution<int> u(0, levels - 1);
  Frame f(w, h);
  for (double& v : f.values()) v = u(rng) / double(levels - 1);
  return f;
}

inline double max_abs_diff(const Grid<double>& a, const Grid<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline std::vector<double> sampled_gaussian(double sigma) {
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * r + 1);
  double s = 0.0;
  for (int i = -r; i <= r; ++i) s += k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (double& v : k) v /= s;
  return k;
}

/// Direct 2D convolution with the outer product kernel and replicated borders.
inline Frame convolve_2d(const Frame& f, double sigma) {
  const auto k = sampled_gaussian(sigma);
  const int r = static_cast<int>(k.size() / 2);
  Frame out(f.width(), f.height());
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      double acc = 0.0;
      for (int j = -r; j <= r; ++j) {
        for (int i = -r; i <= r; ++i) {
          const int sx = std::clamp(x + i, 0, f.width() - 1);
          const int sy = std::clamp(y + j, 0, f.height() - 1);
          acc += k[i + r] * k[j + r] * f(sx, sy);
        }
      }
      out(x, y) = acc;
    }
  }
  return out;
}

inline Mask ridge_oracle(const Frame& g, const Mask& mask) {
  Mask out(g.width(), g.height(), 0);
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) {
      if (!mask(x, y)) continue;
      const double c = g(x, y);
      bool along_x = x > 0 && x < g.width() - 1 && c > g(x - 1, y) && c > g(x + 1, y);
      bool along_y = y > 0 && y < g.height() - 1 && c > g(x, y - 1) && c > g(x, y + 1);
      out(x, y) = along_x || along_y;
    }
  }
  return out;
}

inline double dx_oracle(const Frame& f, int x, int y) {
  const int w = f.width();
  if (w == 1) return 0.0;
  if (x == 0) return f(1, y) - f(0, y);
  if (x == w - 1) return f(w - 1, y) - f(w - 2, y);
  return 0.5 * (f(x + 1, y) - f(x - 1, y));
}

inline double dy_oracle(const Frame& f, int x, int y) {
  const int h = f.height();
  if (h == 1) return 0.0;
  if (y == 0) return f(x, 1) - f(x, 0);
  if (y == h - 1) return f(x, h - 1) - f(x, h - 2);
  return 0.5 * (f(x, y + 1) - f(x, y - 1));
}

/// Dense Gaussian elimination with partial pivoting; a is n x n row-major.
inline std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r * n + c]) > std::abs(a[p * n + c])) p = r;
    }
    if (p != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[c * n + k], a[p * n + k]);
      std::swap(b[c], b[p]);
    }
    for (std::size_t r = c + 1; r < n; ++r) {
      const double m = a[r * n + c] / a[c * n + c];
      if (m == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) a[r * n + k] -= m * a[c * n + k];
      b[r] -= m * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i * n + k] * x[k];
    x[i] = s / a[i * n + i];
  }
  return x;
}

/// Minimizer of sum M (v - u)^2 + lambda ||L v||^2 with L the 5-point
/// Laplacian under reflecting (Neumann) borders, built and solved densely.
inline Grid<double> pls_oracle(const Grid<double>& u, const Mask& m, double lambda) {
  const int w = u.width();
  const int h = u.height();
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<double> lap(n * n, 0.0);
  auto id = [w](int x, int y) { return static_cast<std::size_t>(y) * w + x; };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = id(x, y);
      const int nb[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
      for (const auto& q : nb) {
        if (q[0] < 0 || q[0] >= w || q[1] < 0 || q[1] >= h) continue;
        lap[i * n + i] += 1.0;
        lap[i * n + id(q[0], q[1])] -= 1.0;
      }
    }
  }
  std::vector<double> a(n * n, 0.0);
  std::vector<double> b(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += lap[j * n + i] * lap[j * n + k];
      a[i * n + k] = lambda * s;
    }
    if (m[i]) {
      a[i * n + i] += 1.0;
      b[i] = u[i];
    }
  }
  const auto x = solve_dense(std::move(a), std::move(b));
  Grid<double> out(w, h);
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i];
  return out;
}

}  // namespace testing
