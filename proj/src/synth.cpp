#include "smokeflow/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace smokeflow {
namespace {

// Platform-independent uniform draw in [lo, hi).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo, double hi) {
    const double unit = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * unit;
  }

 private:
  std::mt19937_64 engine_;
};

Vec2 rotate_about(Vec2 p, Vec2 c, double angle) {
  const double cs = std::cos(angle);
  const double sn = std::sin(angle);
  const Vec2 d = p - c;
  return {c.x + cs * d.x - sn * d.y, c.y + sn * d.x + cs * d.y};
}

double smoothstep(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

}  // namespace

std::string to_string(FlowKind k) {
  switch (k) {
    case FlowKind::Translate: return "translate";
    case FlowKind::Rotate: return "rotate";
    case FlowKind::Vortex: return "vortex";
    case FlowKind::Shear: return "shear";
  }
  return "unknown";
}

FlowKind flow_kind_from_string(const std::string& s) {
  if (s == "translate") return FlowKind::Translate;
  if (s == "rotate") return FlowKind::Rotate;
  if (s == "vortex") return FlowKind::Vortex;
  if (s == "shear") return FlowKind::Shear;
  throw Error(ErrorKind::InvalidParameter, "unknown flow kind: " + s);
}

FlowSpec FlowSpec::translate(double tx, double ty) {
  FlowSpec s;
  s.kind = FlowKind::Translate;
  s.tx = tx;
  s.ty = ty;
  return s;
}

FlowSpec FlowSpec::rotate(Vec2 center, double angle) {
  FlowSpec s;
  s.kind = FlowKind::Rotate;
  s.center = center;
  s.angle = angle;
  return s;
}

FlowSpec FlowSpec::vortex(Vec2 center, double strength, double radius) {
  FlowSpec s;
  s.kind = FlowKind::Vortex;
  s.center = center;
  s.strength = strength;
  s.radius = radius;
  return s;
}

FlowSpec FlowSpec::shear(Vec2 center, double rate) {
  FlowSpec s;
  s.kind = FlowKind::Shear;
  s.center = center;
  s.shear_rate = rate;
  return s;
}

void FlowSpec::validate() const {
  const double values[] = {tx, ty, center.x, center.y, angle, strength, radius, shear_rate, diffusion};
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidParameter, "flow spec parameters must be finite");
  }
  if (steps < 1) throw Error(ErrorKind::InvalidParameter, "steps must be >= 1");
  if (diffusion < 0.0) throw Error(ErrorKind::InvalidParameter, "diffusion must be >= 0");
  if (kind == FlowKind::Vortex && !(radius > 0.0)) throw Error(ErrorKind::InvalidParameter, "vortex radius must be positive");
}

nlohmann::json FlowSpec::to_json() const {
  nlohmann::json j{{"kind", to_string(kind)}, {"diffusion", diffusion}, {"steps", steps}};
  switch (kind) {
    case FlowKind::Translate:
      j["tx"] = tx;
      j["ty"] = ty;
      break;
    case FlowKind::Rotate:
      j["center"] = {center.x, center.y};
      j["angle"] = angle;
      break;
    case FlowKind::Vortex:
      j["center"] = {center.x, center.y};
      j["strength"] = strength;
      j["radius"] = radius;
      break;
    case FlowKind::Shear:
      j["center"] = {center.x, center.y};
      j["rate"] = shear_rate;
      break;
  }
  return j;
}

Vec2 FlowSpec::displacement(Vec2 p) const {
  const double n = steps;
  switch (kind) {
    case FlowKind::Translate:
      return {n * tx, n * ty};
    case FlowKind::Rotate:
      return rotate_about(p, center, n * angle) - p;
    case FlowKind::Vortex: {
      const Vec2 d = p - center;
      const double turn = strength * std::exp(-dot(d, d) / (2.0 * radius * radius));
      return rotate_about(p, center, n * turn) - p;
    }
    case FlowKind::Shear:
      return {n * shear_rate * (p.y - center.y), 0.0};
  }
  return {};
}

Vec2 FlowSpec::inverse_step(Vec2 q) const {
  switch (kind) {
    case FlowKind::Translate:
      return {q.x - tx, q.y - ty};
    case FlowKind::Rotate:
      return rotate_about(q, center, -angle);
    case FlowKind::Vortex: {
      const Vec2 d = q - center;
      const double turn = strength * std::exp(-dot(d, d) / (2.0 * radius * radius));
      return rotate_about(q, center, -turn);
    }
    case FlowKind::Shear:
      return {q.x - shear_rate * (q.y - center.y), q.y};
  }
  return q;
}

Frame make_density(int width, int height, std::uint64_t seed, int blobs) {
  if (blobs < 1) throw Error(ErrorKind::InvalidParameter, "make_density needs at least one blob");
  if (width < 2 * kDensityMargin + 2 || height < 2 * kDensityMargin + 2) {
    throw Error(ErrorKind::InvalidParameter, "make_density: frame too small for the dark margin");
  }
  Rng rng(seed);
  const double size = std::min(width, height);

  struct Blob {
    Vec2 c;
    double s_major, s_minor, angle, amp;
  };
  std::vector<Blob> list;
  for (int i = 0; i < blobs; ++i) {
    Blob b;
    if (i == 0) {
      b.c = {0.5 * (width - 1), 0.5 * (height - 1)};
    } else {
      b.c = {rng.uniform(0.2, 0.8) * (width - 1), rng.uniform(0.2, 0.8) * (height - 1)};
    }
    b.s_major = rng.uniform(0.12, 0.22) * size;
    b.s_minor = b.s_major * rng.uniform(0.45, 0.9);
    b.angle = rng.uniform(0.0, std::numbers::pi);
    b.amp = i == 0 ? 1.0 : rng.uniform(0.5, 0.9);
    list.push_back(b);
  }

  Frame noise(width, height);
  for (std::size_t i = 0; i < noise.size(); ++i) noise[i] = rng.uniform(-1.0, 1.0);
  noise = gaussian_blur(noise, 2.5);
  double var = 0.0;
  for (double v : noise.values()) var += v * v;
  const double scale = 1.0 / std::sqrt(var / noise.size() + 1e-300);

  Frame envelope(width, height);
  double peak = 0.0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (const Blob& b : list) {
        const double dx = x - b.c.x;
        const double dy = y - b.c.y;
        const double cs = std::cos(b.angle), sn = std::sin(b.angle);
        const double a = (cs * dx + sn * dy) / b.s_major;
        const double c = (-sn * dx + cs * dy) / b.s_minor;
        acc += b.amp * std::exp(-0.5 * (a * a + c * c));
      }
      envelope(x, y) = acc;
      peak = std::max(peak, acc);
    }
  }

  constexpr double kTexture = 0.25;
  constexpr double kFloor = 0.04;
  constexpr double kTaper = 8.0;
  Frame f(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double e = envelope(x, y) / peak;
      // texture vanishes where the envelope peaks so the densest point stays put
      const double n = std::clamp(noise(x, y) * scale, -3.0, 3.0);
      const double textured = e * (1.0 + kTexture * (1.0 - e) * n);
      const int border = std::min({x, y, width - 1 - x, height - 1 - y});
      const double window = smoothstep((border - kDensityMargin) / kTaper);
      f(x, y) = std::clamp(0.95 * (textured - kFloor) / (1.0 - kFloor), 0.0, 1.0) * window;
    }
  }
  return f;
}

SynthCase advect(const Frame& f, const FlowSpec& spec) {
  spec.validate();
  const int w = f.width();
  const int h = f.height();

  SynthCase out{f, Frame(w, h), FlowField(w, h), spec};
  bool any_inside = false;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Vec2 p{static_cast<double>(x), static_cast<double>(y)};
      const Vec2 d = spec.displacement(p);
      out.gt.u(x, y) = d.x;
      out.gt.v(x, y) = d.y;
      const Vec2 q = p + d;
      if (q.x >= 0.0 && q.y >= 0.0 && q.x <= w - 1 && q.y <= h - 1) any_inside = true;
    }
  }
  if (!any_inside) throw Error(ErrorKind::FlowTooLarge, "flow too large");

  Frame cur = f;
  for (int step = 0; step < spec.steps; ++step) {
    Frame next(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const Vec2 src = spec.inverse_step({static_cast<double>(x), static_cast<double>(y)});
        next(x, y) = std::clamp(sample_bilinear(cur, src.x, src.y), 0.0, 1.0);
      }
    }
    if (spec.diffusion > 0.0) next = gaussian_blur(next, spec.diffusion);
    cur = std::move(next);
  }
  out.f2 = std::move(cur);
  return out;
}

}  // namespace smokeflow
