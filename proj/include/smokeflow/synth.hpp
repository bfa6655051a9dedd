#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "smokeflow/imaging.hpp"

namespace smokeflow {

enum class FlowKind { Translate, Rotate, Vortex, Shear };

std::string to_string(FlowKind k);
FlowKind flow_kind_from_string(const std::string& s);

/// Analytic motion applied per step. Rotation and vortex angles are in
/// radians; the vortex turns each circle about `center` rigidly by
/// strength * exp(-r^2 / (2 radius^2)), which preserves area exactly.
struct FlowSpec {
  FlowKind kind = FlowKind::Translate;
  double tx = 0.0;
  double ty = 0.0;
  Vec2 center{};
  double angle = 0.0;
  double strength = 0.0;
  double radius = 1.0;
  double shear_rate = 0.0;  // horizontal displacement per row offset from center.y
  double diffusion = 0.0;   // Gaussian sigma applied after every step
  int steps = 1;

  static FlowSpec translate(double tx, double ty);
  static FlowSpec rotate(Vec2 center, double angle);
  static FlowSpec vortex(Vec2 center, double strength, double radius);
  static FlowSpec shear(Vec2 center, double rate);

  void validate() const;
  nlohmann::json to_json() const;

  /// Total forward displacement of pixel p after all steps.
  Vec2 displacement(Vec2 p) const;
  /// Position at the previous step of the point that lands on q after one step.
  Vec2 inverse_step(Vec2 q) const;
};

struct SynthCase {
  Frame f1;
  Frame f2;
  FlowField gt;
  FlowSpec spec;
};

inline constexpr int kDensityMargin = 8;

/// Smoke-like density: anisotropic Gaussian blobs modulated by band-limited
/// noise, clamped to [0,1], exactly zero within `kDensityMargin` px of the border.
Frame make_density(int width, int height, std::uint64_t seed, int blobs);

/// Semi-Lagrangian advection of `f` by `spec`, with diffusion after each step.
SynthCase advect(const Frame& f, const FlowSpec& spec);

}  // namespace smokeflow
