#pragma once

#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "smokeflow/dense_interp.hpp"
#include "smokeflow/refine.hpp"
#include "smokeflow/skeleton.hpp"
#include "smokeflow/sparse_flow.hpp"

namespace smokeflow {

struct PipelineConfig {
  ScaleSet scales;
  AttractionParams attraction;
  bool sigma_v_explicit = false;  // otherwise 2 / (N - 1)
  InterpParams interp;
  RefineParams refine;
  bool refine_enabled = true;
  double epsilon = 1.0;  // segmentation threshold on the 8-bit scale
  int frame_radius = kDefaultFrameRadius;

  /// Attraction parameters with sigma_v resolved against the scale count.
  AttractionParams resolved_attraction() const;
  void validate() const;

  /// Applies one `key = value` setting; throws on unknown keys.
  void set(const std::string& key, const std::string& value);
  /// Reads a key-value file: one `key = value` per line, `#` starts a comment.
  void load_file(const std::string& path);

  nlohmann::json to_json() const;
  /// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
  std::string hash() const;
};

std::vector<double> parse_scale_list(const std::string& text);

struct StageTimings {
  double segmentation_ms = 0.0;
  double skeleton_ms = 0.0;
  double sparse_ms = 0.0;
  double interpolation_ms = 0.0;
  double refine_ms = 0.0;
};

struct PipelineResult {
  FlowField flow;
  FlowField interpolated;  // dense field before refinement
  MultiScaleSkeleton skeleton1;
  MultiScaleSkeleton skeleton2;
  SparseFlow sparse;
  Mask smoke_mask;
  std::string status = "ok";  // "ok" or "no-smoke"
  std::string mode = "full";  // "full" or "noEF"
  StageTimings timings;
  RefineStats refine_stats;

  nlohmann::json report(const PipelineConfig& config) const;
};

/// segmentation -> skeletons -> sparse attraction -> dense interpolation -> refinement
PipelineResult estimate(const Frame& f1, const Frame& f2, const PipelineConfig& config);

}  // namespace smokeflow
