#include "smokeflow/pipeline.hpp"

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace smokeflow {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || trim(value.substr(used)) != "") {
    throw Error(ErrorKind::InvalidParameter, "config: " + key + " expects a number, got '" + value + "'");
  }
  return out;
}

int parse_int(const std::string& key, const std::string& value) {
  const double d = parse_double(key, value);
  if (d != static_cast<int>(d)) throw Error(ErrorKind::InvalidParameter, "config: " + key + " expects an integer");
  return static_cast<int>(d);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw Error(ErrorKind::InvalidParameter, "config: " + key + " expects a boolean");
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

std::vector<double> parse_scale_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double("scales", trim(item)));
  return out;
}

AttractionParams PipelineConfig::resolved_attraction() const {
  AttractionParams a = attraction;
  if (!sigma_v_explicit) a.sigma_v = AttractionParams::sigma_v_for_scales(scales.count());
  return a;
}

void PipelineConfig::validate() const {
  resolved_attraction().validate();
  interp.validate();
  refine.validate();
  if (!(epsilon >= 0.0 && epsilon <= 255.0)) throw Error(ErrorKind::InvalidParameter, "epsilon must lie in [0,255]");
  if (frame_radius < 1) throw Error(ErrorKind::InvalidParameter, "frame_radius must be >= 1");
}

void PipelineConfig::set(const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  if (key == "scales") {
    scales = ScaleSet(parse_scale_list(value));
  } else if (key == "sigma_spatial") {
    attraction.sigma_spatial = parse_double(key, value);
  } else if (key == "eta") {
    attraction.eta = parse_double(key, value);
  } else if (key == "sigma_v") {
    attraction.sigma_v = parse_double(key, value);
    sigma_v_explicit = true;
  } else if (key == "min_weight") {
    attraction.min_weight = parse_double(key, value);
  } else if (key == "neighbor_radius") {
    attraction.neighbor_radius = value == "inf" ? std::numeric_limits<double>::infinity() : parse_double(key, value);
  } else if (key == "lambda") {
    interp.lambda = parse_double(key, value);
  } else if (key == "interp_max_iters") {
    interp.max_iters = parse_int(key, value);
  } else if (key == "interp_tol") {
    interp.tol = parse_double(key, value);
  } else if (key == "tensor_variant") {
    interp.tensor_variant = tensor_variant_from_string(value);
  } else if (key == "interp_solver") {
    interp.solver = interp_solver_from_string(value);
  } else if (key == "refine") {
    refine_enabled = parse_bool(key, value);
  } else if (key == "alpha") {
    refine.alpha = parse_double(key, value);
  } else if (key == "gamma") {
    refine.gamma = parse_double(key, value);
  } else if (key == "penalizer_eps") {
    refine.penalizer_eps = parse_double(key, value);
  } else if (key == "outer_iters") {
    refine.outer_iters = parse_int(key, value);
  } else if (key == "sor_iters") {
    refine.sor_iters = parse_int(key, value);
  } else if (key == "sor_omega") {
    refine.sor_omega = parse_double(key, value);
  } else if (key == "epsilon") {
    epsilon = parse_double(key, value);
  } else if (key == "frame_radius") {
    frame_radius = parse_int(key, value);
  } else {
    throw Error(ErrorKind::InvalidParameter, "config: unknown key '" + key + "'");
  }
}

void PipelineConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::InvalidParameter, path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    set(line.substr(0, eq), line.substr(eq + 1));
  }
}

nlohmann::json PipelineConfig::to_json() const {
  const AttractionParams a = resolved_attraction();
  nlohmann::json j;
  j["scales"] = scales.sigmas();
  j["epsilon"] = epsilon;
  j["frame_radius"] = frame_radius;
  j["attraction"] = {{"sigma_spatial", a.sigma_spatial},
                     {"eta", a.eta},
                     {"sigma_v", a.sigma_v},
                     {"min_weight", a.min_weight},
                     {"neighbor_radius", a.effective_radius()}};
  j["interp"] = {{"lambda", interp.lambda},
                 {"max_iters", interp.max_iters},
                 {"tol", interp.tol},
                 {"tensor_variant", to_string(interp.tensor_variant)},
                 {"solver", to_string(interp.solver)}};
  j["refine"] = {{"enabled", refine_enabled},
                 {"alpha", refine.alpha},
                 {"gamma", refine.gamma},
                 {"penalizer_eps", refine.penalizer_eps},
                 {"outer_iters", refine.outer_iters},
                 {"sor_iters", refine.sor_iters},
                 {"sor_omega", refine.sor_omega},
                 {"max_backtracks", refine.max_backtracks}};
  return j;
}

std::string PipelineConfig::hash() const {
  const std::string text = to_json().dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

nlohmann::json PipelineResult::report(const PipelineConfig& config) const {
  nlohmann::json j;
  j["status"] = status;
  j["mode"] = mode;
  j["width"] = flow.width();
  j["height"] = flow.height();
  j["skeleton_points"] = {skeleton1.points.size(), skeleton2.points.size()};
  j["sparse_samples"] = sparse.samples.size();
  j["filtered_points"] = sparse.filtered;
  j["timings_ms"] = {{"segmentation", timings.segmentation_ms},
                     {"skeleton", timings.skeleton_ms},
                     {"sparse", timings.sparse_ms},
                     {"interpolation", timings.interpolation_ms},
                     {"refine", timings.refine_ms}};
  if (!refine_stats.energy.empty()) {
    j["refine_energy"] = refine_stats.energy;
    j["refine_rejected_steps"] = refine_stats.rejected_steps;
  }
  j["config"] = config.to_json();
  j["config_hash"] = config.hash();
  return j;
}

PipelineResult estimate(const Frame& f1, const Frame& f2, const PipelineConfig& config) {
  config.validate();
  require_same_shape(f1, f2, "estimate");
  const int w = f1.width();
  const int h = f1.height();

  PipelineResult r;
  r.mode = config.refine_enabled ? "full" : "noEF";
  r.flow = FlowField(w, h);
  r.interpolated = FlowField(w, h);

  auto t = std::chrono::steady_clock::now();
  r.smoke_mask = threshold_mask(f1, config.epsilon);
  const Mask mask2 = threshold_mask(f2, config.epsilon);
  r.timings.segmentation_ms = elapsed_ms(t);

  t = std::chrono::steady_clock::now();
  r.skeleton1 = build_skeleton(f1, r.smoke_mask, config.scales, config.frame_radius);
  r.skeleton2 = build_skeleton(f2, mask2, config.scales, config.frame_radius);
  r.timings.skeleton_ms = elapsed_ms(t);
  r.sparse.width = w;
  r.sparse.height = h;
  if (r.skeleton1.empty() || r.skeleton2.empty()) {
    r.status = "no-smoke";
    return r;
  }

  t = std::chrono::steady_clock::now();
  r.sparse = estimate_sparse(r.skeleton1, r.skeleton2, config.resolved_attraction());
  r.timings.sparse_ms = elapsed_ms(t);
  if (r.sparse.empty()) {
    r.status = "no-smoke";
    return r;
  }

  t = std::chrono::steady_clock::now();
  r.interpolated = interpolate(r.sparse, config.interp);
  r.timings.interpolation_ms = elapsed_ms(t);

  if (config.refine_enabled) {
    t = std::chrono::steady_clock::now();
    r.flow = refine(f1, f2, r.interpolated, config.refine, &r.refine_stats);
    r.timings.refine_ms = elapsed_ms(t);
  } else {
    r.flow = r.interpolated;
  }
  return r;
}

}  // namespace smokeflow
