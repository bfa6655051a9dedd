#include <cmath>
#include <deque>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "smokeflow/eval.hpp"
#include "smokeflow/flowio.hpp"
#include "smokeflow/image_io.hpp"
#include "smokeflow/pipeline.hpp"
#include "smokeflow/synth.hpp"

using namespace smokeflow;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int fail(const std::string& kind, const std::string& message, int code) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
  return code;
}

void emit(const json& report, const std::string& path) {
  if (path.empty()) {
    std::cout << report.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path);
  out << report.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path);
}

// Config-backed flags are kept as text and applied through PipelineConfig::set
// so flags and the config file share one parser.
struct ConfigFlags {
  std::string config_path;
  std::vector<std::pair<std::string, CLI::Option*>> keyed;
  std::deque<std::string> values;  // stable addresses for CLI11
  std::vector<std::string> overrides;
  CLI::Option* no_refine = nullptr;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    add(app, "--scales", "scales", "comma-separated scale sigmas in px");
    add(app, "--sigma-spatial", "sigma_spatial", "attraction spatial sigma in px");
    add(app, "--eta", "eta", "tangential/normal anisotropy ratio");
    add(app, "--sigma-v", "sigma_v", "stability sigma (default 2/(N-1))");
    add(app, "--lambda", "lambda", "interpolation smoothness");
    add(app, "--tensor-variant", "tensor_variant", "garcia | paper-literal")
        ->check(CLI::IsMember({"garcia", "paper-literal"}));
    no_refine = app->add_flag("--no-refine", "skip variational refinement (noEF mode)");
    app->add_option("--set", overrides, "any config key as key=value (repeatable)");
  }

  CLI::Option* add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    values.emplace_back();
    CLI::Option* opt = app->add_option(flag, values.back(), help);
    keyed.emplace_back(key, opt);
    return opt;
  }

  // defaults < config file < flags
  PipelineConfig resolve() const {
    PipelineConfig cfg;
    if (!config_path.empty()) cfg.load_file(config_path);
    for (const std::string& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error(ErrorKind::InvalidParameter, "--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    for (std::size_t i = 0; i < keyed.size(); ++i) {
      if (keyed[i].second->count() > 0) cfg.set(keyed[i].first, values[i]);
    }
    if (no_refine->count() > 0) cfg.refine_enabled = false;
    cfg.validate();
    return cfg;
  }
};

struct EstimateArgs {
  std::string frame1, frame2, out, report, color, warped, dump_skeleton, dump_sparse, dump_interp;
  ConfigFlags config;
};

void write_sparse_csv(const SparseFlow& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path);
  out << "x,y,u,v,stability\n";
  char line[160];
  for (const SparseSample& p : s.samples) {
    std::snprintf(line, sizeof line, "%.0f,%.0f,%.17g,%.17g,%.17g\n", p.anchor.x, p.anchor.y, p.displacement.x,
                  p.displacement.y, p.stability);
    out << line;
  }
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path);
}

int run_estimate(const EstimateArgs& a) {
  const PipelineConfig cfg = a.config.resolve();
  const Frame f1 = read_image(a.frame1);
  const Frame f2 = read_image(a.frame2);
  const PipelineResult r = estimate(f1, f2, cfg);

  write_flo(r.flow, a.out);
  if (!a.color.empty()) write_png(colorize(r.flow), a.color);
  if (!a.warped.empty()) write_png(predict_second_frame(f1, r.flow), a.warped);
  if (!a.dump_skeleton.empty()) write_png(r.skeleton1.stability, a.dump_skeleton);
  if (!a.dump_sparse.empty()) write_sparse_csv(r.sparse, a.dump_sparse);
  if (!a.dump_interp.empty()) write_flo(r.interpolated, a.dump_interp);

  json report = r.report(cfg);
  report["inputs"] = {{"frame1", a.frame1}, {"frame2", a.frame2}};
  report["output"] = a.out;
  report["ie"] = interpolation_error(f1, f2, r.flow);
  if (r.status == "no-smoke") {
    report["warning"] = "no smoke detected; wrote zero flow";
    std::cerr << json{{"warning", "no-smoke"}, {"message", "no smoke detected; wrote zero flow"}}.dump() << '\n';
  }
  emit(report, a.report);
  return 0;
}

struct SynthArgs {
  std::string kind = "translate";
  double tx = 0.0, ty = 0.0, angle_deg = 0.0, strength = 0.0, radius = 40.0, rate = 0.0, diffusion = 0.0;
  std::optional<double> cx, cy;
  int steps = 1, blobs = 5, width = 256, height = 256;
  std::uint64_t seed = 1;
  std::string out = ".", report;
};

int run_synth(const SynthArgs& a) {
  const Vec2 c{a.cx.value_or(0.5 * (a.width - 1)), a.cy.value_or(0.5 * (a.height - 1))};
  FlowSpec spec;
  switch (flow_kind_from_string(a.kind)) {
    case FlowKind::Translate: spec = FlowSpec::translate(a.tx, a.ty); break;
    case FlowKind::Rotate: spec = FlowSpec::rotate(c, a.angle_deg * std::numbers::pi / 180.0); break;
    case FlowKind::Vortex: spec = FlowSpec::vortex(c, a.strength, a.radius); break;
    case FlowKind::Shear: spec = FlowSpec::shear(c, a.rate); break;
  }
  spec.diffusion = a.diffusion;
  spec.steps = a.steps;
  spec.validate();

  const SynthCase sc = advect(make_density(a.width, a.height, a.seed, a.blobs), spec);
  fs::create_directories(a.out);
  const fs::path dir(a.out);
  write_png(sc.f1, (dir / "f1.png").string());
  write_png(sc.f2, (dir / "f2.png").string());
  write_flo(sc.gt, (dir / "gt.flo").string());

  json desc{{"kind", a.kind},
            {"parameters", spec.to_json()},
            {"seed", a.seed},
            {"blobs", a.blobs},
            {"width", a.width},
            {"height", a.height}};
  std::ofstream d(dir / "synth.json");
  if (!d) throw Error(ErrorKind::Io, "cannot write " + (dir / "synth.json").string());
  d << desc.dump(2) << '\n';
  if (!a.report.empty()) emit(desc, a.report);
  return 0;
}

struct EvalArgs {
  std::string flow, gt, frame1, frame2, region = "full", report;
  double epsilon = 1.0;
  ConfigFlags config;
};

int run_eval(const EvalArgs& a) {
  const PipelineConfig cfg = a.config.resolve();
  const FlowField v = read_flo(a.flow);
  std::optional<Frame> f1, f2;
  if (!a.frame1.empty()) f1 = read_image(a.frame1);
  if (!a.frame2.empty()) f2 = read_image(a.frame2);

  Mask mask;
  const Mask* region = nullptr;
  if (a.region == "mask") {
    if (!f1) throw Error(ErrorKind::InvalidParameter, "--region mask needs --frame1");
    mask = threshold_mask(*f1, cfg.epsilon);
    region = &mask;
  }

  json report;
  report["region"] = a.region;
  report["params_hash"] = cfg.hash();
  report["ie"] = nullptr;
  if (f1 && f2) report["ie"] = interpolation_error(*f1, *f2, v, region);
  report["ee_mean"] = report["ee_max"] = report["ae_mean"] = nullptr;
  if (!a.gt.empty()) {
    const FlowField gt = read_flo(a.gt);
    const EndpointError ee = endpoint_error(v, gt, region);
    report["ee_mean"] = ee.mean;
    report["ee_max"] = ee.max;
    report["ae_mean"] = angular_error(v, gt, region);
  }
  if (report["ie"].is_null() && report["ee_mean"].is_null()) {
    throw Error(ErrorKind::InvalidParameter, "eval needs --gt or both --frame1 and --frame2");
  }
  emit(report, a.report);
  return 0;
}

struct VizArgs {
  std::string flow, out;
  double max_mag = 0.0;
};

int run_viz(const VizArgs& a) {
  write_png(colorize(read_flo(a.flow), a.max_mag), a.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dense motion estimation for smoke image pairs"};
  app.require_subcommand(1);

  EstimateArgs est;
  CLI::App* e = app.add_subcommand("estimate", "estimate dense flow between two frames");
  e->add_option("--frame1", est.frame1, "first frame (PNG or PGM)")->required()->check(CLI::ExistingFile);
  e->add_option("--frame2", est.frame2, "second frame")->required()->check(CLI::ExistingFile);
  e->add_option("--out", est.out, "output .flo")->required();
  e->add_option("--report", est.report, "write the JSON report here instead of stdout");
  e->add_option("--color", est.color, "colour-coded flow PNG");
  e->add_option("--warped", est.warped, "frame 1 warped by the flow, as PNG");
  e->add_option("--dump-skeleton", est.dump_skeleton, "frame-1 stability map as 8-bit PNG");
  e->add_option("--dump-sparse", est.dump_sparse, "sparse samples as CSV x,y,u,v,stability");
  e->add_option("--dump-interp", est.dump_interp, "dense field before refinement as .flo");
  est.config.attach(e);

  SynthArgs syn;
  CLI::App* s = app.add_subcommand("synth", "generate a synthetic smoke pair with ground truth");
  s->add_option("--kind", syn.kind, "translate | rotate | vortex | shear")
      ->check(CLI::IsMember({"translate", "rotate", "vortex", "shear"}));
  s->add_option("--tx", syn.tx, "translation x in px");
  s->add_option("--ty", syn.ty, "translation y in px");
  s->add_option("--angle", syn.angle_deg, "rotation per step in degrees");
  s->add_option("--strength", syn.strength, "vortex peak turn per step in radians");
  s->add_option("--radius", syn.radius, "vortex Gaussian radius in px");
  s->add_option("--rate", syn.rate, "shear rate in px per row");
  s->add_option("--cx", syn.cx, "rotation/vortex/shear centre x (default image centre)");
  s->add_option("--cy", syn.cy, "rotation/vortex/shear centre y (default image centre)");
  s->add_option("--diffusion", syn.diffusion, "Gaussian sigma applied after each step");
  s->add_option("--steps", syn.steps, "advection steps")->check(CLI::PositiveNumber);
  s->add_option("--seed", syn.seed, "density seed");
  s->add_option("--blobs", syn.blobs, "density blob count")->check(CLI::PositiveNumber);
  s->add_option("--width", syn.width, "frame width")->check(CLI::Range(2 * kDensityMargin + 1, 1 << 14));
  s->add_option("--height", syn.height, "frame height")->check(CLI::Range(2 * kDensityMargin + 1, 1 << 14));
  s->add_option("--out", syn.out, "output directory");
  s->add_option("--report", syn.report, "also write the descriptor JSON here");

  EvalArgs ev;
  CLI::App* m = app.add_subcommand("eval", "score a flow field");
  m->add_option("--flow", ev.flow, "estimated .flo")->required()->check(CLI::ExistingFile);
  m->add_option("--gt", ev.gt, "ground-truth .flo")->check(CLI::ExistingFile);
  m->add_option("--frame1", ev.frame1, "first frame, for IE and the smoke mask")->check(CLI::ExistingFile);
  m->add_option("--frame2", ev.frame2, "second frame, for IE")->check(CLI::ExistingFile);
  m->add_option("--region", ev.region, "full | mask")->check(CLI::IsMember({"full", "mask"}));
  m->add_option("--report", ev.report, "write the JSON report here instead of stdout");
  ev.config.attach(m);

  VizArgs vz;
  CLI::App* z = app.add_subcommand("viz", "render a .flo as a colour-coded PNG");
  z->add_option("flow", vz.flow, "input .flo")->required()->check(CLI::ExistingFile);
  z->add_option("out", vz.out, "output PNG")->required();
  z->add_option("--max-mag", vz.max_mag, "magnitude at full saturation (default 99th percentile)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& h) {
    return app.exit(h);
  } catch (const CLI::CallForAllHelp& h) {
    return app.exit(h);
  } catch (const CLI::ParseError& err) {
    return fail("usage", err.what(), 2);
  }

  try {
    if (*e) return run_estimate(est);
    if (*s) return run_synth(syn);
    if (*m) return run_eval(ev);
    return run_viz(vz);
  } catch (const Error& err) {
    return fail(to_string(err.kind()), err.what(), 1);
  } catch (const std::exception& err) {
    return fail("internal", err.what(), 1);
  }
}
