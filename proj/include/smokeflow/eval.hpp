#pragma once

#include <optional>
#include <string>

#include "smokeflow/imaging.hpp"

namespace smokeflow {

/// Prediction of frame 2 from frame 1 and a frame-1-anchored forward flow,
/// approximated by backward sampling with the negated field: f1(x - v(x)).
Frame predict_second_frame(const Frame& f1, const FlowField& v);

/// RMS difference on [0,1] intensities between the predicted and the real
/// second frame. `region == nullptr` means the full frame.
double interpolation_error(const Frame& f1, const Frame& f2, const FlowField& v, const Mask* region = nullptr);

struct EndpointError {
  double mean = 0.0;
  double max = 0.0;
};

EndpointError endpoint_error(const FlowField& v, const FlowField& gt, const Mask* region = nullptr);

/// Mean angle in radians between (u, v, 1) and (u', v', 1).
double angular_error(const FlowField& v, const FlowField& gt, const Mask* region = nullptr);

/// Per-pixel angle in radians between (u, v, 1) and (gu, gv, 1).
double angular_error_at(double u, double v, double gu, double gv);

struct MetricReport {
  double ie = 0.0;
  std::optional<double> ee_mean;
  std::optional<double> ee_max;
  std::optional<double> ae_mean;
  std::string region = "full";
};

}  // namespace smokeflow
