#include "smokeflow/eval.hpp"

#include <algorithm>
#include <cmath>

namespace smokeflow {
namespace {

// Neumaier compensated sum, accumulated in row-major order.
class Accumulator {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

template <class G>
void check_region(const G& ref, const Mask* region, const char* what) {
  if (region) require_same_shape(ref, *region, what);
}

bool in_region(const Mask* region, std::size_t i) { return region == nullptr || (*region)[i] != 0; }

}  // namespace

Frame predict_second_frame(const Frame& f1, const FlowField& v) {
  require_same_shape(f1, v.u, "predict_second_frame");
  Frame out(f1.width(), f1.height());
  for (int y = 0; y < f1.height(); ++y) {
    for (int x = 0; x < f1.width(); ++x) {
      out(x, y) = std::clamp(sample_bilinear(f1, x - v.u(x, y), y - v.v(x, y)), 0.0, 1.0);
    }
  }
  return out;
}

double interpolation_error(const Frame& f1, const Frame& f2, const FlowField& v, const Mask* region) {
  require_same_shape(f1, f2, "interpolation_error");
  require_same_shape(f1, v.u, "interpolation_error");
  check_region(f1, region, "interpolation_error");
  const Frame pred = predict_second_frame(f1, v);
  Accumulator acc;
  std::size_t n = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!in_region(region, i)) continue;
    const double d = pred[i] - f2[i];
    acc.add(d * d);
    ++n;
  }
  if (n == 0) throw Error(ErrorKind::EmptyRegion, "interpolation_error: empty region");
  return std::sqrt(acc.value() / static_cast<double>(n));
}

EndpointError endpoint_error(const FlowField& v, const FlowField& gt, const Mask* region) {
  require_same_shape(v.u, gt.u, "endpoint_error");
  check_region(v.u, region, "endpoint_error");
  Accumulator acc;
  double worst = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < v.u.size(); ++i) {
    if (!in_region(region, i)) continue;
    const double e = std::hypot(v.u[i] - gt.u[i], v.v[i] - gt.v[i]);
    acc.add(e);
    worst = std::max(worst, e);
    ++n;
  }
  if (n == 0) throw Error(ErrorKind::EmptyRegion, "endpoint_error: empty region");
  return {acc.value() / static_cast<double>(n), worst};
}

double angular_error_at(double u, double v, double gu, double gv) {
  // atan2(|a x b|, a . b) stays accurate near zero, where acos does not
  const double cx = v - gv;
  const double cy = gu - u;
  const double cz = u * gv - v * gu;
  return std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), u * gu + v * gv + 1.0);
}

double angular_error(const FlowField& v, const FlowField& gt, const Mask* region) {
  require_same_shape(v.u, gt.u, "angular_error");
  check_region(v.u, region, "angular_error");
  Accumulator acc;
  std::size_t n = 0;
  for (std::size_t i = 0; i < v.u.size(); ++i) {
    if (!in_region(region, i)) continue;
    acc.add(angular_error_at(v.u[i], v.v[i], gt.u[i], gt.v[i]));
    ++n;
  }
  if (n == 0) throw Error(ErrorKind::EmptyRegion, "angular_error: empty region");
  return acc.value() / static_cast<double>(n);
}

}  // namespace smokeflow
