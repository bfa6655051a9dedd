#include "smokeflow/dense_interp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace smokeflow {

struct Dct2::Impl {
  double* buffer = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
  std::vector<double> row_scale;  // per x frequency
  std::vector<double> col_scale;  // per y frequency

  ~Impl() {
    if (forward) fftw_destroy_plan(forward);
    if (inverse) fftw_destroy_plan(inverse);
    if (buffer) fftw_free(buffer);
  }
};

namespace {

// FFTW's REDFT10 is 2 * sum x_n cos(pi k (2n+1) / 2N); this maps it to the
// orthonormal DCT-II.
std::vector<double> orthonormal_scale(int n) {
  std::vector<double> s(static_cast<std::size_t>(n), 1.0 / std::sqrt(2.0 * n));
  s[0] /= std::sqrt(2.0);
  return s;
}

}  // namespace

Dct2::Dct2(int width, int height) : width_(width), height_(height), impl_(std::make_unique<Impl>()) {
  if (width < 1 || height < 1) throw Error(ErrorKind::InvalidParameter, "dct of an empty grid");
  const std::size_t n = static_cast<std::size_t>(width) * height;
  impl_->buffer = static_cast<double*>(fftw_malloc(sizeof(double) * n));
  impl_->forward = fftw_plan_r2r_2d(height, width, impl_->buffer, impl_->buffer, FFTW_REDFT10, FFTW_REDFT10,
                                    FFTW_ESTIMATE);
  impl_->inverse = fftw_plan_r2r_2d(height, width, impl_->buffer, impl_->buffer, FFTW_REDFT01, FFTW_REDFT01,
                                    FFTW_ESTIMATE);
  impl_->row_scale = orthonormal_scale(width);
  impl_->col_scale = orthonormal_scale(height);
}

Dct2::~Dct2() = default;

Grid<double> Dct2::forward(const Grid<double>& g) {
  if (g.width() != width_ || g.height() != height_) throw Error(ErrorKind::DimensionMismatch, "dct size");
  std::copy(g.values().begin(), g.values().end(), impl_->buffer);
  fftw_execute(impl_->forward);
  Grid<double> out(width_, height_);
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      out(x, y) = impl_->buffer[out.index(x, y)] * impl_->row_scale[x] * impl_->col_scale[y];
    }
  }
  return out;
}

Grid<double> Dct2::inverse(const Grid<double>& g) {
  if (g.width() != width_ || g.height() != height_) throw Error(ErrorKind::DimensionMismatch, "dct size");
  // REDFT01 computes Z_0 + 2 sum_{k>0} Z_k cos(...); undo the forward scaling
  // so that the pair is exactly inverse.
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      const double sx = impl_->row_scale[x] * (x == 0 ? 2.0 : 1.0);
      const double sy = impl_->col_scale[y] * (y == 0 ? 2.0 : 1.0);
      impl_->buffer[g.index(x, y)] = g(x, y) * sx * sy;
    }
  }
  fftw_execute(impl_->inverse);
  Grid<double> out(width_, height_);
  std::copy(impl_->buffer, impl_->buffer + out.size(), out.values().begin());
  return out;
}

Grid<double> dct2(const Grid<double>& g) {
  Dct2 plan(g.width(), g.height());
  return plan.forward(g);
}

Grid<double> idct2(const Grid<double>& g) {
  Dct2 plan(g.width(), g.height());
  return plan.inverse(g);
}

std::string to_string(TensorVariant v) { return v == TensorVariant::Garcia ? "garcia" : "paper-literal"; }

TensorVariant tensor_variant_from_string(const std::string& s) {
  if (s == "garcia") return TensorVariant::Garcia;
  if (s == "paper-literal" || s == "paper_literal") return TensorVariant::PaperLiteral;
  throw Error(ErrorKind::InvalidParameter, "unknown tensor variant: " + s);
}

std::string to_string(InterpSolver s) { return s == InterpSolver::FixedPoint ? "fixed-point" : "cg"; }

InterpSolver interp_solver_from_string(const std::string& s) {
  if (s == "fixed-point" || s == "fixed_point") return InterpSolver::FixedPoint;
  if (s == "cg") return InterpSolver::ConjugateGradient;
  throw Error(ErrorKind::InvalidParameter, "unknown interpolation solver: " + s);
}

void InterpParams::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error(ErrorKind::InvalidParameter, "lambda must be >= 0");
  if (max_iters < 1) throw Error(ErrorKind::InvalidParameter, "max_iters must be positive");
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidParameter, "tol must be positive");
}

Grid<double> filtering_tensor(int width, int height, double lambda, TensorVariant variant) {
  if (width < 1 || height < 1) throw Error(ErrorKind::InvalidParameter, "filtering_tensor: empty grid");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error(ErrorKind::InvalidParameter, "lambda must be >= 0");
  const double c = variant == TensorVariant::Garcia ? 2.0 : 1.0;
  auto term = [c](int i, int n) { return 2.0 - c * std::cos(i * std::numbers::pi / n); };
  Grid<double> gamma(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double s = term(x, width) + term(y, height);
      gamma(x, y) = 1.0 / (1.0 + lambda * s * s);
    }
  }
  return gamma;
}

double pls_energy(const Grid<double>& v, const Grid<double>& data, const Mask& weights, const Grid<double>& gamma,
                  Dct2& dct) {
  double fidelity = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (weights[i]) fidelity += (v[i] - data[i]) * (v[i] - data[i]);
  }
  const Grid<double> coeff = dct.forward(v);
  double smooth = 0.0;
  for (std::size_t i = 0; i < coeff.size(); ++i) smooth += (1.0 / gamma[i] - 1.0) * coeff[i] * coeff[i];
  return fidelity + smooth;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Grid<double> apply_spectral(Dct2& dct, const Grid<double>& x, const Grid<double>& factor) {
  Grid<double> c = dct.forward(x);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= factor[i];
  return dct.inverse(c);
}

Grid<double> solve_fixed_point(const Grid<double>& data, const Mask& weights, const Grid<double>& gamma,
                               const InterpParams& params, Dct2& dct, InterpStats& stats, bool track) {
  Grid<double> v(data.width(), data.height(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (weights[i]) v[i] = data[i];
  }
  if (track) stats.energy.push_back(pls_energy(v, data, weights, gamma, dct));

  Grid<double> rhs(v.width(), v.height());
  for (int it = 0; it < params.max_iters; ++it) {
    for (std::size_t i = 0; i < v.size(); ++i) rhs[i] = weights[i] ? data[i] : v[i];
    Grid<double> next = apply_spectral(dct, rhs, gamma);
    double change = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) change = std::max(change, std::abs(next[i] - v[i]));
    v = std::move(next);
    stats.iterations = it + 1;
    if (track) stats.energy.push_back(pls_energy(v, data, weights, gamma, dct));
    if (change < params.tol) {
      stats.converged = true;
      break;
    }
  }
  return v;
}

// Conjugate gradients on (M + Q) v = M data, preconditioned with (I + Q)^-1,
// the same operator the fixed-point update applies.
Grid<double> solve_cg(const Grid<double>& data, const Mask& weights, const Grid<double>& gamma,
                      const InterpParams& params, Dct2& dct, InterpStats& stats, bool track) {
  const int w = data.width();
  const int h = data.height();
  Grid<double> penalty(w, h);
  for (std::size_t i = 0; i < gamma.size(); ++i) penalty[i] = 1.0 / gamma[i] - 1.0;

  auto apply_a = [&](const Grid<double>& x) {
    Grid<double> ax = apply_spectral(dct, x, penalty);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (weights[i]) ax[i] += x[i];
    }
    return ax;
  };

  Grid<double> v(w, h, 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (weights[i]) v[i] = data[i];
  }
  if (track) stats.energy.push_back(pls_energy(v, data, weights, gamma, dct));

  Grid<double> r = apply_a(v);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = (weights[i] ? data[i] : 0.0) - r[i];
  Grid<double> z = apply_spectral(dct, r, gamma);
  Grid<double> p = z;
  double rz = dot(r.values(), z.values());

  for (int it = 0; it < params.max_iters; ++it) {
    if (!(rz > 0.0)) {
      stats.converged = true;
      break;
    }
    const Grid<double> ap = apply_a(p);
    const double pap = dot(p.values(), ap.values());
    if (!(pap > 0.0)) {
      stats.converged = true;
      break;
    }
    const double alpha = rz / pap;
    double change = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
      change = std::max(change, std::abs(alpha * p[i]));
    }
    stats.iterations = it + 1;
    if (track) stats.energy.push_back(pls_energy(v, data, weights, gamma, dct));
    if (change < params.tol) {
      stats.converged = true;
      break;
    }
    z = apply_spectral(dct, r, gamma);
    const double rz_next = dot(r.values(), z.values());
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
  }
  return v;
}

}  // namespace

Grid<double> smooth_component(const Grid<double>& data, const Mask& weights, const InterpParams& params,
                              InterpStats* stats, bool track_energy) {
  params.validate();
  require_same_shape(data, weights, "smooth_component");
  if (std::none_of(weights.values().begin(), weights.values().end(), [](auto m) { return m != 0; })) {
    throw Error(ErrorKind::NoSparseData, "no sparse data");
  }
  InterpStats local;
  InterpStats& st = stats ? *stats : local;
  st = InterpStats{};

  Dct2 dct(data.width(), data.height());
  const Grid<double> gamma = filtering_tensor(data.width(), data.height(), params.lambda, params.tensor_variant);
  if (params.solver == InterpSolver::FixedPoint) {
    return solve_fixed_point(data, weights, gamma, params, dct, st, track_energy);
  }
  return solve_cg(data, weights, gamma, params, dct, st, track_energy);
}

FlowField interpolate(const SparseFlow& sparse, const Mask& data_mask, const InterpParams& params,
                      InterpStats* stats) {
  if (sparse.empty()) throw Error(ErrorKind::NoSparseData, "no sparse data");
  if (data_mask.width() != sparse.width || data_mask.height() != sparse.height) {
    throw Error(ErrorKind::DimensionMismatch, "interpolate: data mask does not match sparse flow");
  }
  Grid<double> du(sparse.width, sparse.height, 0.0);
  Grid<double> dv(sparse.width, sparse.height, 0.0);
  for (const SparseSample& s : sparse.samples) {
    const int x = static_cast<int>(std::lround(s.anchor.x));
    const int y = static_cast<int>(std::lround(s.anchor.y));
    du(x, y) = s.displacement.x;
    dv(x, y) = s.displacement.y;
  }
  InterpStats su, sv;
  FlowField out;
  out.u = smooth_component(du, data_mask, params, &su);
  out.v = smooth_component(dv, data_mask, params, &sv);
  if (stats) {
    stats->iterations = std::max(su.iterations, sv.iterations);
    stats->converged = su.converged && sv.converged;
  }
  return out;
}

FlowField interpolate(const SparseFlow& sparse, const InterpParams& params, InterpStats* stats) {
  return interpolate(sparse, sparse.anchor_mask(), params, stats);
}

}  // namespace smokeflow
