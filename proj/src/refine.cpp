#include "smokeflow/refine.hpp"

#include <algorithm>
#include <cmath>

namespace smokeflow {
namespace {

// derivative of the Charbonnier penalizer with respect to s^2
double charbonnier_weight(double s2, double eps) { return 0.5 / std::sqrt(s2 + eps * eps); }

struct Derivatives {
  Gradient g1;
  Gradient g2;
  Gradient g2x;  // gradient of d f2 / dx
  Gradient g2y;  // gradient of d f2 / dy
};

Derivatives derivatives(const Frame& f1, const Frame& f2) {
  Derivatives d{gradient(f1), gradient(f2), {}, {}};
  d.g2x = gradient(d.g2.dx);
  d.g2y = gradient(d.g2.dy);
  return d;
}

// forward difference with zero flux at the last column/row
double diff_x(const Grid<double>& g, int x, int y) { return x + 1 < g.width() ? g(x + 1, y) - g(x, y) : 0.0; }
double diff_y(const Grid<double>& g, int x, int y) { return y + 1 < g.height() ? g(x, y + 1) - g(x, y) : 0.0; }

double smoothness_s2(const FlowField& v, int x, int y) {
  const double ux = diff_x(v.u, x, y), uy = diff_y(v.u, x, y);
  const double vx = diff_x(v.v, x, y), vy = diff_y(v.v, x, y);
  return ux * ux + uy * uy + vx * vx + vy * vy;
}

double energy_with(const Frame& f1, const Frame& f2, const Derivatives& d, const FlowField& v,
                   const RefineParams& p) {
  const int w = f1.width();
  const int h = f1.height();
  double data = 0.0;
  double smooth = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double sx = x + v.u(x, y);
      const double sy = y + v.v(x, y);
      const double bc = std::clamp(sample_bilinear(f2, sx, sy), 0.0, 1.0) - f1(x, y);
      const double gx = sample_bilinear(d.g2.dx, sx, sy) - d.g1.dx(x, y);
      const double gy = sample_bilinear(d.g2.dy, sx, sy) - d.g1.dy(x, y);
      data += charbonnier(bc * bc, p.penalizer_eps) + p.alpha * charbonnier(gx * gx + gy * gy, p.penalizer_eps);
      smooth += charbonnier(smoothness_s2(v, x, y), p.penalizer_eps);
    }
  }
  return data + p.gamma * smooth;
}

IncrementSystem assemble_with(const Frame& f1, const Frame& f2, const Derivatives& d, const FlowField& v,
                              const RefineParams& p) {
  const int w = f1.width();
  const int h = f1.height();
  IncrementSystem sys{w, h, Grid<double>(w, h), Grid<double>(w, h), Grid<double>(w, h), Grid<double>(w, h),
                      Grid<double>(w, h), Grid<double>(w, h), Grid<double>(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double sx = x + v.u(x, y);
      const double sy = y + v.v(x, y);
      const double iz = std::clamp(sample_bilinear(f2, sx, sy), 0.0, 1.0) - f1(x, y);
      const double ix = sample_bilinear(d.g2.dx, sx, sy);
      const double iy = sample_bilinear(d.g2.dy, sx, sy);
      const double rgx = ix - d.g1.dx(x, y);
      const double rgy = iy - d.g1.dy(x, y);
      const double hxx = sample_bilinear(d.g2x.dx, sx, sy);
      const double hxy = sample_bilinear(d.g2x.dy, sx, sy);
      const double hyx = sample_bilinear(d.g2y.dx, sx, sy);
      const double hyy = sample_bilinear(d.g2y.dy, sx, sy);

      const double wd = charbonnier_weight(iz * iz, p.penalizer_eps);
      const double wg = p.alpha * charbonnier_weight(rgx * rgx + rgy * rgy, p.penalizer_eps);
      sys.a11(x, y) = wd * ix * ix + wg * (hxx * hxx + hyx * hyx);
      sys.a12(x, y) = wd * ix * iy + wg * (hxx * hxy + hyx * hyy);
      sys.a22(x, y) = wd * iy * iy + wg * (hxy * hxy + hyy * hyy);
      sys.b1(x, y) = wd * iz * ix + wg * (rgx * hxx + rgy * hyx);
      sys.b2(x, y) = wd * iz * iy + wg * (rgx * hxy + rgy * hyy);

      const double ws = p.gamma * charbonnier_weight(smoothness_s2(v, x, y), p.penalizer_eps);
      sys.edge_right(x, y) = x + 1 < w ? ws : 0.0;
      sys.edge_down(x, y) = y + 1 < h ? ws : 0.0;
    }
  }
  return sys;
}

// Sum of edge weights at (x,y) and the weighted sums of neighbour values.
struct Neighbourhood {
  double weight = 0.0;
  double sum_u = 0.0;
  double sum_v = 0.0;
};

template <class U, class V>
Neighbourhood neighbourhood(const IncrementSystem& s, int x, int y, U&& u_at, V&& v_at) {
  Neighbourhood n;
  auto add = [&](double w, int qx, int qy) {
    if (w == 0.0) return;
    n.weight += w;
    n.sum_u += w * u_at(qx, qy);
    n.sum_v += w * v_at(qx, qy);
  };
  if (x + 1 < s.width) add(s.edge_right(x, y), x + 1, y);
  if (x > 0) add(s.edge_right(x - 1, y), x - 1, y);
  if (y + 1 < s.height) add(s.edge_down(x, y), x, y + 1);
  if (y > 0) add(s.edge_down(x, y - 1), x, y - 1);
  return n;
}

}  // namespace

void RefineParams::validate() const {
  if (!(alpha >= 0.0) || !(gamma >= 0.0)) throw Error(ErrorKind::InvalidParameter, "refine weights must be >= 0");
  if (!(penalizer_eps > 0.0)) throw Error(ErrorKind::InvalidParameter, "penalizer epsilon must be positive");
  if (outer_iters < 0) throw Error(ErrorKind::InvalidParameter, "outer_iters must be >= 0");
  if (sor_iters < 1) throw Error(ErrorKind::InvalidParameter, "sor_iters must be >= 1");
  if (!(sor_omega > 0.0 && sor_omega < 2.0)) throw Error(ErrorKind::InvalidParameter, "sor_omega must lie in (0,2)");
  if (max_backtracks < 0) throw Error(ErrorKind::InvalidParameter, "max_backtracks must be >= 0");
}

double energy(const Frame& f1, const Frame& f2, const FlowField& v, const RefineParams& params) {
  require_same_shape(f1, f2, "energy");
  require_same_shape(f1, v.u, "energy");
  return energy_with(f1, f2, derivatives(f1, f2), v, params);
}

IncrementSystem assemble_increment_system(const Frame& f1, const Frame& f2, const FlowField& v,
                                          const RefineParams& params) {
  require_same_shape(f1, f2, "assemble_increment_system");
  require_same_shape(f1, v.u, "assemble_increment_system");
  return assemble_with(f1, f2, derivatives(f1, f2), v, params);
}

std::vector<double> dense_system_matrix(const IncrementSystem& s) {
  const std::size_t n = static_cast<std::size_t>(s.width) * s.height;
  const std::size_t dim = 2 * n;
  std::vector<double> m(dim * dim, 0.0);
  auto at = [&](std::size_t r, std::size_t c) -> double& { return m[r * dim + c]; };
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      const std::size_t p = s.a11.index(x, y);
      at(2 * p, 2 * p) += s.a11[p];
      at(2 * p, 2 * p + 1) += s.a12[p];
      at(2 * p + 1, 2 * p) += s.a12[p];
      at(2 * p + 1, 2 * p + 1) += s.a22[p];
      auto couple = [&](double w, std::size_t q) {
        for (std::size_t c = 0; c < 2; ++c) {
          at(2 * p + c, 2 * p + c) += w;
          at(2 * q + c, 2 * q + c) += w;
          at(2 * p + c, 2 * q + c) -= w;
          at(2 * q + c, 2 * p + c) -= w;
        }
      };
      if (x + 1 < s.width) couple(s.edge_right[p], s.a11.index(x + 1, y));
      if (y + 1 < s.height) couple(s.edge_down[p], s.a11.index(x, y + 1));
    }
  }
  return m;
}

void sor_solve(const IncrementSystem& s, const FlowField& v, FlowField& dv, int sweeps, double omega) {
  for (int it = 0; it < sweeps; ++it) {
    for (int y = 0; y < s.height; ++y) {
      for (int x = 0; x < s.width; ++x) {
        // Smoothness acts on v + dv; the known part of v moves to the right-hand side.
        const Neighbourhood n = neighbourhood(
            s, x, y, [&](int qx, int qy) { return v.u(qx, qy) + dv.u(qx, qy); },
            [&](int qx, int qy) { return v.v(qx, qy) + dv.v(qx, qy); });

        const double du_diag = s.a11(x, y) + n.weight;
        if (du_diag > 0.0) {
          const double target = (-s.b1(x, y) - s.a12(x, y) * dv.v(x, y) + n.sum_u - n.weight * v.u(x, y)) / du_diag;
          dv.u(x, y) += omega * (target - dv.u(x, y));
        }
        const double dv_diag = s.a22(x, y) + n.weight;
        if (dv_diag > 0.0) {
          const double target = (-s.b2(x, y) - s.a12(x, y) * dv.u(x, y) + n.sum_v - n.weight * v.v(x, y)) / dv_diag;
          dv.v(x, y) += omega * (target - dv.v(x, y));
        }
      }
    }
  }
}

FlowField refine(const Frame& f1, const Frame& f2, const FlowField& v0, const RefineParams& params,
                 RefineStats* stats) {
  params.validate();
  require_same_shape(f1, f2, "refine");
  require_same_shape(f1, v0.u, "refine");
  if (!v0.all_finite()) throw Error(ErrorKind::NonFinite, "refine: initial flow is not finite");

  RefineStats local;
  RefineStats& st = stats ? *stats : local;
  st = RefineStats{};

  const Derivatives d = derivatives(f1, f2);
  FlowField v = v0;
  double e = energy_with(f1, f2, d, v, params);
  st.energy.push_back(e);

  const int w = f1.width();
  const int h = f1.height();
  const double diagonal = std::hypot(w, h);
  for (int outer = 0; outer < params.outer_iters; ++outer) {
    const IncrementSystem sys = assemble_with(f1, f2, d, v, params);
    FlowField dv(w, h);
    sor_solve(sys, v, dv, params.sor_iters, params.sor_omega);

    bool accepted = false;
    double step = 1.0;
    FlowField trial(w, h);
    for (int attempt = 0; attempt <= params.max_backtracks; ++attempt, step *= 0.5) {
      for (std::size_t i = 0; i < v.u.size(); ++i) {
        trial.u[i] = v.u[i] + step * dv.u[i];
        trial.v[i] = v.v[i] + step * dv.v[i];
      }
      if (!trial.all_finite()) continue;
      double inc = 0.0;
      for (std::size_t i = 0; i < v.u.size(); ++i) {
        inc = std::max({inc, std::abs(trial.u[i] - v.u[i]), std::abs(trial.v[i] - v.v[i])});
      }
      if (inc >= diagonal) continue;
      const double et = energy_with(f1, f2, d, trial, params);
      if (et <= e) {
        v = trial;
        e = et;
        st.max_increment.push_back(inc);
        accepted = true;
        break;
      }
    }
    st.energy.push_back(e);
    if (!accepted) {
      ++st.rejected_steps;
      st.max_increment.push_back(0.0);
      break;  // the next linearization would be identical
    }
  }
  return v;
}

}  // namespace smokeflow
