#pragma once

#include <cmath>
#include <vector>

#include "smokeflow/imaging.hpp"

namespace smokeflow {

/// Weights and solver settings for the one-level variational refinement.
struct RefineParams {
  double alpha = 1.0;            // gradient constancy weight
  double gamma = 0.05;           // smoothness weight, for intensities in [0,1]
  double penalizer_eps = 1e-3;   // Charbonnier epsilon
  int outer_iters = 30;          // fixed-point linearizations
  int sor_iters = 30;            // SOR sweeps per linear system
  double sor_omega = 1.6;
  int max_backtracks = 8;        // step halvings before an increment is rejected

  void validate() const;
};

/// Charbonnier penalizer phi(s^2) = sqrt(s^2 + eps^2).
inline double charbonnier(double s2, double eps) { return std::sqrt(s2 + eps * eps); }

/// Brightness constancy + gradient constancy + smoothness energy of a
/// frame-1-anchored forward field: data residuals compare f2(x + v(x)) with
/// f1(x); the smoothness term uses forward differences with zero flux across
/// the image border.
double energy(const Frame& f1, const Frame& f2, const FlowField& v, const RefineParams& params);

/// Per-pixel coefficients of the linearized increment system
///   (A + gamma * L_psi) dv = -b - gamma * L_psi v
/// where A is the 2x2 block data term and L_psi the weighted graph Laplacian
/// of the smoothness term. Edge weights are stored on the pixel at the
/// left/top end of each edge.
struct IncrementSystem {
  int width = 0;
  int height = 0;
  Grid<double> a11, a12, a22;
  Grid<double> b1, b2;
  Grid<double> edge_right;  // psi between (x,y) and (x+1,y), already scaled by gamma
  Grid<double> edge_down;   // psi between (x,y) and (x,y+1), already scaled by gamma
};

IncrementSystem assemble_increment_system(const Frame& f1, const Frame& f2, const FlowField& v,
                                          const RefineParams& params);

/// Dense (2n x 2n) matrix of the system, unknowns ordered [du_0, dv_0, du_1, ...].
/// Intended for small instances only.
std::vector<double> dense_system_matrix(const IncrementSystem& sys);

/// Runs `sweeps` row-major SOR sweeps on the system, updating `dv` in place.
void sor_solve(const IncrementSystem& sys, const FlowField& v, FlowField& dv, int sweeps, double omega);

struct RefineStats {
  std::vector<double> energy;   // before the first and after every outer iteration
  std::vector<double> max_increment;
  int rejected_steps = 0;
};

/// Outer fixed-point loop: linearize about the current warp, SOR on the
/// increment system, accept v + s*dv for the largest s in {1, 1/2, ...} that
/// does not raise the energy.
FlowField refine(const Frame& f1, const Frame& f2, const FlowField& v0, const RefineParams& params,
                 RefineStats* stats = nullptr);

}  // namespace smokeflow
