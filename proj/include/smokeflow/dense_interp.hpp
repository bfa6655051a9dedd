#pragma once

#include <memory>
#include <string>
#include <vector>

#include "smokeflow/imaging.hpp"
#include "smokeflow/sparse_flow.hpp"

namespace smokeflow {

/// Orthonormal 2D DCT-II and its inverse (DCT-III), backed by FFTW.
/// Plans are created once per size; the object is not thread-safe.
class Dct2 {
 public:
  Dct2(int width, int height);
  ~Dct2();
  Dct2(const Dct2&) = delete;
  Dct2& operator=(const Dct2&) = delete;

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  Grid<double> forward(const Grid<double>& g);
  Grid<double> inverse(const Grid<double>& g);

 private:
  struct Impl;
  int width_;
  int height_;
  std::unique_ptr<Impl> impl_;
};

Grid<double> dct2(const Grid<double>& g);
Grid<double> idct2(const Grid<double>& g);

enum class TensorVariant {
  Garcia,        // 2 - 2cos: eigenvalues of the Neumann Laplacian, keeps constants
  PaperLiteral,  // 2 - cos as printed; shrinks the DC term
};

enum class InterpSolver {
  FixedPoint,         // v <- IDCT(Gamma * DCT(M(u - v) + v))
  ConjugateGradient,  // same minimizer, CG preconditioned by the same Gamma
};

std::string to_string(TensorVariant v);
TensorVariant tensor_variant_from_string(const std::string& s);
std::string to_string(InterpSolver s);
InterpSolver interp_solver_from_string(const std::string& s);

struct InterpParams {
  double lambda = 1.0;
  int max_iters = 500;
  double tol = 1e-6;
  TensorVariant tensor_variant = TensorVariant::Garcia;
  InterpSolver solver = InterpSolver::ConjugateGradient;

  void validate() const;
};

/// Gamma(i1,i2) = 1 / (1 + lambda * (sum_j d_j)^2) with d_j = 2 - 2cos(i_j pi / n_j)
/// (Garcia) or 2 - cos(i_j pi / n_j) (PaperLiteral), zero-based frequency indices.
Grid<double> filtering_tensor(int width, int height, double lambda, TensorVariant variant);

struct InterpStats {
  int iterations = 0;
  bool converged = false;
  std::vector<double> energy;  // filled only when tracking is requested
};

/// Penalized least squares energy ||M^1/2 (v - data)||^2 + v^T Q v where Q is
/// diagonal in the DCT basis with eigenvalues 1/Gamma - 1.
double pls_energy(const Grid<double>& v, const Grid<double>& data, const Mask& weights, const Grid<double>& gamma,
                  Dct2& dct);

/// Minimizes the penalized least squares energy for one scalar field.
Grid<double> smooth_component(const Grid<double>& data, const Mask& weights, const InterpParams& params,
                              InterpStats* stats = nullptr, bool track_energy = false);

/// Dense field from sparse samples, components handled independently.
/// `data_mask` must mark exactly the anchor pixels of `sparse`.
FlowField interpolate(const SparseFlow& sparse, const Mask& data_mask, const InterpParams& params,
                      InterpStats* stats = nullptr);
FlowField interpolate(const SparseFlow& sparse, const InterpParams& params, InterpStats* stats = nullptr);

}  // namespace smokeflow
