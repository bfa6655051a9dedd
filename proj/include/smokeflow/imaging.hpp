#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace smokeflow {

enum class ErrorKind {
  InvalidParameter,
  DimensionMismatch,
  NoSparseData,
  EmptyRegion,
  NonFinite,
  FlowTooLarge,
  Io,
  Format,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

/// Dense row-major raster. x indexes columns, y indexes rows.
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 0 || height < 0) throw Error(ErrorKind::InvalidParameter, "negative grid size");
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::vector<T>& values() noexcept { return data_; }
  const std::vector<T>& values() const noexcept { return data_; }

  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }
  bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  template <class U>
  bool same_shape(const Grid<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Single-channel intensity image with values in [0,1].
using Frame = Grid<double>;
/// Boolean per-pixel mask stored as 0/1 bytes.
using Mask = Grid<std::uint8_t>;

/// Dense per-pixel displacement field; u is horizontal, v is vertical.
struct FlowField {
  Grid<double> u;
  Grid<double> v;

  FlowField() = default;
  FlowField(int width, int height, double fill_u = 0.0, double fill_v = 0.0)
      : u(width, height, fill_u), v(width, height, fill_v) {}

  int width() const noexcept { return u.width(); }
  int height() const noexcept { return u.height(); }
  Vec2 at(int x, int y) const { return {u(x, y), v(x, y)}; }
  bool all_finite() const;

  friend bool operator==(const FlowField&, const FlowField&) = default;
};

template <class A, class B>
void require_same_shape(const Grid<A>& a, const Grid<B>& b, const char* what) {
  if (!a.same_shape(b)) throw Error(ErrorKind::DimensionMismatch, std::string(what) + ": dimension mismatch");
}

/// mask(p) = f(p) * 255 > epsilon. epsilon is on the 8-bit scale.
Mask threshold_mask(const Frame& f, double epsilon = 1.0);

/// Separable Gaussian blur, kernel radius ceil(3 sigma), replicated borders.
Frame gaussian_blur(const Frame& f, double sigma);

/// Normalized 1D Gaussian taps for offsets -r..r with r = ceil(3 sigma).
std::vector<double> gaussian_kernel(double sigma);

struct Gradient {
  Frame dx;
  Frame dy;
};

/// Central differences inside, one-sided differences on the border.
Gradient gradient(const Frame& f);

/// Bilinear sample with coordinates clamped to the image.
double sample_bilinear(const Frame& f, double x, double y);

/// result(x) = f2(x + v(x)) by bilinear sampling with border clamping.
Frame warp_backward(const Frame& f2, const FlowField& v);

/// Rec. 601 luminance.
inline double luminance(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

}  // namespace smokeflow
