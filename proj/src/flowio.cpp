#include "smokeflow/flowio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <vector>

namespace smokeflow {
namespace {

constexpr char kMagic[4] = {'P', 'I', 'E', 'H'};

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
  // h in [0, 6)
  const double c = v * s;
  const double x = c * (1.0 - std::abs(std::fmod(h, 2.0) - 1.0));
  const double m = v - c;
  double r1 = 0, g1 = 0, b1 = 0;
  switch (static_cast<int>(std::floor(h)) % 6) {
    case 0: r1 = c; g1 = x; break;
    case 1: r1 = x; g1 = c; break;
    case 2: g1 = c; b1 = x; break;
    case 3: g1 = x; b1 = c; break;
    case 4: r1 = x; b1 = c; break;
    default: r1 = c; b1 = x; break;
  }
  r = r1 + m;
  g = g1 + m;
  b = b1 + m;
}

}  // namespace

void write_flo(const FlowField& v, const std::string& path) {
  const int w = v.width();
  const int h = v.height();
  if (w < 1 || h < 1) throw Error(ErrorKind::InvalidParameter, "write_flo: empty field");
  std::vector<unsigned char> bytes;
  bytes.reserve(12 + static_cast<std::size_t>(w) * h * 8);
  bytes.insert(bytes.end(), kMagic, kMagic + 4);
  put_u32(bytes, static_cast<std::uint32_t>(w));
  put_u32(bytes, static_cast<std::uint32_t>(h));
  constexpr double kFloatMax = std::numeric_limits<float>::max();
  for (std::size_t i = 0; i < v.u.size(); ++i) {
    for (double c : {v.u[i], v.v[i]}) {
      if (!std::isfinite(c) || std::abs(c) > kFloatMax) {
        throw Error(ErrorKind::NonFinite, "write_flo: non-finite flow value");
      }
      put_u32(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(c)));
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path);
}

FlowField read_flo(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 4 || !std::equal(kMagic, kMagic + 4, bytes.begin())) {
    throw Error(ErrorKind::Format, "not a flo file: " + path);
  }
  if (bytes.size() < 12) throw Error(ErrorKind::Format, "corrupt flo: " + path);
  const auto w = static_cast<std::int32_t>(get_u32(bytes.data() + 4));
  const auto h = static_cast<std::int32_t>(get_u32(bytes.data() + 8));
  if (w < 1 || h < 1 || static_cast<long long>(w) * h > (1LL << 31)) {
    throw Error(ErrorKind::Format, "corrupt flo: bad dimensions in " + path);
  }
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (bytes.size() != 12 + n * 8) throw Error(ErrorKind::Format, "corrupt flo: payload size in " + path);

  FlowField v(w, h);
  const unsigned char* p = bytes.data() + 12;
  for (std::size_t i = 0; i < n; ++i, p += 8) {
    v.u[i] = std::bit_cast<float>(get_u32(p));
    v.v[i] = std::bit_cast<float>(get_u32(p + 4));
  }
  return v;
}

double auto_max_magnitude(const FlowField& v) {
  std::vector<double> mags(v.u.size());
  for (std::size_t i = 0; i < mags.size(); ++i) mags[i] = std::hypot(v.u[i], v.v[i]);
  if (mags.empty()) return 1.0;
  const std::size_t k = static_cast<std::size_t>(std::floor(0.99 * static_cast<double>(mags.size() - 1)));
  std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(k), mags.end());
  const double m = mags[k];
  return m > 0.0 ? m : 1.0;
}

RgbImage colorize(const FlowField& v, double max_mag) {
  const double scale = max_mag > 0.0 ? max_mag : auto_max_magnitude(v);
  RgbImage img{Frame(v.width(), v.height()), Frame(v.width(), v.height()), Frame(v.width(), v.height())};
  for (std::size_t i = 0; i < v.u.size(); ++i) {
    const double mag = std::hypot(v.u[i], v.v[i]);
    const double sat = std::min(mag / scale, 1.0);
    double angle = std::atan2(v.v[i], v.u[i]);
    if (angle < 0.0) angle += 2.0 * std::numbers::pi;
    const double hue = std::min(angle / (2.0 * std::numbers::pi) * 6.0, std::nextafter(6.0, 0.0));
    hsv_to_rgb(hue, sat, 1.0, img.r[i], img.g[i], img.b[i]);
  }
  return img;
}

}  // namespace smokeflow
