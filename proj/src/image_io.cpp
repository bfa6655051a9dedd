#include "smokeflow/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

namespace smokeflow {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
  FilePtr fp(std::fopen(path.c_str(), mode));
  if (!fp) throw Error(ErrorKind::Io, "cannot open " + path);
  return fp;
}

// libpng would print to stderr by default; errors are reported through Error instead
void png_quiet_error(png_structp png, png_const_charp) { png_longjmp(png, 1); }
void png_quiet_warning(png_structp, png_const_charp) {}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

Frame read_png(const std::string& path) {
  FilePtr fp = open_file(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_quiet_error, png_quiet_warning);
  if (!png) throw Error(ErrorKind::Io, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorKind::Io, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::Format, "corrupt png: " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);

  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (depth == 16) png_set_swap(png);  // host order, little-endian assumed
  png_read_update_info(png, info);

  const int channels = png_get_channels(png, info);
  const int out_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  std::vector<png_byte> buffer(rowbytes * height);
  std::vector<png_bytep> rows(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = buffer.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Frame f(static_cast<int>(width), static_cast<int>(height));
  const double scale = out_depth == 16 ? 65535.0 : 255.0;
  for (png_uint_32 y = 0; y < height; ++y) {
    for (png_uint_32 x = 0; x < width; ++x) {
      auto channel = [&](int c) -> double {
        const std::size_t idx = static_cast<std::size_t>(x) * channels + c;
        if (out_depth == 16) {
          std::uint16_t s;
          std::memcpy(&s, rows[y] + 2 * idx, 2);
          return s / scale;
        }
        return rows[y][idx] / scale;
      };
      double value;
      if (channels >= 3) {
        value = luminance(channel(0), channel(1), channel(2));
      } else {
        value = channel(0);
      }
      f(static_cast<int>(x), static_cast<int>(y)) = std::clamp(value, 0.0, 1.0);
    }
  }
  return f;
}

Frame read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::string magic;
  in >> magic;
  if (magic != "P2" && magic != "P5") throw Error(ErrorKind::Format, "not a pgm file: " + path);

  auto next_int = [&]() {
    while (true) {
      in >> std::ws;
      if (in.peek() == '#') {
        std::string line;
        std::getline(in, line);
        continue;
      }
      long value = -1;
      if (!(in >> value)) throw Error(ErrorKind::Format, "corrupt pgm header: " + path);
      return value;
    }
  };
  const long width = next_int();
  const long height = next_int();
  const long maxval = next_int();
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) {
    throw Error(ErrorKind::Format, "corrupt pgm header: " + path);
  }

  Frame f(static_cast<int>(width), static_cast<int>(height));
  if (magic == "P2") {
    for (std::size_t i = 0; i < f.size(); ++i) {
      long v;
      if (!(in >> v)) throw Error(ErrorKind::Format, "truncated pgm: " + path);
      f[i] = std::clamp(static_cast<double>(v) / maxval, 0.0, 1.0);
    }
    return f;
  }
  in.get();  // single whitespace after maxval
  const int bytes = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raw(f.size() * bytes);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) throw Error(ErrorKind::Format, "truncated pgm: " + path);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const unsigned v = bytes == 2 ? (raw[2 * i] << 8u) | raw[2 * i + 1] : raw[i];
    f[i] = std::clamp(static_cast<double>(v) / maxval, 0.0, 1.0);
  }
  return f;
}

void write_png_rows(const std::string& path, int width, int height, int color_type,
                    const std::vector<png_byte>& buffer, int channels) {
  FilePtr fp = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_quiet_error, png_quiet_warning);
  if (!png) throw Error(ErrorKind::Io, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorKind::Io, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorKind::Io, "png write failed: " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) {
    rows[static_cast<std::size_t>(y)] =
        const_cast<png_bytep>(buffer.data()) + static_cast<std::size_t>(y) * width * channels;
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

bool has_suffix(const std::string& s, const std::string& suffix) {
  if (s.size() < suffix.size()) return false;
  return std::equal(suffix.rbegin(), suffix.rend(), s.rbegin(),
                    [](char a, char b) { return std::tolower(a) == std::tolower(b); });
}

}  // namespace

Frame read_image(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw Error(ErrorKind::Io, "cannot open " + path);
  unsigned char sig[8] = {};
  probe.read(reinterpret_cast<char*>(sig), 8);
  if (probe.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0) return read_png(path);
  if (sig[0] == 'P' && (sig[1] == '2' || sig[1] == '5')) return read_pgm(path);
  if (has_suffix(path, ".png")) return read_png(path);
  throw Error(ErrorKind::Format, "unsupported image format: " + path);
}

void write_png(const Frame& f, const std::string& path) {
  std::vector<png_byte> buffer(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) buffer[i] = to_byte(f[i]);
  write_png_rows(path, f.width(), f.height(), PNG_COLOR_TYPE_GRAY, buffer, 1);
}

void write_png(const RgbImage& img, const std::string& path) {
  require_same_shape(img.r, img.g, "write_png");
  require_same_shape(img.r, img.b, "write_png");
  std::vector<png_byte> buffer(img.r.size() * 3);
  for (std::size_t i = 0; i < img.r.size(); ++i) {
    buffer[3 * i] = to_byte(img.r[i]);
    buffer[3 * i + 1] = to_byte(img.g[i]);
    buffer[3 * i + 2] = to_byte(img.b[i]);
  }
  write_png_rows(path, img.r.width(), img.r.height(), PNG_COLOR_TYPE_RGB, buffer, 3);
}

}  // namespace smokeflow
