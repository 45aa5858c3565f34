#include "skynow/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>

namespace skynow {

bool SkyGrid::pixel_to_angles(double px, double py, double& zenith_deg,
                              double& azimuth_deg) const {
  const double dx = px - center();
  const double dy = py - center();
  const double r = std::sqrt(dx * dx + dy * dy);
  zenith_deg = r / radius() * fov_deg;
  azimuth_deg = r > 1e-12 ? wrap360(rad2deg(std::atan2(dx, -dy))) : 0.0;
  return r <= radius();
}

void SkyGrid::angles_to_pixel(double zenith_deg, double azimuth_deg,
                              double& px, double& py) const {
  const double r = zenith_deg / fov_deg * radius();
  const double az = deg2rad(azimuth_deg);
  px = center() + r * std::sin(az);
  py = center() - r * std::cos(az);
}

SkyImage SkyImage::create(const SkyGrid& g) {
  SkyImage im;
  im.grid = g;
  im.rgb.assign(static_cast<std::size_t>(g.size) * g.size * 3, 0.0f);
  im.valid.assign(static_cast<std::size_t>(g.size) * g.size, 0);
  for (int y = 0; y < g.size; ++y)
    for (int x = 0; x < g.size; ++x)
      im.valid[static_cast<std::size_t>(y * g.size + x)] =
          g.valid(x, y) ? 1 : 0;
  return im;
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void write_png(const std::string& path, int w, int h, int color_type,
               int bit_depth, const std::vector<png_bytep>& rows) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw DataError("cannot open for writing: " + path);
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("libpng write failure: " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, w, h, bit_depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);
  png_write_image(png, const_cast<png_bytep*>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

struct PngRead {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FilePtr fp;
  int w = 0, h = 0, color = 0, depth = 0;

  explicit PngRead(const std::string& path) {
    fp.reset(std::fopen(path.c_str(), "rb"));
    if (!fp) throw DataError("cannot open: " + path);
    png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                 nullptr);
    info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
      png_destroy_read_struct(&png, &info, nullptr);
      throw DataError("libpng read failure: " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);
    w = png_get_image_width(png, info);
    h = png_get_image_height(png, info);
    color = png_get_color_type(png, info);
    depth = png_get_bit_depth(png, info);
  }
  ~PngRead() {
    if (png) png_destroy_read_struct(&png, &info, nullptr);
  }
};

}  // namespace

RawImage read_png_rgb8(const std::string& path) {
  PngRead r(path);
  if (setjmp(png_jmpbuf(r.png))) throw DataError("libpng read failure: " + path);
  if (r.depth == 16) png_set_strip_16(r.png);
  if (r.color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
  if (r.color == PNG_COLOR_TYPE_GRAY || r.color == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(r.png);
  png_set_strip_alpha(r.png);
  png_read_update_info(r.png, r.info);

  RawImage im = RawImage::create(r.w, r.h);
  std::vector<png_bytep> rows(r.h);
  for (int y = 0; y < r.h; ++y)
    rows[y] = im.pixels.data() + static_cast<std::size_t>(y) * r.w * 3;
  png_read_image(r.png, rows.data());
  return im;
}

void write_png_rgb8(const std::string& path, const RawImage& im) {
  std::vector<png_bytep> rows(im.height);
  for (int y = 0; y < im.height; ++y)
    rows[y] = const_cast<png_bytep>(im.pixels.data() +
                                    static_cast<std::size_t>(y) * im.width * 3);
  write_png(path, im.width, im.height, PNG_COLOR_TYPE_RGB, 8, rows);
}

void write_png_gray8(const std::string& path, int w, int h,
                     const std::vector<std::uint8_t>& data) {
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y)
    rows[y] =
        const_cast<png_bytep>(data.data() + static_cast<std::size_t>(y) * w);
  write_png(path, w, h, PNG_COLOR_TYPE_GRAY, 8, rows);
}

std::vector<std::uint8_t> read_png_gray8(const std::string& path, int& w,
                                         int& h) {
  PngRead r(path);
  if (setjmp(png_jmpbuf(r.png))) throw DataError("libpng read failure: " + path);
  if (r.color != PNG_COLOR_TYPE_GRAY || r.depth != 8)
    throw DataError("expected 8-bit gray PNG: " + path);
  w = r.w;
  h = r.h;
  std::vector<std::uint8_t> data(static_cast<std::size_t>(w) * h);
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y)
    rows[y] = data.data() + static_cast<std::size_t>(y) * w;
  png_read_image(r.png, rows.data());
  return data;
}

void write_png_gray16(const std::string& path, int w, int h,
                      const std::vector<std::uint16_t>& data) {
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y)
    rows[y] = const_cast<png_bytep>(reinterpret_cast<const png_byte*>(
        data.data() + static_cast<std::size_t>(y) * w));
  write_png(path, w, h, PNG_COLOR_TYPE_GRAY, 16, rows);
}

std::vector<std::uint16_t> read_png_gray16(const std::string& path, int& w,
                                           int& h) {
  PngRead r(path);
  if (setjmp(png_jmpbuf(r.png))) throw DataError("libpng read failure: " + path);
  if (r.color != PNG_COLOR_TYPE_GRAY || r.depth != 16)
    throw DataError("expected 16-bit gray PNG: " + path);
  png_set_swap(r.png);
  png_read_update_info(r.png, r.info);
  w = r.w;
  h = r.h;
  std::vector<std::uint16_t> data(static_cast<std::size_t>(w) * h);
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y)
    rows[y] = reinterpret_cast<png_bytep>(data.data() +
                                          static_cast<std::size_t>(y) * w);
  png_read_image(r.png, rows.data());
  return data;
}

RawImage to_raw8(const SkyImage& im) {
  RawImage raw = RawImage::create(im.size(), im.size());
  for (std::size_t i = 0; i < im.rgb.size(); ++i) {
    float v = im.rgb[i];
    v = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
    raw.pixels[i] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
  }
  return raw;
}

SkyImage from_raw8(const RawImage& raw, const SkyGrid& grid, UtcTime ts,
                   const std::string& camera_id) {
  if (raw.width != grid.size || raw.height != grid.size)
    throw DataError("from_raw8: image size does not match grid");
  SkyImage im = SkyImage::create(grid);
  im.timestamp = ts;
  im.camera_id = camera_id;
  for (int y = 0; y < grid.size; ++y)
    for (int x = 0; x < grid.size; ++x)
      for (int c = 0; c < 3; ++c)
        im.at(x, y, c) =
            im.is_valid(x, y) ? raw.at(x, y, c) / 255.0f : 0.0f;
  return im;
}

}  // namespace skynow
