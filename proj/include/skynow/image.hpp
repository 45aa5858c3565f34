#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skynow/common.hpp"

namespace skynow {

/// 8-bit RGB, row-major. ASI frames are square but the type allows any size.
struct RawImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // width*height*3

  std::uint8_t at(int x, int y, int c) const {
    return pixels[static_cast<std::size_t>((y * width + x) * 3 + c)];
  }
  std::uint8_t& at(int x, int y, int c) {
    return pixels[static_cast<std::size_t>((y * width + x) * 3 + c)];
  }
  static RawImage create(int w, int h) {
    RawImage im;
    im.width = w;
    im.height = h;
    im.pixels.assign(static_cast<std::size_t>(w) * h * 3, 0);
    return im;
  }
};

/// Pixel <-> sky-direction mapping of a reprojected square sky image:
/// ideal equidistant, north up. zenith = (r / radius) * fov, azimuth measured
/// clockwise from north with +x = east and -y (up) = north. A pixel is inside
/// the FOV disk iff r <= radius.
struct SkyGrid {
  int size = 100;
  double fov_deg = 90.0;

  double center() const { return (size - 1) * 0.5; }
  double radius() const { return size * 0.5; }

  /// False when the pixel lies outside the FOV disk.
  bool pixel_to_angles(double px, double py, double& zenith_deg,
                       double& azimuth_deg) const;
  void angles_to_pixel(double zenith_deg, double azimuth_deg, double& px,
                       double& py) const;
  bool valid(int x, int y) const {
    const double dx = x - center(), dy = y - center();
    return dx * dx + dy * dy <= radius() * radius();
  }
};

/// Calibrated, reprojected sky frame. Channels normalized to [0,1].
/// Invalid pixels (outside the FOV disk) are exactly (0,0,0), mask false.
struct SkyImage {
  SkyGrid grid;
  std::vector<float> rgb;           // size*size*3
  std::vector<std::uint8_t> valid;  // size*size, 0/1
  UtcTime timestamp = 0;
  std::string camera_id;

  int size() const { return grid.size; }
  float at(int x, int y, int c) const {
    return rgb[static_cast<std::size_t>((y * grid.size + x) * 3 + c)];
  }
  float& at(int x, int y, int c) {
    return rgb[static_cast<std::size_t>((y * grid.size + x) * 3 + c)];
  }
  bool is_valid(int x, int y) const {
    return valid[static_cast<std::size_t>(y * grid.size + x)] != 0;
  }
  static SkyImage create(const SkyGrid& g);
};

/// Single-channel float plane on a SkyImage grid.
struct Plane {
  int size = 0;
  std::vector<float> v;

  float at(int x, int y) const {
    return v[static_cast<std::size_t>(y * size + x)];
  }
  float& at(int x, int y) {
    return v[static_cast<std::size_t>(y * size + x)];
  }
  static Plane zeros(int n) {
    Plane p;
    p.size = n;
    p.v.assign(static_cast<std::size_t>(n) * n, 0.0f);
    return p;
  }
};

// PNG I/O (8-bit RGB, 8-bit gray, 16-bit gray). Throws DataError.
RawImage read_png_rgb8(const std::string& path);
void write_png_rgb8(const std::string& path, const RawImage& im);
void write_png_gray8(const std::string& path, int w, int h,
                     const std::vector<std::uint8_t>& data);
std::vector<std::uint8_t> read_png_gray8(const std::string& path, int& w,
                                         int& h);
void write_png_gray16(const std::string& path, int w, int h,
                      const std::vector<std::uint16_t>& data);
std::vector<std::uint16_t> read_png_gray16(const std::string& path, int& w,
                                           int& h);

/// 8-bit quantization used when persisting SkyImages.
RawImage to_raw8(const SkyImage& im);
/// Inverse of to_raw8: value/255, mask re-derived from the grid geometry.
SkyImage from_raw8(const RawImage& raw, const SkyGrid& grid, UtcTime ts,
                   const std::string& camera_id);

}  // namespace skynow
