#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "skynow/image.hpp"

namespace skynow {

enum class PixelClass : std::uint8_t { Invalid = 0, Sky = 1, Cloud = 2 };

enum class SkyModality { Unimodal, Multimodal };

struct SegThresholds {
  double saturation_std = 0.09;  // modality split on std of HSI saturation
  double nbr_clear = 0.20;       // unimodal clear-sky cloud threshold
  double nbr_overcast = 0.35;    // unimodal overcast sky threshold
  // regime pick for unimodal frames: mean nBR >= midpoint -> clear regime
  double regime_midpoint = 0.275;
  std::uint64_t kmeans_seed = 17;  // reserved; seeding is deterministic
  int kmeans_max_iterations = 50;
  double kmeans_tolerance = 1e-6;
  bool exclude_sun_disk = false;  // mask detected sun (dilated 3 px) out
};

struct SegmentationMap {
  int size = 0;
  std::vector<PixelClass> classes;  // size*size
  double cloud_fraction = 0.0;      // cloud / (cloud + sky); 0 if no valid px
  SkyModality modality = SkyModality::Unimodal;
  bool kmeans_converged = true;

  PixelClass at(int x, int y) const {
    return classes[static_cast<std::size_t>(y * size + x)];
  }
};

/// HSI saturation, S = 1 - 3*min(R,G,B)/(R+G+B); 0 for pure black.
double saturation(float r, float g, float b);

/// Normalized blue/red ratio (B-R)/(B+R) in [-1,1]; 0 when B=R=0.
double nbr(float r, float g, float b);

/// Multimodal iff std of saturation over valid pixels exceeds the threshold
/// (strictly). Throws DataError when fewer than 100 valid pixels.
SkyModality modality(const SkyImage& image, const SegThresholds& thr);

/// PCA(2) + k-means(3) path for multimodal skies. Clusters are labeled by
/// the border region (frame) and by mean nBR (higher -> sky).
SegmentationMap segment_multimodal(const SkyImage& image,
                                   const SegThresholds& thr);

/// Threshold path for unimodal skies: the regime (clear vs overcast) is
/// picked from the image-mean nBR over valid pixels.
SegmentationMap segment_unimodal(const SkyImage& image,
                                 const SegThresholds& thr);

/// Dispatcher: modality test, then the matching path.
SegmentationMap segment(const SkyImage& image, const SegThresholds& thr);

/// Segmentation maps persist as single-channel PNG:
/// 0 = invalid, 128 = sky, 255 = cloud.
void write_segmentation_png(const std::string& path, const SegmentationMap& m);
SegmentationMap read_segmentation_png(const std::string& path);

}  // namespace skynow
