#pragma once

#include <string>
#include <utility>
#include <vector>

#include "skynow/image.hpp"
#include "skynow/segmentation.hpp"

namespace skynow {

struct FlowParams {
  double window_frac = 0.04;  // averaging window as a fraction of image width
  int poly_neighborhood = 3;  // expansion radius; support is (2n+1)^2
  double poly_sigma = 2.0;
  int iterations = 2;         // refinement passes per pyramid level
  /// Coarse-to-fine half-resolution levels. Displacements beyond ~the
  /// expansion radius need the coarse initialization to stay in the
  /// estimator's convergence basin.
  int pyramid_levels = 2;

  int window_px(int image_size) const {
    const int w = static_cast<int>(std::lround(window_frac * image_size));
    return std::max(3, w);
  }
  void validate() const {
    if (iterations < 1) throw ConfigError("flow iterations must be >= 1");
    if (poly_neighborhood < 1) throw ConfigError("poly neighborhood must be >= 1");
    if (pyramid_levels < 1) throw ConfigError("pyramid levels must be >= 1");
  }
};

/// Per-pixel displacement in px per frame (10 s), same grid as the SkyImage.
struct FlowField {
  int size = 0;
  std::vector<float> u, v;

  float u_at(int x, int y) const { return u[static_cast<std::size_t>(y * size + x)]; }
  float v_at(int x, int y) const { return v[static_cast<std::size_t>(y * size + x)]; }
};

/// Local quadratic models f ~ c + b.x + x'Ax, one per pixel.
/// Layout per pixel: [c, b1, b2, a11, a22, a12] with x = (dx, dy) offsets.
struct PolyExpansion {
  int size = 0;
  std::vector<double> coef;  // size*size*6

  const double* at(int x, int y) const {
    return coef.data() + static_cast<std::size_t>(y * size + x) * 6;
  }
};

struct CmvSample {
  double mean_u = 0.0;  // px/frame
  double mean_v = 0.0;
  std::string camera_id;
  UtcTime timestamp = 0;
  bool filled_by_locf = false;
  bool empty_mask = false;
};

/// Unweighted channel mean.
Plane grayscale(const SkyImage& image);

/// Gaussian-weighted least-squares fit of the local signal to a quadratic
/// polynomial over a (2n+1)^2 neighborhood (replicate border). When a valid
/// mask is given, invalid taps get zero weight and pixels whose support
/// touches them are refit with their own normal matrix, so the FOV-disk edge
/// does not enter the expansion as fake static structure.
PolyExpansion polynomial_expansion(const Plane& gray, int neighborhood,
                                   double sigma,
                                   const std::vector<std::uint8_t>* valid = nullptr);

/// Farnebäck displacement estimate between consecutive frames, refined over
/// params.iterations passes with box-averaged normal equations.
FlowField dense_flow(const SkyImage& prev, const SkyImage& next,
                     const FlowParams& params);

/// Component-wise mean flow over cloud pixels; zero vector + flag when the
/// mask is empty.
CmvSample aggregate_cmv(const FlowField& flow, const SegmentationMap& seg,
                        const std::string& camera_id, UtcTime timestamp);

/// Invalidates timestamps where the two cameras disagree by more than the
/// threshold (Euclidean norm) and fills them per camera by the last valid
/// observation (zero vector for a leading gap). Throws DataError on
/// length mismatch.
std::pair<std::vector<CmvSample>, std::vector<CmvSample>> cross_camera_filter(
    const std::vector<CmvSample>& cam1, const std::vector<CmvSample>& cam2,
    double inconsistency_threshold);

}  // namespace skynow
