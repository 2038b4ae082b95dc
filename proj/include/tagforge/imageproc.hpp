#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tagforge/error.hpp"
#include "tagforge/image.hpp"
#include "tagforge/scene_model.hpp"

namespace tagforge {

inline constexpr int kOutputWidth = 128;
inline constexpr int kOutputHeight = 256;
inline constexpr double kDefaultBeta = 0.08;
/// Gray used when no background corpus is configured.
inline constexpr float kPlainBackground = 0.5f;

struct CropRect {
  int x = 0, y = 0, w = 0, h = 0;
  friend bool operator==(const CropRect&, const CropRect&) = default;
};

/// Background images keyed by file name, plus optional per-image crop rectangles.
struct BackgroundCorpus {
  std::vector<std::string> ids;  // sorted
  std::vector<RgbImage> images;
  std::map<std::string, std::vector<CropRect>> crops;

  [[nodiscard]] std::size_t size() const { return ids.size(); }
  /// Index of `id`, or -1.
  [[nodiscard]] int find(const std::string& id) const;

  void add(std::string id, RgbImage image);
  /// Adds a crop rectangle; throws Error when the id is unknown or the rect leaves the image.
  void add_crop(const std::string& id, const CropRect& rect);
};

/// Loads every .png/.jpg/.jpeg file of `dir` (sorted by name). The optional manifest
/// holds `image_id x y w h` lines; '#' starts a comment. Throws Error / ParseError.
[[nodiscard]] BackgroundCorpus load_background_corpus(const std::string& dir, const std::string& crop_manifest = {});

struct BackgroundPick {
  BackgroundRef ref;
  RgbImage image;
};

/// Seeded choice of image (uniform) and crop (uniform manifest entry, or a random
/// rectangle whose sides each cover at least 54.8% of the source, hence >= 30% of the
/// area). An empty corpus gives the plain reference.
[[nodiscard]] BackgroundRef choose_background(const BackgroundCorpus& corpus, std::uint64_t seed);

/// choose_background plus the crop resized to out_w x out_h.
[[nodiscard]] BackgroundPick pick_background(const BackgroundCorpus& corpus, std::uint64_t seed, int out_w, int out_h);

/// Re-creates the background image a BackgroundRef describes. Plain refs give gray.
[[nodiscard]] RgbImage crop_background(const BackgroundCorpus& corpus, const BackgroundRef& ref, int out_w, int out_h);

/// alpha * fg + (1 - alpha) * bg.
[[nodiscard]] RgbImage composite(const ImageBuffer& fg, const RgbImage& bg);

struct ColorBias {
  Eigen::Array3d gains = Eigen::Array3d::Ones();
  friend bool operator==(const ColorBias& a, const ColorBias& b) { return (a.gains == b.gains).all(); }
};

/// Gains uniform in [1 - beta, 1 + beta], seeded by (global seed, camera id).
[[nodiscard]] ColorBias derive_color_bias(int camera_id, std::uint64_t global_seed, double beta = kDefaultBeta);

template <typename Scalar, int C>
[[nodiscard]] Image<Scalar, C> apply_color_bias(const Image<Scalar, C>& img, const ColorBias& bias) {
  static_assert(C >= 3);
  Image<Scalar, C> out = img;
  for (int c = 0; c < 3; ++c)
    out.pixels().col(c) = (img.pixels().col(c) * static_cast<Scalar>(bias.gains[c])).max(Scalar(0)).min(Scalar(1));
  return out;
}

/// v -> v^gamma on [0, 1]-clamped values; gamma > 1 darkens.
template <typename Scalar, int C>
[[nodiscard]] Image<Scalar, C> apply_gamma(const Image<Scalar, C>& img, double gamma) {
  Image<Scalar, C> out = img;
  if (gamma == 1.0) return out;
  out.pixels() = img.pixels().max(Scalar(0)).min(Scalar(1)).pow(static_cast<Scalar>(gamma));
  return out;
}

/// Separable triangle-filter resampling. The filter widens with the downscale factor,
/// so shrinking averages rather than aliases; upscaling is plain bilinear and equal
/// sizes are an exact copy.
[[nodiscard]] RgbImage resize(const RgbImage& img, int out_w, int out_h);

/// Shrinks to `working_height_px` rows (aspect kept) and scales back up to out_w x out_h.
/// A working height equal to the input height skips the shrink.
[[nodiscard]] RgbImage degrade_resolution(const RgbImage& img, int working_height_px, int out_w = kOutputWidth,
                                          int out_h = kOutputHeight);

/// Procedural clutter scene: blocks and stripes of broad luminance over a fine texture.
[[nodiscard]] RgbImage synth_background(std::uint64_t seed, int width, int height);

}  // namespace tagforge
