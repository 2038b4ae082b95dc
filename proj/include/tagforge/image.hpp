#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>

#include "tagforge/error.hpp"

namespace tagforge {

/// Dense interleaved image: one row of `pixels` per pixel, stored row-major by scanline
/// (pixel (x, y) is row y * width + x).
template <typename Scalar, int Channels>
class Image {
 public:
  using PixelArray = Eigen::Array<Scalar, Eigen::Dynamic, Channels, Eigen::RowMajor>;

  Image() = default;
  Image(int width, int height, Scalar fill = Scalar(0))
      : width_(width), height_(height), pixels_(PixelArray::Constant(Eigen::Index(width) * height, Channels, fill)) {
    if (width < 1 || height < 1) throw Error("image dimensions must be positive");
  }

  [[nodiscard]] int width() const { return width_; }
  [[nodiscard]] int height() const { return height_; }
  [[nodiscard]] static constexpr int channels() { return Channels; }
  [[nodiscard]] bool empty() const { return pixels_.rows() == 0; }

  [[nodiscard]] auto pixel(int x, int y) { return pixels_.row(Eigen::Index(y) * width_ + x); }
  [[nodiscard]] auto pixel(int x, int y) const { return pixels_.row(Eigen::Index(y) * width_ + x); }
  [[nodiscard]] Scalar& at(int x, int y, int c) { return pixels_(Eigen::Index(y) * width_ + x, c); }
  [[nodiscard]] Scalar at(int x, int y, int c) const { return pixels_(Eigen::Index(y) * width_ + x, c); }

  [[nodiscard]] PixelArray& pixels() { return pixels_; }
  [[nodiscard]] const PixelArray& pixels() const { return pixels_; }

  bool operator==(const Image& o) const {
    return width_ == o.width_ && height_ == o.height_ && (pixels_ == o.pixels_).all();
  }

 private:
  int width_ = 0;
  int height_ = 0;
  PixelArray pixels_;
};

/// Linear RGB plus coverage alpha, channels in [0, 1].
using ImageBuffer = Image<float, 4>;
/// Linear RGB in [0, 1].
using RgbImage = Image<float, 3>;
/// 8-bit RGB as stored on disk.
using Rgb8Image = Image<std::uint8_t, 3>;

/// round(255 * clamp(v, 0, 1)) per channel.
[[nodiscard]] Rgb8Image quantize(const RgbImage& img);
[[nodiscard]] RgbImage to_float(const Rgb8Image& img);
/// Drops alpha.
[[nodiscard]] RgbImage rgb_of(const ImageBuffer& img);

/// Writes an 8-bit RGB PNG; output bytes depend only on the pixels.
void write_png(const std::string& path, const Rgb8Image& img);
/// Reads PNG (any bit depth / color type, flattened to 8-bit RGB).
[[nodiscard]] Rgb8Image read_png(const std::string& path);
/// Reads baseline or progressive JPEG as 8-bit RGB.
[[nodiscard]] Rgb8Image read_jpeg(const std::string& path);
/// Dispatches on the file extension (.png, .jpg, .jpeg; case-insensitive).
[[nodiscard]] Rgb8Image read_image(const std::string& path);
[[nodiscard]] bool is_image_path(const std::string& path);

}  // namespace tagforge
