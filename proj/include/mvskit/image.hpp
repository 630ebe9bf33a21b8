#pragma once

#include <cstddef>
#include <vector>

namespace mvskit {

// Dense H x W x C image, channels interleaved, row-major. No range invariant;
// View enforces [0,1] for camera images.
class Image {
 public:
  Image() = default;
  Image(int height, int width, int channels, double fill = 0.0);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(height_) * width_; }
  bool empty() const { return data_.empty(); }

  double& at(int y, int x, int c) { return data_[index(y, x, c)]; }
  double at(int y, int x, int c) const { return data_[index(y, x, c)]; }
  double* pixel(int y, int x) { return data_.data() + index(y, x, 0); }
  const double* pixel(int y, int x) const { return data_.data() + index(y, x, 0); }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Image& other) const {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }

  // Per-channel min / max over all pixels.
  std::vector<double> channel_min() const;
  std::vector<double> channel_max() const;

  // Luminance (channel mean) as a single-channel image.
  Image gray() const;

 private:
  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

// H x W depth in world units. 0 marks an invalid pixel; every entry is
// finite and non-negative.
class DepthMap {
 public:
  DepthMap() = default;
  DepthMap(int height, int width, double fill = 0.0);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return values_.size(); }

  double& at(int y, int x) { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  double at(int y, int x) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  bool valid(int y, int x) const { return at(y, x) > 0.0; }
  std::size_t valid_count() const;

  // Throws DimensionError / Error when the invariant does not hold.
  void validate() const;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> values_;
};

// Per-pixel boolean flags, same layout as DepthMap.
struct ValidityMask {
  int height = 0;
  int width = 0;
  std::vector<unsigned char> flags;

  ValidityMask() = default;
  ValidityMask(int h, int w, bool fill = false)
      : height(h), width(w), flags(static_cast<std::size_t>(h) * w, fill ? 1 : 0) {}

  bool at(int y, int x) const { return flags[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int y, int x, bool v) { flags[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
  std::size_t count() const;
};

// Separable Gaussian blur with half-sample symmetric borders, which keeps
// the global mean of every channel unchanged. sigma <= 0 returns a copy.
Image gaussian_blur(const Image& image, double sigma);

// Central-difference gradient magnitude per channel (same border rule).
Image gradient_magnitude(const Image& image);

// Bilinear sample at continuous (x, y) = (column, row); pixel centers sit on
// integer coordinates. Returns false when the 2x2 neighborhood leaves the
// image. Coordinates within 1e-9 of the border are snapped onto it.
bool sample_bilinear(const Image& image, double x, double y, double* out);

}  // namespace mvskit
