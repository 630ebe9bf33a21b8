#include "mvskit/image.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mvskit/error.hpp"

namespace mvskit {

Image::Image(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
  if (height < 0 || width < 0 || channels < 1) {
    throw DimensionError("image: invalid shape");
  }
  data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

std::vector<double> Image::channel_min() const {
  std::vector<double> out(channels_, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < data_.size(); ++i) {
    auto& m = out[i % channels_];
    m = std::min(m, data_[i]);
  }
  return out;
}

std::vector<double> Image::channel_max() const {
  std::vector<double> out(channels_, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < data_.size(); ++i) {
    auto& m = out[i % channels_];
    m = std::max(m, data_[i]);
  }
  return out;
}

Image Image::gray() const {
  Image out(height_, width_, 1);
  for (std::size_t p = 0; p < pixel_count(); ++p) {
    double s = 0.0;
    for (int c = 0; c < channels_; ++c) s += data_[p * channels_ + c];
    out.data()[p] = s / channels_;
  }
  return out;
}

DepthMap::DepthMap(int height, int width, double fill) : height_(height), width_(width) {
  if (height < 0 || width < 0) throw DimensionError("depth map: invalid shape");
  values_.assign(static_cast<std::size_t>(height) * width, fill);
}

std::size_t DepthMap::valid_count() const {
  return static_cast<std::size_t>(std::count_if(values_.begin(), values_.end(), [](double v) { return v > 0.0; }));
}

void DepthMap::validate() const {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
      throw Error("depth map: entry " + std::to_string(i) + " is negative or non-finite");
    }
  }
}

std::size_t ValidityMask::count() const {
  return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), 1));
}

namespace {

// Half-sample symmetric extension (... c b a | a b c ... c b a | ...).
int reflect(int n, int size) {
  const int period = 2 * size;
  int m = n % period;
  if (m < 0) m += period;
  return m < size ? m : period - 1 - m;
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += k[i + radius];
  }
  for (auto& v : k) v /= sum;
  return k;
}

}  // namespace

Image gaussian_blur(const Image& image, double sigma) {
  if (sigma <= 0.0) return image;
  const auto kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  const int h = image.height(), w = image.width(), ch = image.channels();

  Image tmp(h, w, ch);
#pragma omp parallel for
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        double s = 0.0;
        for (int i = -radius; i <= radius; ++i) s += kernel[i + radius] * image.at(y, reflect(x + i, w), c);
        tmp.at(y, x, c) = s;
      }
    }
  }
  Image out(h, w, ch);
#pragma omp parallel for
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        double s = 0.0;
        for (int i = -radius; i <= radius; ++i) s += kernel[i + radius] * tmp.at(reflect(y + i, h), x, c);
        out.at(y, x, c) = s;
      }
    }
  }
  return out;
}

Image gradient_magnitude(const Image& image) {
  const int h = image.height(), w = image.width(), ch = image.channels();
  Image out(h, w, ch);
#pragma omp parallel for
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        const double gx = 0.5 * (image.at(y, reflect(x + 1, w), c) - image.at(y, reflect(x - 1, w), c));
        const double gy = 0.5 * (image.at(reflect(y + 1, h), x, c) - image.at(reflect(y - 1, h), x, c));
        out.at(y, x, c) = std::sqrt(gx * gx + gy * gy);
      }
    }
  }
  return out;
}

namespace {
constexpr double kSnap = 1e-9;

bool snap_axis(double& v, int size) {
  if (v < 0.0) {
    if (v < -kSnap) return false;
    v = 0.0;
  } else if (v > size - 1) {
    if (v > size - 1 + kSnap) return false;
    v = size - 1;
  }
  return true;
}
}  // namespace

bool sample_bilinear(const Image& image, double x, double y, double* out) {
  const int h = image.height(), w = image.width();
  if (h < 2 || w < 2 || !std::isfinite(x) || !std::isfinite(y)) return false;
  if (!snap_axis(x, w) || !snap_axis(y, h)) return false;
  int x0 = static_cast<int>(std::floor(x));
  int y0 = static_cast<int>(std::floor(y));
  x0 = std::min(x0, w - 2);
  y0 = std::min(y0, h - 2);
  const double ax = x - x0, ay = y - y0;
  const double w00 = (1 - ax) * (1 - ay), w10 = ax * (1 - ay), w01 = (1 - ax) * ay, w11 = ax * ay;
  const double* p00 = image.pixel(y0, x0);
  const double* p10 = image.pixel(y0, x0 + 1);
  const double* p01 = image.pixel(y0 + 1, x0);
  const double* p11 = image.pixel(y0 + 1, x0 + 1);
  for (int c = 0; c < image.channels(); ++c) {
    out[c] = w00 * p00[c] + w10 * p10[c] + w01 * p01[c] + w11 * p11[c];
  }
  return true;
}

}  // namespace mvskit
