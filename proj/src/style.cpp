#include "mvskit/style.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include <Eigen/Eigenvalues>

#include "binary_io.hpp"
#include "mvskit/error.hpp"

namespace mvskit {

FeatureMap::FeatureMap(Eigen::MatrixXd d, int h, int w) : data(std::move(d)), height(h), width(w) {
  if (data.rows() < 1) throw DimensionError("feature map: at least one channel is required");
  if (static_cast<Eigen::Index>(h) * w != data.cols()) throw DimensionError("feature map: M != height * width");
  if (!data.allFinite()) throw Error("feature map: non-finite entries");
}

Eigen::MatrixXd StyleStats::covariance() const { return eigvecs * eigvals.asDiagonal() * eigvecs.transpose(); }

Eigen::MatrixXd gram(const FeatureMap& f) { return f.data * f.data.transpose(); }

Eigen::MatrixXd feature_covariance(const FeatureMap& f) {
  const Eigen::VectorXd mean = f.data.rowwise().mean();
  const Eigen::MatrixXd centered = f.data.colwise() - mean;
  return centered * centered.transpose() / static_cast<double>(f.positions());
}

StyleStats compute_style_stats(const FeatureMap& f) {
  if (f.positions() < 1) throw DimensionError("style stats: empty feature map");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(feature_covariance(f));
  if (solver.info() != Eigen::Success) throw Error("style stats: eigendecomposition failed");
  const Eigen::Index c = f.channels();
  StyleStats s;
  s.mean = f.data.rowwise().mean();
  s.eigvals.resize(c);
  s.eigvecs.resize(c, c);
  // Eigen returns ascending order.
  for (Eigen::Index i = 0; i < c; ++i) {
    s.eigvals(i) = std::max(solver.eigenvalues()(c - 1 - i), kEigenFloor);
    s.eigvecs.col(i) = solver.eigenvectors().col(c - 1 - i);
  }
  return s;
}

FeatureMap whiten(const FeatureMap& content, const StyleStats& stats_c) {
  if (stats_c.mean.size() != content.channels()) throw DimensionError("whiten: channel mismatch");
  const Eigen::MatrixXd t =
      stats_c.eigvecs * stats_c.eigvals.cwiseSqrt().cwiseInverse().asDiagonal() * stats_c.eigvecs.transpose();
  return FeatureMap(t * (content.data.colwise() - stats_c.mean), content.height, content.width);
}

FeatureMap color(const FeatureMap& white, const StyleStats& stats_s) {
  if (stats_s.mean.size() != white.channels()) throw DimensionError("color: channel mismatch");
  const Eigen::MatrixXd t = stats_s.eigvecs * stats_s.eigvals.cwiseSqrt().asDiagonal() * stats_s.eigvecs.transpose();
  Eigen::MatrixXd out = t * white.data;
  out.colwise() += stats_s.mean;
  return FeatureMap(std::move(out), white.height, white.width);
}

FeatureMap wct(const FeatureMap& content, const FeatureMap& style, double blend) {
  if (content.channels() != style.channels()) throw DimensionError("wct: content and style channel counts differ");
  if (!(blend >= 0.0 && blend <= 1.0)) throw Error("wct: blend must be in [0,1]");
  if (blend == 0.0) return content;
  const FeatureMap transferred = color(whiten(content, compute_style_stats(content)), compute_style_stats(style));
  if (blend == 1.0) return transferred;
  return FeatureMap(blend * transferred.data + (1.0 - blend) * content.data, content.height, content.width);
}

double content_loss(const FeatureMap& a, const FeatureMap& b) {
  if (a.data.rows() != b.data.rows() || a.data.cols() != b.data.cols()) {
    throw DimensionError("content_loss: feature maps differ in shape");
  }
  return (a.data - b.data).squaredNorm();
}

double style_loss(const FeatureMap& a, const FeatureMap& b) {
  if (a.channels() != b.channels()) throw DimensionError("style_loss: channel counts differ");
  return (gram(a) - gram(b)).squaredNorm();
}

namespace {

void append_channels(Eigen::MatrixXd& data, Eigen::Index& row, const Image& img) {
  const Eigen::Index m = static_cast<Eigen::Index>(img.pixel_count());
  for (int c = 0; c < img.channels(); ++c, ++row) {
    for (Eigen::Index i = 0; i < m; ++i) data(row, i) = img.data()[i * img.channels() + c];
  }
}

}  // namespace

FeatureMap extract_features(const Image& image, int levels) {
  if (levels < 1) throw Error("extract_features: levels must be >= 1");
  const int ch = image.channels();
  const Eigen::Index m = static_cast<Eigen::Index>(image.pixel_count());
  Eigen::MatrixXd data(static_cast<Eigen::Index>(ch) * (1 + 2 * (levels - 1)), m);
  Eigen::Index row = 0;
  append_channels(data, row, image);
  for (int l = 1; l < levels; ++l) {
    const Image blurred = gaussian_blur(image, std::ldexp(1.0, l - 1));
    append_channels(data, row, blurred);
    append_channels(data, row, gradient_magnitude(blurred));
  }
  return FeatureMap(std::move(data), image.height(), image.width());
}

Image decode_features(const FeatureMap& f, int channels) {
  if (channels < 1 || channels > f.channels()) throw DimensionError("decode_features: invalid channel count");
  Image out(f.height, f.width, channels);
  for (Eigen::Index i = 0; i < f.positions(); ++i) {
    for (int c = 0; c < channels; ++c) out.data()[i * channels + c] = std::clamp(f.data(c, i), 0.0, 1.0);
  }
  return out;
}

Image transfer_style(const Image& content, const Image& style, int levels, double blend) {
  if (content.channels() != style.channels()) throw DimensionError("transfer_style: channel counts differ");
  return decode_features(wct(extract_features(content, levels), extract_features(style, levels), blend),
                         content.channels());
}

void write_fmap(const std::string& path, const FeatureMap& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open for writing: " + path);
  os.write("FMAP", 4);
  detail::put_u32_le(os, static_cast<std::uint32_t>(f.channels()));
  detail::put_u32_le(os, static_cast<std::uint32_t>(f.height));
  detail::put_u32_le(os, static_cast<std::uint32_t>(f.width));
  for (Eigen::Index c = 0; c < f.data.rows(); ++c) {
    for (Eigen::Index i = 0; i < f.data.cols(); ++i) detail::put_f32_le(os, static_cast<float>(f.data(c, i)));
  }
  if (!os) throw Error("write failed: " + path);
}

FeatureMap read_fmap(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open: " + path);
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (bytes.size() < 16) throw ParseError(path, 0, bytes.size(), "truncated FMAP header");
  if (std::memcmp(bytes.data(), "FMAP", 4) != 0) throw ParseError(path, 0, 0, "bad magic, expected FMAP");
  const std::uint32_t c = detail::u32_from_le(&bytes[4]);
  const std::uint32_t h = detail::u32_from_le(&bytes[8]);
  const std::uint32_t w = detail::u32_from_le(&bytes[12]);
  const std::uint64_t count = std::uint64_t(c) * h * w;
  if (c == 0) throw ParseError(path, 0, 4, "zero channels");
  if (bytes.size() != 16 + 4 * count) {
    throw ParseError(path, 0, std::min<std::uint64_t>(bytes.size(), 16 + 4 * count),
                     "payload size does not match header (" + std::to_string(count) + " floats expected)");
  }
  Eigen::MatrixXd data(c, static_cast<Eigen::Index>(h) * w);
  std::size_t off = 16;
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (Eigen::Index i = 0; i < data.cols(); ++i, off += 4) {
      const float v = detail::f32_from_le(&bytes[off]);
      if (!std::isfinite(v)) throw ParseError(path, 0, off, "non-finite value");
      data(r, i) = v;
    }
  }
  return FeatureMap(std::move(data), static_cast<int>(h), static_cast<int>(w));
}

}  // namespace mvskit
