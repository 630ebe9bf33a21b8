#pragma once

#include <string>

#include <Eigen/Core>

#include "mvskit/geometry.hpp"
#include "mvskit/image.hpp"

namespace mvskit {

// C x M activations (M = height * width spatial positions, row-major).
struct FeatureMap {
  Eigen::MatrixXd data;
  int height = 0;
  int width = 0;

  FeatureMap() = default;
  FeatureMap(Eigen::MatrixXd d, int h, int w);

  int channels() const { return static_cast<int>(data.rows()); }
  Eigen::Index positions() const { return data.cols(); }
};

inline constexpr double kEigenFloor = 1e-8;

// Channel means plus the eigendecomposition of the centered covariance
// (normalized by M). Eigenvalues are descending and clamped at kEigenFloor.
struct StyleStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd eigvals;
  Eigen::MatrixXd eigvecs;

  Eigen::MatrixXd covariance() const;
};

// Channel correlation F * F^T.
Eigen::MatrixXd gram(const FeatureMap& f);

// Centered covariance (1/M) * (F - mean)(F - mean)^T.
Eigen::MatrixXd feature_covariance(const FeatureMap& f);

StyleStats compute_style_stats(const FeatureMap& f);

// E_c D_c^{-1/2} E_c^T (F_c - mean_c).
FeatureMap whiten(const FeatureMap& content, const StyleStats& stats_c);

// E_s D_s^{1/2} E_s^T W + mean_s.
FeatureMap color(const FeatureMap& white, const StyleStats& stats_s);

// blend * color(whiten(content), stats(style)) + (1 - blend) * content.
FeatureMap wct(const FeatureMap& content, const FeatureMap& style, double blend = 1.0);

// Squared Frobenius distance between feature maps of the same shape.
double content_loss(const FeatureMap& a, const FeatureMap& b);
// Squared Frobenius distance between Gram matrices (same C, any M).
double style_loss(const FeatureMap& a, const FeatureMap& b);

// Deterministic stand-in for a learned encoder. Level 0 holds the raw image
// channels; every further level l appends Gaussian-blurred channels
// (sigma = 2^(l-1)) and their gradient magnitudes.
FeatureMap extract_features(const Image& image, int levels);
inline FeatureMap extract_features(const View& view, int levels) { return extract_features(view.image(), levels); }

// Inverse of extract_features at level 0: the first `channels` rows as an
// image, clamped to [0, 1].
Image decode_features(const FeatureMap& f, int channels);

// Whole image style transfer: features -> wct -> decode.
Image transfer_style(const Image& content, const Image& style, int levels, double blend = 1.0);

// Flat binary feature file: "FMAP", u32 C, u32 H, u32 W, then C*H*W
// little-endian float32, channel-major.
void write_fmap(const std::string& path, const FeatureMap& f);
FeatureMap read_fmap(const std::string& path);

}  // namespace mvskit
