#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mvskit/geometry.hpp"
#include "mvskit/image.hpp"

namespace mvskit {

// Sweep directions of the linear propagation.
enum class Direction : int { kLeftToRight = 0, kRightToLeft = 1, kTopToBottom = 2, kBottomToTop = 3 };
inline constexpr int kDirections = 4;
inline constexpr int kNeighbors = 3;

// Three-way connection weights to the previous line, per pixel and direction.
// Neighbor order follows the axis perpendicular to the sweep (row - 1, row,
// row + 1 for horizontal sweeps; column - 1, column, column + 1 otherwise).
class AffinityField {
 public:
  AffinityField() = default;
  AffinityField(int height, int width);

  int height() const { return height_; }
  int width() const { return width_; }

  double& at(int y, int x, Direction d, int n) { return weights_[index(y, x, d, n)]; }
  double at(int y, int x, Direction d, int n) const { return weights_[index(y, x, d, n)]; }

  // Largest sum of |w| over the three neighbors; must stay <= 1.
  double max_stability_sum() const;
  void validate() const;

 private:
  std::size_t index(int y, int x, Direction d, int n) const {
    return ((static_cast<std::size_t>(y) * width_ + x) * kDirections + static_cast<int>(d)) * kNeighbors + n;
  }
  int height_ = 0, width_ = 0;
  std::vector<double> weights_;
};

inline constexpr double kStabilityBudget = 0.9;

// Edge-aware affinities from a guide image: neighbor q gets
// (kappa / 3) * exp(-strength * |g(p) - g(q)|^2). A locally constant guide
// spends the whole budget kappa; edges spend less.
AffinityField guidance_affinity(const Image& guide, double strength, double kappa = kStabilityBudget);
inline AffinityField guidance_affinity(const View& guide, double strength, double kappa = kStabilityBudget) {
  return guidance_affinity(guide.image(), strength, kappa);
}

// Guide-independent weights (kappa / 3 for every in-image neighbor).
AffinityField uniform_affinity(int height, int width, double kappa = kStabilityBudget);

// Four directional recurrences h(p) = (1 - sum w) x(p) + sum w h(q), fused by
// averaging. Parallel across lines perpendicular to each sweep.
Image propagate(const Image& distorted, const AffinityField& affinity);

// guide + propagate(transferred - guide, guidance_affinity(guide, strength)),
// clamped to the per-channel range of `transferred`. A transferred image equal
// to its guide is returned unchanged. A 1-channel guide is broadcast.
Image gpm_filter(const Image& transferred, const Image& content_guide, double strength);

struct Observation {
  int view_id = 0;
  Pixel pixel;
};

struct SparsePoint {
  Eigen::Vector3d position;
  std::vector<Observation> observations;
};

struct SparseCorrespondences {
  std::vector<SparsePoint> points;

  // Throws when an observation misses its stored pixel by more than tol px.
  void validate(const std::vector<View>& views, double tol = 2.0) const;
};

// One point per line: "X Y Z  v0 u0 w0  v1 u1 w1 ..." (view id, column, row).
void write_sparse(const std::string& path, const SparseCorrespondences& sparse);
SparseCorrespondences read_sparse(const std::string& path);

struct SpnLossReport {
  double total = 0.0;
  double image_term = 0.0;   // (1/N) sum_v mean_i |I_v - I^_v|^2
  double sparse_term = 0.0;  // (1/N) sum_v mean_j |I_1(p_j) - I^_{v->1}(p_j)|^2
  std::size_t sparse_used = 0;
  bool sparse_omitted = false;
};

// Views are indexed by position; originals[0] is the reference view whose
// observations define p_j. Without usable sparse points the sparse term is
// omitted and flagged.
SpnLossReport spn_loss(const std::vector<View>& originals, const std::vector<Image>& filtered,
                       const SparseCorrespondences& sparse);

}  // namespace mvskit
