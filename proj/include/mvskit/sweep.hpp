#pragma once

#include <cstddef>
#include <vector>

#include "mvskit/geometry.hpp"
#include "mvskit/image.hpp"

namespace mvskit {

// Strictly increasing, positive depth candidates (K >= 2).
class DepthHypotheses {
 public:
  explicit DepthHypotheses(std::vector<double> values);
  // K values evenly spaced over [depth_min, depth_max].
  static DepthHypotheses uniform(double depth_min, double depth_max, int count);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  double front() const { return values_.front(); }
  double back() const { return values_.back(); }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

// H x W x K volume, K contiguous per pixel.
class Volume {
 public:
  Volume() = default;
  Volume(int height, int width, int depth_count, double fill = 0.0);

  int height() const { return height_; }
  int width() const { return width_; }
  int depth_count() const { return depth_count_; }
  bool same_shape(const Volume& o) const {
    return height_ == o.height_ && width_ == o.width_ && depth_count_ == o.depth_count_;
  }

  double& at(int y, int x, int k) { return data_[offset(y, x) + k]; }
  double at(int y, int x, int k) const { return data_[offset(y, x) + k]; }
  double* pixel(int y, int x) { return data_.data() + offset(y, x); }
  const double* pixel(int y, int x) const { return data_.data() + offset(y, x); }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t offset(int y, int x) const {
    return (static_cast<std::size_t>(y) * width_ + x) * depth_count_;
  }
  int height_ = 0, width_ = 0, depth_count_ = 0;
  std::vector<double> data_;
};

// Matching costs, lower is better, all finite.
struct CostVolume : Volume {
  using Volume::Volume;
};

// Per-pixel distributions over hypotheses; each pixel sums to 1.
struct ProbabilityVolume : Volume {
  using Volume::Volume;
  // Throws when an entry leaves [0,1] or a pixel sum is off by more than tol.
  void validate(double tol = 1e-5) const;
};

enum class CostKind { kSSD, kNCC };

struct SweepOptions {
  CostKind cost = CostKind::kSSD;
  int window = 5;            // odd
  double temperature = 1.0;  // softmax temperature, > 0
};

inline constexpr double kNccVarianceFloor = 1e-6;

// Cost assigned to an invalid warp or a degenerate NCC patch: the largest
// value the metric can take (SSD: window^2 * C, NCC: 2).
double invalid_cost(CostKind kind, int window, int channels);

// Plane-sweep matching: cost(p, k) is the mean over sources of the windowed
// SSD (or 1 - NCC) between the reference patch at p and the source sampled
// through the depth-hyps[k] warp. Parallel over hypothesis slices.
CostVolume build_cost_volume(const View& ref, const std::vector<View>& sources, const DepthHypotheses& hyps,
                             CostKind kind, int window);

// Per-pixel softmax of -cost / temperature.
ProbabilityVolume cost_to_probability(const CostVolume& cv, double temperature);

// Expected depth under the distribution, always inside [hyps.front(), hyps.back()].
DepthMap soft_argmin(const ProbabilityVolume& pv, const DepthHypotheses& hyps);

// Peak probability per pixel (low values flag ambiguous matches).
DepthMap max_probability(const ProbabilityVolume& pv);

struct SweepResult {
  DepthMap depth;
  ProbabilityVolume probabilities;
  DepthMap confidence;  // max probability per pixel
};

SweepResult plane_sweep_depth(const View& ref, const std::vector<View>& sources, const DepthHypotheses& hyps,
                              const SweepOptions& options);

}  // namespace mvskit
