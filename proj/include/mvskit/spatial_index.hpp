#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace mvskit {

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;
};

// Uniform grid over the bounding box of a fixed point set. Nearest-neighbor
// queries are exact: distances are computed exactly as the brute-force scan
// computes them, so results match it bit for bit. Immutable after build and
// safe to share across threads.
class SpatialIndex {
 public:
  // cell_size <= 0 picks a size giving a few points per occupied cell.
  explicit SpatialIndex(std::vector<Eigen::Vector3d> points, double cell_size = 0.0);

  std::size_t size() const { return points_.size(); }
  double cell_size() const { return cell_size_; }
  const std::array<int, 3>& dims() const { return dims_; }

  Neighbor nearest(const Eigen::Vector3d& q) const;

 private:
  std::size_t cell_id(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * dims_[1] + j) * dims_[0] + i;
  }
  std::array<int, 3> cell_of(const Eigen::Vector3d& p) const;

  std::vector<Eigen::Vector3d> points_;
  Eigen::Vector3d origin_;
  double cell_size_ = 1.0;
  std::array<int, 3> dims_{1, 1, 1};
  std::vector<std::size_t> cell_start_;  // CSR offsets, size cells + 1
  std::vector<std::size_t> cell_items_;
};

// Euclidean distance written once so every search path computes it the same way.
inline double point_distance(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace mvskit
