#pragma once

#include <vector>

#include "mvskit/geometry.hpp"
#include "mvskit/image.hpp"
#include "mvskit/point_cloud.hpp"

namespace mvskit {

struct FusionConfig {
  // Views that must agree on a pixel, counting the reference itself.
  int min_consistent_views = 2;
  double max_relative_depth_error = 0.01;
  double max_reprojection_px = 1.0;
  // Voxel size for merging duplicates across references. <= 0 picks half the
  // median pixel footprint (depth / focal) over all valid input pixels.
  double voxel_size = 0.0;

  void validate() const;
};

struct FusionResult {
  PointCloud cloud;
  // Consistent pixels found with view i as reference (before merging).
  std::vector<std::size_t> survivors_per_view;
  double voxel_size = 0.0;
};

// Geometric-consistency fusion. Each view is the reference once; a pixel
// survives when enough views agree on it in both reprojection and relative
// depth. Survivors are averaged with their consistent observations, colored
// from the reference, then merged per voxel. Output order is sorted by voxel
// key, independent of the input view order.
FusionResult fuse(const std::vector<View>& views, const std::vector<DepthMap>& depths, const FusionConfig& cfg);

}  // namespace mvskit
