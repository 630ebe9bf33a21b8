#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace mvskit {

struct PointCloud {
  std::vector<Eigen::Vector3d> positions;
  // Empty, or one RGB triple in [0,1] per position.
  std::vector<Eigen::Vector3d> colors;

  std::size_t size() const { return positions.size(); }
  bool empty() const { return positions.empty(); }
  bool has_colors() const { return !colors.empty(); }
  void validate() const;
};

// Binary little-endian PLY with float32 x,y,z and optional uchar
// red,green,blue. Colors are quantized as round(255 * c).
void write_ply(const std::string& path, const PointCloud& cloud);
PointCloud read_ply(const std::string& path);

}  // namespace mvskit
