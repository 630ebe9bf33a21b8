#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvskit/dataio.hpp"
#include "mvskit/geometry.hpp"
#include "mvskit/gpm.hpp"
#include "mvskit/image.hpp"
#include "mvskit/point_cloud.hpp"

namespace mvskit {

enum class SurfaceKind { kPlane, kSphere, kTwoBox };
enum class TextureKind { kChecker, kNoise, kGradient };

struct SynthSpec {
  SurfaceKind surface = SurfaceKind::kPlane;
  TextureKind texture = TextureKind::kNoise;
  int views = 5;
  int width = 128;
  int height = 128;
  int channels = 3;            // 1 or 3
  double fov_degrees = 60.0;   // horizontal
  double radius = 4.0;         // camera distance from the scene center
  double arc_step_degrees = 15.0;
  double texture_scale = 0.0;  // world units per texture cell; <= 0: 8 px at the center view
  std::uint64_t seed = 1;
  int sparse_stride = 8;       // reference pixel stride of the sparse points
};

// Analytic scene with exact per-view depth, a ground-truth cloud and exact
// sparse correspondences. View 0 looks straight at the scene center; the
// others alternate left/right of it along a horizontal arc.
struct SyntheticScene {
  SynthSpec spec;
  std::vector<View> views;
  std::vector<DepthMap> gt_depths;
  // visibility[i][p] has bit j set when pixel p of view i is seen unoccluded
  // and in frame by view j.
  std::vector<std::vector<std::uint32_t>> visibility;
  PointCloud gt_cloud;
  SparseCorrespondences sparse;
  double depth_min = 0.0;  // common bracket for all views
  double depth_max = 0.0;

  bool visible(int view, int y, int x, int other) const;
  // Pixels of view i whose surface point is hidden by other geometry in view j
  // while projecting inside j's frame.
  bool occluded(int view, int y, int x, int other) const;

  // Exact depth seen through a continuous pixel of `view` (0 when the ray
  // misses every surface).
  double depth_at(int view, const Pixel& p) const;

  // Texture value of a world point on the surface.
  Eigen::Vector3d shade(const Eigen::Vector3d& world) const;
  // Implicit surface residual (0 on the surface).
  double surface_residual(const Eigen::Vector3d& world) const;

 private:
  friend SyntheticScene generate(const SynthSpec& spec);
  std::vector<std::vector<std::uint32_t>> occlusion_;
};

SyntheticScene generate(const SynthSpec& spec);

// Writes images/, cams/, depths/, pair.txt, gt.ply and sparse.txt under
// `root` with `depth_count` hypotheses in every camera file.
void write_scene(const SyntheticScene& scene, const std::string& root, int depth_count = 64);

SurfaceKind parse_surface(const std::string& s);
TextureKind parse_texture(const std::string& s);

}  // namespace mvskit
