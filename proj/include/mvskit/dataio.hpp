#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mvskit/geometry.hpp"
#include "mvskit/image.hpp"

namespace mvskit {

// MVSNet camera file contents. `extrinsic` is kept as stored; for MVSNet
// data it maps world to camera.
struct CameraFile {
  Eigen::Matrix4d extrinsic = Eigen::Matrix4d::Identity();
  Intrinsics intrinsics;
  double depth_min = 0.0;
  double depth_interval = 0.0;
  std::optional<double> depth_num;
  std::optional<double> depth_max;

  // extrinsic (inverted first when `inverted`, as GTA-SFM stores
  // camera-to-world) as an Extrinsics value.
  Extrinsics extrinsics(bool inverted = false) const;
};

void write_camera(const std::string& path, const CameraFile& cam);
CameraFile read_camera(const std::string& path);

struct PairEntry {
  int ref_id = 0;
  std::vector<std::pair<int, double>> sources;  // (view id, score), ranked
};

void write_pair(const std::string& path, const std::vector<PairEntry>& pairs);
std::vector<PairEntry> read_pair(const std::string& path);

// "Pf" single-channel PFM, little-endian, rows stored bottom to top.
void write_pfm(const std::string& path, const DepthMap& depth);
DepthMap read_pfm(const std::string& path);

// 8-bit PNG (gray / gray+alpha / RGB / RGBA) or binary PGM/PPM (P5/P6).
// Values map to [0,1] by /255; alpha is dropped.
Image read_image(const std::string& path);
// Quantizes round(255 * clamp(v)) and picks the format from the extension
// (.png, .ppm, .pgm).
void write_image(const std::string& path, const Image& image);

// MVSNet-style scene directory:
//   images/XXXXXXXX.{png,ppm}  cams/XXXXXXXX_cam.txt  pair.txt
//   depths/XXXXXXXX.pfm (optional)
struct ViewPaths {
  std::string image;
  std::string camera;
  std::optional<std::string> depth;
};

struct SceneManifest {
  std::string scene_id;
  std::string root;
  std::map<int, ViewPaths> views;
  std::vector<PairEntry> pairs;

  std::vector<int> view_ids() const;
  // Ranked source ids for a reference (all other views when the pair file
  // has no entry).
  std::vector<int> sources_of(int ref_id, std::size_t max_sources = 0) const;
  void validate() const;
};

std::string view_stem(int id);
SceneManifest load_manifest(const std::string& root);

View load_view(const SceneManifest& manifest, int id, bool extrinsic_inverted = false);
DepthMap load_depth(const SceneManifest& manifest, int id);
CameraFile load_camera(const SceneManifest& manifest, int id);

}  // namespace mvskit
