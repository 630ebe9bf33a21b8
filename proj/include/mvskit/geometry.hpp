#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "mvskit/image.hpp"

namespace mvskit {

// Continuous pixel coordinate: x = column, y = row, origin at the center of
// the top-left pixel.
struct Pixel {
  double x = 0.0;
  double y = 0.0;
};

// Pinhole intrinsics with zero skew.
class Intrinsics {
 public:
  Intrinsics() = default;
  Intrinsics(double fx, double fy, double cx, double cy);

  double fx() const { return fx_; }
  double fy() const { return fy_; }
  double cx() const { return cx_; }
  double cy() const { return cy_; }

  Eigen::Matrix3d matrix() const;
  // Pixel + depth -> camera-frame point.
  Eigen::Vector3d unproject(const Pixel& p, double depth) const;
  // Camera-frame point -> pixel (caller guarantees z > 0).
  Pixel project(const Eigen::Vector3d& x_cam) const;

 private:
  double fx_ = 1.0, fy_ = 1.0, cx_ = 0.0, cy_ = 0.0;
};

// World -> camera rigid transform: x_cam = R * x_world + t.
class Extrinsics {
 public:
  Extrinsics();
  // Throws if rotation is not orthonormal with det +1 within 1e-6.
  Extrinsics(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  // Accepts a 4x4 world->camera matrix whose last row is (0, 0, 0, 1).
  static Extrinsics from_matrix(const Eigen::Matrix4d& m);

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  Eigen::Matrix4d matrix() const;
  Extrinsics inverse() const;
  Eigen::Vector3d center() const { return -rotation_.transpose() * translation_; }

  Eigen::Vector3d to_camera(const Eigen::Vector3d& x_world) const {
    return rotation_ * x_world + translation_;
  }
  Eigen::Vector3d to_world(const Eigen::Vector3d& x_cam) const {
    return rotation_.transpose() * (x_cam - translation_);
  }

 private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

// Calibrated image. Pixel values must be finite and within [0, 1].
class View {
 public:
  View() = default;
  View(Image image, Intrinsics intrinsics, Extrinsics extrinsics, int id = 0);

  const Image& image() const { return image_; }
  const Intrinsics& intrinsics() const { return intrinsics_; }
  const Extrinsics& extrinsics() const { return extrinsics_; }
  int id() const { return id_; }
  int height() const { return image_.height(); }
  int width() const { return image_.width(); }
  int channels() const { return image_.channels(); }

  // Same cameras and id, different pixels (validated again).
  View with_image(Image image) const { return View(std::move(image), intrinsics_, extrinsics_, id_); }

  // Pixel -> world point at the given depth along the pixel ray.
  Eigen::Vector3d lift(const Pixel& p, double depth) const {
    return extrinsics_.to_world(intrinsics_.unproject(p, depth));
  }

 private:
  Image image_;
  Intrinsics intrinsics_;
  Extrinsics extrinsics_;
  int id_ = 0;
};

struct Projection {
  Pixel pixel;
  double depth = 0.0;  // z in the destination camera frame
};

// Lifts p at `depth` out of `src` and reprojects it into `dst`. Returns
// nullopt when the result is non-finite or lands at or behind dst's image
// plane.
std::optional<Projection> try_project_pixel(const Pixel& p, double depth, const View& src, const View& dst);

// Throwing variant; BehindCameraError on failure. Requires depth > 0 and p
// inside src's bounds.
Projection project_pixel(const Pixel& p, double depth, const View& src, const View& dst);

// World point -> pixel in `view`; nullopt when behind the camera.
std::optional<Projection> project_point(const Eigen::Vector3d& x_world, const View& view);

// True when (x, y) has a full bilinear neighborhood in an image of size h x w.
bool inside_interpolatable(double x, double y, int height, int width);

struct WarpResult {
  Image image;         // reconstruction of the reference from the source
  ValidityMask valid;  // false where the warp is undefined; image is 0 there
};

// Reconstructs `ref` from `src` using the reference depth map. Parallel over
// rows.
WarpResult warp_image(const View& src, const View& ref, const DepthMap& depth);

struct PhotometricView {
  int view_id = 0;
  double loss = 0.0;            // mean squared color error over valid pixels
  std::size_t valid_pixels = 0; // 0 means the view was excluded
};

struct PhotometricReport {
  double total = 0.0;
  std::vector<PhotometricView> per_view;
};

// Sum over sources of the per-view mean squared color distance (squared L2
// over channels) on valid pixels. Sources with no valid pixel contribute 0.
PhotometricReport photometric_loss(const View& ref, const std::vector<View>& sources, const DepthMap& depth);

}  // namespace mvskit
