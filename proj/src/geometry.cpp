#include "mvskit/geometry.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>

#include "mvskit/error.hpp"
#include "mvskit/parallel.hpp"

namespace mvskit {

Intrinsics::Intrinsics(double fx, double fy, double cx, double cy) : fx_(fx), fy_(fy), cx_(cx), cy_(cy) {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy) || !std::isfinite(cx) ||
      !std::isfinite(cy)) {
    throw Error("intrinsics: focal lengths must be positive and all entries finite");
  }
}

Eigen::Matrix3d Intrinsics::matrix() const {
  Eigen::Matrix3d k;
  k << fx_, 0.0, cx_, 0.0, fy_, cy_, 0.0, 0.0, 1.0;
  return k;
}

Eigen::Vector3d Intrinsics::unproject(const Pixel& p, double depth) const {
  return {(p.x - cx_) / fx_ * depth, (p.y - cy_) / fy_ * depth, depth};
}

Pixel Intrinsics::project(const Eigen::Vector3d& x_cam) const {
  return {fx_ * x_cam.x() / x_cam.z() + cx_, fy_ * x_cam.y() / x_cam.z() + cy_};
}

Extrinsics::Extrinsics() : rotation_(Eigen::Matrix3d::Identity()), translation_(Eigen::Vector3d::Zero()) {}

Extrinsics::Extrinsics(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation.allFinite() || !translation.allFinite()) throw Error("extrinsics: non-finite entries");
  const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho > 1e-6 || std::abs(rotation.determinant() - 1.0) > 1e-6) {
    throw Error("extrinsics: rotation is not orthonormal with determinant 1");
  }
}

Extrinsics Extrinsics::from_matrix(const Eigen::Matrix4d& m) {
  if ((m.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-9) {
    throw Error("extrinsics: last row must be 0 0 0 1");
  }
  return Extrinsics(m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>());
}

Eigen::Matrix4d Extrinsics::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

Extrinsics Extrinsics::inverse() const {
  const Eigen::Matrix3d rt = rotation_.transpose();
  return Extrinsics(rt, -rt * translation_);
}

View::View(Image image, Intrinsics intrinsics, Extrinsics extrinsics, int id)
    : image_(std::move(image)), intrinsics_(intrinsics), extrinsics_(extrinsics), id_(id) {
  if (image_.height() < 2 || image_.width() < 2) throw DimensionError("view: image must be at least 2x2");
  if (image_.channels() != 1 && image_.channels() != 3) throw DimensionError("view: channels must be 1 or 3");
  for (double v : image_.data()) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) throw Error("view: pixel values must be finite and in [0,1]");
  }
}

std::optional<Projection> try_project_pixel(const Pixel& p, double depth, const View& src, const View& dst) {
  const Eigen::Vector3d world = src.lift(p, depth);
  return project_point(world, dst);
}

std::optional<Projection> project_point(const Eigen::Vector3d& x_world, const View& view) {
  const Eigen::Vector3d cam = view.extrinsics().to_camera(x_world);
  if (!cam.allFinite() || !(cam.z() > 0.0)) return std::nullopt;
  const Pixel px = view.intrinsics().project(cam);
  if (!std::isfinite(px.x) || !std::isfinite(px.y)) return std::nullopt;
  return Projection{px, cam.z()};
}

Projection project_pixel(const Pixel& p, double depth, const View& src, const View& dst) {
  if (!(depth > 0.0) || !std::isfinite(depth)) throw Error("project_pixel: depth must be positive");
  if (p.x < 0.0 || p.y < 0.0 || p.x > src.width() - 1 || p.y > src.height() - 1) {
    throw Error("project_pixel: pixel outside the source image");
  }
  auto r = try_project_pixel(p, depth, src, dst);
  if (!r) throw BehindCameraError("project_pixel: point lands behind the destination camera");
  return *r;
}

bool inside_interpolatable(double x, double y, int height, int width) {
  constexpr double eps = 1e-9;
  return x >= -eps && y >= -eps && x <= width - 1 + eps && y <= height - 1 + eps;
}

WarpResult warp_image(const View& src, const View& ref, const DepthMap& depth) {
  if (depth.height() != ref.height() || depth.width() != ref.width()) {
    throw DimensionError("warp_image: depth map does not match the reference image");
  }
  if (src.channels() != ref.channels()) throw DimensionError("warp_image: channel count mismatch");
  const int h = ref.height(), w = ref.width(), ch = ref.channels();
  WarpResult out{Image(h, w, ch), ValidityMask(h, w)};
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double d = depth.at(y, x);
      if (!(d > 0.0)) continue;
      const auto proj = try_project_pixel({double(x), double(y)}, d, ref, src);
      if (!proj) continue;
      if (sample_bilinear(src.image(), proj->pixel.x, proj->pixel.y, out.image.pixel(y, x))) {
        out.valid.set(y, x, true);
      }
    }
  }
  return out;
}

PhotometricReport photometric_loss(const View& ref, const std::vector<View>& sources, const DepthMap& depth) {
  if (sources.empty()) throw Error("photometric_loss: at least one source view is required");
  if (depth.height() != ref.height() || depth.width() != ref.width()) {
    throw DimensionError("photometric_loss: depth map does not match the reference image");
  }
  PhotometricReport report;
  const int ch = ref.channels();
  for (const View& src : sources) {
    const WarpResult warp = warp_image(src, ref, depth);
    const std::size_t n = ref.image().pixel_count();
    const double sq = deterministic_sum(n, [&](std::size_t p) {
      if (!warp.valid.flags[p]) return 0.0;
      double s = 0.0;
      for (int c = 0; c < ch; ++c) {
        const double diff = warp.image.data()[p * ch + c] - ref.image().data()[p * ch + c];
        s += diff * diff;
      }
      return s;
    });
    const std::size_t count = warp.valid.count();
    report.per_view.push_back({src.id(), count ? sq / static_cast<double>(count) : 0.0, count});
  }
  // Sorted summation keeps the total independent of the source order.
  std::vector<double> losses;
  for (const auto& v : report.per_view) losses.push_back(v.loss);
  std::sort(losses.begin(), losses.end());
  CompensatedSum total;
  for (double v : losses) total.add(v);
  report.total = total.value();
  return report;
}

}  // namespace mvskit
