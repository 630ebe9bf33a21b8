#include "mvskit/fusion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>

#include "mvskit/error.hpp"

namespace mvskit {

void FusionConfig::validate() const {
  if (min_consistent_views < 1) throw Error("fusion: min_consistent_views must be >= 1");
  if (!(max_relative_depth_error > 0.0) || !(max_reprojection_px > 0.0)) {
    throw Error("fusion: thresholds must be positive");
  }
}

namespace {

struct Survivor {
  Eigen::Vector3d anchor;    // the reference pixel's own lifted point
  Eigen::Vector3d position;  // mean over consistent observations
  Eigen::Vector3d color;
};

Eigen::Vector3d pixel_color(const Image& img, int y, int x) {
  const double* p = img.pixel(y, x);
  return img.channels() == 3 ? Eigen::Vector3d(p[0], p[1], p[2]) : Eigen::Vector3d::Constant(p[0]);
}

double default_voxel_size(const std::vector<View>& views, const std::vector<DepthMap>& depths) {
  std::vector<double> footprint;
  for (std::size_t i = 0; i < views.size(); ++i) {
    const double f = 0.5 * (views[i].intrinsics().fx() + views[i].intrinsics().fy());
    for (double d : depths[i].values()) {
      if (d > 0.0) footprint.push_back(d / f);
    }
  }
  if (footprint.empty()) return 1.0;
  auto mid = footprint.begin() + footprint.size() / 2;
  std::nth_element(footprint.begin(), mid, footprint.end());
  return 0.5 * *mid;
}

std::vector<Survivor> fuse_reference(const std::vector<const View*>& views, const std::vector<const DepthMap*>& depths,
                                     std::size_t r, const FusionConfig& cfg) {
  const View& ref = *views[r];
  const DepthMap& dref = *depths[r];
  std::vector<Survivor> out;
  for (int y = 0; y < ref.height(); ++y) {
    for (int x = 0; x < ref.width(); ++x) {
      const double d = dref.at(y, x);
      if (!(d > 0.0)) continue;
      const Pixel p{double(x), double(y)};
      const Eigen::Vector3d anchor = ref.lift(p, d);
      Eigen::Vector3d sum = anchor;
      int consistent = 1;
      for (std::size_t s = 0; s < views.size(); ++s) {
        if (s == r) continue;
        const View& src = *views[s];
        const auto proj = project_point(anchor, src);
        if (!proj) continue;
        const int u = static_cast<int>(std::lround(proj->pixel.x));
        const int v = static_cast<int>(std::lround(proj->pixel.y));
        if (u < 0 || v < 0 || u >= src.width() || v >= src.height()) continue;
        const double ds = depths[s]->at(v, u);
        if (!(ds > 0.0)) continue;
        if (std::abs(proj->depth - ds) / ds > cfg.max_relative_depth_error) continue;
        const Eigen::Vector3d back_world = src.lift({double(u), double(v)}, ds);
        const auto back = project_point(back_world, ref);
        if (!back) continue;
        if (std::hypot(back->pixel.x - p.x, back->pixel.y - p.y) > cfg.max_reprojection_px) continue;
        sum += back_world;
        ++consistent;
      }
      if (consistent >= cfg.min_consistent_views) {
        out.push_back({anchor, sum / consistent, pixel_color(ref.image(), y, x)});
      }
    }
  }
  return out;
}

}  // namespace

FusionResult fuse(const std::vector<View>& views, const std::vector<DepthMap>& depths, const FusionConfig& cfg) {
  cfg.validate();
  if (views.size() != depths.size()) throw Error("fuse: one depth map per view is required");
  for (std::size_t i = 0; i < views.size(); ++i) {
    if (depths[i].height() != views[i].height() || depths[i].width() != views[i].width()) {
      throw DimensionError("fuse: depth map " + std::to_string(i) + " does not match its view");
    }
  }

  // Work in view-id order so the result does not depend on the input order.
  std::vector<std::size_t> order(views.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return views[a].id() < views[b].id(); });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (views[order[i]].id() == views[order[i - 1]].id()) throw Error("fuse: view ids must be unique");
  }
  std::vector<const View*> sorted_views;
  std::vector<const DepthMap*> sorted_depths;
  for (std::size_t i : order) {
    sorted_views.push_back(&views[i]);
    sorted_depths.push_back(&depths[i]);
  }

  std::vector<std::vector<Survivor>> per_ref(views.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(views.size()); ++r) {
    per_ref[r] = fuse_reference(sorted_views, sorted_depths, static_cast<std::size_t>(r), cfg);
  }

  FusionResult result;
  result.survivors_per_view.assign(views.size(), 0);
  for (std::size_t r = 0; r < order.size(); ++r) result.survivors_per_view[order[r]] = per_ref[r].size();
  result.voxel_size = cfg.voxel_size > 0.0 ? cfg.voxel_size : default_voxel_size(views, depths);

  struct Cell {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    Eigen::Vector3d color = Eigen::Vector3d::Zero();
    int count = 0;
  };
  std::map<std::array<long long, 3>, Cell> cells;
  for (const auto& survivors : per_ref) {
    for (const auto& s : survivors) {
      const std::array<long long, 3> key = {static_cast<long long>(std::floor(s.anchor.x() / result.voxel_size)),
                                            static_cast<long long>(std::floor(s.anchor.y() / result.voxel_size)),
                                            static_cast<long long>(std::floor(s.anchor.z() / result.voxel_size))};
      Cell& c = cells[key];
      c.position += s.position;
      c.color += s.color;
      ++c.count;
    }
  }
  for (const auto& [key, c] : cells) {
    result.cloud.positions.push_back(c.position / c.count);
    result.cloud.colors.push_back(c.color / c.count);
  }
  return result;
}

}  // namespace mvskit
