#include "mvskit/spatial_index.hpp"

#include <algorithm>
#include <limits>

#include "mvskit/error.hpp"

namespace mvskit {

namespace {

constexpr int kMaxCellsPerAxis = 1024;

double auto_cell_size(const Eigen::Vector3d& extent, std::size_t n) {
  Eigen::Vector3d e = extent;
  std::sort(e.data(), e.data() + 3, std::greater<>());
  const double count = static_cast<double>(n);
  // Take the largest of the 1-, 2- and 3-manifold estimates so thin clouds
  // (planes, curves) do not get vanishingly small cells.
  const double s1 = e[0] / count;
  const double s2 = std::sqrt(e[0] * e[1] / count);
  const double s3 = std::cbrt(e[0] * e[1] * e[2] / count);
  const double s = 2.0 * std::max({s1, s2, s3});
  return s > 0.0 ? s : 1.0;
}

}  // namespace

SpatialIndex::SpatialIndex(std::vector<Eigen::Vector3d> points, double cell_size) : points_(std::move(points)) {
  if (points_.empty()) throw Error("spatial index: empty point set");
  Eigen::Vector3d lo = points_.front(), hi = points_.front();
  for (const auto& p : points_) {
    if (!p.allFinite()) throw Error("spatial index: non-finite point");
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  origin_ = lo;
  const Eigen::Vector3d extent = hi - lo;
  cell_size_ = cell_size > 0.0 ? cell_size : auto_cell_size(extent, points_.size());
  const double max_cells = 8.0 * static_cast<double>(points_.size()) + 64.0;
  for (;;) {
    double total = 1.0;
    for (int a = 0; a < 3; ++a) {
      dims_[a] = std::clamp(static_cast<int>(std::floor(extent[a] / cell_size_)) + 1, 1, kMaxCellsPerAxis);
      total *= dims_[a];
    }
    const bool fits = extent.maxCoeff() / cell_size_ < kMaxCellsPerAxis;
    if (total <= max_cells && fits) break;
    cell_size_ *= 1.5;
  }

  const std::size_t cells = static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
  std::vector<std::size_t> owner(points_.size());
  cell_start_.assign(cells + 1, 0);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto c = cell_of(points_[i]);
    owner[i] = cell_id(c[0], c[1], c[2]);
    ++cell_start_[owner[i] + 1];
  }
  for (std::size_t c = 0; c < cells; ++c) cell_start_[c + 1] += cell_start_[c];
  cell_items_.resize(points_.size());
  std::vector<std::size_t> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < points_.size(); ++i) cell_items_[fill[owner[i]]++] = i;
}

std::array<int, 3> SpatialIndex::cell_of(const Eigen::Vector3d& p) const {
  std::array<int, 3> c{};
  for (int a = 0; a < 3; ++a) {
    const double f = std::floor((p[a] - origin_[a]) / cell_size_);
    c[a] = static_cast<int>(std::clamp(f, 0.0, static_cast<double>(dims_[a] - 1)));
  }
  return c;
}

Neighbor SpatialIndex::nearest(const Eigen::Vector3d& q) const {
  const auto c = cell_of(q);
  Neighbor best{0, std::numeric_limits<double>::infinity()};
  auto scan = [&](int i, int j, int k) {
    const std::size_t id = cell_id(i, j, k);
    for (std::size_t t = cell_start_[id]; t < cell_start_[id + 1]; ++t) {
      const std::size_t idx = cell_items_[t];
      const double d = point_distance(q, points_[idx]);
      if (d < best.distance || (d == best.distance && idx < best.index)) best = {idx, d};
    }
  };
  // Points are bucketed with floor(), which can round across a cell wall.
  const double slack = 1e-9 * cell_size_;
  for (int r = 0;; ++r) {
    const int i0 = std::max(0, c[0] - r), i1 = std::min(dims_[0] - 1, c[0] + r);
    const int j0 = std::max(0, c[1] - r), j1 = std::min(dims_[1] - 1, c[1] + r);
    for (int i = i0; i <= i1; ++i) {
      for (int j = j0; j <= j1; ++j) {
        const bool face = std::abs(i - c[0]) == r || std::abs(j - c[1]) == r;
        if (face) {
          for (int k = std::max(0, c[2] - r); k <= std::min(dims_[2] - 1, c[2] + r); ++k) scan(i, j, k);
        } else {
          if (c[2] - r >= 0) scan(i, j, c[2] - r);
          if (r > 0 && c[2] + r < dims_[2]) scan(i, j, c[2] + r);
        }
      }
    }
    // Lower bound on the distance to any point outside the visited block.
    double bound = std::numeric_limits<double>::infinity();
    bool remaining = false;
    for (int a = 0; a < 3; ++a) {
      if (c[a] - r > 0) {
        remaining = true;
        bound = std::min(bound, std::max(0.0, q[a] - (origin_[a] + (c[a] - r) * cell_size_)));
      }
      if (c[a] + r < dims_[a] - 1) {
        remaining = true;
        bound = std::min(bound, std::max(0.0, origin_[a] + (c[a] + r + 1) * cell_size_ - q[a]));
      }
    }
    if (!remaining || best.distance <= bound - slack) break;
  }
  return best;
}

}  // namespace mvskit
