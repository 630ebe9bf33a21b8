#include "mvskit/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/LU>

#include "mvskit/error.hpp"
#include "mvskit/spatial_index.hpp"

namespace mvskit::reference {

std::vector<double> nn_distances(const PointCloud& query, const PointCloud& target) {
  if (target.empty()) throw Error("nn_distances: empty target cloud");
  std::vector<double> out;
  out.reserve(query.size());
  for (const auto& q : query.positions) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& t : target.positions) best = std::min(best, point_distance(q, t));
    out.push_back(best);
  }
  return out;
}

WarpResult warp_image(const View& src, const View& ref, const DepthMap& depth) {
  if (depth.height() != ref.height() || depth.width() != ref.width()) {
    throw DimensionError("warp_image: depth map does not match the reference image");
  }
  const int h = ref.height(), w = ref.width(), ch = ref.channels();
  const Eigen::Matrix3d kr_inv = ref.intrinsics().matrix().inverse();
  const Eigen::Matrix3d ks = src.intrinsics().matrix();
  const Eigen::Matrix3d rr = ref.extrinsics().rotation(), rs = src.extrinsics().rotation();
  const Eigen::Vector3d tr = ref.extrinsics().translation(), ts = src.extrinsics().translation();
  WarpResult out{Image(h, w, ch), ValidityMask(h, w)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double d = depth.at(y, x);
      if (!(d > 0.0)) continue;
      const Eigen::Vector3d world = rr.transpose() * (d * (kr_inv * Eigen::Vector3d(x, y, 1.0)) - tr);
      const Eigen::Vector3d cam = rs * world + ts;
      if (!(cam.z() > 0.0)) continue;
      const Eigen::Vector3d pix = ks * cam;
      if (sample_bilinear(src.image(), pix.x() / pix.z(), pix.y() / pix.z(), out.image.pixel(y, x))) {
        out.valid.set(y, x, true);
      }
    }
  }
  return out;
}

CostVolume build_cost_volume(const View& ref, const std::vector<View>& sources, const DepthHypotheses& hyps,
                             CostKind kind, int window) {
  if (sources.empty()) throw Error("build_cost_volume: at least one source view is required");
  if (window < 1 || window % 2 == 0) throw Error("build_cost_volume: window must be a positive odd integer");
  const int h = ref.height(), w = ref.width(), ch = ref.channels();
  const int K = static_cast<int>(hyps.size()), r = window / 2;
  const double invalid = invalid_cost(kind, window, ch);
  CostVolume cv(h, w, K);
  std::vector<double> a, b, sample(ch);
  for (int k = 0; k < K; ++k) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double total = 0.0;
        for (const View& src : sources) {
          auto resample = [&](int qy, int qx) {
            const auto proj = try_project_pixel({double(qx), double(qy)}, hyps[k], ref, src);
            return proj && sample_bilinear(src.image(), proj->pixel.x, proj->pixel.y, sample.data());
          };
          if (!resample(y, x)) {
            total += invalid;
            continue;
          }
          a.clear();
          b.clear();
          for (int qy = std::max(0, y - r); qy <= std::min(h - 1, y + r); ++qy) {
            for (int qx = std::max(0, x - r); qx <= std::min(w - 1, x + r); ++qx) {
              if (!resample(qy, qx)) continue;
              for (int c = 0; c < ch; ++c) {
                a.push_back(ref.image().at(qy, qx, c));
                b.push_back(sample[c]);
              }
            }
          }
          const double m = static_cast<double>(a.size());
          if (kind == CostKind::kSSD) {
            double e = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) e += (a[i] - b[i]) * (a[i] - b[i]);
            total += static_cast<double>(window) * window * e / (m / ch);
          } else {
            double ma = 0.0, mb = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) {
              ma += a[i];
              mb += b[i];
            }
            ma /= m;
            mb /= m;
            double va = 0.0, vb = 0.0, cov = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) {
              va += (a[i] - ma) * (a[i] - ma);
              vb += (b[i] - mb) * (b[i] - mb);
              cov += (a[i] - ma) * (b[i] - mb);
            }
            va /= m;
            vb /= m;
            cov /= m;
            if (va >= kNccVarianceFloor && vb >= kNccVarianceFloor) {
              total += std::clamp(1.0 - cov / std::sqrt(va * vb), 0.0, 2.0);
            } else {
              total += invalid;
            }
          }
        }
        cv.at(y, x, k) = total / static_cast<double>(sources.size());
      }
    }
  }
  return cv;
}

Image propagate(const Image& distorted, const AffinityField& affinity) {
  const int h = distorted.height(), w = distorted.width(), ch = distorted.channels();
  if (affinity.height() != h || affinity.width() != w) {
    throw DimensionError("propagate: affinity field does not match the image");
  }
  Image out(h, w, ch);
  for (int d = 0; d < kDirections; ++d) {
    const auto dir = static_cast<Direction>(d);
    Image hidden(h, w, ch);
    const bool horizontal = dir == Direction::kLeftToRight || dir == Direction::kRightToLeft;
    const bool forward = dir == Direction::kLeftToRight || dir == Direction::kTopToBottom;
    const int lines = horizontal ? w : h, span = horizontal ? h : w;
    for (int i = 0; i < lines; ++i) {
      const int line = forward ? i : lines - 1 - i;
      const int prev = forward ? line - 1 : line + 1;
      for (int j = 0; j < span; ++j) {
        const int y = horizontal ? j : line, x = horizontal ? line : j;
        double wsum = 0.0;
        std::vector<double> acc(ch, 0.0);
        for (int n = 0; n < kNeighbors; ++n) {
          const int ny = horizontal ? j + n - 1 : prev, nx = horizontal ? prev : j + n - 1;
          if (ny < 0 || nx < 0 || ny >= h || nx >= w) continue;
          const double wn = affinity.at(y, x, dir, n);
          for (int c = 0; c < ch; ++c) acc[c] += wn * hidden.at(ny, nx, c);
          wsum += wn;
        }
        for (int c = 0; c < ch; ++c) hidden.at(y, x, c) = acc[c] + (1.0 - wsum) * distorted.at(y, x, c);
      }
    }
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int c = 0; c < ch; ++c) out.at(y, x, c) += 0.25 * hidden.at(y, x, c);
  }
  return out;
}

double mmd_squared(const EmbeddingSet& x, const EmbeddingSet& y, double bandwidth) {
  if (x.dim() != y.dim()) throw DimensionError("mmd: embedding dimensions differ");
  auto mean_k = [&](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < b.rows(); ++j)
        s += std::exp(-(a.row(i) - b.row(j)).squaredNorm() / (2.0 * bandwidth * bandwidth));
    return s / static_cast<double>(a.rows() * b.rows());
  };
  return mean_k(x.vectors, x.vectors) + mean_k(y.vectors, y.vectors) - 2.0 * mean_k(x.vectors, y.vectors);
}

}  // namespace mvskit::reference
