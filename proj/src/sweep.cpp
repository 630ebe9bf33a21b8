#include "mvskit/sweep.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>

#include "mvskit/error.hpp"

namespace mvskit {

DepthHypotheses::DepthHypotheses(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) throw Error("depth hypotheses: at least two values are required");
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k]) || !(values_[k] > 0.0)) throw Error("depth hypotheses: values must be positive");
    if (k > 0 && !(values_[k] > values_[k - 1])) throw Error("depth hypotheses: values must be strictly increasing");
  }
}

DepthHypotheses DepthHypotheses::uniform(double depth_min, double depth_max, int count) {
  if (count < 2) throw Error("depth hypotheses: at least two values are required");
  std::vector<double> v(count);
  for (int k = 0; k < count; ++k) v[k] = depth_min + (depth_max - depth_min) * k / (count - 1);
  return DepthHypotheses(std::move(v));
}

Volume::Volume(int height, int width, int depth_count, double fill)
    : height_(height), width_(width), depth_count_(depth_count) {
  if (height < 0 || width < 0 || depth_count < 1) throw DimensionError("volume: invalid shape");
  data_.assign(static_cast<std::size_t>(height) * width * depth_count, fill);
}

void ProbabilityVolume::validate(double tol) const {
  for (int y = 0; y < height(); ++y) {
    for (int x = 0; x < width(); ++x) {
      const double* p = pixel(y, x);
      double s = 0.0;
      for (int k = 0; k < depth_count(); ++k) {
        if (!(p[k] >= 0.0 && p[k] <= 1.0)) throw Error("probability volume: entry outside [0,1]");
        s += p[k];
      }
      if (std::abs(s - 1.0) > tol) throw Error("probability volume: pixel does not sum to 1");
    }
  }
}

double invalid_cost(CostKind kind, int window, int channels) {
  return kind == CostKind::kSSD ? static_cast<double>(window) * window * channels : 2.0;
}

namespace {

void check_sweep_inputs(const View& ref, const std::vector<View>& sources, int window) {
  if (sources.empty()) throw Error("build_cost_volume: at least one source view is required");
  if (window < 1 || window % 2 == 0) throw Error("build_cost_volume: window must be a positive odd integer");
  for (const View& s : sources) {
    if (s.channels() != ref.channels()) throw DimensionError("build_cost_volume: channel count mismatch");
  }
}

// Summed-area table with a zero border: sum over [y0,y1) x [x0,x1).
class Integral {
 public:
  Integral(int h, int w) : w_(w + 1), data_(static_cast<std::size_t>(h + 1) * (w + 1), 0.0) {}

  template <typename F>
  void build(int h, int w, F&& value) {
    for (int y = 0; y < h; ++y) {
      double row = 0.0;
      for (int x = 0; x < w; ++x) {
        row += value(y, x);
        at(y + 1, x + 1) = at(y, x + 1) + row;
      }
    }
  }
  double sum(int y0, int x0, int y1, int x1) const { return at(y1, x1) - at(y0, x1) - at(y1, x0) + at(y0, x0); }

 private:
  double& at(int y, int x) { return data_[static_cast<std::size_t>(y) * w_ + x]; }
  double at(int y, int x) const { return data_[static_cast<std::size_t>(y) * w_ + x]; }
  int w_;
  std::vector<double> data_;
};

// Per-slice scratch: the source resampled onto the reference grid through the
// plane homography at one depth.
struct Resampled {
  Image image;
  std::vector<unsigned char> valid;
};

void resample_at_depth(const View& ref, const View& src, double depth, Resampled& out) {
  const Eigen::Matrix3d r_rel = src.extrinsics().rotation() * ref.extrinsics().rotation().transpose();
  const Eigen::Matrix3d a = src.intrinsics().matrix() * r_rel * ref.intrinsics().matrix().inverse();
  const Eigen::Vector3d b =
      src.intrinsics().matrix() * (src.extrinsics().translation() - r_rel * ref.extrinsics().translation());
  const int h = ref.height(), w = ref.width();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Eigen::Vector3d hp = depth * (a * Eigen::Vector3d(x, y, 1.0)) + b;
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      out.valid[i] = 0;
      if (!(hp.z() > 0.0)) continue;
      if (sample_bilinear(src.image(), hp.x() / hp.z(), hp.y() / hp.z(), out.image.pixel(y, x))) out.valid[i] = 1;
    }
  }
}

}  // namespace

CostVolume build_cost_volume(const View& ref, const std::vector<View>& sources, const DepthHypotheses& hyps,
                             CostKind kind, int window) {
  check_sweep_inputs(ref, sources, window);
  const int h = ref.height(), w = ref.width(), ch = ref.channels();
  const int K = static_cast<int>(hyps.size());
  const int r = window / 2;
  const double invalid = invalid_cost(kind, window, ch);
  const double area = static_cast<double>(window) * window;
  const Image& refimg = ref.image();

  CostVolume cv(h, w, K);
#pragma omp parallel
  {
    Resampled rs{Image(h, w, ch), std::vector<unsigned char>(static_cast<std::size_t>(h) * w)};
    std::vector<double> acc(static_cast<std::size_t>(h) * w);
    Integral count(h, w), s_e(h, w), s_a(h, w), s_b(h, w), s_aa(h, w), s_bb(h, w), s_ab(h, w);

#pragma omp for schedule(dynamic)
    for (int k = 0; k < K; ++k) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (const View& src : sources) {
        resample_at_depth(ref, src, hyps[k], rs);
        auto valid = [&](int y, int x) { return rs.valid[static_cast<std::size_t>(y) * w + x] != 0; };
        auto channel_sum = [&](int y, int x, auto&& f) {
          if (!valid(y, x)) return 0.0;
          double s = 0.0;
          for (int c = 0; c < ch; ++c) s += f(refimg.at(y, x, c), rs.image.at(y, x, c));
          return s;
        };
        count.build(h, w, [&](int y, int x) { return valid(y, x) ? 1.0 : 0.0; });
        if (kind == CostKind::kSSD) {
          s_e.build(h, w, [&](int y, int x) {
            return channel_sum(y, x, [](double a, double b) { return (a - b) * (a - b); });
          });
        } else {
          s_a.build(h, w, [&](int y, int x) { return channel_sum(y, x, [](double a, double) { return a; }); });
          s_b.build(h, w, [&](int y, int x) { return channel_sum(y, x, [](double, double b) { return b; }); });
          s_aa.build(h, w, [&](int y, int x) { return channel_sum(y, x, [](double a, double) { return a * a; }); });
          s_bb.build(h, w, [&](int y, int x) { return channel_sum(y, x, [](double, double b) { return b * b; }); });
          s_ab.build(h, w, [&](int y, int x) { return channel_sum(y, x, [](double a, double b) { return a * b; }); });
        }
        for (int y = 0; y < h; ++y) {
          const int y0 = std::max(0, y - r), y1 = std::min(h, y + r + 1);
          for (int x = 0; x < w; ++x) {
            double cost = invalid;
            if (valid(y, x)) {
              const int x0 = std::max(0, x - r), x1 = std::min(w, x + r + 1);
              const double n = count.sum(y0, x0, y1, x1);
              if (kind == CostKind::kSSD) {
                cost = area * s_e.sum(y0, x0, y1, x1) / n;
              } else {
                const double m = n * ch;
                const double ma = s_a.sum(y0, x0, y1, x1) / m, mb = s_b.sum(y0, x0, y1, x1) / m;
                const double va = s_aa.sum(y0, x0, y1, x1) / m - ma * ma;
                const double vb = s_bb.sum(y0, x0, y1, x1) / m - mb * mb;
                if (va >= kNccVarianceFloor && vb >= kNccVarianceFloor) {
                  const double cov = s_ab.sum(y0, x0, y1, x1) / m - ma * mb;
                  cost = std::clamp(1.0 - cov / std::sqrt(va * vb), 0.0, 2.0);
                }
              }
            }
            acc[static_cast<std::size_t>(y) * w + x] += cost;
          }
        }
      }
      const double inv_sources = 1.0 / static_cast<double>(sources.size());
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) cv.at(y, x, k) = acc[static_cast<std::size_t>(y) * w + x] * inv_sources;
      }
    }
  }
  return cv;
}

ProbabilityVolume cost_to_probability(const CostVolume& cv, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw Error("cost_to_probability: temperature must be positive");
  }
  const int h = cv.height(), w = cv.width(), K = cv.depth_count();
  ProbabilityVolume pv(h, w, K);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double* c = cv.pixel(y, x);
      double* p = pv.pixel(y, x);
      const double lo = *std::min_element(c, c + K);
      double s = 0.0;
      for (int k = 0; k < K; ++k) {
        p[k] = std::exp(-(c[k] - lo) / temperature);
        s += p[k];
      }
      for (int k = 0; k < K; ++k) p[k] /= s;
    }
  }
  return pv;
}

DepthMap soft_argmin(const ProbabilityVolume& pv, const DepthHypotheses& hyps) {
  if (static_cast<std::size_t>(pv.depth_count()) != hyps.size()) {
    throw DimensionError("soft_argmin: volume and hypotheses disagree on K");
  }
  const int h = pv.height(), w = pv.width(), K = pv.depth_count();
  DepthMap depth(h, w);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double* p = pv.pixel(y, x);
      double num = 0.0, den = 0.0;
      for (int k = 0; k < K; ++k) {
        num += p[k] * hyps[k];
        den += p[k];
      }
      depth.at(y, x) = std::clamp(num / den, hyps.front(), hyps.back());
    }
  }
  return depth;
}

DepthMap max_probability(const ProbabilityVolume& pv) {
  DepthMap out(pv.height(), pv.width());
  for (int y = 0; y < pv.height(); ++y) {
    for (int x = 0; x < pv.width(); ++x) {
      const double* p = pv.pixel(y, x);
      out.at(y, x) = *std::max_element(p, p + pv.depth_count());
    }
  }
  return out;
}

SweepResult plane_sweep_depth(const View& ref, const std::vector<View>& sources, const DepthHypotheses& hyps,
                              const SweepOptions& options) {
  const CostVolume cv = build_cost_volume(ref, sources, hyps, options.cost, options.window);
  SweepResult r;
  r.probabilities = cost_to_probability(cv, options.temperature);
  r.depth = soft_argmin(r.probabilities, hyps);
  r.confidence = max_probability(r.probabilities);
  return r;
}

}  // namespace mvskit
