#include "mvskit/losses.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "mvskit/error.hpp"
#include "mvskit/parallel.hpp"
#include "mvskit/rng.hpp"

namespace mvskit {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_range(const Range& r, const char* name) {
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi) {
    throw Error(std::string("augmentation: empty or invalid range for ") + name);
  }
}

}  // namespace

AugmentationSpec AugmentationSpec::mild(std::uint64_t seed) {
  AugmentationSpec s;
  s.brightness = {-0.05, 0.05};
  s.contrast = {0.9, 1.1};
  s.gamma = {0.9, 1.1};
  s.blur_sigma = {0.0, 0.8};
  s.seed = seed;
  return s;
}

void AugmentationSpec::validate() const {
  check_range(brightness, "brightness");
  check_range(contrast, "contrast");
  check_range(gamma, "gamma");
  check_range(blur_sigma, "blur_sigma");
  if (gamma.lo <= 0.0) throw Error("augmentation: gamma must be positive");
  if (blur_sigma.lo < 0.0) throw Error("augmentation: blur sigma must be non-negative");
}

std::string LossReport::csv_header() const { return "sup,photo,consis,style,lambda1,lambda2,overall"; }

std::string LossReport::csv_row() const {
  return fmt(sup) + "," + fmt(photo) + "," + fmt(consis) + "," + fmt(style) + "," + fmt(lambda1) + "," +
         fmt(lambda2) + "," + fmt(overall);
}

std::string LossReport::key_values() const {
  std::ostringstream os;
  os << "sup=" << fmt(sup) << "\nphoto=" << fmt(photo) << "\nconsis=" << fmt(consis) << "\nstyle=" << fmt(style)
     << "\nlambda1=" << fmt(lambda1) << "\nlambda2=" << fmt(lambda2) << "\noverall=" << fmt(overall) << "\n";
  return os.str();
}

double supervised_loss(const DepthMap& pred, const DepthMap& gt) {
  if (pred.height() != gt.height() || pred.width() != gt.width()) {
    throw DimensionError("supervised_loss: prediction and ground truth differ in size");
  }
  const auto& g = gt.values();
  const auto& p = pred.values();
  const std::size_t valid = gt.valid_count();
  if (valid == 0) throw Error("supervised_loss: no supervision (ground truth has no valid pixel)");
  const double sq = deterministic_sum(g.size(), [&](std::size_t i) {
    if (!(g[i] > 0.0)) return 0.0;
    const double d = p[i] - g[i];
    return d * d;
  });
  return sq / static_cast<double>(valid);
}

double style_consistency_loss(const DepthMap& pred_on_generated, const DepthMap& gt_of_labeled) {
  return supervised_loss(pred_on_generated, gt_of_labeled);
}

namespace {

double kl_pixel(const double* p, const double* q, int K) {
  double s = 0.0;
  for (int k = 0; k < K; ++k) {
    if (p[k] <= 0.0) continue;
    s += p[k] * std::log(std::max(p[k], kKlProbabilityFloor) / std::max(q[k], kKlProbabilityFloor));
  }
  // Flooring can push a vanishing divergence a few 1e-8 below zero.
  return std::max(s, 0.0);
}

}  // namespace

double kl_consistency_loss(const ProbabilityVolume& pv, const ProbabilityVolume& pv_aug, KlDirection direction) {
  if (!pv.same_shape(pv_aug)) throw DimensionError("kl_consistency_loss: volume shapes differ");
  const std::size_t n = static_cast<std::size_t>(pv.height()) * pv.width();
  if (n == 0) return 0.0;
  const int K = pv.depth_count();
  const double* a = pv.data().data();
  const double* b = pv_aug.data().data();
  const double sum = deterministic_sum(n, [&](std::size_t i) {
    const double fwd = kl_pixel(a + i * K, b + i * K, K);
    if (direction == KlDirection::kForward) return fwd;
    return 0.5 * (fwd + kl_pixel(b + i * K, a + i * K, K));
  });
  return sum / static_cast<double>(n);
}

View augment(const View& view, const AugmentationSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const double brightness = rng.uniform(spec.brightness.lo, spec.brightness.hi);
  const double contrast = rng.uniform(spec.contrast.lo, spec.contrast.hi);
  const double gamma = rng.uniform(spec.gamma.lo, spec.gamma.hi);
  const double sigma = rng.uniform(spec.blur_sigma.lo, spec.blur_sigma.hi);

  Image img = gaussian_blur(view.image(), sigma);
  for (double& v : img.data()) {
    v = std::clamp(v * contrast + brightness, 0.0, 1.0);
    if (gamma != 1.0) v = std::pow(v, gamma);
  }
  return view.with_image(std::move(img));
}

LossReport overall_loss(double sup, double photo, double consis, double style, double lambda1, double lambda2) {
  for (double v : {sup, photo, consis, style, lambda1, lambda2}) {
    if (!std::isfinite(v) || v < 0.0) throw Error("overall_loss: components and weights must be finite and >= 0");
  }
  LossReport r;
  r.sup = sup;
  r.photo = photo;
  r.consis = consis;
  r.style = style;
  r.lambda1 = lambda1;
  r.lambda2 = lambda2;
  r.overall = sup + photo + lambda1 * consis + lambda2 * style;
  return r;
}

}  // namespace mvskit
