#pragma once

#include <cstdint>
#include <string>

#include "mvskit/geometry.hpp"
#include "mvskit/image.hpp"
#include "mvskit/sweep.hpp"

namespace mvskit {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

// Photometric perturbation phi(I, eps). Offsets are additive, contrast and
// gamma multiplicative/exponent; identity is {0,0}, {1,1}, {1,1}, {0,0}.
struct AugmentationSpec {
  Range brightness{0.0, 0.0};
  Range contrast{1.0, 1.0};
  Range gamma{1.0, 1.0};
  Range blur_sigma{0.0, 0.0};
  std::uint64_t seed = 0;

  static AugmentationSpec identity() { return {}; }
  // Mild jitter suitable for consistency pairs.
  static AugmentationSpec mild(std::uint64_t seed);
  void validate() const;
};

inline constexpr double kDefaultLambda1 = 0.1;
inline constexpr double kDefaultLambda2 = 1.0;
inline constexpr double kKlProbabilityFloor = 1e-8;

struct LossReport {
  double sup = 0.0;
  double photo = 0.0;
  double consis = 0.0;
  double style = 0.0;
  double lambda1 = kDefaultLambda1;
  double lambda2 = kDefaultLambda2;
  double overall = 0.0;

  std::string csv_header() const;
  std::string csv_row() const;
  std::string key_values() const;
};

// Masked L2 over pixels with gt > 0. Throws Error("no supervision") when gt
// has no valid pixel.
double supervised_loss(const DepthMap& pred, const DepthMap& gt);

// Same contract as supervised_loss, applied to the prediction on the
// style-transferred sample against the labeled ground truth.
double style_consistency_loss(const DepthMap& pred_on_generated, const DepthMap& gt_of_labeled);

enum class KlDirection { kForward, kSymmetric };

// (1/HW) * sum_p KL(pv(p) || pv_aug(p)) in nats, probabilities floored at
// kKlProbabilityFloor inside the log. kSymmetric averages both directions.
double kl_consistency_loss(const ProbabilityVolume& pv, const ProbabilityVolume& pv_aug,
                           KlDirection direction = KlDirection::kForward);

// Deterministic for a given spec; cameras and dimensions are untouched.
View augment(const View& view, const AugmentationSpec& spec);

LossReport overall_loss(double sup, double photo, double consis, double style, double lambda1 = kDefaultLambda1,
                        double lambda2 = kDefaultLambda2);

}  // namespace mvskit
