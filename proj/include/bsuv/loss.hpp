#pragma once

#include <optional>
#include <vector>

#include "bsuv/types.hpp"

namespace bsuv {

struct LossConfig {
  double smoothing = 1.0;     // T
  bool loss_masking = true;   // drop UnknownMotion / OutsideROI pixels from both sums
  void validate() const;
  friend bool operator==(const LossConfig&, const LossConfig&) = default;
};

/// J_R = (T + sum Y*P) / (T + sum (Y + P - Y*P)), summed over pixels where
/// `valid` is 1 (all pixels when absent). Throws ShapeMismatch.
double relaxed_jaccard(const BinaryMask& truth, const ProbabilityMap& pred, double smoothing,
                       const BinaryMask* valid = nullptr);

/// 1 - relaxed_jaccard.
double jaccard_loss(const BinaryMask& truth, const ProbabilityMap& pred, double smoothing,
                    const BinaryMask* valid = nullptr);

/// dLoss/dPred per pixel (zero on invalid pixels).
std::vector<double> jaccard_loss_gradient(const BinaryMask& truth, const ProbabilityMap& pred, double smoothing,
                                          const BinaryMask* valid = nullptr);

/// Training target and validity mask derived from a label map: Foreground -> 1,
/// Background/HardShadow -> 0; UnknownMotion/OutsideROI invalid when masking.
struct LossTarget {
  BinaryMask truth;
  BinaryMask valid;
};
LossTarget make_loss_target(const LabelMap& labels, bool loss_masking);

}  // namespace bsuv
