#include "bsuv/loss.hpp"

#include "bsuv/error.hpp"

namespace bsuv {

void LossConfig::validate() const {
  if (!(smoothing > 0.0)) throw Error(Errc::InvalidConfig, "loss smoothing T must be positive");
}

namespace {

struct Sums {
  double intersection = 0.0;
  double uni = 0.0;
};

void check(const BinaryMask& truth, const ProbabilityMap& pred, double smoothing, const BinaryMask* valid) {
  if (truth.shape() != pred.shape() || (valid && valid->shape() != pred.shape())) {
    throw Error(Errc::ShapeMismatch, "loss inputs differ in shape");
  }
  if (!(smoothing > 0.0)) throw Error(Errc::InvalidConfig, "loss smoothing T must be positive");
}

Sums sums(const BinaryMask& truth, const ProbabilityMap& pred, const BinaryMask* valid) {
  Sums s;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (valid && !(*valid)[i]) continue;
    const double y = truth[i], p = pred[i];
    s.intersection += y * p;
    s.uni += y + p - y * p;
  }
  return s;
}

}  // namespace

double relaxed_jaccard(const BinaryMask& truth, const ProbabilityMap& pred, double smoothing,
                       const BinaryMask* valid) {
  check(truth, pred, smoothing, valid);
  const Sums s = sums(truth, pred, valid);
  return (smoothing + s.intersection) / (smoothing + s.uni);
}

double jaccard_loss(const BinaryMask& truth, const ProbabilityMap& pred, double smoothing, const BinaryMask* valid) {
  return 1.0 - relaxed_jaccard(truth, pred, smoothing, valid);
}

std::vector<double> jaccard_loss_gradient(const BinaryMask& truth, const ProbabilityMap& pred, double smoothing,
                                          const BinaryMask* valid) {
  check(truth, pred, smoothing, valid);
  const Sums s = sums(truth, pred, valid);
  const double num = smoothing + s.intersection;
  const double den = smoothing + s.uni;
  // dJ/dp = (y * den - num * (1 - y)) / den^2
  std::vector<double> g(pred.size(), 0.0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (valid && !(*valid)[i]) continue;
    const double y = truth[i];
    g[i] = -(y * den - num * (1.0 - y)) / (den * den);
  }
  return g;
}

LossTarget make_loss_target(const LabelMap& labels, bool loss_masking) {
  std::vector<std::uint8_t> truth(labels.size()), valid(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Label l = labels[i];
    truth[i] = l == Label::Foreground ? 1 : 0;
    valid[i] = (loss_masking && (l == Label::UnknownMotion || l == Label::OutsideROI)) ? 0 : 1;
  }
  return {BinaryMask(labels.height(), labels.width(), std::move(truth)),
          BinaryMask(labels.height(), labels.width(), std::move(valid))};
}

}  // namespace bsuv
