#include "boxloss/assignment.hpp"

#include <cmath>
#include <stdexcept>

namespace boxloss {

std::optional<int> select_second_gt(const Box& pred, const GroundTruthSet& gts, int matched) {
  if (matched < 0 || static_cast<std::size_t>(matched) >= gts.size()) {
    throw std::out_of_range("select_second_gt: matched index out of range");
  }
  double best = 0.0;
  int best_index = -1;
  for (std::size_t j = 0; j < gts.size(); ++j) {
    if (static_cast<int>(j) == matched) continue;
    const double v = iou(pred, gts[j]);
    if (v > best) {
      best = v;
      best_index = static_cast<int>(j);
    }
  }
  if (best_index < 0) return std::nullopt;  // no competing overlap
  return best_index;
}

Box dynamic_anchor(const Box& pred, const Box& gt) {
  if (gt.area() <= 0.0) {
    throw std::domain_error("dynamic_anchor: ground truth box is degenerate");
  }
  return box_from_center(pred.center_x(), pred.center_y(), gt.width(), gt.height());
}

double confidence_label(const Box& pred, const Box& gt, bool use_dynamic_anchor) {
  if (!use_dynamic_anchor) return iou(pred, gt);
  return iou(dynamic_anchor(pred, gt), gt);
}

double bce_objectness(double prediction, double label) {
  if (!(prediction > 0.0 && prediction < 1.0)) {
    throw std::domain_error("bce_objectness: prediction must lie strictly inside (0, 1)");
  }
  if (!(label >= 0.0 && label <= 1.0)) {
    throw std::domain_error("bce_objectness: label must lie in [0, 1]");
  }
  return -(label * std::log(prediction) + (1.0 - label) * std::log(1.0 - prediction));
}

Assignment make_assignment(const Box& pred, const GroundTruthSet& gts, int matched,
                           bool use_dynamic_anchor) {
  Assignment a;
  a.pred = pred;
  a.gt_index = matched;
  a.second_gt_index = select_second_gt(pred, gts, matched);
  a.confidence_label = confidence_label(pred, gts[static_cast<std::size_t>(matched)],
                                        use_dynamic_anchor);
  return a;
}

}  // namespace boxloss
