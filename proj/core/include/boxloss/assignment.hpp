#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "boxloss/box.hpp"

namespace boxloss {

/// Ordered set of ground-truth boxes; a box's id is its index.
struct GroundTruthSet {
  std::vector<Box> boxes;

  std::size_t size() const { return boxes.size(); }
  bool empty() const { return boxes.empty(); }
  const Box& operator[](std::size_t i) const { return boxes[i]; }
};

/// Per-prediction assignment context: the matched ground truth, the second
/// ground truth used by the push term (if any), and the confidence label.
struct Assignment {
  Box pred;
  int gt_index = 0;
  std::optional<int> second_gt_index;
  double confidence_label = 0.0;
};

/// Among ground truths other than `matched`, returns the index with the
/// largest IoU against `pred`; ties break toward the lowest index. Returns
/// nullopt when no other ground truth overlaps the prediction, i.e. there
/// is nothing to push against.
std::optional<int> select_second_gt(const Box& pred, const GroundTruthSet& gts, int matched);

/// Box centered at pred's center with gt's width and height. A pure
/// function of the current prediction; callers re-evaluate it whenever the
/// prediction moves. gt must have positive area.
Box dynamic_anchor(const Box& pred, const Box& gt);

/// Confidence label for a positive sample: IoU(pred, gt), or with the
/// dynamic anchor enabled, IoU(dynamic_anchor(pred, gt), gt).
double confidence_label(const Box& pred, const Box& gt, bool use_dynamic_anchor);

/// Binary cross-entropy -[label ln p + (1 - label) ln(1 - p)].
/// prediction must lie strictly inside (0, 1); label in [0, 1].
double bce_objectness(double prediction, double label);

/// Builds the full assignment context for one prediction.
Assignment make_assignment(const Box& pred, const GroundTruthSet& gts, int matched,
                           bool use_dynamic_anchor);

}  // namespace boxloss
