#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "boxloss/assignment.hpp"
#include "boxloss/box.hpp"
#include "boxloss/losses.hpp"

namespace boxloss {

/// One gradient-descent experiment: fixed ground truths, initial
/// predictions with explicit matches, a loss, and descent parameters.
/// The seed only affects scenario generation; the descent itself is
/// deterministic.
struct Scenario {
  std::string name;
  GroundTruthSet gts;
  std::vector<Box> initial_preds;
  std::vector<int> matches;  // per-pred matched gt index
  LossKind loss = LossKind::Iou;
  double push_alpha = 0.1;
  bool use_dynamic_anchor = false;
  int steps = 0;
  double learning_rate = 0.0;
  std::optional<double> nms_threshold;
  std::uint64_t seed = 0;
};

/// Throws std::invalid_argument naming the offending field.
void validate(const Scenario& s);

/// Per-step record for one prediction. Rows are emitted for steps
/// 0..steps inclusive; step 0 is the initial state, the last row the
/// final state.
struct TraceRow {
  int step = 0;
  int pred_index = 0;
  Box box;
  double loss_value = 0.0;
  double iou_to_gt = 0.0;
  double iou_to_second_gt = 0.0;  // 0 when no second ground truth exists
  double shape_error = 0.0;
  double confidence_label = 0.0;
};

struct DescentResult {
  std::vector<TraceRow> rows;  // step-major: all preds at step 0, then step 1, ...
  int corner_swaps = 0;        // updates that inverted a box and were repaired
  double max_step_increase = 0.0;  // largest single-step loss increase observed
};

/// Plain gradient descent, box <- box - learning_rate * grad, with the
/// second ground truth re-selected every step. A step that crosses a
/// box's corners is repaired by swapping them (counted in the result).
DescentResult run_descent(const Scenario& s);

/// |ln(w/w_gt)| + |ln(h/h_gt)|; zero exactly when the dimensions agree,
/// infinite when a side has collapsed to zero.
double shape_error(const Box& pred, const Box& gt);

struct Detection {
  Box box;
  double score = 0.0;  // in [0, 1]
  int index = 0;
};

/// Standard greedy NMS: sort by score descending (ties by ascending index),
/// keep the top detection, drop the rest with IoU above the threshold
/// against it, repeat. Output preserves keep order.
std::vector<Detection> greedy_nms(std::vector<Detection> dets, double iou_threshold);

/// Two unit-aspect ground truths of the given side length whose pairwise
/// IoU equals `target_iou`; the offset is solved in closed form.
/// target_iou must lie in (0, 1).
std::pair<Box, Box> two_gt_scene(double target_iou, double side = 1.0);

struct OcclusionRecallSummary {
  LossKind loss_a = LossKind::Iou;
  LossKind loss_b = LossKind::Iou;
  int trials = 0;
  double gt_pair_iou = 0.0;     // achieved overlap of the generated pair
  double mean_recall_a = 0.0;
  double mean_recall_b = 0.0;
  int wins_b = 0;    // trials where loss_b's recall beat loss_a's
  int losses_b = 0;  // trials where it was worse
  int ties = 0;
  double mean_iou_second_a = 0.0;  // mean final IoU against the competing gt
  double mean_iou_second_b = 0.0;
};

/// For each trial: build a two-gt scene at the requested overlap, jitter
/// one prediction per gt, run the same seeded descent under each loss,
/// score final boxes by their confidence label, apply greedy NMS at 0.5,
/// and match survivors to ground truths one-to-one at IoU >= 0.5.
/// Reports mean recall per loss and the paired per-trial comparison.
OcclusionRecallSummary occlusion_recall_experiment(double gt_overlap_iou, LossKind loss_a,
                                                   LossKind loss_b, int trials,
                                                   const PushConfig& cfg, std::uint64_t seed);

struct LabelAccuracySummary {
  int trials = 0;
  double mean_plain = 0.0;
  double mean_dynamic = 0.0;
  double exceed_fraction = 0.0;  // pairs where the dynamic label is strictly larger
  int center_aligned_mismatched = 0;  // subset: centers aligned, dims mismatched
  int center_aligned_dominated = 0;   // of those, dynamic >= plain
};

/// Samples random (pred, gt) pairs whose center offset stays below
/// max_center_offset_frac of the gt diagonal and compares the confidence
/// label with and without the dynamic anchor.
LabelAccuracySummary label_accuracy_experiment(int trials, std::uint64_t seed,
                                               double max_center_offset_frac = 0.5);

}  // namespace boxloss
