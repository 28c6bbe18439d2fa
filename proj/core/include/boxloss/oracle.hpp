#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "boxloss/box.hpp"
#include "boxloss/losses.hpp"

namespace boxloss {

/// Outcome of grad_check_suite for one loss kind.
struct GradCheckReport {
  LossKind kind = LossKind::Iou;
  int samples = 0;             ///< configurations generated
  int skipped_near_clamp = 0;  ///< configurations too close to a clamp switch
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  Box worst_pred;
  Box worst_gt;
  std::optional<Box> worst_second_gt;
  int worst_component = -1;  ///< 0..3 for x1, y1, x2, y2
  double tolerance = 0.0;
  bool pass = false;
};

/// Central-difference gradient (L(x+h) - L(x-h)) / 2h per pred coordinate.
/// Throws when a perturbed box is invalid or the loss is undefined there,
/// naming the offending coordinate.
std::array<double, 4> fd_gradient(LossKind kind, const Box& pred, const Box& gt,
                                  const std::optional<Box>& second_gt, const PushConfig& cfg,
                                  double h = 1e-5);

/// IoU estimated by counting grid cells (pitch 1/cells_per_unit, centers at
/// (k + 0.5)/cells_per_unit on an absolute lattice) whose centers fall
/// inside each box. Exact for integer-coordinate boxes at any aligned
/// resolution. Counts are evaluated per axis in closed form, which is
/// identical to enumerating the cells.
double raster_iou(const Box& pred, const Box& gt, int cells_per_unit);

/// True when the configuration sits within `radius` of a gradient kink:
/// a coordinate tie between the boxes, a zero-crossing of the overlap
/// extent on either axis, or a near-degenerate pred side. Finite
/// differences straddling such a point are meaningless.
bool near_gradient_kink(const Box& pred, const Box& gt, double radius);

/// Samples `samples` seeded box configurations (overlapping, touching,
/// contained, disjoint), skips those near a clamp switch (counted, never
/// dropped silently), and compares the analytic gradient against the
/// central difference. Components whose magnitude stays below 1e-6
/// are held to an absolute floor of 1e-7 instead of the relative
/// tolerance. Deterministic under `seed`.
GradCheckReport grad_check_suite(LossKind kind, int samples, std::uint64_t seed,
                                 double tolerance);

}  // namespace boxloss
