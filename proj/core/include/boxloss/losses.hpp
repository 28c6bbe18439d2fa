#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "boxloss/box.hpp"

namespace boxloss {

/// The supported bounding-box regression losses.
enum class LossKind { Iou, Giou, Diou, DecIou, PushIou, PushDecIou };

constexpr std::array<LossKind, 6> kAllLossKinds = {LossKind::Iou,    LossKind::Giou,
                                                   LossKind::Diou,   LossKind::DecIou,
                                                   LossKind::PushIou, LossKind::PushDecIou};

std::string_view to_string(LossKind kind);
std::optional<LossKind> parse_loss_kind(std::string_view name);
bool is_push_kind(LossKind kind);

/// Loss value together with its analytic gradient with respect to the
/// predicted box's coordinates, ordered (d/dx1, d/dy1, d/dx2, d/dy2).
struct LossEval {
  double value = 0.0;
  std::array<double, 4> grad{0.0, 0.0, 0.0, 0.0};
};

/// Weight of the push term relative to the base regression term.
/// alpha = 0 reduces the push losses to their base losses exactly.
struct PushConfig {
  double alpha = 0.1;
};

/// L = 1 - IoU. Gradient is zero on the disjoint plateau (no overlap on
/// either axis) and at exact coincidence of the two boxes.
LossEval iou_loss(const Box& pred, const Box& gt);

/// L = 1 - GIoU, where GIoU = IoU - |C \ union| / |C| and C is the smallest
/// enclosing box. Requires at least one box with positive area.
LossEval giou_loss(const Box& pred, const Box& gt);

/// L = 1 - DIoU; DIoU = IoU - d^2 / c^2 with d the center distance and c the
/// enclosing-box diagonal. The penalty is 0 when c^2 = 0 (two identical
/// point boxes).
LossEval diou_loss(const Box& pred, const Box& gt);

/// L = 1 - DecIoU; DecIoU = IoU - (Cw - Iw)^2/Cw^2 - (Ch - Ih)^2/Ch^2.
/// Overlap extents are clamped per axis, so the loss stays continuous when
/// the boxes overlap on one axis only. Requires Cw > 0 and Ch > 0.
LossEval deciou_loss(const Box& pred, const Box& gt);

/// Push losses: base loss plus alpha * IoU(pred, second_gt). The push term
/// uses plain IoU in both variants. Without a second ground truth the
/// result is exactly the base loss. `kind` must be PushIou or PushDecIou,
/// and second_gt must differ from gt when present.
LossEval push_loss(const Box& pred, const Box& gt, const std::optional<Box>& second_gt,
                   LossKind kind, const PushConfig& cfg);

/// Uniform dispatch over all kinds. Non-push kinds ignore second_gt and cfg.
LossEval eval_loss(LossKind kind, const Box& pred, const Box& gt,
                   const std::optional<Box>& second_gt = std::nullopt,
                   const PushConfig& cfg = {});

}  // namespace boxloss
