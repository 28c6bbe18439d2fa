#include "boxloss/losses.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace boxloss {

namespace {

using Grad4 = std::array<double, 4>;

Grad4 operator+(const Grad4& a, const Grad4& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
}

Grad4 operator-(const Grad4& a, const Grad4& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]};
}

Grad4 operator*(double s, const Grad4& a) { return {s * a[0], s * a[1], s * a[2], s * a[3]}; }

// Branch weight of d max(p, q)/dp. Exact coordinate ties average both
// branches, which makes identical boxes a stationary point of every loss.
double hi_weight(double p, double q) { return p > q ? 1.0 : (p == q ? 0.5 : 0.0); }
double lo_weight(double p, double q) { return p < q ? 1.0 : (p == q ? 0.5 : 0.0); }

// Overlap quantities between pred and other plus their derivatives with
// respect to pred's coordinates (x1, y1, x2, y2).
struct PairGrad {
  double area = 0.0;  // pred area
  double iw = 0.0, ih = 0.0;
  double inter = 0.0, uni = 0.0;
  double cw = 0.0, ch = 0.0;
  double iou = 0.0;
  Grad4 d_area{}, d_iw{}, d_ih{}, d_inter{}, d_uni{}, d_iou{}, d_cw{}, d_ch{};
};

PairGrad pair_grad(const Box& pred, const Box& other) {
  PairGrad p;
  const double w = pred.width();
  const double h = pred.height();
  p.area = pred.area();
  p.d_area = {-h, -w, h, w};

  const double iw_raw = std::min(pred.x2, other.x2) - std::max(pred.x1, other.x1);
  const double ih_raw = std::min(pred.y2, other.y2) - std::max(pred.y1, other.y1);
  p.iw = std::max(0.0, iw_raw);
  p.ih = std::max(0.0, ih_raw);
  // The zero clamp keeps the overlapping branch at ties, so boxes touching
  // along an edge still receive a pull; strictly disjoint axes go flat.
  if (iw_raw >= 0.0) {
    p.d_iw = {-hi_weight(pred.x1, other.x1), 0.0, lo_weight(pred.x2, other.x2), 0.0};
  }
  if (ih_raw >= 0.0) {
    p.d_ih = {0.0, -hi_weight(pred.y1, other.y1), 0.0, lo_weight(pred.y2, other.y2)};
  }

  p.inter = p.iw * p.ih;
  p.d_inter = p.ih * p.d_iw + p.iw * p.d_ih;
  p.uni = p.area + other.area() - p.inter;
  p.d_uni = p.d_area - p.d_inter;

  if (p.uni > 0.0) {
    p.iou = p.inter / p.uni;
    const double inv_u2 = 1.0 / (p.uni * p.uni);
    p.d_iou = inv_u2 * (p.uni * p.d_inter - p.inter * p.d_uni);
  }

  p.cw = std::max(pred.x2, other.x2) - std::min(pred.x1, other.x1);
  p.ch = std::max(pred.y2, other.y2) - std::min(pred.y1, other.y1);
  p.d_cw = {-lo_weight(pred.x1, other.x1), 0.0, hi_weight(pred.x2, other.x2), 0.0};
  p.d_ch = {0.0, -lo_weight(pred.y1, other.y1), 0.0, hi_weight(pred.y2, other.y2)};
  return p;
}

LossEval base_loss(LossKind kind, const Box& pred, const Box& gt) {
  switch (kind) {
    case LossKind::Iou:
      return iou_loss(pred, gt);
    case LossKind::DecIou:
      return deciou_loss(pred, gt);
    default:
      throw std::invalid_argument("push_loss: kind must be pushiou or pushdeciou");
  }
}

}  // namespace

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::Iou:
      return "iou";
    case LossKind::Giou:
      return "giou";
    case LossKind::Diou:
      return "diou";
    case LossKind::DecIou:
      return "deciou";
    case LossKind::PushIou:
      return "pushiou";
    case LossKind::PushDecIou:
      return "pushdeciou";
  }
  return "?";
}

std::optional<LossKind> parse_loss_kind(std::string_view name) {
  std::string lower(name);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (LossKind k : kAllLossKinds) {
    if (lower == to_string(k)) return k;
  }
  return std::nullopt;
}

bool is_push_kind(LossKind kind) {
  return kind == LossKind::PushIou || kind == LossKind::PushDecIou;
}

LossEval iou_loss(const Box& pred, const Box& gt) {
  const PairGrad p = pair_grad(pred, gt);
  return {1.0 - p.iou, -1.0 * p.d_iou};
}

LossEval giou_loss(const Box& pred, const Box& gt) {
  if (pred.area() == 0.0 && gt.area() == 0.0) {
    throw std::domain_error("giou_loss: both boxes degenerate, enclosing penalty undefined");
  }
  const PairGrad p = pair_grad(pred, gt);
  const double ac = p.cw * p.ch;
  const Grad4 d_ac = p.ch * p.d_cw + p.cw * p.d_ch;
  // d[(Ac - U)/Ac] = (U * dAc - Ac * dU) / Ac^2
  const double giou = p.iou - (ac - p.uni) / ac;
  const double inv_ac2 = 1.0 / (ac * ac);
  const Grad4 d_giou = p.d_iou + inv_ac2 * (ac * p.d_uni - p.uni * d_ac);
  return {1.0 - giou, -1.0 * d_giou};
}

LossEval diou_loss(const Box& pred, const Box& gt) {
  const PairGrad p = pair_grad(pred, gt);
  const double dx = pred.center_x() - gt.center_x();
  const double dy = pred.center_y() - gt.center_y();
  const double d2 = dx * dx + dy * dy;
  const double c2 = p.cw * p.cw + p.ch * p.ch;
  double penalty = 0.0;
  Grad4 d_penalty{};
  if (c2 > 0.0) {
    penalty = d2 / c2;
    // d(bx)/dx1 = d(bx)/dx2 = 1/2, so d(d^2)/dx = (bx - gx); same for y.
    const Grad4 d_d2 = {dx, dy, dx, dy};
    const Grad4 d_c2 = 2.0 * p.cw * p.d_cw + 2.0 * p.ch * p.d_ch;
    d_penalty = (1.0 / (c2 * c2)) * (c2 * d_d2 - d2 * d_c2);
  }
  return {1.0 - p.iou + penalty, -1.0 * p.d_iou + d_penalty};
}

LossEval deciou_loss(const Box& pred, const Box& gt) {
  const PairGrad p = pair_grad(pred, gt);
  if (p.cw <= 0.0 || p.ch <= 0.0) {
    throw std::domain_error("deciou_loss: enclosing box degenerate on an axis");
  }
  // Per-axis penalty ((C - I)/C)^2 with derivative
  // -2 (C - I) (dI*C - I*dC) / C^3.
  const auto axis = [](double c, double i, const Grad4& dc, const Grad4& di) {
    const double value = (c - i) * (c - i) / (c * c);
    const Grad4 grad = (-2.0 * (c - i) / (c * c * c)) * (c * di - i * dc);
    return std::pair<double, Grad4>(value, grad);
  };
  const auto [pw, d_pw] = axis(p.cw, p.iw, p.d_cw, p.d_iw);
  const auto [ph, d_ph] = axis(p.ch, p.ih, p.d_ch, p.d_ih);
  return {1.0 - p.iou + pw + ph, -1.0 * p.d_iou + d_pw + d_ph};
}

LossEval push_loss(const Box& pred, const Box& gt, const std::optional<Box>& second_gt,
                   LossKind kind, const PushConfig& cfg) {
  if (kind != LossKind::PushIou && kind != LossKind::PushDecIou) {
    throw std::invalid_argument("push_loss: kind must be pushiou or pushdeciou");
  }
  if (!(std::isfinite(cfg.alpha) && cfg.alpha >= 0.0)) {
    throw std::invalid_argument("push_loss: alpha must be finite and >= 0");
  }
  const LossKind base_kind = kind == LossKind::PushIou ? LossKind::Iou : LossKind::DecIou;
  if (second_gt && *second_gt == gt) {
    throw std::domain_error("push_loss: second ground truth equals the matched ground truth");
  }
  LossEval base = base_loss(base_kind, pred, gt);
  if (!second_gt || cfg.alpha == 0.0) {
    return base;  // untouched so the reduction to the base loss is bit-exact
  }
  const PairGrad q = pair_grad(pred, *second_gt);
  base.value += cfg.alpha * q.iou;
  base.grad = base.grad + cfg.alpha * q.d_iou;
  return base;
}

LossEval eval_loss(LossKind kind, const Box& pred, const Box& gt,
                   const std::optional<Box>& second_gt, const PushConfig& cfg) {
  switch (kind) {
    case LossKind::Iou:
      return iou_loss(pred, gt);
    case LossKind::Giou:
      return giou_loss(pred, gt);
    case LossKind::Diou:
      return diou_loss(pred, gt);
    case LossKind::DecIou:
      return deciou_loss(pred, gt);
    case LossKind::PushIou:
    case LossKind::PushDecIou:
      return push_loss(pred, gt, second_gt, kind, cfg);
  }
  throw std::invalid_argument("eval_loss: unknown loss kind");
}

}  // namespace boxloss
