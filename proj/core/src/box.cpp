#include "boxloss/box.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace boxloss {

Box::Box(double x1_, double y1_, double x2_, double y2_) : x1(x1_), y1(y1_), x2(x2_), y2(y2_) {
  if (!(std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2))) {
    throw std::invalid_argument("Box: coordinates must be finite");
  }
  if (x2 < x1 || y2 < y1) {
    std::ostringstream msg;
    msg << "Box: negative extent (" << x1 << "," << y1 << "," << x2 << "," << y2 << ")";
    throw std::invalid_argument(msg.str());
  }
}

Box box_from_center(double cx, double cy, double w, double h) {
  return {cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
}

bool contains(const Box& outer, const Box& inner) {
  return outer.x1 <= inner.x1 && outer.y1 <= inner.y1 && outer.x2 >= inner.x2 &&
         outer.y2 >= inner.y2;
}

Box enclosing_box(const Box& a, const Box& b) {
  return {std::min(a.x1, b.x1), std::min(a.y1, b.y1), std::max(a.x2, b.x2),
          std::max(a.y2, b.y2)};
}

OverlapGeometry overlap_geometry(const Box& pred, const Box& gt) {
  OverlapGeometry g;
  g.area_pred = pred.area();
  g.area_gt = gt.area();
  g.iw = std::max(0.0, std::min(pred.x2, gt.x2) - std::max(pred.x1, gt.x1));
  g.ih = std::max(0.0, std::min(pred.y2, gt.y2) - std::max(pred.y1, gt.y1));
  g.cw = std::max(pred.x2, gt.x2) - std::min(pred.x1, gt.x1);
  g.ch = std::max(pred.y2, gt.y2) - std::min(pred.y1, gt.y1);
  g.enclosing_area = g.cw * g.ch;
  const double dx = pred.center_x() - gt.center_x();
  const double dy = pred.center_y() - gt.center_y();
  g.center_dist_sq = dx * dx + dy * dy;
  g.enclosing_diag_sq = g.cw * g.cw + g.ch * g.ch;
  const double inter = g.iw * g.ih;
  const double uni = g.area_pred + g.area_gt - inter;
  g.iou = uni > 0.0 ? inter / uni : 0.0;
  return g;
}

double iou(const Box& a, const Box& b) {
  const double iw = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const double ih = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

}  // namespace boxloss
