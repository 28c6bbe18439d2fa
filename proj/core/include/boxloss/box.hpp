#pragma once

namespace boxloss {

/// Axis-aligned rectangle in corner form. (x1, y1) is the min corner,
/// (x2, y2) the max corner; coordinates are unitless image coordinates.
/// Construction rejects non-finite coordinates and negative extents.
/// Zero width or height is allowed (a degenerate box with area 0).
struct Box {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  Box() = default;
  Box(double x1, double y1, double x2, double y2);

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x1 + x2); }
  double center_y() const { return 0.5 * (y1 + y2); }
  bool degenerate() const { return width() == 0.0 || height() == 0.0; }

  Box translated(double dx, double dy) const { return {x1 + dx, y1 + dy, x2 + dx, y2 + dy}; }

  friend bool operator==(const Box&, const Box&) = default;
};

/// Box from center point and dimensions (w, h >= 0).
Box box_from_center(double cx, double cy, double w, double h);

/// True when `inner` lies entirely within `outer` (boundaries included).
bool contains(const Box& outer, const Box& inner);

/// Smallest box covering both inputs.
Box enclosing_box(const Box& a, const Box& b);

/// Derived quantities between a predicted box and a ground-truth box.
/// Intersection extents are clamped at zero per axis, so disjoint boxes
/// report iw = ih = 0 rather than negative spans.
struct OverlapGeometry {
  double area_pred = 0.0;          ///< area of the predicted box
  double area_gt = 0.0;            ///< area of the ground-truth box
  double iw = 0.0;                 ///< overlap width, >= 0
  double ih = 0.0;                 ///< overlap height, >= 0
  double cw = 0.0;                 ///< enclosing-box width
  double ch = 0.0;                 ///< enclosing-box height
  double enclosing_area = 0.0;     ///< cw * ch
  double center_dist_sq = 0.0;     ///< squared distance between box centers
  double enclosing_diag_sq = 0.0;  ///< cw^2 + ch^2
  double iou = 0.0;                ///< intersection over union, in [0, 1]
};

OverlapGeometry overlap_geometry(const Box& pred, const Box& gt);

/// Intersection over union. Symmetric; 0 when both boxes are degenerate.
double iou(const Box& a, const Box& b);

}  // namespace boxloss
