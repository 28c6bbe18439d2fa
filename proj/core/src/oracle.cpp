#include "boxloss/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "boxloss/rng.hpp"

namespace boxloss {

namespace {

constexpr double kAbsFloor = 1e-7;       // absolute tolerance near zero
constexpr double kNearZero = 1e-6;       // components below this use the absolute floor
constexpr double kKinkRadius = 1e-3;     // clamp-proximity skip radius
constexpr const char* kCoordNames[4] = {"x1", "y1", "x2", "y2"};

long long centers_inside(double lo, double hi, int cpu) {
  // centers at (k + 0.5)/cpu with lo <= center <= hi
  const long long kmin = static_cast<long long>(std::ceil(lo * cpu - 0.5));
  const long long kmax = static_cast<long long>(std::floor(hi * cpu - 0.5));
  return std::max(0LL, kmax - kmin + 1);
}

long long raster_count(const Box& b, int cpu) {
  return centers_inside(b.x1, b.x2, cpu) * centers_inside(b.y1, b.y2, cpu);
}

struct SampleConfig {
  Box pred;
  Box gt;
  std::optional<Box> second_gt;
};

Box random_box(Rng& rng, double side_min, double side_max, double center_range) {
  const double w = rng.uniform(side_min, side_max);
  const double h = rng.uniform(side_min, side_max);
  const double cx = rng.uniform(-center_range, center_range);
  const double cy = rng.uniform(-center_range, center_range);
  return box_from_center(cx, cy, w, h);
}

Box perturbed(Rng& rng, const Box& base, double frac) {
  const double s = frac * std::min(base.width(), base.height());
  for (;;) {
    const double x1 = base.x1 + rng.uniform(-s, s);
    const double y1 = base.y1 + rng.uniform(-s, s);
    const double x2 = base.x2 + rng.uniform(-s, s);
    const double y2 = base.y2 + rng.uniform(-s, s);
    if (x2 > x1 && y2 > y1) return {x1, y1, x2, y2};
  }
}

// One configuration per class in rotation: 0 overlapping, 1 touching,
// 2 contained, 3 disjoint. Touching configurations land exactly on a clamp
// switch and are expected to be skipped (and counted) by the suite.
SampleConfig sample_config(Rng& rng, LossKind kind, int index) {
  SampleConfig c;
  c.gt = random_box(rng, 0.5, 6.0, 6.0);
  switch (index % 4) {
    case 0:
      c.pred = perturbed(rng, c.gt, 0.5);
      break;
    case 1: {
      const double dy = rng.uniform(-0.2, 0.2) * c.gt.height();
      c.pred = c.gt.translated(c.gt.width(), dy);
      break;
    }
    case 2: {
      const double s = rng.uniform(0.2, 0.8);
      const double w = c.gt.width() * s;
      const double h = c.gt.height() * s;
      const double mx = 0.5 * (c.gt.width() - w);
      const double my = 0.5 * (c.gt.height() - h);
      const double cx = c.gt.center_x() + rng.uniform(-0.8, 0.8) * mx;
      const double cy = c.gt.center_y() + rng.uniform(-0.8, 0.8) * my;
      c.pred = box_from_center(cx, cy, w, h);
      break;
    }
    default: {
      const Box b = random_box(rng, 0.5, 6.0, 6.0);
      const double gap = rng.uniform(0.05, 4.0);
      c.pred = b.translated(c.gt.x2 - b.x1 + gap, c.gt.y2 - b.y1 + gap);
      break;
    }
  }
  if (is_push_kind(kind)) {
    Box second = perturbed(rng, c.pred, 0.4);
    while (second == c.gt) second = perturbed(rng, c.pred, 0.4);
    c.second_gt = second;
  }
  return c;
}

}  // namespace

std::array<double, 4> fd_gradient(LossKind kind, const Box& pred, const Box& gt,
                                  const std::optional<Box>& second_gt, const PushConfig& cfg,
                                  double h) {
  if (!(h > 0.0)) throw std::invalid_argument("fd_gradient: h must be positive");
  std::array<double, 4> out{};
  for (int i = 0; i < 4; ++i) {
    double plus[4] = {pred.x1, pred.y1, pred.x2, pred.y2};
    double minus[4] = {pred.x1, pred.y1, pred.x2, pred.y2};
    plus[i] += h;
    minus[i] -= h;
    try {
      const Box bp(plus[0], plus[1], plus[2], plus[3]);
      const Box bm(minus[0], minus[1], minus[2], minus[3]);
      const double vp = eval_loss(kind, bp, gt, second_gt, cfg).value;
      const double vm = eval_loss(kind, bm, gt, second_gt, cfg).value;
      out[i] = (vp - vm) / (2.0 * h);
    } catch (const std::exception& e) {
      throw std::domain_error(std::string("fd_gradient: loss undefined at perturbed ") +
                              kCoordNames[i] + ": " + e.what());
    }
  }
  return out;
}

double raster_iou(const Box& pred, const Box& gt, int cells_per_unit) {
  if (cells_per_unit < 1) throw std::invalid_argument("raster_iou: cells_per_unit must be >= 1");
  const long long na = raster_count(pred, cells_per_unit);
  const long long nb = raster_count(gt, cells_per_unit);
  const double ix1 = std::max(pred.x1, gt.x1);
  const double ix2 = std::min(pred.x2, gt.x2);
  const double iy1 = std::max(pred.y1, gt.y1);
  const double iy2 = std::min(pred.y2, gt.y2);
  long long ni = 0;
  if (ix2 > ix1 && iy2 > iy1) {
    ni = centers_inside(ix1, ix2, cells_per_unit) * centers_inside(iy1, iy2, cells_per_unit);
  }
  const long long uni = na + nb - ni;
  return uni > 0 ? static_cast<double>(ni) / static_cast<double>(uni) : 0.0;
}

bool near_gradient_kink(const Box& pred, const Box& gt, double radius) {
  const double iw_raw = std::min(pred.x2, gt.x2) - std::max(pred.x1, gt.x1);
  const double ih_raw = std::min(pred.y2, gt.y2) - std::max(pred.y1, gt.y1);
  return std::abs(pred.x1 - gt.x1) < radius || std::abs(pred.y1 - gt.y1) < radius ||
         std::abs(pred.x2 - gt.x2) < radius || std::abs(pred.y2 - gt.y2) < radius ||
         std::abs(iw_raw) < radius || std::abs(ih_raw) < radius || pred.width() < radius ||
         pred.height() < radius;
}

GradCheckReport grad_check_suite(LossKind kind, int samples, std::uint64_t seed,
                                 double tolerance) {
  if (samples < 1) throw std::invalid_argument("grad_check_suite: samples must be >= 1");
  GradCheckReport report;
  report.kind = kind;
  report.samples = samples;
  report.tolerance = tolerance;

  Rng rng(derive_seed(seed, 0x6f7261636c65ULL));
  const PushConfig cfg{0.25};

  for (int i = 0; i < samples; ++i) {
    const SampleConfig c = sample_config(rng, kind, i);
    bool near = near_gradient_kink(c.pred, c.gt, kKinkRadius);
    if (c.second_gt) near = near || near_gradient_kink(c.pred, *c.second_gt, kKinkRadius);
    if (near) {
      ++report.skipped_near_clamp;
      continue;
    }
    const LossEval eval = eval_loss(kind, c.pred, c.gt, c.second_gt, cfg);
    const std::array<double, 4> fd = fd_gradient(kind, c.pred, c.gt, c.second_gt, cfg);
    for (int k = 0; k < 4; ++k) {
      const double diff = std::abs(eval.grad[k] - fd[k]);
      const double mag = std::max(std::abs(eval.grad[k]), std::abs(fd[k]));
      if (mag > kNearZero) {
        const double rel = diff / mag;
        if (rel > report.max_rel_error) {
          report.max_rel_error = rel;
          report.worst_pred = c.pred;
          report.worst_gt = c.gt;
          report.worst_second_gt = c.second_gt;
          report.worst_component = k;
        }
      } else {
        report.max_abs_error = std::max(report.max_abs_error, diff);
      }
    }
  }

  report.pass = report.max_rel_error <= tolerance && report.max_abs_error <= kAbsFloor;
  return report;
}

}  // namespace boxloss
