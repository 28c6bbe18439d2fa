#include "boxloss/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "boxloss/rng.hpp"

namespace boxloss {

namespace {

// Occlusion-experiment protocol. The short budget keeps the comparison in
// the approach phase of the descent, where the push term's displacement is
// visible; at full convergence both losses share the same fixed point.
constexpr double kSceneSide = 1.0;
constexpr double kJitterFrac = 0.25;       // per-corner jitter, fraction of gt side
constexpr int kOcclusionSteps = 25;
constexpr double kOcclusionLearningRate = 0.01;
constexpr double kNmsThreshold = 0.5;
constexpr double kMatchThreshold = 0.5;

int thread_cap() {
  if (const char* env = std::getenv("BOXLOSS_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

// Runs body(0..n-1), possibly across threads. Each index owns its output
// slot, so the aggregate is independent of execution order.
void for_each_trial(int n, const std::function<void(int)>& body) {
  const int cap = std::min(thread_cap(), n);
  if (cap <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(cap));
  for (int w = 0; w < cap; ++w) {
    workers.emplace_back([&, w] {
      for (int i = w; i < n; i += cap) body(i);
    });
  }
  for (auto& t : workers) t.join();
}

Box jittered(const Box& base, double amplitude, Rng& rng) {
  double c[4] = {base.x1 + rng.uniform(-amplitude, amplitude),
                 base.y1 + rng.uniform(-amplitude, amplitude),
                 base.x2 + rng.uniform(-amplitude, amplitude),
                 base.y2 + rng.uniform(-amplitude, amplitude)};
  if (c[2] < c[0]) std::swap(c[0], c[2]);
  if (c[3] < c[1]) std::swap(c[1], c[3]);
  return {c[0], c[1], c[2], c[3]};
}

struct DescentState {
  Box box;
  int corner_swaps = 0;
};

// One plain gradient step with corner repair.
void descend_step(DescentState& st, const Box& gt, const GroundTruthSet& gts, int match,
                  LossKind kind, const PushConfig& cfg, double lr) {
  const std::optional<int> second = select_second_gt(st.box, gts, match);
  const std::optional<Box> second_box =
      second ? std::optional<Box>(gts[static_cast<std::size_t>(*second)]) : std::nullopt;
  const LossEval eval = eval_loss(kind, st.box, gt, second_box, cfg);
  double c[4] = {st.box.x1 - lr * eval.grad[0], st.box.y1 - lr * eval.grad[1],
                 st.box.x2 - lr * eval.grad[2], st.box.y2 - lr * eval.grad[3]};
  bool swapped = false;
  if (c[2] < c[0]) {
    std::swap(c[0], c[2]);
    swapped = true;
  }
  if (c[3] < c[1]) {
    std::swap(c[1], c[3]);
    swapped = true;
  }
  if (swapped) ++st.corner_swaps;
  st.box = Box(c[0], c[1], c[2], c[3]);
}

double recall_after_nms(const std::vector<Box>& finals, const std::vector<double>& scores,
                        const GroundTruthSet& gts) {
  std::vector<Detection> dets;
  dets.reserve(finals.size());
  for (std::size_t i = 0; i < finals.size(); ++i) {
    dets.push_back({finals[i], scores[i], static_cast<int>(i)});
  }
  const std::vector<Detection> kept = greedy_nms(std::move(dets), kNmsThreshold);
  // One-to-one greedy matching in keep order: each survivor claims the
  // unmatched gt it overlaps most, if at least kMatchThreshold.
  std::set<std::size_t> matched;
  for (const Detection& d : kept) {
    double best = kMatchThreshold;
    int best_gt = -1;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (matched.count(g)) continue;
      const double v = iou(d.box, gts[g]);
      if (v >= best) {
        best = v;
        best_gt = static_cast<int>(g);
      }
    }
    if (best_gt >= 0) matched.insert(static_cast<std::size_t>(best_gt));
  }
  return gts.empty() ? 0.0 : static_cast<double>(matched.size()) / static_cast<double>(gts.size());
}

struct OcclusionTrial {
  double recall_a = 0.0;
  double recall_b = 0.0;
  double iou_second_a = 0.0;
  double iou_second_b = 0.0;
};

}  // namespace

void validate(const Scenario& s) {
  const auto fail = [&](const std::string& msg) {
    throw std::invalid_argument("scenario '" + s.name + "': " + msg);
  };
  if (s.gts.empty()) fail("gts must contain at least one box");
  if (s.initial_preds.empty()) fail("initial_preds must contain at least one box");
  if (s.matches.size() != s.initial_preds.size()) {
    std::ostringstream msg;
    msg << "matches size (" << s.matches.size() << ") != initial_preds size ("
        << s.initial_preds.size() << ")";
    fail(msg.str());
  }
  for (std::size_t i = 0; i < s.matches.size(); ++i) {
    if (s.matches[i] < 0 || static_cast<std::size_t>(s.matches[i]) >= s.gts.size()) {
      std::ostringstream msg;
      msg << "matches[" << i << "] = " << s.matches[i] << " out of range";
      fail(msg.str());
    }
  }
  if (s.steps <= 0) fail("steps must be positive");
  if (!(s.learning_rate > 0.0) || !std::isfinite(s.learning_rate)) {
    fail("learning_rate must be positive and finite");
  }
  if (!(s.push_alpha >= 0.0) || !std::isfinite(s.push_alpha)) {
    fail("push_alpha must be >= 0 and finite");
  }
  if (s.nms_threshold && !(*s.nms_threshold >= 0.0 && *s.nms_threshold <= 1.0)) {
    fail("nms_threshold must lie in [0, 1]");
  }
}

double shape_error(const Box& pred, const Box& gt) {
  return std::abs(std::log(pred.width() / gt.width())) +
         std::abs(std::log(pred.height() / gt.height()));
}

DescentResult run_descent(const Scenario& s) {
  validate(s);
  const PushConfig cfg{s.push_alpha};
  const int num_preds = static_cast<int>(s.initial_preds.size());

  DescentResult result;
  result.rows.reserve(static_cast<std::size_t>(s.steps + 1) * num_preds);

  std::vector<DescentState> states(static_cast<std::size_t>(num_preds));
  std::vector<double> prev_loss(static_cast<std::size_t>(num_preds), 0.0);
  for (int p = 0; p < num_preds; ++p) {
    states[static_cast<std::size_t>(p)].box = s.initial_preds[static_cast<std::size_t>(p)];
  }

  for (int step = 0; step <= s.steps; ++step) {
    for (int p = 0; p < num_preds; ++p) {
      DescentState& st = states[static_cast<std::size_t>(p)];
      const int match = s.matches[static_cast<std::size_t>(p)];
      const Box& gt = s.gts[static_cast<std::size_t>(match)];
      try {
        const std::optional<int> second = select_second_gt(st.box, s.gts, match);
        const std::optional<Box> second_box =
            second ? std::optional<Box>(s.gts[static_cast<std::size_t>(*second)]) : std::nullopt;
        const LossEval eval = eval_loss(s.loss, st.box, gt, second_box, cfg);

        TraceRow row;
        row.step = step;
        row.pred_index = p;
        row.box = st.box;
        row.loss_value = eval.value;
        row.iou_to_gt = iou(st.box, gt);
        row.iou_to_second_gt = second_box ? iou(st.box, *second_box) : 0.0;
        row.shape_error = shape_error(st.box, gt);
        row.confidence_label = confidence_label(st.box, gt, s.use_dynamic_anchor);
        result.rows.push_back(row);

        if (step > 0) {
          result.max_step_increase = std::max(
              result.max_step_increase, eval.value - prev_loss[static_cast<std::size_t>(p)]);
        }
        prev_loss[static_cast<std::size_t>(p)] = eval.value;

        if (step < s.steps) {
          double c[4] = {st.box.x1 - s.learning_rate * eval.grad[0],
                         st.box.y1 - s.learning_rate * eval.grad[1],
                         st.box.x2 - s.learning_rate * eval.grad[2],
                         st.box.y2 - s.learning_rate * eval.grad[3]};
          bool swapped = false;
          if (c[2] < c[0]) {
            std::swap(c[0], c[2]);
            swapped = true;
          }
          if (c[3] < c[1]) {
            std::swap(c[1], c[3]);
            swapped = true;
          }
          if (swapped) ++result.corner_swaps;
          st.box = Box(c[0], c[1], c[2], c[3]);
        }
      } catch (const std::exception& e) {
        std::ostringstream msg;
        msg << "run_descent: scenario '" << s.name << "' aborted at step " << step << ", pred "
            << p << ": " << e.what();
        throw std::runtime_error(msg.str());
      }
    }
  }
  return result;
}

std::vector<Detection> greedy_nms(std::vector<Detection> dets, double iou_threshold) {
  if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0)) {
    throw std::invalid_argument("greedy_nms: threshold must lie in [0, 1]");
  }
  std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.index < b.index;
  });
  std::vector<Detection> kept;
  for (const Detection& d : dets) {
    bool suppressed = false;
    for (const Detection& k : kept) {
      if (iou(d.box, k.box) > iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(d);
  }
  return kept;
}

std::pair<Box, Box> two_gt_scene(double target_iou, double side) {
  if (!(target_iou > 0.0 && target_iou < 1.0)) {
    throw std::invalid_argument("two_gt_scene: requested overlap must lie in (0, 1)");
  }
  if (!(side > 0.0)) throw std::invalid_argument("two_gt_scene: side must be positive");
  // Two squares of side s offset horizontally by d overlap with
  // IoU = (s - d) / (s + d); solve for d.
  const double offset = side * (1.0 - target_iou) / (1.0 + target_iou);
  return {Box(0.0, 0.0, side, side), Box(offset, 0.0, offset + side, side)};
}

OcclusionRecallSummary occlusion_recall_experiment(double gt_overlap_iou, LossKind loss_a,
                                                   LossKind loss_b, int trials,
                                                   const PushConfig& cfg, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("occlusion_recall_experiment: trials must be >= 1");
  const auto [g1, g2] = two_gt_scene(gt_overlap_iou, kSceneSide);
  GroundTruthSet gts;
  gts.boxes = {g1, g2};

  OcclusionRecallSummary summary;
  summary.loss_a = loss_a;
  summary.loss_b = loss_b;
  summary.trials = trials;
  summary.gt_pair_iou = iou(g1, g2);

  std::vector<OcclusionTrial> results(static_cast<std::size_t>(trials));
  for_each_trial(trials, [&](int t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::vector<Box> inits;
    inits.reserve(gts.size());
    for (std::size_t i = 0; i < gts.size(); ++i) {
      inits.push_back(jittered(gts[i], kJitterFrac * kSceneSide, rng));
    }

    const auto run_arm = [&](LossKind kind, double& recall_out, double& iou_second_out) {
      std::vector<Box> finals;
      std::vector<double> scores;
      double iou_second_sum = 0.0;
      for (std::size_t i = 0; i < gts.size(); ++i) {
        DescentState st{inits[i], 0};
        for (int step = 0; step < kOcclusionSteps; ++step) {
          descend_step(st, gts[i], gts, static_cast<int>(i), kind, cfg,
                       kOcclusionLearningRate);
        }
        finals.push_back(st.box);
        scores.push_back(confidence_label(st.box, gts[i], false));
        iou_second_sum += iou(st.box, gts[1 - i]);
      }
      recall_out = recall_after_nms(finals, scores, gts);
      iou_second_out = iou_second_sum / static_cast<double>(gts.size());
    };

    OcclusionTrial& out = results[static_cast<std::size_t>(t)];
    run_arm(loss_a, out.recall_a, out.iou_second_a);
    run_arm(loss_b, out.recall_b, out.iou_second_b);
  });

  for (const OcclusionTrial& r : results) {
    summary.mean_recall_a += r.recall_a;
    summary.mean_recall_b += r.recall_b;
    summary.mean_iou_second_a += r.iou_second_a;
    summary.mean_iou_second_b += r.iou_second_b;
    if (r.recall_b > r.recall_a) {
      ++summary.wins_b;
    } else if (r.recall_b < r.recall_a) {
      ++summary.losses_b;
    } else {
      ++summary.ties;
    }
  }
  summary.mean_recall_a /= trials;
  summary.mean_recall_b /= trials;
  summary.mean_iou_second_a /= trials;
  summary.mean_iou_second_b /= trials;
  return summary;
}

LabelAccuracySummary label_accuracy_experiment(int trials, std::uint64_t seed,
                                               double max_center_offset_frac) {
  if (trials < 1) throw std::invalid_argument("label_accuracy_experiment: trials must be >= 1");
  if (!(max_center_offset_frac >= 0.0)) {
    throw std::invalid_argument("label_accuracy_experiment: offset fraction must be >= 0");
  }

  struct TrialOut {
    double plain = 0.0;
    double dynamic = 0.0;
    bool center_aligned_mismatched = false;
  };
  std::vector<TrialOut> results(static_cast<std::size_t>(trials));

  for_each_trial(trials, [&](int t) {
    Rng rng(derive_seed(seed, 0x6c6162656cULL + static_cast<std::uint64_t>(t)));
    const double gw = rng.uniform(1.0, 4.0);
    const double gh = rng.uniform(1.0, 4.0);
    const double gcx = rng.uniform(-2.0, 2.0);
    const double gcy = rng.uniform(-2.0, 2.0);
    const Box gt = box_from_center(gcx, gcy, gw, gh);

    // Rotate through three pair classes: centers aligned with mismatched
    // dims, matching dims with an offset, and both perturbed.
    const int mode = t % 3;
    double pw = gw;
    double ph = gh;
    if (mode != 1) {
      do {
        pw = gw * rng.uniform(0.5, 2.0);
        ph = gh * rng.uniform(0.5, 2.0);
      } while (std::abs(std::log(pw / gw)) + std::abs(std::log(ph / gh)) < 0.1);
    }
    double pcx = gcx;
    double pcy = gcy;
    if (mode != 0) {
      const double diag = std::sqrt(gw * gw + gh * gh);
      const double radius = rng.uniform(0.0, max_center_offset_frac * diag);
      const double angle = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
      pcx += radius * std::cos(angle);
      pcy += radius * std::sin(angle);
    }
    const Box pred = box_from_center(pcx, pcy, pw, ph);

    TrialOut& out = results[static_cast<std::size_t>(t)];
    out.plain = confidence_label(pred, gt, false);
    out.dynamic = confidence_label(pred, gt, true);
    out.center_aligned_mismatched = mode == 0;
  });

  LabelAccuracySummary summary;
  summary.trials = trials;
  int exceed = 0;
  for (const TrialOut& r : results) {
    summary.mean_plain += r.plain;
    summary.mean_dynamic += r.dynamic;
    if (r.dynamic > r.plain) ++exceed;
    if (r.center_aligned_mismatched) {
      ++summary.center_aligned_mismatched;
      if (r.dynamic >= r.plain) ++summary.center_aligned_dominated;
    }
  }
  summary.mean_plain /= trials;
  summary.mean_dynamic /= trials;
  summary.exceed_fraction = static_cast<double>(exceed) / static_cast<double>(trials);
  return summary;
}

}  // namespace boxloss
