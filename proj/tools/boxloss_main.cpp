// boxloss: evaluate bounding-box regression losses, check their gradients
// against finite differences, and run descent/NMS experiments from scenario
// files. Exit codes: 0 success, 1 validation failure, 2 runtime failure.

#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "boxloss/assignment.hpp"
#include "boxloss/oracle.hpp"
#include "boxloss/scenario_io.hpp"
#include "boxloss/simulator.hpp"

namespace {

using namespace boxloss;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

Box parse_box_arg(const std::string& text, const std::string& flag) {
  std::vector<double> coords;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      coords.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw std::invalid_argument(flag + ": '" + item + "' is not a number");
    }
  }
  if (coords.size() != 4) {
    throw std::invalid_argument(flag + ": expected x1,y1,x2,y2");
  }
  try {
    return Box(coords[0], coords[1], coords[2], coords[3]);
  } catch (const std::exception& e) {
    throw std::invalid_argument(flag + ": " + e.what());
  }
}

LossKind parse_kind_arg(const std::string& text) {
  const auto kind = parse_loss_kind(text);
  if (!kind) throw std::invalid_argument("unknown loss kind '" + text + "'");
  return *kind;
}

int cmd_loss(const std::string& kind_text, const std::string& pred_text,
             const std::string& gt_text, const std::optional<std::string>& second_text,
             double alpha) {
  const LossKind kind = parse_kind_arg(kind_text);
  const Box pred = parse_box_arg(pred_text, "--pred");
  const Box gt = parse_box_arg(gt_text, "--gt");
  std::optional<Box> second;
  if (second_text) second = parse_box_arg(*second_text, "--second-gt");

  const LossEval eval = eval_loss(kind, pred, gt, second, PushConfig{alpha});
  std::cout << "kind = " << to_string(kind) << "\n";
  std::cout << "value = " << format_g12(eval.value) << "\n";
  std::cout << "grad = " << format_g12(eval.grad[0]) << " " << format_g12(eval.grad[1]) << " "
            << format_g12(eval.grad[2]) << " " << format_g12(eval.grad[3]) << "\n";
  return kExitOk;
}

void print_gradcheck_report(const GradCheckReport& r) {
  std::cout << "kind=" << to_string(r.kind) << " samples=" << r.samples
            << " checked=" << (r.samples - r.skipped_near_clamp)
            << " skipped_near_clamp=" << r.skipped_near_clamp << "\n";
  std::cout << "max_rel_error=" << format_g12(r.max_rel_error)
            << " max_abs_error=" << format_g12(r.max_abs_error) << "\n";
  if (r.worst_component >= 0) {
    static const char* names[4] = {"x1", "y1", "x2", "y2"};
    std::cout << "worst: pred=(" << format_g12(r.worst_pred.x1) << ","
              << format_g12(r.worst_pred.y1) << "," << format_g12(r.worst_pred.x2) << ","
              << format_g12(r.worst_pred.y2) << ") gt=(" << format_g12(r.worst_gt.x1) << ","
              << format_g12(r.worst_gt.y1) << "," << format_g12(r.worst_gt.x2) << ","
              << format_g12(r.worst_gt.y2) << ") component=" << names[r.worst_component] << "\n";
  }
  std::cout << "GRADCHECK kind=" << to_string(r.kind) << " max_rel=" << format_g12(r.max_rel_error)
            << " pass=" << (r.pass ? "true" : "false") << "\n";
}

int cmd_gradcheck(const std::string& kind_text, int samples, std::uint64_t seed,
                  double tolerance) {
  std::vector<LossKind> kinds;
  if (kind_text == "all") {
    kinds.assign(kAllLossKinds.begin(), kAllLossKinds.end());
  } else {
    kinds.push_back(parse_kind_arg(kind_text));
  }
  bool all_pass = true;
  for (const LossKind kind : kinds) {
    const GradCheckReport report = grad_check_suite(kind, samples, seed, tolerance);
    print_gradcheck_report(report);
    all_pass = all_pass && report.pass;
  }
  return all_pass ? kExitOk : kExitValidation;
}

int cmd_simulate(const std::string& scenario_path, const std::string& output_path) {
  const Scenario scenario = load_scenario(scenario_path);
  const DescentResult result = run_descent(scenario);

  {
    std::ofstream out(output_path);
    if (!out) {
      throw std::runtime_error("cannot open output file '" + output_path + "'");
    }
    write_trace_csv(out, result.rows);
    if (!out) {
      throw std::runtime_error("failed while writing '" + output_path + "'");
    }
  }

  const int num_preds = static_cast<int>(scenario.initial_preds.size());
  double mean_iou = 0.0;
  double mean_shape = 0.0;
  std::vector<Detection> finals;
  for (auto it = result.rows.end() - num_preds; it != result.rows.end(); ++it) {
    mean_iou += it->iou_to_gt;
    mean_shape += it->shape_error;
    finals.push_back({it->box, it->confidence_label, it->pred_index});
  }
  mean_iou /= num_preds;
  mean_shape /= num_preds;

  std::cout << "scenario=" << scenario.name << " preds=" << num_preds
            << " steps=" << scenario.steps << " corner_swaps=" << result.corner_swaps << "\n";
  std::cout << "final: mean_iou_gt=" << format_g12(mean_iou)
            << " mean_shape_error=" << format_g12(mean_shape) << "\n";
  if (scenario.nms_threshold) {
    const std::vector<Detection> kept = greedy_nms(finals, *scenario.nms_threshold);
    std::cout << "nms: threshold=" << format_g12(*scenario.nms_threshold)
              << " kept=" << kept.size() << " of " << finals.size() << "\n";
  }
  std::cout << "wrote " << output_path << "\n";
  return kExitOk;
}

int cmd_nms_demo(double overlap, const std::string& losses_text, int trials, double alpha,
                 std::uint64_t seed) {
  const auto comma = losses_text.find(',');
  if (comma == std::string::npos) {
    throw std::invalid_argument("--losses: expected two comma-separated loss kinds");
  }
  const LossKind loss_a = parse_kind_arg(losses_text.substr(0, comma));
  const LossKind loss_b = parse_kind_arg(losses_text.substr(comma + 1));

  const OcclusionRecallSummary s =
      occlusion_recall_experiment(overlap, loss_a, loss_b, trials, PushConfig{alpha}, seed);

  std::cout << "overlap=" << format_g12(overlap) << " achieved=" << format_g12(s.gt_pair_iou)
            << " trials=" << s.trials << " alpha=" << format_g12(alpha) << " seed=" << seed
            << "\n";
  std::cout << "loss mean_recall\n";
  std::cout << to_string(s.loss_a) << " " << format_g12(s.mean_recall_a) << "\n";
  std::cout << to_string(s.loss_b) << " " << format_g12(s.mean_recall_b) << "\n";
  std::cout << "diff(" << to_string(s.loss_b) << "-" << to_string(s.loss_a)
            << ") = " << format_g12(s.mean_recall_b - s.mean_recall_a) << " wins=" << s.wins_b
            << " losses=" << s.losses_b << " ties=" << s.ties << "\n";
  std::cout << "mean_iou_second: " << to_string(s.loss_a) << "="
            << format_g12(s.mean_iou_second_a) << " " << to_string(s.loss_b) << "="
            << format_g12(s.mean_iou_second_b) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bounding-box regression losses, gradient checks, and descent/NMS experiments"};
  app.require_subcommand(1);

  // loss
  std::string loss_kind;
  std::string loss_pred;
  std::string loss_gt;
  std::string loss_second;
  double loss_alpha = 0.1;
  CLI::App* loss_cmd = app.add_subcommand("loss", "evaluate a loss value and gradient");
  loss_cmd->add_option("--kind", loss_kind, "loss kind")->required();
  loss_cmd->add_option("--pred", loss_pred, "predicted box x1,y1,x2,y2")->required();
  loss_cmd->add_option("--gt", loss_gt, "ground-truth box x1,y1,x2,y2")->required();
  loss_cmd->add_option("--second-gt", loss_second, "second ground-truth box (push kinds)");
  loss_cmd->add_option("--alpha", loss_alpha, "push term weight (default 0.1)");

  // gradcheck
  std::string gc_kind;
  int gc_samples = 10000;
  std::uint64_t gc_seed = 20240901;
  double gc_tolerance = 1e-4;
  CLI::App* gc_cmd = app.add_subcommand("gradcheck", "compare analytic gradients against "
                                                     "central finite differences");
  gc_cmd->add_option("--kind", gc_kind, "loss kind, or 'all'")->required();
  gc_cmd->add_option("--samples", gc_samples, "configurations to sample (default 10000)");
  gc_cmd->add_option("--seed", gc_seed, "RNG seed (default 20240901)");
  gc_cmd->add_option("--tolerance", gc_tolerance, "max relative error (default 1e-4)");

  // simulate
  std::string sim_scenario;
  std::string sim_output;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "run a scenario file and write a CSV trace");
  sim_cmd->add_option("--scenario", sim_scenario, "scenario JSON file")->required();
  sim_cmd->add_option("--output", sim_output, "output CSV path")->required();

  // nms-demo
  double demo_overlap = 0.55;
  std::string demo_losses;
  int demo_trials = 200;
  double demo_alpha = 0.1;
  std::uint64_t demo_seed = 7;
  CLI::App* demo_cmd = app.add_subcommand("nms-demo", "paired occlusion recall experiment");
  demo_cmd->add_option("--overlap", demo_overlap, "ground-truth pair IoU in (0,1)")->required();
  demo_cmd->add_option("--losses", demo_losses, "pair of loss kinds, e.g. iou,pushiou")
      ->required();
  demo_cmd->add_option("--trials", demo_trials, "number of trials (default 200)");
  demo_cmd->add_option("--alpha", demo_alpha, "push term weight (default 0.1)");
  demo_cmd->add_option("--seed", demo_seed, "RNG seed (default 7)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (loss_cmd->parsed()) {
      std::optional<std::string> second;
      if (!loss_second.empty()) second = loss_second;
      return cmd_loss(loss_kind, loss_pred, loss_gt, second, loss_alpha);
    }
    if (gc_cmd->parsed()) {
      return cmd_gradcheck(gc_kind, gc_samples, gc_seed, gc_tolerance);
    }
    if (sim_cmd->parsed()) {
      return cmd_simulate(sim_scenario, sim_output);
    }
    if (demo_cmd->parsed()) {
      return cmd_nms_demo(demo_overlap, demo_losses, demo_trials, demo_alpha, demo_seed);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}
