#include "dgc/pipeline/cli.hpp"

#include <algorithm>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dgc/error.hpp"
#include "dgc/pipeline/commands.hpp"

namespace dgc::pipeline {

namespace {

#ifndef DGC_VERSION
#define DGC_VERSION "0.0.0"
#endif

void add_dataset_options(CLI::App& c, RunConfig& cfg) {
  c.add_option("--n", cfg.n, "number of pairs")->check(CLI::PositiveNumber);
  c.add_option("--kinds", cfg.kinds, "comma list of affine,homo,tps,pose");
  c.add_option("--strength", cfg.strength, "transformation strength in [0, 0.4]");
  c.add_option("--seed", cfg.seed, "dataset seed");
  c.add_option("--resolution", cfg.resolution, "image side in pixels")->check(CLI::PositiveNumber);
  c.add_option("--val-fraction", cfg.val_fraction, "fraction of pairs held out")
      ->check(CLI::Range(0.0, 1.0));
}

void add_model_options(CLI::App& c, RunConfig& cfg) {
  c.add_option("--levels", cfg.levels, "pyramid levels");
  c.add_flag("--matchability", cfg.matchability, "add the matchability head");
  c.add_option("--correlation", cfg.correlation, "global or local");
  c.add_option("--radius", cfg.radius, "local correlation radius");
  c.add_flag("--no-l2norm", cfg.no_l2norm, "skip L2 normalization of correlations");
  c.add_option("--parametrization", cfg.parametrization, "map or flow");
}

void add_training_options(CLI::App& c, RunConfig& cfg) {
  c.add_option("--lr", cfg.lr, "Adam learning rate");
  c.add_option("--epochs", cfg.epochs, "epochs per dataset")->check(CLI::NonNegativeNumber);
  c.add_option("--batch", cfg.batch, "mini-batch size")->check(CLI::PositiveNumber);
  c.add_option("--seed", cfg.seed, "init and shuffle seed");
  c.add_flag("--freeze-encoder", cfg.freeze_encoder, "keep encoder weights fixed");
  c.add_option("--beta", cfg.beta, "matchability loss weight");
  c.add_option("--resume", cfg.resume, "checkpoint to continue from");
}

void add_model_input(CLI::App& c, RunConfig& cfg) {
  c.add_option("--data", cfg.data, "dataset directory")->required();
  c.add_option("--checkpoint", cfg.checkpoint, "trained checkpoint");
  c.add_flag("--use-gt-map", cfg.use_gt_map, "use ground truth instead of a model");
  c.add_option("--split", cfg.split, "train, val or all");
}

int guarded(const std::string& verb, const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "dgc " << verb << ": " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "dgc " << verb << ": numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "dgc " << verb << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "dgc " << verb << ": " << e.what() << "\n";
    return 2;
  }
}

// Config-file tokens go right after the verb, ahead of the command-line
// ones, and every option keeps its last value, so explicit flags win. Keys
// the chosen verb does not know are skipped, so one file can serve all verbs.
std::vector<std::string> expand_arguments(CLI::App& app, int argc, char** argv) {
  const std::vector<std::string> user(argv + 1, argv + argc);
  std::string config_path;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < user.size(); ++i) {
    const std::string& a = user[i];
    if (a == "--config") {
      if (i + 1 >= user.size()) throw UsageError("--config needs a file");
      config_path = user[++i];
    } else if (a.rfind("--config=", 0) == 0) {
      config_path = a.substr(9);
    } else {
      rest.push_back(a);
    }
  }
  if (config_path.empty() || rest.empty()) return rest;
  CLI::App* verb = app.get_subcommand_no_throw(rest.front());
  if (!verb) return rest;
  std::vector<std::string> out{rest.front()};
  for (const auto& token : config_file_arguments(config_path)) {
    const std::string key = token.substr(0, token.find('='));
    if (verb->get_option_no_throw(key)) out.push_back(token);
  }
  out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

}  // namespace

int run_cli(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"Dense geometric correspondence: data generation, training and evaluation", "dgc"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");
  app.add_option("--config", "key=value file; command-line flags override it");
  app.footer("Any command also accepts --config FILE with key=value lines; flags override it.");

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic pair dataset");
  gen->add_option("--out", cfg.out, "output directory")->required();
  add_dataset_options(*gen, cfg);

  auto* train = app.add_subcommand("train", "train a correspondence network");
  train->add_option("--data", cfg.data, "dataset directory, or comma list for a curriculum")
      ->required();
  train->add_option("--out", cfg.out, "output directory")->required();
  add_model_options(*train, cfg);
  add_training_options(*train, cfg);

  auto* ev = app.add_subcommand("eval", "score predicted maps against ground truth");
  ev->add_option("--out", cfg.out, "output directory")->required();
  add_model_input(*ev, cfg);
  ev->add_option("--thresholds", cfg.thresholds, "PCK thresholds in pixels");
  ev->add_flag("--unmasked", cfg.unmasked, "score every pixel, not only matchable ones");

  auto* pose = app.add_subcommand("pose", "estimate relative pose from dense matches");
  pose->add_option("--out", cfg.out, "output directory")->required();
  add_model_input(*pose, cfg);
  pose->add_option("--iters", cfg.iters, "RANSAC iterations per restart");
  pose->add_option("--restarts", cfg.restarts, "RANSAC restarts");
  pose->add_option("--inlier-px", cfg.inlier_px, "inlier threshold in pixels");
  pose->add_option("--stride", cfg.stride, "match sampling stride");
  pose->add_option("--conf-threshold", cfg.conf_threshold, "minimum match confidence");
  pose->add_option("--outlier-fraction", cfg.outlier_fraction, "fraction of matches to corrupt");
  pose->add_option("--seed", cfg.seed, "RANSAC and outlier seed");

  auto* version = app.add_subcommand("version", "print the version");

  std::vector<std::string> args;
  const int expanded = guarded("config", [&] { args = expand_arguments(app, argc, argv); });
  if (expanded != 0) return expanded;
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (version->parsed()) {
    std::cout << "dgc " << DGC_VERSION << "\n";
    return 0;
  }
  if (gen->parsed()) return guarded("gen-data", [&] { cmd_gen_data(cfg); });
  if (train->parsed()) return guarded("train", [&] { cmd_train(cfg); });
  if (ev->parsed()) return guarded("eval", [&] { cmd_eval(cfg); });
  if (pose->parsed()) return guarded("pose", [&] { cmd_pose(cfg); });
  return 1;
}

}  // namespace dgc::pipeline
