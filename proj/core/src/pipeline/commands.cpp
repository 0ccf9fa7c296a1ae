#include "dgc/pipeline/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>

#include "dgc/error.hpp"
#include "dgc/geometry/image.hpp"
#include "dgc/model/checkpoint.hpp"
#include "dgc/model/train.hpp"

namespace dgc::pipeline {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

fs::path require_out(const RunConfig& cfg) {
  if (cfg.out.empty()) throw UsageError("--out is required");
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec || !fs::is_directory(cfg.out)) throw DataError("cannot create output directory " + cfg.out);
  return cfg.out;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw DataError("cannot write " + p.string());
  return os;
}

class RunLog {
 public:
  RunLog(const RunConfig& cfg, Command c) : start_(std::chrono::steady_clock::now()) {
    text_ = "command=" + to_string(c) + "\n" + echo_config(cfg, c);
  }
  void line(const std::string& s) { text_ += s + "\n"; }
  void write(const fs::path& dir) {
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    auto os = open_out(dir / "run.log");
    os << text_ << "elapsed_s=" << fmt(elapsed) << "\n";
  }

 private:
  std::chrono::steady_clock::time_point start_;
  std::string text_;
};

geometry::Dataset load(const std::string& dir) {
  if (dir.empty()) throw UsageError("--data is required");
  return geometry::load_dataset(dir);
}

std::vector<float> sigmoid_values(const Tensor& logits) {
  std::vector<float> p(logits.data().begin(), logits.data().end());
  for (auto& v : p) v = static_cast<float>(1.0 / (1.0 + std::exp(-static_cast<double>(v))));
  return p;
}

}  // namespace

std::vector<const geometry::LoadedPair*> select_split(const geometry::Dataset& ds,
                                                      const std::string& split) {
  if (split == "train") return ds.split(geometry::Split::Train);
  if (split == "val") return ds.split(geometry::Split::Val);
  if (split == "all") {
    std::vector<const geometry::LoadedPair*> out;
    for (const auto& p : ds.pairs) out.push_back(&p);
    return out;
  }
  throw UsageError("split must be train, val or all");
}

model::PyramidConfig model_config(const RunConfig& cfg, int resolution) {
  auto c = model::PyramidConfig::desk(cfg.levels, resolution);
  c.use_matchability = cfg.matchability;
  c.correlation = model::parse_correlation(cfg.correlation);
  c.radius = cfg.radius;
  c.l2norm_correlation = !cfg.no_l2norm;
  c.parametrization = model::parse_parametrization(cfg.parametrization);
  c.validate();
  return c;
}

std::vector<PairEval> evaluate_pairs(model::ModelState* state,
                                     const std::vector<const geometry::LoadedPair*>& pairs,
                                     const std::vector<double>& thresholds, bool unmasked) {
  std::vector<PairEval> rows;
  for (const auto* p : pairs) {
    const auto& gt = p->pair;
    const geometry::MatchabilityMask eval_mask =
        unmasked ? geometry::MatchabilityMask(gt.gt_map.width, gt.gt_map.height, true) : gt.gt_mask;
    PairEval row{p->record.id, {}};
    if (!state) {
      row.report = eval::evaluate(gt.gt_map, gt.gt_map, eval_mask, thresholds);
      row.report.jaccard = eval::jaccard(gt.gt_mask, gt.gt_mask);
    } else {
      if (gt.gt_map.width != state->config().base_resolution) {
        throw DataError("dataset/model resolution mismatch");
      }
      const auto out = model::infer(*state, geometry::image_to_tensor(gt.source_image),
                                    geometry::image_to_tensor(gt.target_image));
      row.report = eval::evaluate(geometry::tensor_to_map(out.maps.back()), gt.gt_map, eval_mask,
                                  thresholds);
      if (out.matchability_logits.defined()) {
        const Tensor probs = Tensor::from_data(out.matchability_logits.shape(),
                                               sigmoid_values(out.matchability_logits));
        row.report.jaccard = eval::jaccard(geometry::tensor_to_mask(probs, 0.5f), gt.gt_mask);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void inject_outliers(pose::MatchSet& ms, double fraction, int width, int height,
                     std::uint64_t seed) {
  if (fraction < 0.0 || fraction > 1.0) throw UsageError("outlier fraction must be in [0, 1]");
  const auto k = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(ms.size())));
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> idx(ms.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::uniform_real_distribution<double> ux(0.0, width - 1.0), uy(0.0, height - 1.0);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
    ms.matches[idx[i]].x_prime = Eigen::Vector2d(ux(rng), uy(rng));
  }
}

PoseRow pose_for_pair(const geometry::LoadedPair& pair, model::ModelState* state,
                      const PoseOptions& options) {
  PoseRow row;
  row.id = pair.record.id;
  if (!pair.pose) {
    row.error = "pair has no recorded pose";
    return row;
  }
  const auto& gt = *pair.pose;
  try {
    geometry::CorrespondenceMap map;
    std::vector<float> conf;
    bool has_conf = true;
    if (!state) {
      map = pair.pair.gt_map;
      conf.assign(pair.pair.gt_mask.valid.begin(), pair.pair.gt_mask.valid.end());
    } else {
      if (pair.pair.gt_map.width != state->config().base_resolution) {
        throw DataError("dataset/model resolution mismatch");
      }
      const auto out = model::infer(*state, geometry::image_to_tensor(pair.pair.source_image),
                                    geometry::image_to_tensor(pair.pair.target_image));
      map = geometry::tensor_to_map(out.maps.back());
      if (out.matchability_logits.defined()) {
        conf = sigmoid_values(out.matchability_logits);
      } else {
        has_conf = false;
      }
    }
    pose::MatchSet ms = has_conf ? pose::matches_from_map(map, std::span<const float>(conf),
                                                          options.match)
                                 : pose::matches_from_map(map, std::nullopt, options.match);
    if (options.outlier_fraction > 0.0) {
      inject_outliers(ms, options.outlier_fraction, map.width, map.height,
                      geometry::pair_seed(options.seed, row.id) ^ 0x5DEECE66DULL);
    }
    row.matches = ms.size();

    const Eigen::Matrix3d F_gt =
        pose::fundamental_from_essential(pose::essential_from_pose(gt.R, gt.t), gt.K1, gt.K2);
    const auto epi = pose::symmetric_epipolar_error(ms, F_gt);
    row.median_epipolar_px = epi.median;
    for (double d : epi.distances) {
      if (std::isfinite(d)) row.epipolar_px.push_back(d);
    }

    pose::RansacOptions ro = options.ransac;
    ro.seed = geometry::pair_seed(options.seed, row.id);
    const auto est = pose::estimate_essential_ransac(ms, gt.K1, gt.K2, ro);
    row.inliers = est.inlier_count;
    const auto rel = pose::recover_pose(est.E, ms, gt.K1, gt.K2, est.inliers);
    row.errors = pose::pose_errors(rel.R, rel.t, gt.R, gt.t);
    row.ok = true;
  } catch (const Error& e) {
    row.error = e.what();
  }
  return row;
}

void cmd_gen_data(const RunConfig& cfg) {
  const fs::path out = require_out(cfg);
  RunLog log(cfg, Command::GenData);
  geometry::DatasetSpec spec;
  spec.count = cfg.n;
  spec.kinds = geometry::parse_pair_kinds(cfg.kinds);
  spec.strength = cfg.strength;
  spec.seed = cfg.seed;
  spec.resolution = cfg.resolution;
  spec.val_fraction = cfg.val_fraction;
  const auto m = geometry::generate_dataset(spec, out);
  log.line("manifest_hash=" + git_blob_hash_file(out / "manifest.txt"));
  log.line("pairs=" + std::to_string(m.pairs.size()));
  log.write(out);
  std::cout << "wrote " << m.pairs.size() << " pairs to " << out.string() << "\n";
}

void cmd_train(const RunConfig& cfg) {
  const auto dirs = split_list(cfg.data);
  if (dirs.empty()) throw UsageError("--data is required");
  const fs::path out = require_out(cfg);
  RunLog log(cfg, Command::Train);

  std::vector<geometry::Dataset> datasets;
  for (const auto& d : dirs) {
    datasets.push_back(load(d));
    log.line("dataset=" + d + " manifest_hash=" + git_blob_hash_file(fs::path(d) / "manifest.txt"));
  }
  const int resolution = datasets.front().manifest.resolution;

  std::optional<model::Checkpoint> ck;
  if (!cfg.resume.empty()) {
    ck = model::load_checkpoint(cfg.resume);
  } else {
    const auto mc = model_config(cfg, resolution);
    ck = model::Checkpoint{model::init_state(mc, cfg.seed), model::Adam(), 0};
  }
  auto adam_cfg = ck->optimizer.config();
  adam_cfg.lr = cfg.lr;
  ck->optimizer.set_config(adam_cfg);
  const auto& mc = ck->state.config();

  std::vector<model::LossRecord> trace;
  int epochs_done = ck->epochs_done;
  for (std::size_t k = 0; k < datasets.size(); ++k) {
    const auto& ds = datasets[k];
    if (ds.manifest.resolution != mc.base_resolution) {
      throw DataError("dataset/model resolution mismatch: " + dirs[k] + " is " +
                      std::to_string(ds.manifest.resolution) + ", model expects " +
                      std::to_string(mc.base_resolution));
    }
    std::vector<model::Sample> samples;
    for (const auto* p : ds.split(geometry::Split::Train)) {
      samples.push_back(model::make_sample(p->pair, mc));
    }
    if (samples.empty()) throw DataError("dataset " + dirs[k] + " has no training pairs");
    model::TrainConfig tc;
    tc.epochs = cfg.epochs;
    tc.batch = cfg.batch;
    tc.seed = cfg.seed;
    tc.freeze_encoder = cfg.freeze_encoder;
    tc.beta = cfg.beta;
    tc.epoch_offset = epochs_done;
    log.line("phase=" + std::to_string(k) + " first_epoch=" + std::to_string(epochs_done) +
             " pairs=" + std::to_string(samples.size()));
    const auto part = model::train(samples, ck->state, ck->optimizer, tc,
                                   [&](int epoch, model::ModelState&) {
                                     std::cout << "epoch " << epoch << " done\n" << std::flush;
                                   });
    trace.insert(trace.end(), part.begin(), part.end());
    epochs_done += cfg.epochs;
  }

  model::save_checkpoint(out / "checkpoint.ckpt", ck->state, ck->optimizer, epochs_done);
  auto os = open_out(out / "loss_trace.csv");
  os << "epoch,step,L_c,L_m,L_total\n";
  for (const auto& r : trace) {
    os << r.epoch << ',' << r.step << ',' << fmt(r.correspondence) << ',' << fmt(r.matchability)
       << ',' << fmt(r.total) << '\n';
  }
  log.line("epochs_done=" + std::to_string(epochs_done));
  log.write(out);
}

void cmd_eval(const RunConfig& cfg) {
  const auto thresholds = parse_thresholds(cfg.thresholds);
  const auto ds = load(cfg.data);
  const fs::path out = require_out(cfg);
  RunLog log(cfg, Command::Eval);
  log.line("manifest_hash=" + git_blob_hash_file(fs::path(cfg.data) / "manifest.txt"));

  std::optional<model::Checkpoint> ck;
  if (!cfg.use_gt_map) {
    if (cfg.checkpoint.empty()) throw UsageError("--checkpoint is required (or --use-gt-map)");
    ck = model::load_checkpoint(cfg.checkpoint);
  }
  const auto pairs = select_split(ds, cfg.split);
  if (pairs.empty()) throw DataError("no pairs in split " + cfg.split);
  const auto rows = evaluate_pairs(ck ? &ck->state : nullptr, pairs, thresholds, cfg.unmasked);

  auto os = open_out(out / "eval.csv");
  os << "pair_id,aepe";
  for (double t : thresholds) os << ",pck" << format_double(t);
  os << ",jaccard,n_valid\n";
  auto write_row = [&](const std::string& id, const eval::EvalReport& r) {
    os << id << ',' << fmt(r.aepe);
    for (double t : thresholds) os << ',' << fmt(r.pck.at(t));
    os << ',' << (r.jaccard ? fmt(*r.jaccard) : std::string()) << ',' << r.n_valid << '\n';
  };
  std::vector<eval::EvalReport> reports;
  for (const auto& r : rows) {
    write_row(std::to_string(r.id), r.report);
    reports.push_back(r.report);
  }
  const auto agg = eval::aggregate(reports);
  write_row("all", agg);
  log.write(out);
  std::cout << "aepe=" << fmt(agg.aepe);
  for (double t : thresholds) std::cout << " pck" << format_double(t) << "=" << fmt(agg.pck.at(t));
  std::cout << "\n";
}

void cmd_pose(const RunConfig& cfg) {
  const auto ds = load(cfg.data);
  const fs::path out = require_out(cfg);
  RunLog log(cfg, Command::Pose);
  log.line("manifest_hash=" + git_blob_hash_file(fs::path(cfg.data) / "manifest.txt"));

  std::optional<model::Checkpoint> ck;
  if (!cfg.use_gt_map) {
    if (cfg.checkpoint.empty()) throw UsageError("--checkpoint is required (or --use-gt-map)");
    ck = model::load_checkpoint(cfg.checkpoint);
  }
  PoseOptions po;
  po.ransac.iterations = cfg.iters;
  po.ransac.restarts = cfg.restarts;
  po.ransac.inlier_threshold_px = cfg.inlier_px;
  po.match.stride = cfg.stride;
  po.match.threshold = static_cast<float>(cfg.conf_threshold);
  po.outlier_fraction = cfg.outlier_fraction;
  po.seed = cfg.seed;
  if (cfg.iters <= 0 || cfg.restarts <= 0 || cfg.stride <= 0 || !(cfg.inlier_px > 0.0)) {
    throw UsageError("iters, restarts, stride and inlier-px must be positive");
  }
  if (cfg.outlier_fraction < 0.0 || cfg.outlier_fraction > 1.0) {
    throw UsageError("outlier-fraction must be in [0, 1]");
  }

  std::vector<const geometry::LoadedPair*> pairs;
  for (const auto* p : select_split(ds, cfg.split)) {
    if (p->pose) pairs.push_back(p);
  }
  if (pairs.empty()) throw DataError("no pose pairs in split " + cfg.split);
  auto os = open_out(out / "pose.csv");
  os << "pair_id,rot_err_deg,trans_err_deg,inliers,matches,median_epi_px\n";
  std::vector<double> rot, trans, epi;
  std::size_t failed = 0;
  for (const auto* p : pairs) {
    const PoseRow r = pose_for_pair(*p, ck ? &ck->state : nullptr, po);
    const double nan = std::nan("");
    os << r.id << ',' << fmt(r.ok ? r.errors.rotation_deg : nan) << ','
       << fmt(r.ok ? r.errors.translation_deg : nan) << ',' << r.inliers << ',' << r.matches << ','
       << fmt(r.matches ? r.median_epipolar_px : nan) << '\n';
    if (r.ok) {
      rot.push_back(r.errors.rotation_deg);
      trans.push_back(r.errors.translation_deg);
    } else {
      ++failed;
      log.line("pair " + std::to_string(r.id) + ": " + r.error);
      std::cerr << "pair " << r.id << ": " << r.error << "\n";
    }
    epi.insert(epi.end(), r.epipolar_px.begin(), r.epipolar_px.end());
  }

  auto median = [](std::vector<double> v) {
    if (v.empty()) return std::nan("");
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  };
  os << "median," << fmt(median(rot)) << ',' << fmt(median(trans)) << ",,,"
     << fmt(median(epi)) << '\n';

  auto write_hist = [&](const char* name, const std::vector<double>& values,
                        const std::vector<double>& thresholds) {
    auto hs = open_out(out / name);
    hs << "threshold,cumulative_fraction\n";
    for (const auto& bin : pose::cumulative_histogram(values, thresholds)) {
      hs << fmt(bin.threshold) << ',' << fmt(bin.cumulative_fraction) << '\n';
    }
  };
  const std::vector<double> angle_bins{0.05, 0.1, 0.25, 0.5, 1, 2, 5, 10, 20};
  write_hist("rotation_hist.csv", rot, angle_bins);
  write_hist("translation_hist.csv", trans, angle_bins);
  write_hist("epipolar_hist.csv", epi, {0.25, 0.5, 1, 2, 3, 5, 10, 20});
  log.line("failed_pairs=" + std::to_string(failed));
  log.write(out);
  std::cout << "pairs=" << pairs.size() << " failed=" << failed
            << " median_rot_deg=" << fmt(median(rot)) << " median_trans_deg=" << fmt(median(trans))
            << "\n";
}

}  // namespace dgc::pipeline
