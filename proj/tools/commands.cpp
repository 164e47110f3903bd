// Copyright 2026 The cgvo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "cgvo/checkpoint.hpp"
#include "cgvo/error.hpp"
#include "cgvo/image_io.hpp"
#include "cgvo/kitti.hpp"
#include "cgvo/sampling.hpp"
#include "cgvo/synthetic.hpp"
#include "cgvo/training.hpp"

namespace cgvo::cli {

namespace fs = std::filesystem;

namespace {

std::ostream& log(const Context& ctx) {
  static std::ostream null_stream(nullptr);
  return ctx.out ? *ctx.out : null_stream;
}

void write_resolved(const Context& ctx, std::string_view command) {
  fs::create_directories(ctx.run_dir);
  ctx.config.write(ctx.run_dir / (std::string(command) + ".cfg"));
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

// Training samples of the configured training sequences; test sequences
// are not needed and need not exist.
DatasetSplit training_split(const Context& ctx) {
  SplitSpec spec = split_spec(ctx.config);
  spec.test_sequences.clear();
  return make_split(KittiLayout(ctx.data_root()), spec, sampling_config(ctx.config));
}

std::uint64_t sequence_seed(std::uint64_t seed, int index) { return seed * 1000003u + std::uint64_t(index); }

template <typename T>
PoseModel<T> initial_model(const Context& ctx, const TrainConfig& tc, const ModelConfig& mc) {
  if (!tc.init_checkpoint.empty()) {
    const Checkpoint init = load_checkpoint(ctx.resolve(tc.init_checkpoint));
    if (!(model_config_from(init) == mc))
      throw CheckpointError("train.init_checkpoint model configuration differs from the run configuration");
    return load_model<T>(init);
  }
  if (!tc.pretrain_checkpoint.empty() && tc.phase != Phase::kPretrainCnn) {
    const Checkpoint pre = load_checkpoint(ctx.resolve(tc.pretrain_checkpoint));
    return fine_tune_init<T>(pre, mc, tc.seed);
  }
  PoseModel<T> model(mc);
  model.init_weights(tc.seed);
  return model;
}

template <typename T>
TrainSummary train_typed(const Context& ctx) {
  const RunConfig& cfg = ctx.config;
  const TrainConfig tc = train_config(cfg);
  const LossConfig loss = loss_config(cfg);
  ModelConfig mc = model_config(cfg);
  if (tc.phase == Phase::kPretrainCnn) mc.gru_cells = 0;

  const DatasetSplit split = training_split(ctx);
  if (split.train.empty()) throw DataError("no training clips: sequences too short for data.t1 and strides");
  const KittiLayout layout(ctx.data_root());
  const int width = mc.encoder.width, height = mc.encoder.height;
  KittiSampleSource<T> train_set(layout, split.train, width, height);
  KittiSampleSource<T> validation_set(layout, split.validation, width, height);

  TrainSummary summary;
  summary.train_clips = split.train.size();
  summary.validation_clips = split.validation.size();

  std::optional<Checkpoint> resume;
  const std::string resume_path = cfg.get("train.resume");
  if (!resume_path.empty()) {
    resume = load_checkpoint(ctx.resolve(resume_path));
    if (resume->meta("train.phase") != to_string(tc.phase))
      throw ConfigError("resume checkpoint was written by phase '" + resume->meta("train.phase") + "', not '" +
                        std::string(to_string(tc.phase)) + "'");
    if (!(model_config_from(*resume) == mc))
      throw ConfigError("resume checkpoint model differs from the configured model");
    summary.first_epoch = std::stoi(resume->meta("train.epoch", "0"));
  }
  PoseModel<T> model = resume ? load_model<T>(*resume) : initial_model<T>(ctx, tc, mc);
  Trainer<T> trainer(model, tc, loss);
  if (resume) trainer.optimizer().restore(*resume, model.parameters());

  write_resolved(ctx, "train");
  const fs::path ckpt_dir = ctx.run_dir / "checkpoints";
  fs::create_directories(ctx.run_dir / "checkpoints");
  const fs::path log_path = ctx.run_dir / "log.csv";
  const bool fresh_log = !resume || !fs::exists(log_path);
  auto log_csv = open_out(log_path, fresh_log ? std::ios::out : std::ios::app);
  if (fresh_log)
    log_csv << "epoch,phase,mean_loss,lr,wall_s,steps,partial_batch,rmse_tx,rmse_ty,rmse_tz,rmse_rx,rmse_ry,"
               "rmse_rz,val_loss\n";
  log_csv << std::setprecision(9);

  const bool mirror = tc.phase == Phase::kMirror;
  std::vector<std::size_t> probe(std::min<std::size_t>(train_set.size(), cfg.get_uint("train.consistency_samples")));
  for (std::size_t i = 0; i < probe.size(); ++i) probe[i] = i * train_set.size() / probe.size();
  std::ofstream consistency_csv;
  if (mirror) {
    const fs::path path = ctx.run_dir / "consistency.csv";
    const bool fresh = !resume || !fs::exists(path);
    consistency_csv = open_out(path, fresh ? std::ios::out : std::ios::app);
    consistency_csv << std::setprecision(9);
    if (fresh) {
      consistency_csv << "epoch,step,consistency\n";
      if (!probe.empty())
        consistency_csv << summary.first_epoch << ',' << trainer.global_step() << ','
                        << mirror_consistency(model, train_set, probe) << '\n';
    }
  }

  log(ctx) << "train: phase " << to_string(tc.phase) << ", " << split.train.size() << " clips, "
           << split.validation.size() << " validation, " << model.parameters().scalar_count() << " parameters\n";
  const int end_epoch = summary.first_epoch + tc.epochs;
  summary.last_epoch = summary.first_epoch;
  for (int epoch = summary.first_epoch; epoch < end_epoch && !trainer.budget_exhausted(); ++epoch) {
    const EpochStats stats = trainer.train_epoch(train_set, epoch, ctx.workers);
    const int completed = epoch + 1;
    summary.last_epoch = completed;
    summary.epoch_losses.push_back(stats.mean_loss);
    const bool save = completed % tc.checkpoint_interval == 0 || completed == end_epoch || trainer.budget_exhausted();
    std::string val_loss;
    if (save) {
      summary.last_checkpoint = ckpt_dir / ("epoch_" + std::to_string(completed) + ".ckpt");
      save_training_checkpoint(summary.last_checkpoint, model, trainer.optimizer(), completed, tc.phase);
      if (validation_set.size() > 0) {
        std::vector<std::size_t> all(validation_set.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        std::ostringstream s;
        s << std::setprecision(9) << trainer.evaluate_loss(validation_set, all);
        val_loss = s.str();
      }
      if (mirror && !probe.empty())
        consistency_csv << completed << ',' << trainer.global_step() << ','
                        << mirror_consistency(model, train_set, probe) << '\n';
    }
    log_csv << completed << ',' << to_string(tc.phase) << ',' << stats.mean_loss << ',' << stats.lr << ','
            << stats.wall_seconds << ',' << stats.steps << ',' << (stats.partial_batch ? 1 : 0);
    for (double r : stats.rmse) log_csv << ',' << r;
    log_csv << ',' << val_loss << '\n';
    log_csv.flush();
    log(ctx) << "epoch " << completed << ": loss " << stats.mean_loss << ", lr " << stats.lr << ", "
             << stats.steps << " steps, " << std::fixed << std::setprecision(1) << stats.wall_seconds << " s\n"
             << std::defaultfloat << std::setprecision(6);
  }
  summary.steps = trainer.global_step();
  if (!summary.last_checkpoint.empty()) log(ctx) << "checkpoint " << summary.last_checkpoint.string() << "\n";
  return summary;
}

template <typename T>
EvalReport eval_with_model(const Context& ctx, const Checkpoint& ckpt, std::span<const std::string> ids,
                           const EvalConfig& ec) {
  const PoseModel<T> model = load_model<T>(ckpt);
  const KittiLayout layout(ctx.data_root());
  return evaluate_sequences(layout, ids, model_predictor(model, layout, ec.window), ec);
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->kind()) {
      case Error::Kind::kConfig:
      case Error::Kind::kParse: return kConfigError;
      case Error::Kind::kData:
      case Error::Kind::kIo:
      case Error::Kind::kCheckpoint: return kDataError;
      case Error::Kind::kShape:
      case Error::Kind::kContract:
      case Error::Kind::kDegenerate:
      case Error::Kind::kGeneration: return kContractError;
    }
  }
  if (dynamic_cast<const std::invalid_argument*>(&e)) return kContractError;
  return kFailure;
}

fs::path Context::resolve(const fs::path& p) const { return p.is_absolute() ? p : run_dir / p; }

RunConfig resolve_config(const std::optional<fs::path>& file, std::span<const std::string> overrides) {
  RunConfig cfg;
  if (file) cfg.merge_file(*file);
  for (const auto& o : overrides) cfg.apply_override(o);
  return cfg;
}

SynthSummary cmd_synth(const Context& ctx) {
  const RunConfig& cfg = ctx.config;
  const long count = cfg.get_int("synth.sequences"), frames = cfg.get_int("synth.frames");
  const long first = cfg.get_int("synth.first_id");
  if (count < 1 || frames < 2 || first < 0)
    throw ConfigError("synth needs sequences >= 1, frames >= 2 and first_id >= 0");
  const std::string script_kind = cfg.get("synth.script");
  if (script_kind != "drive" && script_kind != "identity")
    throw ConfigError("synth.script must be drive or identity");
  const auto camera = CameraModel::for_resolution(int(cfg.get_int("synth.width")), int(cfg.get_int("synth.height")));
  camera.validate();
  const double camera_height = cfg.get_double("synth.camera_height");
  if (!(camera_height > 0)) throw ConfigError("synth.camera_height must be positive");
  const auto profile = driving_profile(cfg);
  const std::uint64_t seed = cfg.get_uint("seed");

  const fs::path root = ctx.data_root();
  if (fs::exists(root) && !fs::is_empty(root)) {
    if (!ctx.force) throw DataError("target " + root.string() + " is not empty; pass --force to replace it");
    fs::remove_all(root);
  }
  fs::create_directories(root);
  write_resolved(ctx, "synth");

  const KittiLayout layout(root);
  SynthSummary summary;
  for (int i = 0; i < count; ++i) {
    const std::string id = sequence_id(int(first) + i);
    const std::uint64_t s = sequence_seed(seed, i);
    const auto script = script_kind == "identity" ? std::vector<PoseVector6>(std::size_t(frames - 1))
                                                  : driving_script(s, int(frames - 1), profile);
    const auto seq = generate_synthetic(camera, script, Texture::band_limited_noise(s),
                                        TexturedPlane::ground(camera_height));
    write_sequence(layout, id, seq);
    summary.sequences.push_back(id);
    summary.frames += seq.frames.size();
  }
  log(ctx) << "synth: " << summary.sequences.size() << " sequences, " << summary.frames << " frames, "
           << (summary.frames - summary.sequences.size()) << " pairs in " << root.string() << "\n";
  return summary;
}

TrainSummary cmd_train(const Context& ctx) {
  return ctx.config.get("model.precision") == "double" ? train_typed<double>(ctx) : train_typed<float>(ctx);
}

EvalReport cmd_eval(const Context& ctx) {
  const RunConfig& cfg = ctx.config;
  const EvalConfig ec = eval_config(cfg);
  auto ids = cfg.get_list("eval.sequences");
  if (ids.empty()) ids = cfg.get_list("data.test_sequences");
  if (ids.empty()) throw ConfigError("no sequences to evaluate");
  const KittiLayout layout(ctx.data_root());
  const std::string mode = cfg.get("eval.mode");

  EvalReport report;
  if (mode == "ground-truth") {
    report = evaluate_sequences(layout, ids, ground_truth_predictor(layout), ec);
  } else if (mode == "model") {
    const std::string path = cfg.get("eval.checkpoint");
    if (path.empty()) throw ConfigError("eval.checkpoint is required in model mode");
    const Checkpoint ckpt = load_checkpoint(ctx.resolve(path));
    report = ckpt.meta("precision", "float") == "double" ? eval_with_model<double>(ctx, ckpt, ids, ec)
                                                         : eval_with_model<float>(ctx, ckpt, ids, ec);
  } else {
    throw ConfigError("eval.mode must be model or ground-truth");
  }

  const fs::path out_dir = ctx.resolve(cfg.get("eval.output"));
  write_report(out_dir, report);
  write_resolved(ctx, "eval");
  std::string missing;
  for (const auto& s : report.sequences) {
    if (!s.has_ground_truth) missing += (missing.empty() ? "" : ", ") + s.id;
    log(ctx) << "sequence " << s.id << ": " << s.frames << " frames";
    if (s.has_ground_truth)
      log(ctx) << ", t_err " << s.translation_pct << " %, r_err " << s.rotation_deg_per_m << " deg/m ("
               << s.segments << " segments)";
    log(ctx) << "\n";
  }
  if (!missing.empty())
    throw DataError("no ground-truth poses for sequence " + missing + "; trajectories exported to " +
                    out_dir.string() + ", metrics not computed");
  return report;
}

std::size_t cmd_augment_preview(const Context& ctx) {
  const RunConfig& cfg = ctx.config;
  const auto ops = cfg.get_list("preview.ops");
  for (const auto& op : ops)
    if (op != "hflip" && op != "tflip") throw ConfigError("preview.ops entries must be hflip or tflip, got " + op);
  const long count = cfg.get_int("preview.count");
  if (count < 0) throw ConfigError("preview.count must be >= 0");

  const DatasetSplit split = training_split(ctx);
  std::vector<SequenceSample> clips = split.train;
  clips.insert(clips.end(), split.validation.begin(), split.validation.end());
  const KittiLayout layout(ctx.data_root());
  const fs::path out_dir = ctx.resolve(cfg.get("preview.output"));
  fs::create_directories(out_dir);
  write_resolved(ctx, "augment-preview");

  std::map<std::string, std::vector<RigidTransform>> absolutes;
  std::size_t written = 0;
  for (; written < std::size_t(count) && written < clips.size(); ++written) {
    SequenceSample s = clips[written];
    for (const auto& op : ops) s = op == "hflip" ? horizontal_flip(s) : temporal_flip(s);
    auto it = absolutes.find(s.sequence_id);
    if (it == absolutes.end()) it = absolutes.emplace(s.sequence_id, layout.load_poses(s.sequence_id)).first;
    const double err = target_consistency_error(s, it->second);
    if (!(err <= 1e-9))
      throw ContractError("augmented targets of clip " + std::to_string(written) + " deviate by " +
                          std::to_string(err) + " from the trajectory");

    std::ostringstream name;
    name << "sample_" << std::setw(4) << std::setfill('0') << written;
    const fs::path dir = out_dir / name.str();
    fs::create_directories(dir);
    for (std::size_t j = 0; j < s.frame_indices.size(); ++j) {
      Image img = read_image(layout.image_path(s.sequence_id, s.frame_indices[j]));
      if (s.mirrored) img = mirror_horizontally(img);
      write_png(dir / ("frame_" + std::to_string(j) + ".png"), img);
    }
    auto targets = open_out(dir / "targets.txt");
    targets << std::setprecision(17);
    for (const auto& t : s.targets) {
      const auto a = t.as_array();
      for (std::size_t c = 0; c < 6; ++c) targets << (c ? " " : "") << a[c];
      targets << '\n';
    }
    auto meta = open_out(dir / "sample.txt");
    meta << "sequence=" << s.sequence_id << "\nstride=" << s.stride << "\nmirrored=" << s.mirrored
         << "\ntime_reversed=" << s.time_reversed << "\nframes=";
    for (std::size_t j = 0; j < s.frame_indices.size(); ++j) meta << (j ? "," : "") << s.frame_indices[j];
    meta << '\n';
  }
  log(ctx) << "augment-preview: " << written << " clips in " << out_dir.string() << "\n";
  return written;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monocular visual odometry with a recurrent convolutional pose network."};
  app.name("cgvo");
  app.require_subcommand(1);

  std::string run_dir = ".";
  std::string config_file;
  std::vector<std::string> overrides;
  bool force = false;
  int workers = 0;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--run-dir", run_dir, "directory all relative paths resolve against")->capture_default_str();
    sub->add_option("--config", config_file, "key = value configuration file");
    sub->add_option("--set", overrides, "override one key, e.g. --set train.lr=1e-3")->take_all();
    sub->add_option("--workers", workers, "data-loading threads (0 = load inline)")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
  };
  auto* synth = app.add_subcommand("synth", "render a synthetic dataset in KITTI layout");
  common(synth);
  synth->add_flag("--force", force, "replace a non-empty dataset directory");
  auto* train = app.add_subcommand("train", "train the selected phase, writing checkpoints and log.csv");
  common(train);
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint, writing lengths.csv, speeds.csv and trajectories");
  common(eval);
  auto* preview = app.add_subcommand("augment-preview", "dump augmented clips with their targets");
  common(preview);
  auto* keys = app.add_subcommand("keys", "list every configuration key with its default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*keys) {
      for (const auto& k : config_keys())
        out << k.name << " = " << k.default_value << "\n    " << k.help << "\n";
      return kOk;
    }
    Context ctx;
    ctx.run_dir = run_dir;
    ctx.config = resolve_config(config_file.empty() ? std::nullopt : std::optional<fs::path>(config_file), overrides);
    ctx.force = force;
    ctx.workers = workers;
    ctx.out = &out;
    if (*synth) cmd_synth(ctx);
    if (*train) cmd_train(ctx);
    if (*eval) cmd_eval(ctx);
    if (*preview) cmd_augment_preview(ctx);
    return kOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace cgvo::cli
