// prosody: command-line front end for GS prosody extraction, the two
// objective transfer metrics, Monte Carlo evaluation, scatter projection
// and the toy conditioning model.
//
// Exit codes: 0 success, 1 usage error, 2 input error, 3 computation
// failure, 4 partial failure (some inputs failed).

#include <algorithm>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "prosody/audio.hpp"
#include "prosody/error.hpp"
#include "prosody/features.hpp"
#include "prosody/io.hpp"
#include "prosody/mel.hpp"
#include "prosody/metrics.hpp"
#include "prosody/pca.hpp"
#include "prosody/pitch.hpp"
#include "prosody/toy_model.hpp"
#include "prosody/wav.hpp"

namespace fs = std::filesystem;
using namespace prosody;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitCompute = 3;
constexpr int kExitPartial = 4;

struct FrontEnd {
  int sample_rate = 16000;
  double window_ms = 50.0;
  double hop_ms = 12.5;
  int n_mels = 80;
  PitchConfig pitch;

  FrameSpec spec() const { return FrameSpec::from_ms(sample_rate, window_ms, hop_ms); }
};

void add_frontend_flags(CLI::App* cmd, FrontEnd& fe) {
  cmd->add_option("--sample-rate", fe.sample_rate, "Analysis sample rate in Hz")
      ->capture_default_str();
  cmd->add_option("--window-ms", fe.window_ms, "Analysis window in ms")->capture_default_str();
  cmd->add_option("--hop-ms", fe.hop_ms, "Analysis hop in ms")->capture_default_str();
  cmd->add_option("--n-mels", fe.n_mels, "Mel bins for --emit-mel")->capture_default_str();
  cmd->add_option("--rms-threshold", fe.pitch.voicing_rms_threshold,
                  "RMS voicing threshold")
      ->capture_default_str();
  cmd->add_option("--f0-min", fe.pitch.f0_min_hz, "Lowest tracked F0 in Hz")
      ->capture_default_str();
  cmd->add_option("--f0-max", fe.pitch.f0_max_hz, "Highest tracked F0 in Hz")
      ->capture_default_str();
}

AudioBuffer load_audio(const fs::path& path, int sample_rate) {
  AudioBuffer audio = read_wav(path);
  if (audio.sample_rate_hz != sample_rate) audio = resample(audio, sample_rate);
  return audio;
}

// Unique per-input basename: stem, de-duplicated with a numeric suffix.
std::string output_stem(const fs::path& input, std::map<std::string, int>& used) {
  std::string stem = input.stem().string();
  const int n = used[stem]++;
  if (n > 0) stem += "-" + std::to_string(n);
  return stem;
}

struct ExtractOptions {
  FrontEnd fe;
  std::vector<std::string> inputs;
  std::string out_dir = ".";
  bool emit_mel = false;
};

int run_extract(const ExtractOptions& opt) {
  std::vector<std::string> inputs = opt.inputs;
  std::sort(inputs.begin(), inputs.end());
  fs::create_directories(opt.out_dir);

  const FrameSpec spec = opt.fe.spec();
  std::vector<GsRow> gs_rows;
  std::map<std::string, int> stems;
  std::size_t failed = 0;

  for (const auto& input : inputs) {
    const std::string stem = output_stem(input, stems);
    try {
      const AudioBuffer audio = load_audio(input, opt.fe.sample_rate);
      const Contour f0 = track_pitch(audio, spec, opt.fe.pitch);
      const Contour rms = rms_contour(audio, spec);
      write_contour_csv(fs::path(opt.out_dir) / (stem + ".f0.csv"), f0);
      write_contour_csv(fs::path(opt.out_dir) / (stem + ".rms.csv"), rms);
      if (opt.emit_mel)
        write_mel_csv(fs::path(opt.out_dir) / (stem + ".mel.csv"),
                      log_mel(audio, spec, opt.fe.n_mels));
      const GsFeatures gs = extract_gs(f0, rms);
      gs_rows.push_back({input, gs});
    } catch (const Error& e) {
      ++failed;
      std::cerr << "error: " << input << ": " << e.what() << '\n';
    }
  }

  write_gs_csv(fs::path(opt.out_dir) / "gs.csv", gs_rows);
  std::cout << "extracted " << gs_rows.size() << "/" << inputs.size() << " file(s) into "
            << opt.out_dir << '\n';
  if (failed == inputs.size()) return kExitInput;
  if (failed > 0) return kExitPartial;
  return kExitOk;
}

struct CompareOptions {
  FrontEnd fe;
  std::string ref;
  std::string cand;
  std::string stats_path;
  std::string fit_gs_path;
  std::string out_path;
};

int run_compare(const CompareOptions& opt) {
  NormStats stats;
  if (!opt.stats_path.empty()) {
    stats = load_norm_stats(opt.stats_path);
  } else if (!opt.fit_gs_path.empty()) {
    const auto rows = read_gs_csv(opt.fit_gs_path);
    std::vector<GsFeatures> corpus(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) corpus[i] = rows[i].features;
    stats = fit_norm_stats(corpus);
  } else {
    throw InvalidInputError("compare: provide --stats or --fit-gs");
  }

  const AudioBuffer ref = load_audio(opt.ref, opt.fe.sample_rate);
  const AudioBuffer cand = load_audio(opt.cand, opt.fe.sample_rate);
  const PairMetrics m = pair_metrics(ref, cand, stats, opt.fe.pitch, opt.fe.spec());

  for (std::size_t k = 0; k < 4; ++k)
    std::cout << PairMetrics::kNames[k] << " = " << format_double(m[k]) << '\n';
  if (!opt.out_path.empty()) save_pair_metrics(opt.out_path, m);
  return kExitOk;
}

struct McOptions {
  FrontEnd fe;
  std::string manifest_path;
  std::string stats_path;
  std::string out_path = "report.json";
  int runs = 50;
  std::uint64_t seed = 0;
};

int run_mc_eval(const McOptions& opt) {
  const EvalManifest manifest = load_manifest(opt.manifest_path);
  const NormStats stats = load_norm_stats(opt.stats_path);

  McConfig cfg;
  cfg.n_runs = opt.runs;
  cfg.seed = opt.seed;
  cfg.sample_rate_hz = opt.fe.sample_rate;
  cfg.text_set = manifest.texts;
  cfg.reference_pool.reserve(manifest.references.size());
  for (const auto& [id, _] : manifest.references) cfg.reference_pool.push_back(id);

  const AudioResolver refs = [&](const std::string& id) -> std::optional<fs::path> {
    const auto it = manifest.references.find(id);
    if (it == manifest.references.end()) return std::nullopt;
    return it->second;
  };
  const CandidateProvider cands = [&](const std::string& text,
                                      const std::string& ref) -> std::optional<fs::path> {
    const auto it = manifest.candidates.find(text + ":" + ref);
    if (it == manifest.candidates.end()) return std::nullopt;
    return it->second;
  };

  const MetricReport report =
      monte_carlo_eval(refs, cands, cfg, stats, opt.fe.pitch, opt.fe.spec());
  save_metric_report(opt.out_path, report);
  std::cout << format_metric_table(report.aggregate, report.n_runs);
  if (report.skipped > 0) std::cout << "skipped pairs: " << report.skipped << '\n';
  std::cout << "report written to " << opt.out_path << '\n';
  return kExitOk;
}

struct ScatterOptions {
  std::vector<std::string> gs_specs;  // path[:group]
  std::string stats_path;
  std::string out_path = "scatter.csv";
};

int run_scatter(const ScatterOptions& opt) {
  std::vector<ScatterRow> rows;
  std::vector<GsFeatures> features;
  for (const auto& spec : opt.gs_specs) {
    std::string path = spec;
    std::string group;
    if (const auto pos = spec.rfind(':'); pos != std::string::npos && pos > 1) {
      path = spec.substr(0, pos);
      group = spec.substr(pos + 1);
    }
    if (group.empty()) group = fs::path(path).stem().string();
    for (const auto& row : read_gs_csv(path)) {
      rows.push_back({row.id, 0.0, 0.0, group});
      features.push_back(row.features);
    }
  }
  if (features.size() < 3)
    throw InvalidInputError("scatter: need at least 3 feature rows across the GS files");

  const NormStats stats = opt.stats_path.empty()
                              ? fit_norm_stats(features)
                              : load_norm_stats(opt.stats_path);
  std::vector<std::vector<double>> normalized(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto z = normalize(features[i], stats);
    normalized[i].assign(z.begin(), z.end());
  }

  const Projection2D proj = pca_project_2d(normalized);
  if (proj.rank < 2)
    std::cerr << "warning: corpus spans only " << proj.rank
              << " non-degenerate component(s); missing coordinates are zero\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].x = proj.coords[i][0];
    rows[i].y = proj.coords[i][1];
  }
  write_scatter_csv(opt.out_path, rows);
  std::cout << "wrote " << rows.size() << " points to " << opt.out_path << '\n';
  return kExitOk;
}

struct NormFitOptions {
  std::string gs_path;
  std::string out_path = "norm.json";
};

int run_norm_fit(const NormFitOptions& opt) {
  const auto rows = read_gs_csv(opt.gs_path);
  if (rows.empty()) throw InvalidInputError("norm fit: no rows in " + opt.gs_path);
  std::vector<GsFeatures> corpus(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) corpus[i] = rows[i].features;
  save_norm_stats(opt.out_path, fit_norm_stats(corpus), opt.gs_path);
  std::cout << "fitted stats over " << corpus.size() << " row(s) -> " << opt.out_path << '\n';
  return kExitOk;
}

struct ToyOptions {
  ToyModelConfig model;
  SyntheticDatasetConfig dataset;
  std::string out_dir = ".";
  int gradcheck_examples = 10;
  bool unconditioned = false;
};

void sync_dataset(ToyOptions& opt) {
  opt.dataset.charset_size = opt.model.charset_size;
  opt.dataset.n_mels = opt.model.n_mels;
  opt.dataset.frames_per_symbol = opt.model.frames_per_symbol;
  opt.dataset.seed = opt.model.seed;
}

int run_toy_train(ToyOptions opt) {
  sync_dataset(opt);
  fs::create_directories(opt.out_dir);
  const ToyDataset data = make_synthetic_prosody_dataset(opt.dataset);
  const TrainResult result = train_toy(data, opt.model, !opt.unconditioned);
  save_checkpoint(fs::path(opt.out_dir) / "checkpoint.json", result.model);
  save_loss_history(fs::path(opt.out_dir) / "loss.csv", result.history);
  std::cout << "final validation mse = " << format_double(result.final_val_mse) << '\n';
  return kExitOk;
}

int run_toy_gradcheck(ToyOptions opt) {
  sync_dataset(opt);
  const ToyDataset data = make_synthetic_prosody_dataset(opt.dataset);
  double worst = 0.0;
  for (int i = 0; i < opt.gradcheck_examples; ++i) {
    ToyModelConfig cfg = opt.model;
    cfg.seed = opt.model.seed + static_cast<std::uint64_t>(i);
    ToyModel model = ToyModel::init(cfg, !opt.unconditioned);
    const auto& ex = data.train[i % data.train.size()];
    worst = std::max(worst, grad_check(model, ex, data.gs_stats));
  }
  std::cout << "max relative gradient error = " << format_double(worst) << " over "
            << opt.gradcheck_examples << " example(s)\n";
  return worst < 1e-4 ? kExitOk : kExitCompute;
}

int run_toy_ablate(ToyOptions opt) {
  sync_dataset(opt);
  const ToyDataset data = make_synthetic_prosody_dataset(opt.dataset);
  const TrainResult conditioned = train_toy(data, opt.model, true);
  const TrainResult ablated = train_toy(data, opt.model, false);
  const double ratio = conditioned.final_val_mse / ablated.final_val_mse;
  std::cout << "conditioned val mse   = " << format_double(conditioned.final_val_mse) << '\n'
            << "unconditioned val mse = " << format_double(ablated.final_val_mse) << '\n'
            << "ratio = " << format_double(ratio) << '\n';
  return ratio <= 0.7 ? kExitOk : kExitCompute;
}

void add_toy_model_flags(CLI::App* cmd, ToyOptions& opt) {
  cmd->add_option("--seed", opt.model.seed, "RNG seed")->capture_default_str();
  cmd->add_option("--width", opt.model.width, "Encoder width d")->capture_default_str();
  cmd->add_option("--n-mels", opt.model.n_mels, "Mel bins per output frame")
      ->capture_default_str();
  cmd->add_option("--frames-per-symbol", opt.model.frames_per_symbol,
                  "Decoder frames per input symbol")
      ->capture_default_str();
  cmd->add_option("--lr", opt.model.learning_rate, "SGD learning rate")->capture_default_str();
  cmd->add_option("--batch", opt.model.batch_size, "Batch size")->capture_default_str();
  cmd->add_option("--steps", opt.model.max_steps, "Training steps")->capture_default_str();
  cmd->add_option("--log-every", opt.model.log_every, "Loss-history cadence in steps")
      ->capture_default_str();
  cmd->add_option("--texts", opt.dataset.n_texts, "Synthetic corpus texts")
      ->capture_default_str();
  cmd->add_option("--variants", opt.dataset.variants_per_text, "GS variants per text")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GS prosody feature extraction and prosody-transfer evaluation"};
  app.require_subcommand(1);
  std::function<int()> action;

  // extract
  ExtractOptions extract_opt;
  auto* extract = app.add_subcommand("extract", "Extract contours and GS features from WAVs");
  extract->add_option("inputs", extract_opt.inputs, "Input WAV files")->required();
  extract->add_option("--out-dir", extract_opt.out_dir, "Output directory")
      ->capture_default_str();
  extract->add_flag("--emit-mel", extract_opt.emit_mel, "Also write log-mel CSVs");
  add_frontend_flags(extract, extract_opt.fe);
  extract->callback([&] { action = [&] { return run_extract(extract_opt); }; });

  // compare
  CompareOptions compare_opt;
  auto* compare = app.add_subcommand("compare", "Objective metrics for one reference/candidate pair");
  compare->add_option("reference", compare_opt.ref, "Reference WAV")->required();
  compare->add_option("candidate", compare_opt.cand, "Candidate WAV")->required();
  compare->add_option("--stats", compare_opt.stats_path, "NormStats JSON");
  compare->add_option("--fit-gs", compare_opt.fit_gs_path,
                      "GS corpus CSV to fit stats from (alternative to --stats)");
  compare->add_option("--out", compare_opt.out_path, "Write the four metrics as JSON");
  add_frontend_flags(compare, compare_opt.fe);
  compare->callback([&] { action = [&] { return run_compare(compare_opt); }; });

  // mc-eval
  McOptions mc_opt;
  auto* mc = app.add_subcommand("mc-eval", "Monte Carlo prosody-transfer evaluation");
  mc->add_option("--manifest", mc_opt.manifest_path, "Manifest JSON")->required();
  mc->add_option("--stats", mc_opt.stats_path, "NormStats JSON")->required();
  mc->add_option("--out", mc_opt.out_path, "Report JSON path")->capture_default_str();
  mc->add_option("--runs", mc_opt.runs, "Monte Carlo runs")->capture_default_str();
  mc->add_option("--seed", mc_opt.seed, "RNG seed")->capture_default_str();
  add_frontend_flags(mc, mc_opt.fe);
  mc->callback([&] { action = [&] { return run_mc_eval(mc_opt); }; });

  // scatter
  ScatterOptions scatter_opt;
  auto* scatter = app.add_subcommand("scatter", "2-D principal-component projection of GS rows");
  scatter->add_option("--gs", scatter_opt.gs_specs, "GS corpus CSV as path[:group]")
      ->required();
  scatter->add_option("--stats", scatter_opt.stats_path,
                      "NormStats JSON (default: fit on the pooled rows)");
  scatter->add_option("--out", scatter_opt.out_path, "Output CSV")->capture_default_str();
  scatter->callback([&] { action = [&] { return run_scatter(scatter_opt); }; });

  // norm fit
  auto* norm = app.add_subcommand("norm", "Normalization statistics");
  norm->require_subcommand(1);
  NormFitOptions norm_opt;
  auto* norm_fit = norm->add_subcommand("fit", "Fit NormStats from a GS corpus CSV");
  norm_fit->add_option("--gs", norm_opt.gs_path, "GS corpus CSV")->required();
  norm_fit->add_option("--out", norm_opt.out_path, "Output JSON")->capture_default_str();
  norm_fit->callback([&] { action = [&] { return run_norm_fit(norm_opt); }; });

  // toy
  auto* toy = app.add_subcommand("toy", "Desk-scale conditioned text-to-mel model");
  toy->require_subcommand(1);

  ToyOptions train_opt;
  train_opt.model.max_steps = 200;
  auto* toy_train = toy->add_subcommand("train", "Train on the synthetic prosody corpus");
  add_toy_model_flags(toy_train, train_opt);
  toy_train->add_option("--out-dir", train_opt.out_dir, "Checkpoint/loss output directory")
      ->capture_default_str();
  toy_train->add_flag("--unconditioned", train_opt.unconditioned,
                      "Replace the GS input with a constant (ablation)");
  toy_train->callback([&] { action = [&] { return run_toy_train(train_opt); }; });

  ToyOptions grad_opt;
  grad_opt.model.width = 8;
  grad_opt.model.n_mels = 10;
  grad_opt.dataset.n_texts = 6;
  grad_opt.dataset.variants_per_text = 2;
  grad_opt.dataset.min_len = 3;
  grad_opt.dataset.max_len = 6;
  auto* toy_grad = toy->add_subcommand("gradcheck",
                                       "Verify analytic gradients against finite differences");
  add_toy_model_flags(toy_grad, grad_opt);
  toy_grad->add_option("--examples", grad_opt.gradcheck_examples, "Seeded examples to check")
      ->capture_default_str();
  toy_grad->callback([&] { action = [&] { return run_toy_gradcheck(grad_opt); }; });

  ToyOptions ablate_opt;
  ablate_opt.model.width = 16;
  ablate_opt.model.n_mels = 10;
  ablate_opt.model.max_steps = 12000;
  ablate_opt.dataset.n_texts = 12;
  ablate_opt.dataset.variants_per_text = 3;
  ablate_opt.dataset.min_len = 3;
  ablate_opt.dataset.max_len = 5;
  auto* toy_ablate = toy->add_subcommand("ablate", "Conditioned vs unconditioned validation MSE");
  add_toy_model_flags(toy_ablate, ablate_opt);
  toy_ablate->callback([&] { action = [&] { return run_toy_ablate(ablate_opt); }; });

  CLI11_PARSE(app, argc, argv);

  try {
    return action();
  } catch (const InvalidInputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCompute;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitCompute;
  }
}
