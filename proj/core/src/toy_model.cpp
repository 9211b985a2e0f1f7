#include "prosody/toy_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "prosody/error.hpp"
#include "prosody/io.hpp"

namespace prosody {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Fixed pseudo-random per-(symbol, mel) texture in [-0.2, 0.2]; plays the
// role of phonetic identity in the synthetic targets.
double symbol_texture(int symbol, int mel) {
  const std::uint64_t u = splitmix64(static_cast<std::uint64_t>(symbol) * 1000003ULL +
                                     static_cast<std::uint64_t>(mel));
  return (static_cast<double>(u >> 11) * 0x1.0p-53 - 0.5) * 0.4;
}

void fill_normal(std::vector<double>& v, Rng& rng, double scale) {
  for (auto& x : v) x = rng.normal(0.0, scale);
}

// Everything the backward pass needs from a forward pass.
struct ForwardCache {
  std::vector<double> ref_vec;     // d
  std::vector<double> hidden;      // T x d, encoder states
  std::vector<double> dec_hidden;  // T x d, tanh decoder layer
  std::vector<double> prediction;  // (T*k) x n_mels
};

void run_forward(const ToyModel& model, std::span<const int> text,
                 std::span<const double, GsFeatures::kDim> gs, std::span<const double> target,
                 ForwardCache& cache, double* loss_out) {
  const auto& cfg = model.cfg;
  const std::size_t d = static_cast<std::size_t>(cfg.width);
  const std::size_t n_mels = static_cast<std::size_t>(cfg.n_mels);
  const std::size_t k = static_cast<std::size_t>(cfg.frames_per_symbol);
  const std::size_t T = text.size();
  if (T == 0) throw InvalidInputError("toy_forward: empty text");
  for (int s : text)
    if (s < 0 || s >= cfg.charset_size)
      throw InvalidInputError("toy_forward: symbol id out of range");
  const std::size_t n_frames = T * k;
  if (!target.empty() && target.size() != n_frames * n_mels)
    throw InvalidInputError("toy_forward: target shape mismatch");

  cache.ref_vec = ref_encode(gs, model.ref);
  cache.hidden.assign(T * d, 0.0);
  cache.dec_hidden.assign(T * d, 0.0);
  cache.prediction.assign(n_frames * n_mels, 0.0);

  std::vector<double> pre(d);
  for (std::size_t t = 0; t < T; ++t) {
    const double* x = model.embedding.data() + static_cast<std::size_t>(text[t]) * d;
    const double* h_prev = t > 0 ? cache.hidden.data() + (t - 1) * d : nullptr;
    for (std::size_t o = 0; o < d; ++o) {
      double acc = model.enc_b[o];
      const double* wx = model.enc_wx.data() + o * d;
      for (std::size_t i = 0; i < d; ++i) acc += wx[i] * x[i];
      if (h_prev != nullptr) {
        const double* wh = model.enc_wh.data() + o * d;
        for (std::size_t i = 0; i < d; ++i) acc += wh[i] * h_prev[i];
      }
      pre[o] = acc;
    }
    double* h = cache.hidden.data() + t * d;
    for (std::size_t o = 0; o < d; ++o) h[o] = std::tanh(pre[o]);

    // Conditioning site: broadcast sum of the reference vector.
    double* z = cache.dec_hidden.data() + t * d;
    for (std::size_t o = 0; o < d; ++o) {
      double acc = model.dec_b1[o];
      const double* w = model.dec_w1.data() + o * d;
      for (std::size_t i = 0; i < d; ++i) acc += w[i] * (h[i] + cache.ref_vec[i]);
      z[o] = std::tanh(acc);
    }

    for (std::size_t j = 0; j < k; ++j) {
      double* y = cache.prediction.data() + (t * k + j) * n_mels;
      const double* slot = model.slot_bias.data() + j * n_mels;
      for (std::size_t m = 0; m < n_mels; ++m) {
        double acc = model.dec_b2[m] + slot[m];
        const double* w = model.dec_w2.data() + m * d;
        for (std::size_t i = 0; i < d; ++i) acc += w[i] * z[i];
        y[m] = acc;
      }
    }
  }

  double loss = 0.0;
  if (!target.empty()) {
    for (std::size_t i = 0; i < cache.prediction.size(); ++i) {
      const double e = cache.prediction[i] - target[i];
      loss += e * e;
    }
    loss /= static_cast<double>(cache.prediction.size());
  }
  *loss_out = loss;
}

// Gradient arrays in the same order as ToyModel::params().
struct GradSet {
  std::vector<std::vector<double>> grads;

  explicit GradSet(ToyModel& model) {
    for (auto& p : model.params()) grads.emplace_back(p.values->size(), 0.0);
  }
  void zero() {
    for (auto& g : grads) std::fill(g.begin(), g.end(), 0.0);
  }
};

// Indices into ToyModel::params(); keep in sync with that order.
enum ParamIndex {
  kEmbedding = 0,
  kEncWx,
  kEncWh,
  kEncB,
  kRefWeight,
  kRefBias,
  kDecW1,
  kDecB1,
  kDecW2,
  kDecB2,
  kSlotBias,
};

void run_backward(const ToyModel& model, std::span<const int> text,
                  std::span<const double, GsFeatures::kDim> gs, std::span<const double> target,
                  const ForwardCache& cache, GradSet& out) {
  const auto& cfg = model.cfg;
  const std::size_t d = static_cast<std::size_t>(cfg.width);
  const std::size_t n_mels = static_cast<std::size_t>(cfg.n_mels);
  const std::size_t k = static_cast<std::size_t>(cfg.frames_per_symbol);
  const std::size_t T = text.size();
  const double inv_cells = 1.0 / static_cast<double>(cache.prediction.size());

  auto& g_emb = out.grads[kEmbedding];
  auto& g_wx = out.grads[kEncWx];
  auto& g_wh = out.grads[kEncWh];
  auto& g_be = out.grads[kEncB];
  auto& g_rw = out.grads[kRefWeight];
  auto& g_rb = out.grads[kRefBias];
  auto& g_w1 = out.grads[kDecW1];
  auto& g_b1 = out.grads[kDecB1];
  auto& g_w2 = out.grads[kDecW2];
  auto& g_b2 = out.grads[kDecB2];
  auto& g_slot = out.grads[kSlotBias];

  std::vector<double> d_hidden(T * d, 0.0);  // dL/dh[t]
  std::vector<double> d_ref(d, 0.0);         // dL/dr
  std::vector<double> du(d), da(d);

  for (std::size_t t = 0; t < T; ++t) {
    const double* z = cache.dec_hidden.data() + t * d;
    std::vector<double> dz(d, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t f = t * k + j;
      const double* y = cache.prediction.data() + f * n_mels;
      const double* tgt = target.data() + f * n_mels;
      for (std::size_t m = 0; m < n_mels; ++m) {
        const double dy = 2.0 * (y[m] - tgt[m]) * inv_cells;
        g_b2[m] += dy;
        g_slot[j * n_mels + m] += dy;
        double* gw = g_w2.data() + m * d;
        const double* w = model.dec_w2.data() + m * d;
        for (std::size_t i = 0; i < d; ++i) {
          gw[i] += dy * z[i];
          dz[i] += dy * w[i];
        }
      }
    }

    const double* h = cache.hidden.data() + t * d;
    for (std::size_t o = 0; o < d; ++o) du[o] = dz[o] * (1.0 - z[o] * z[o]);
    for (std::size_t o = 0; o < d; ++o) {
      g_b1[o] += du[o];
      double* gw = g_w1.data() + o * d;
      const double* w = model.dec_w1.data() + o * d;
      for (std::size_t i = 0; i < d; ++i) {
        gw[i] += du[o] * (h[i] + cache.ref_vec[i]);
        // dc[i]; h and r receive the same signal.
        d_hidden[t * d + i] += du[o] * w[i];
        d_ref[i] += du[o] * w[i];
      }
    }
  }

  // Reference encoder: r = weight^T gs + bias.
  for (std::size_t i = 0; i < GsFeatures::kDim; ++i) {
    double* gw = g_rw.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) gw[j] += gs[i] * d_ref[j];
  }
  for (std::size_t j = 0; j < d; ++j) g_rb[j] += d_ref[j];

  // Backpropagation through time over the encoder.
  for (std::size_t ti = T; ti-- > 0;) {
    const double* h = cache.hidden.data() + ti * d;
    const double* dh = d_hidden.data() + ti * d;
    for (std::size_t o = 0; o < d; ++o) da[o] = dh[o] * (1.0 - h[o] * h[o]);

    const double* x = model.embedding.data() + static_cast<std::size_t>(text[ti]) * d;
    double* gx = g_emb.data() + static_cast<std::size_t>(text[ti]) * d;
    const double* h_prev = ti > 0 ? cache.hidden.data() + (ti - 1) * d : nullptr;
    double* dh_prev = ti > 0 ? d_hidden.data() + (ti - 1) * d : nullptr;

    for (std::size_t o = 0; o < d; ++o) {
      g_be[o] += da[o];
      double* gwx = g_wx.data() + o * d;
      const double* wx = model.enc_wx.data() + o * d;
      for (std::size_t i = 0; i < d; ++i) {
        gwx[i] += da[o] * x[i];
        gx[i] += da[o] * wx[i];
      }
      if (h_prev != nullptr) {
        double* gwh = g_wh.data() + o * d;
        const double* wh = model.enc_wh.data() + o * d;
        for (std::size_t i = 0; i < d; ++i) {
          gwh[i] += da[o] * h_prev[i];
          dh_prev[i] += da[o] * wh[i];
        }
      }
    }
  }
}

std::array<double, GsFeatures::kDim> conditioning_input(const ToyExample& example,
                                                        const NormStats& stats,
                                                        bool conditioned) {
  if (!conditioned) return {};  // corpus mean in normalized space
  GsFeatures gs;
  gs.values = example.gs;
  return normalize(gs, stats);
}

double mean_loss(const ToyModel& model, std::span<const ToyExample> examples,
                 const NormStats& stats, bool conditioned) {
  if (examples.empty()) return 0.0;
  ForwardCache cache;
  double total = 0.0;
  for (const auto& ex : examples) {
    const auto gs = conditioning_input(ex, stats, conditioned);
    double loss = 0.0;
    run_forward(model, ex.text, std::span<const double, GsFeatures::kDim>(gs), ex.target, cache,
                &loss);
    total += loss;
  }
  return total / static_cast<double>(examples.size());
}

}  // namespace

ToyModel ToyModel::init(const ToyModelConfig& cfg, bool conditioned) {
  if (cfg.charset_size < 1 || cfg.width < 1 || cfg.n_mels < 1 || cfg.frames_per_symbol < 1)
    throw InvalidInputError("ToyModel: bad config");
  const auto d = static_cast<std::size_t>(cfg.width);
  ToyModel model;
  model.cfg = cfg;
  model.conditioned = conditioned;

  Rng rng(cfg.seed);
  model.embedding.assign(static_cast<std::size_t>(cfg.charset_size) * d, 0.0);
  model.enc_wx.assign(d * d, 0.0);
  model.enc_wh.assign(d * d, 0.0);
  model.enc_b.assign(d, 0.0);
  model.ref = ConditioningParams::zeros(d);
  model.dec_w1.assign(d * d, 0.0);
  model.dec_b1.assign(d, 0.0);
  model.dec_w2.assign(static_cast<std::size_t>(cfg.n_mels) * d, 0.0);
  model.dec_b2.assign(static_cast<std::size_t>(cfg.n_mels), 0.0);
  model.slot_bias.assign(static_cast<std::size_t>(cfg.frames_per_symbol) * cfg.n_mels, 0.0);

  fill_normal(model.embedding, rng, 0.1);
  fill_normal(model.enc_wx, rng, 0.1);
  fill_normal(model.enc_wh, rng, 0.05);
  fill_normal(model.ref.weight, rng, 0.1);
  fill_normal(model.dec_w1, rng, 0.1);
  fill_normal(model.dec_w2, rng, 0.1);
  return model;
}

std::vector<ToyModel::ParamRef> ToyModel::params() {
  return {
      {"embedding", &embedding}, {"enc_wx", &enc_wx},
      {"enc_wh", &enc_wh},       {"enc_b", &enc_b},
      {"ref_weight", &ref.weight}, {"ref_bias", &ref.bias},
      {"dec_w1", &dec_w1},       {"dec_b1", &dec_b1},
      {"dec_w2", &dec_w2},       {"dec_b2", &dec_b2},
      {"slot_bias", &slot_bias},
  };
}

ForwardResult toy_forward(const ToyModel& model, std::span<const int> text,
                          std::span<const double, GsFeatures::kDim> gs_normalized,
                          std::span<const double> target) {
  ForwardCache cache;
  ForwardResult result;
  run_forward(model, text, gs_normalized, target, cache, &result.loss);
  result.prediction = std::move(cache.prediction);
  return result;
}

double grad_check(ToyModel& model, const ToyExample& example, const NormStats& gs_stats,
                  double h) {
  const auto gs = conditioning_input(example, gs_stats, model.conditioned);
  const std::span<const double, GsFeatures::kDim> gs_span(gs);

  ForwardCache cache;
  double loss = 0.0;
  run_forward(model, example.text, gs_span, example.target, cache, &loss);
  if (!std::isfinite(loss)) throw TrainingFailedError("grad_check: non-finite loss");

  GradSet analytic(model);
  run_backward(model, example.text, gs_span, example.target, cache, analytic);

  double max_rel = 0.0;
  auto params = model.params();
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto& values = *params[p].values;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      double lo = 0.0, hi = 0.0;
      values[i] = saved + h;
      run_forward(model, example.text, gs_span, example.target, cache, &hi);
      values[i] = saved - h;
      run_forward(model, example.text, gs_span, example.target, cache, &lo);
      values[i] = saved;

      const double fd = (hi - lo) / (2.0 * h);
      const double an = analytic.grads[p][i];
      const double rel = std::abs(an - fd) / std::max(1e-8, std::abs(an) + std::abs(fd));
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

TrainResult train_toy(const ToyDataset& dataset, const ToyModelConfig& cfg, bool conditioned) {
  if (dataset.train.empty()) throw InvalidInputError("train_toy: empty training set");

  TrainResult result;
  result.model = ToyModel::init(cfg, conditioned);
  ToyModel& model = result.model;

  // Separate stream from the init stream so adding parameters does not
  // reshuffle the batch order.
  Rng rng(cfg.seed ^ 0xD1B54A32D192ED03ULL);

  GradSet grads(model);
  ForwardCache cache;
  auto params = model.params();

  double train_accum = 0.0;
  int accum_count = 0;
  for (int step = 1; step <= cfg.max_steps; ++step) {
    grads.zero();
    double batch_loss = 0.0;
    for (int b = 0; b < cfg.batch_size; ++b) {
      const auto& ex = dataset.train[rng.uniform_index(dataset.train.size())];
      const auto gs = conditioning_input(ex, dataset.gs_stats, conditioned);
      const std::span<const double, GsFeatures::kDim> gs_span(gs);
      double loss = 0.0;
      run_forward(model, ex.text, gs_span, ex.target, cache, &loss);
      run_backward(model, ex.text, gs_span, ex.target, cache, grads);
      batch_loss += loss;
    }
    batch_loss /= cfg.batch_size;
    if (!std::isfinite(batch_loss))
      throw TrainingFailedError("train_toy: loss diverged at step " + std::to_string(step));

    const double scale = cfg.learning_rate / cfg.batch_size;
    for (std::size_t p = 0; p < params.size(); ++p) {
      auto& values = *params[p].values;
      const auto& g = grads.grads[p];
      for (std::size_t i = 0; i < values.size(); ++i) values[i] -= scale * g[i];
    }

    train_accum += batch_loss;
    ++accum_count;
    if (step % cfg.log_every == 0 || step == cfg.max_steps) {
      LossRow row;
      row.step = step;
      row.train_mse = train_accum / accum_count;
      row.val_mse = mean_loss(model, dataset.val, dataset.gs_stats, conditioned);
      result.history.push_back(row);
      train_accum = 0.0;
      accum_count = 0;
    }
  }

  result.final_val_mse = mean_loss(model, dataset.val, dataset.gs_stats, conditioned);
  return result;
}

ToyDataset make_synthetic_prosody_dataset(const SyntheticDatasetConfig& cfg) {
  if (cfg.n_texts < 1 || cfg.variants_per_text < 1 || cfg.min_len < 1 ||
      cfg.max_len < cfg.min_len)
    throw InvalidInputError("make_synthetic_prosody_dataset: bad config");

  Rng rng(cfg.seed);
  ToyDataset dataset;
  const std::size_t k = static_cast<std::size_t>(cfg.frames_per_symbol);
  const std::size_t n_mels = static_cast<std::size_t>(cfg.n_mels);

  auto make_variant = [&](const std::vector<int>& text) {
    ToyExample ex;
    ex.text = text;
    for (std::size_t d = 0; d < GsFeatures::kDim; ++d)
      ex.gs[d] = rng.normal(cfg.gs_mean[d], cfg.gs_stddev[d]);

    // Level comes straight from the rms_mean dim; the band position tracks
    // the f0_mean dim.
    const double level = ex.gs[4];
    const double z0 = (ex.gs[0] - cfg.gs_mean[0]) / cfg.gs_stddev[0];
    const double center =
        std::clamp(0.5 * n_mels + z0 * 0.15 * n_mels, 2.0, static_cast<double>(n_mels) - 3.0);

    ex.target.resize(text.size() * k * n_mels);
    for (std::size_t t = 0; t < text.size(); ++t) {
      for (std::size_t j = 0; j < k; ++j) {
        double* row = ex.target.data() + (t * k + j) * n_mels;
        const double slot = 0.1 * (static_cast<double>(j) - (k - 1) / 2.0);
        for (std::size_t m = 0; m < n_mels; ++m) {
          const double dm = static_cast<double>(m) - center;
          row[m] = level + 0.5 * std::exp(-dm * dm / 18.0) + symbol_texture(text[t], m) + slot;
        }
      }
    }
    return ex;
  };

  for (int i = 0; i < cfg.n_texts; ++i) {
    const int len =
        cfg.min_len + static_cast<int>(rng.uniform_index(cfg.max_len - cfg.min_len + 1));
    std::vector<int> text(len);
    for (auto& s : text) s = static_cast<int>(rng.uniform_index(cfg.charset_size));

    for (int v = 0; v < cfg.variants_per_text; ++v) dataset.train.push_back(make_variant(text));
    for (int v = 0; v < cfg.val_variants_per_text; ++v) dataset.val.push_back(make_variant(text));
  }

  std::vector<GsFeatures> train_gs(dataset.train.size());
  for (std::size_t i = 0; i < dataset.train.size(); ++i) train_gs[i].values = dataset.train[i].gs;
  dataset.gs_stats = fit_norm_stats(train_gs);
  return dataset;
}

void save_checkpoint(const std::filesystem::path& path, const ToyModel& model) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["conditioned"] = model.conditioned;
  j["config"] = {
      {"charset_size", model.cfg.charset_size},
      {"width", model.cfg.width},
      {"n_mels", model.cfg.n_mels},
      {"frames_per_symbol", model.cfg.frames_per_symbol},
      {"learning_rate", model.cfg.learning_rate},
      {"batch_size", model.cfg.batch_size},
      {"max_steps", model.cfg.max_steps},
      {"log_every", model.cfg.log_every},
      {"seed", model.cfg.seed},
  };

  const auto d = static_cast<std::size_t>(model.cfg.width);
  auto& params = j["params"];
  auto put = [&](const std::string& name, const std::vector<double>& values,
                 std::vector<std::size_t> shape) {
    params[name] = {{"shape", shape}, {"values", values}};
  };
  put("embedding", model.embedding, {static_cast<std::size_t>(model.cfg.charset_size), d});
  put("enc_wx", model.enc_wx, {d, d});
  put("enc_wh", model.enc_wh, {d, d});
  put("enc_b", model.enc_b, {d});
  put("ref_weight", model.ref.weight, {GsFeatures::kDim, d});
  put("ref_bias", model.ref.bias, {d});
  put("dec_w1", model.dec_w1, {d, d});
  put("dec_b1", model.dec_b1, {d});
  put("dec_w2", model.dec_w2, {static_cast<std::size_t>(model.cfg.n_mels), d});
  put("dec_b2", model.dec_b2, {static_cast<std::size_t>(model.cfg.n_mels)});
  put("slot_bias", model.slot_bias,
      {static_cast<std::size_t>(model.cfg.frames_per_symbol),
       static_cast<std::size_t>(model.cfg.n_mels)});

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InvalidInputError("cannot write checkpoint: " + path.string());
  out << j.dump(2) << '\n';
}

ToyModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open checkpoint: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError("bad checkpoint JSON: " + std::string(e.what()));
  }
  if (j.value("format_version", 0) != 1)
    throw InvalidInputError("unsupported checkpoint format_version");

  ToyModel model;
  const auto& c = j.at("config");
  model.cfg.charset_size = c.at("charset_size").get<int>();
  model.cfg.width = c.at("width").get<int>();
  model.cfg.n_mels = c.at("n_mels").get<int>();
  model.cfg.frames_per_symbol = c.at("frames_per_symbol").get<int>();
  model.cfg.learning_rate = c.at("learning_rate").get<double>();
  model.cfg.batch_size = c.at("batch_size").get<int>();
  model.cfg.max_steps = c.at("max_steps").get<int>();
  model.cfg.log_every = c.at("log_every").get<int>();
  model.cfg.seed = c.at("seed").get<std::uint64_t>();
  model.conditioned = j.at("conditioned").get<bool>();

  model.ref.width = static_cast<std::size_t>(model.cfg.width);
  auto params = model.params();
  for (auto& p : params) {
    const auto& entry = j.at("params").at(p.name);
    std::size_t expect = 1;
    for (const auto& s : entry.at("shape")) expect *= s.get<std::size_t>();
    *p.values = entry.at("values").get<std::vector<double>>();
    if (p.values->size() != expect)
      throw InvalidInputError("checkpoint shape mismatch for " + p.name);
  }

  const auto d = static_cast<std::size_t>(model.cfg.width);
  if (model.embedding.size() != static_cast<std::size_t>(model.cfg.charset_size) * d ||
      model.ref.weight.size() != GsFeatures::kDim * d || model.ref.bias.size() != d)
    throw InvalidInputError("checkpoint shapes inconsistent with config");
  return model;
}

void save_loss_history(const std::filesystem::path& path, std::span<const LossRow> history) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InvalidInputError("cannot write loss history: " + path.string());
  out << "step,train_mse,val_mse\n";
  for (const auto& row : history)
    out << row.step << ',' << format_double(row.train_mse) << ',' << format_double(row.val_mse)
        << '\n';
}

std::vector<LossRow> load_loss_history(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open loss history: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "step,train_mse,val_mse")
    throw InvalidInputError("bad loss history header in " + path.string());
  std::vector<LossRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string step, train, val;
    if (!std::getline(ss, step, ',') || !std::getline(ss, train, ',') || !std::getline(ss, val))
      throw InvalidInputError("bad loss history row in " + path.string());
    rows.push_back({std::stoi(step), std::stod(train), std::stod(val)});
  }
  return rows;
}

}  // namespace prosody
