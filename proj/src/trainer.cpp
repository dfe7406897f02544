/* Copyright 2026 The setdet Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "setdet/trainer.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "setdet/error.hpp"
#include "setdet/loss.hpp"
#include "setdet/pipeline.hpp"

namespace setdet {

void TrainConfig::validate() const {
  if (!(alpha > 0.0) || !(lr > 0.0) || !(clip_norm > 0.0) ||
      !(lr_decay > 0.0)) {
    throw Error("alpha, lr, clip_norm and lr_decay must be positive");
  }
  if (momentum < 0.0 || momentum >= 1.0) throw Error("momentum must be in [0, 1)");
  if (decay_every <= 0) throw Error("decay_every must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw Error("dropout must be in [0, 1)");
  if (iterations < 0 || eval_every < 0) {
    throw Error("iterations and eval_every must be >= 0");
  }
  if (!(eval_threshold > 0.0 && eval_threshold < 1.0)) {
    throw Error("eval_threshold must be in (0, 1)");
  }
  decoder.validate();
  features.validate();
  if (decoder.feature_dim != features.feature_dim()) {
    throw Error("decoder feature_dim must equal feature_grid^2");
  }
}

double clip_gradients(std::span<double> grads, double clip_norm) {
  double sq = 0.0;
  for (double g : grads) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > clip_norm) {
    const double s = clip_norm / norm;
    for (double& g : grads) g *= s;
  }
  return norm;
}

void sgd_momentum_step(std::span<double> params, std::span<double> velocity,
                       std::span<const double> grads, double lr,
                       double momentum) {
  if (params.size() != velocity.size() || params.size() != grads.size()) {
    throw Error("sgd_momentum_step: shape mismatch");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    velocity[k] = momentum * velocity[k] - lr * grads[k];
    params[k] += velocity[k];
  }
}

double lr_at(std::int64_t iteration, const TrainConfig& config) {
  const std::int64_t drops = iteration / config.decay_every;
  return config.lr * std::pow(config.lr_decay, static_cast<double>(drops));
}

DecoderParams initial_params(const TrainConfig& config) {
  Rng rng(derive_seed(config.seed, "init", 0));
  return DecoderParams::uniform(config.decoder, rng, 0.1);
}

SceneStep scene_loss_and_gradients(const DecoderParams& params,
                                   const Scene& scene,
                                   const TrainConfig& config, Rng& rng,
                                   bool training) {
  SceneStep out{0.0, DecoderParams(params.config())};
  const std::vector<RegionSample> samples =
      encode_scene(scene, config.layout, config.features, &rng);
  ForwardCache cache;
  for (const RegionSample& s : samples) {
    DropoutSpec drop;
    if (training && config.dropout > 0.0) drop = {config.dropout, &rng};
    const RegionPrediction pred = decode_region(params, s.features, &cache, drop);
    const Matching m =
        match_for_loss(s.ground_truth, pred.candidates, config.loss_mode);
    out.loss +=
        loss_value(s.ground_truth, pred.candidates, m, config.alpha).total;
    const LossGradients lg =
        loss_gradients(s.ground_truth, pred.candidates, m, config.alpha);
    const DecoderGradients dg = decoder_backward(params, cache, lg);
    auto acc = out.grads.flat();
    auto add = dg.params.flat();
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += add[k];
  }
  return out;
}

namespace {

// Jittered scene unless jitter pushes some region past the decoder's
// candidate budget.
Scene training_view(const Scene& scene, const TrainConfig& config, Rng& rng) {
  if (!config.jitter) return scene;
  Scene j = jitter_scene(scene, rng, config.jitter_config);
  for (const Point2& c :
       region_centers(j.width, j.height, config.layout)) {
    int count = 0;
    for (const BoxGeometry& b : j.boxes) {
      if (in_central_region(b.x, b.y, c, config.layout.region_size)) ++count;
    }
    if (count > config.decoder.steps) return scene;
  }
  return j;
}

}  // namespace

double validation_ap(const DecoderParams& params, std::span<const Scene> scenes,
                     const TrainConfig& config) {
  DetectConfig dc;
  dc.layout = config.layout;
  dc.features = config.features;
  dc.threshold = config.eval_threshold;
  dc.noise_seed = derive_seed(config.seed, "validation", 0);
  const auto preds = detect_scenes(params, scenes, dc);
  return evaluate_predictions(scenes, preds).summary.ap;
}

TrainResult train(const TrainConfig& config, std::span<const Scene> train_set,
                  std::span<const Scene> val_set, const Checkpoint* resume,
                  const std::function<void(const TrainLogRow&)>& on_log) {
  config.validate();
  if (train_set.empty()) throw Error("training set is empty");

  TrainResult result;
  Checkpoint& ck = result.checkpoint;
  if (resume != nullptr) {
    if (!(resume->params.config() == config.decoder)) {
      throw Error("checkpoint decoder config does not match the training config");
    }
    ck = *resume;
    if (!ck.velocity) ck.velocity = DecoderParams(config.decoder);
  } else {
    ck.params = initial_params(config);
    ck.velocity = DecoderParams(config.decoder);
    ck.iteration = 0;
  }

  std::uniform_int_distribution<std::size_t> pick(0, train_set.size() - 1);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  while (ck.iteration < config.iterations) {
    const std::int64_t it = ck.iteration;
    Rng rng(derive_seed(config.seed, "iteration", static_cast<std::uint64_t>(it)));
    const Scene scene = training_view(train_set[pick(rng)], config, rng);
    SceneStep step = scene_loss_and_gradients(ck.params, scene, config, rng, true);
    if (!std::isfinite(step.loss)) {
      throw Error("training diverged: non-finite loss at iteration " +
                  std::to_string(it));
    }
    const double grad_norm = clip_gradients(step.grads.flat(), config.clip_norm);
    if (!std::isfinite(grad_norm)) {
      throw Error("training diverged: non-finite gradient at iteration " +
                  std::to_string(it));
    }
    const double lr = lr_at(it, config);
    sgd_momentum_step(ck.params.flat(), ck.velocity->flat(), step.grads.flat(),
                      lr, config.momentum);
    ck.iteration = it + 1;

    TrainLogRow row{ck.iteration, step.loss, lr, nan};
    const bool eval_now =
        !val_set.empty() &&
        ((config.eval_every > 0 && ck.iteration % config.eval_every == 0) ||
         ck.iteration == config.iterations);
    if (eval_now) row.val_ap = validation_ap(ck.params, val_set, config);
    result.log.push_back(row);
    if (on_log) on_log(row);
  }
  return result;
}

void write_metrics_csv(const std::filesystem::path& path,
                       std::span<const TrainLogRow> log) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  os << "iteration,loss,lr,val_ap\n";
  char buf[64];
  auto put = [&](double v) {
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    os.write(buf, res.ptr - buf);
  };
  for (const TrainLogRow& r : log) {
    os << r.iteration << ',';
    put(r.loss);
    os << ',';
    put(r.lr);
    os << ',';
    if (!std::isnan(r.val_ap)) put(r.val_ap);
    os << '\n';
  }
  if (!os) throw Error("failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// key=value configuration

KeyValues parse_key_values(std::istream& is, const std::string& source) {
  KeyValues kv;
  std::string line;
  int line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(source + ":" + std::to_string(line_no) +
                  ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw Error(source + ":" + std::to_string(line_no) + ": empty key");
    }
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open config " + path.string());
  return parse_key_values(is, path.string());
}

namespace {

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  if constexpr (std::is_same_v<T, bool>) {
    if (text == "1" || text == "true") return true;
    if (text == "0" || text == "false") return false;
    throw Error("config key '" + key + "': expected a boolean, got '" + text + "'");
  } else {
    T v{};
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
      throw Error("config key '" + key + "': bad value '" + text + "'");
    }
    return v;
  }
}

std::string format_value(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}
template <typename T>
std::string format_value(T v) requires std::is_integral_v<T> {
  if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
  else return std::to_string(v);
}

// Binds every config key to its field once, for both reading and writing.
template <typename Visitor>
void visit_fields(ExperimentConfig& c, Visitor&& v) {
  SceneConfig& s = c.scene;
  TrainConfig& t = c.train;
  v("width", s.width);
  v("height", s.height);
  v("min_boxes", s.min_boxes);
  v("max_boxes", s.max_boxes);
  v("min_size", s.min_size);
  v("max_size", s.max_size);
  v("aspect", s.aspect);
  v("overlap_fraction", s.overlap_fraction);
  v("partner_probability", s.partner_probability);
  v("max_per_region", s.max_per_region);
  v("max_attempts", s.max_attempts);
  v("stride", t.layout.stride);
  v("region_size", t.layout.region_size);
  v("alpha", t.alpha);
  v("lr", t.lr);
  v("momentum", t.momentum);
  v("clip_norm", t.clip_norm);
  v("lr_decay", t.lr_decay);
  v("decay_every", t.decay_every);
  v("dropout", t.dropout);
  v("iterations", t.iterations);
  v("seed", t.seed);
  v("jitter", t.jitter);
  v("jitter_shift", t.jitter_config.max_shift);
  v("jitter_min_scale", t.jitter_config.min_scale);
  v("jitter_max_scale", t.jitter_config.max_scale);
  v("eval_every", t.eval_every);
  v("eval_threshold", t.eval_threshold);
  v("hidden_dim", t.decoder.hidden_dim);
  v("steps", t.decoder.steps);
  v("tied_heads", t.decoder.tied_heads);
  v("features_every_step", t.decoder.features_every_step);
  v("tanh_on_cell_output", t.decoder.tanh_on_cell_output);
  v("input_scale", t.decoder.input_scale);
  v("output_scale", t.decoder.output_scale);
  v("feature_grid", t.features.grid);
  v("receptive_field", t.features.receptive_field);
  v("bump_sigma", t.features.bump_sigma);
  v("area_gain", t.features.area_gain);
  v("background", t.features.background);
  v("noise_sigma", t.features.noise_sigma);
}

}  // namespace

void apply_key_values(ExperimentConfig& config, const KeyValues& kv) {
  for (const auto& [key, text] : kv) {
    if (key == "loss_mode") {
      config.train.loss_mode = parse_loss_mode(text);
      continue;
    }
    bool known = false;
    visit_fields(config, [&](const char* name, auto& field) {
      if (known || key != name) return;
      known = true;
      field = parse_value<std::remove_reference_t<decltype(field)>>(key, text);
    });
    if (!known) throw Error("unknown config key '" + key + "'");
  }
  config.train.decoder.feature_dim = config.train.features.feature_dim();
  config.scene.layout = config.train.layout;
}

KeyValues to_key_values(const ExperimentConfig& config) {
  ExperimentConfig copy = config;
  KeyValues kv;
  kv["loss_mode"] = std::string(loss_mode_name(copy.train.loss_mode));
  visit_fields(copy, [&](const char* name, auto& field) {
    kv[name] = format_value(field);
  });
  return kv;
}

}  // namespace setdet
