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
#include "setdet/decoder.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "setdet/error.hpp"

namespace setdet {

void DecoderConfig::validate() const {
  if (feature_dim <= 0 || hidden_dim <= 0 || steps <= 0) {
    throw Error("decoder dimensions must be positive");
  }
  if (!(input_scale > 0.0) || !(output_scale > 0.0)) {
    throw Error("decoder scale factors must be positive");
  }
}

DecoderParams::DecoderParams(const DecoderConfig& config) : config_(config) {
  config_.validate();
  values_.assign(gate_size() + head_size() * config_.head_count(), 0.0);
}

DecoderParams DecoderParams::uniform(const DecoderConfig& config, Rng& rng,
                                     double limit) {
  DecoderParams p(config);
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (double& v : p.values_) v = dist(rng);
  return p;
}

std::size_t DecoderParams::gate_size() const {
  return 4 * static_cast<std::size_t>(config_.hidden_dim) *
         config_.input_dim();
}

std::size_t DecoderParams::head_size() const {
  return 5 * static_cast<std::size_t>(config_.hidden_dim);
}

std::span<double> DecoderParams::gates() {
  return std::span<double>(values_).first(gate_size());
}
std::span<const double> DecoderParams::gates() const {
  return std::span<const double>(values_).first(gate_size());
}

std::span<double> DecoderParams::head(int step) {
  const std::size_t k = config_.tied_heads ? 0 : static_cast<std::size_t>(step);
  return std::span<double>(values_).subspan(gate_size() + k * head_size(),
                                            head_size());
}
std::span<const double> DecoderParams::head(int step) const {
  const std::size_t k = config_.tied_heads ? 0 : static_cast<std::size_t>(step);
  return std::span<const double>(values_).subspan(
      gate_size() + k * head_size(), head_size());
}

std::vector<DecoderParams::TensorView> DecoderParams::tensors() const {
  std::vector<TensorView> out;
  out.push_back({"gates", 4 * static_cast<std::size_t>(config_.hidden_dim),
                 static_cast<std::size_t>(config_.input_dim()), 0});
  for (int k = 0; k < config_.head_count(); ++k) {
    out.push_back({"head" + std::to_string(k), 5,
                   static_cast<std::size_t>(config_.hidden_dim),
                   gate_size() + k * head_size()});
  }
  return out;
}

void DecoderParams::set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }

DecoderState initial_state(const DecoderConfig& config) {
  DecoderState s;
  s.cell.assign(config.hidden_dim, 0.0);
  s.hidden.assign(config.hidden_dim, 0.0);
  return s;
}

namespace {

using Step = ForwardCache::Step;

// y = A x for row-major A (rows x x.size()).
void matvec(std::span<const double> a, std::span<const double> x,
            std::span<double> y) {
  const std::size_t cols = x.size();
  for (std::size_t r = 0; r < y.size(); ++r) {
    const double* row = a.data() + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

// y += A^T x.
void matvec_t_acc(std::span<const double> a, std::span<const double> x,
                  std::span<double> y) {
  const std::size_t cols = y.size();
  for (std::size_t r = 0; r < x.size(); ++r) {
    const double* row = a.data() + r * cols;
    const double xr = x[r];
    if (xr == 0.0) continue;
    for (std::size_t c = 0; c < cols; ++c) y[c] += row[c] * xr;
  }
}

// A += x y^T.
void outer_acc(std::span<double> a, std::span<const double> x,
               std::span<const double> y) {
  const std::size_t cols = y.size();
  for (std::size_t r = 0; r < x.size(); ++r) {
    double* row = a.data() + r * cols;
    const double xr = x[r];
    if (xr == 0.0) continue;
    for (std::size_t c = 0; c < cols; ++c) row[c] += xr * y[c];
  }
}

// Gates and cell update for one step; fills everything in `s` except the
// dropout fields, `output` and `raw`.
void lstm_cell(const DecoderParams& params, std::span<const double> cell_prev,
               Step& s) {
  const DecoderConfig& cfg = params.config();
  const std::size_t h = cfg.hidden_dim;
  std::vector<double> a(4 * h);
  matvec(params.gates(), s.z, a);
  s.in_gate.resize(h);
  s.forget_gate.resize(h);
  s.out_gate.resize(h);
  s.cand.resize(h);
  s.cell_prev.assign(cell_prev.begin(), cell_prev.end());
  s.cell.resize(h);
  s.cell_out.resize(h);
  for (std::size_t k = 0; k < h; ++k) {
    s.in_gate[k] = sigmoid(a[k]);
    s.forget_gate[k] = sigmoid(a[h + k]);
    s.out_gate[k] = sigmoid(a[2 * h + k]);
    s.cand[k] = std::tanh(a[3 * h + k]);
    s.cell[k] = s.forget_gate[k] * cell_prev[k] + s.in_gate[k] * s.cand[k];
    s.cell_out[k] = cfg.tanh_on_cell_output ? std::tanh(s.cell[k]) : s.cell[k];
  }
}

void head_forward(const DecoderParams& params, int step, Step& s) {
  matvec(params.head(step), s.output, s.raw);
}

std::vector<double> build_input(const DecoderConfig& cfg,
                                std::span<const double> scaled_features,
                                std::span<const double> prev_output) {
  std::vector<double> z(cfg.input_dim(), 0.0);
  std::copy(scaled_features.begin(), scaled_features.end(), z.begin());
  std::copy(prev_output.begin(), prev_output.end(),
            z.begin() + cfg.feature_dim);
  return z;
}

}  // namespace

StepOutput lstm_step(const DecoderParams& params, const DecoderState& state,
                     std::span<const double> input) {
  const DecoderConfig& cfg = params.config();
  if (input.size() != static_cast<std::size_t>(cfg.feature_dim) ||
      state.hidden.size() != static_cast<std::size_t>(cfg.hidden_dim) ||
      state.cell.size() != static_cast<std::size_t>(cfg.hidden_dim)) {
    throw Error("lstm_step: shape mismatch");
  }
  if (state.step < 0 || state.step >= cfg.steps) {
    throw Error("lstm_step: step out of range");
  }
  Step s;
  s.z = build_input(cfg, input, state.hidden);
  lstm_cell(params, state.cell, s);
  s.output.resize(cfg.hidden_dim);
  for (int k = 0; k < cfg.hidden_dim; ++k) {
    s.output[k] = s.out_gate[k] * s.cell_out[k];
  }
  head_forward(params, state.step, s);

  StepOutput out;
  out.state.cell = std::move(s.cell);
  out.state.hidden = std::move(s.output);
  out.state.step = state.step + 1;
  out.raw_output = s.raw;
  return out;
}

DropoutResult apply_dropout(std::span<const double> hidden, double rate,
                            Rng& rng, bool training) {
  if (rate < 0.0 || rate >= 1.0) throw Error("dropout rate must be in [0, 1)");
  DropoutResult r;
  r.output.assign(hidden.begin(), hidden.end());
  r.scale.assign(hidden.size(), 1.0);
  if (!training || rate == 0.0) return r;
  const double keep = 1.0 - rate;
  std::bernoulli_distribution keep_unit(keep);
  for (std::size_t k = 0; k < hidden.size(); ++k) {
    r.scale[k] = keep_unit(rng) ? 1.0 / keep : 0.0;
    r.output[k] = hidden[k] * r.scale[k];
  }
  return r;
}

RegionPrediction decode_region(const DecoderParams& params,
                               std::span<const double> features,
                               ForwardCache* cache, DropoutSpec dropout) {
  const DecoderConfig& cfg = params.config();
  if (features.size() != static_cast<std::size_t>(cfg.feature_dim)) {
    throw Error("decode_region: expected " + std::to_string(cfg.feature_dim) +
                " features, got " + std::to_string(features.size()));
  }
  std::vector<double> scaled(features.size());
  for (std::size_t k = 0; k < features.size(); ++k) {
    scaled[k] = features[k] / cfg.input_scale;
  }
  const std::vector<double> no_features(features.size(), 0.0);

  RegionPrediction pred;
  pred.candidates.reserve(cfg.steps);
  ForwardCache local;
  ForwardCache& fc = cache ? *cache : local;
  fc.steps.assign(cfg.steps, Step{});

  std::vector<double> prev_output(cfg.hidden_dim, 0.0);
  std::vector<double> cell(cfg.hidden_dim, 0.0);
  for (int t = 0; t < cfg.steps; ++t) {
    Step& s = fc.steps[t];
    const bool present = cfg.features_every_step || t == 0;
    s.z = build_input(cfg, present ? scaled : no_features, prev_output);
    lstm_cell(params, cell, s);
    std::vector<double> hidden(cfg.hidden_dim);
    for (int k = 0; k < cfg.hidden_dim; ++k) {
      hidden[k] = s.out_gate[k] * s.cell_out[k];
    }
    if (dropout.rng != nullptr) {
      DropoutResult d = apply_dropout(hidden, dropout.rate, *dropout.rng, true);
      s.output = std::move(d.output);
      s.drop_scale = std::move(d.scale);
    } else {
      s.output = std::move(hidden);
      s.drop_scale.assign(cfg.hidden_dim, 1.0);
    }
    head_forward(params, t, s);

    Candidate c;
    c.geometry = {cfg.output_scale * s.raw[0], cfg.output_scale * s.raw[1],
                  cfg.output_scale * s.raw[2], cfg.output_scale * s.raw[3]};
    c.confidence = sigmoid(s.raw[4]);
    c.rank = t + 1;
    pred.candidates.push_back(c);

    prev_output = s.output;
    cell = s.cell;
  }
  return pred;
}

DecoderGradients decoder_backward(const DecoderParams& params,
                                  const ForwardCache& cache,
                                  const LossGradients& upstream) {
  const DecoderConfig& cfg = params.config();
  const std::size_t steps = static_cast<std::size_t>(cfg.steps);
  if (cache.steps.size() != steps) {
    throw Error("decoder_backward: missing forward cache");
  }
  if (upstream.d_positions.size() != steps ||
      upstream.d_confidence_logits.size() != steps) {
    throw Error("decoder_backward: upstream gradients must cover " +
                std::to_string(steps) + " candidates");
  }
  const std::size_t f = cfg.feature_dim;
  const std::size_t h = cfg.hidden_dim;

  DecoderGradients g{DecoderParams(cfg), std::vector<double>(f, 0.0)};
  std::vector<double> d_output_next(h, 0.0);  // from the next step's input
  std::vector<double> d_cell_next(h, 0.0);
  std::vector<double> da(4 * h);
  std::vector<double> dz(f + h);

  for (std::size_t ti = steps; ti-- > 0;) {
    const Step& s = cache.steps[ti];
    const int t = static_cast<int>(ti);
    std::array<double, 5> d_raw{};
    for (int k = 0; k < 4; ++k) {
      d_raw[k] = cfg.output_scale * upstream.d_positions[ti][k];
    }
    d_raw[4] = upstream.d_confidence_logits[ti];

    outer_acc(g.params.head(t), d_raw, s.output);
    std::vector<double> d_output = d_output_next;
    matvec_t_acc(params.head(t), d_raw, d_output);

    for (std::size_t k = 0; k < h; ++k) {
      const double d_hidden = d_output[k] * s.drop_scale[k];
      const double d_out_gate = d_hidden * s.cell_out[k];
      double d_cell = d_hidden * s.out_gate[k];
      if (cfg.tanh_on_cell_output) {
        d_cell *= 1.0 - s.cell_out[k] * s.cell_out[k];
      }
      d_cell += d_cell_next[k];
      const double d_forget = d_cell * s.cell_prev[k];
      const double d_in = d_cell * s.cand[k];
      const double d_cand = d_cell * s.in_gate[k];
      d_cell_next[k] = d_cell * s.forget_gate[k];

      da[k] = d_in * s.in_gate[k] * (1.0 - s.in_gate[k]);
      da[h + k] = d_forget * s.forget_gate[k] * (1.0 - s.forget_gate[k]);
      da[2 * h + k] = d_out_gate * s.out_gate[k] * (1.0 - s.out_gate[k]);
      da[3 * h + k] = d_cand * (1.0 - s.cand[k] * s.cand[k]);
    }

    outer_acc(g.params.gates(), da, s.z);
    std::fill(dz.begin(), dz.end(), 0.0);
    matvec_t_acc(params.gates(), da, dz);

    if (cfg.features_every_step || t == 0) {
      for (std::size_t k = 0; k < f; ++k) {
        g.d_features[k] += dz[k] / cfg.input_scale;
      }
    }
    std::copy(dz.begin() + f, dz.end(), d_output_next.begin());
  }
  return g;
}

std::vector<Candidate> threshold_cutoff(const RegionPrediction& prediction,
                                        double threshold) {
  std::vector<Candidate> kept;
  for (const Candidate& c : prediction.candidates) {
    if (c.confidence < threshold) break;
    kept.push_back(c);
  }
  return kept;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr const char* kCheckpointMagic = "setdet-checkpoint";

void write_number(std::ostream& os, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  os.write(buf, res.ptr - buf);
}

double parse_number(const std::string& token, const std::string& where) {
  double v = 0.0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw Error("checkpoint: bad number '" + token + "' in " + where);
  }
  return v;
}

void write_tensors(std::ostream& os, const std::string& prefix,
                   const DecoderParams& p) {
  for (const auto& t : p.tensors()) {
    os << "tensor " << prefix << "/" << t.name << " " << t.rows << " "
       << t.cols << "\n";
    for (std::size_t r = 0; r < t.rows; ++r) {
      for (std::size_t c = 0; c < t.cols; ++c) {
        if (c) os << ' ';
        write_number(os, p.flat()[t.offset + r * t.cols + c]);
      }
      os << "\n";
    }
  }
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write checkpoint " + path.string());
  const DecoderConfig& c = ck.params.config();
  os << kCheckpointMagic << "\n";
  os << "format_version " << kCheckpointFormatVersion << "\n";
  os << "feature_dim " << c.feature_dim << "\n";
  os << "hidden_dim " << c.hidden_dim << "\n";
  os << "steps " << c.steps << "\n";
  os << "tied_heads " << (c.tied_heads ? 1 : 0) << "\n";
  os << "features_every_step " << (c.features_every_step ? 1 : 0) << "\n";
  os << "tanh_on_cell_output " << (c.tanh_on_cell_output ? 1 : 0) << "\n";
  os << "input_scale ";
  write_number(os, c.input_scale);
  os << "\noutput_scale ";
  write_number(os, c.output_scale);
  os << "\niteration " << ck.iteration << "\n";
  write_tensors(os, "params", ck.params);
  if (ck.velocity) write_tensors(os, "velocity", *ck.velocity);
  os << "end\n";
  if (!os) throw Error("failed writing checkpoint " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open checkpoint " + path.string());
  const std::string where = path.string();
  std::string magic;
  std::getline(is, magic);
  if (magic != kCheckpointMagic) {
    throw Error("not a checkpoint file: " + where);
  }

  DecoderConfig cfg;
  std::int64_t iteration = 0;
  int version = -1;
  std::string key;
  // Header: key value lines until the first tensor.
  while (is >> key) {
    if (key == "tensor" || key == "end") break;
    std::string value;
    if (!(is >> value)) throw Error("checkpoint: truncated header in " + where);
    const double v = parse_number(value, where);
    if (key == "format_version") version = static_cast<int>(v);
    else if (key == "feature_dim") cfg.feature_dim = static_cast<int>(v);
    else if (key == "hidden_dim") cfg.hidden_dim = static_cast<int>(v);
    else if (key == "steps") cfg.steps = static_cast<int>(v);
    else if (key == "tied_heads") cfg.tied_heads = v != 0.0;
    else if (key == "features_every_step") cfg.features_every_step = v != 0.0;
    else if (key == "tanh_on_cell_output") cfg.tanh_on_cell_output = v != 0.0;
    else if (key == "input_scale") cfg.input_scale = v;
    else if (key == "output_scale") cfg.output_scale = v;
    else if (key == "iteration") iteration = static_cast<std::int64_t>(v);
    // Unknown header keys are ignored.
  }
  if (version != kCheckpointFormatVersion) {
    throw Error("checkpoint " + where + ": unsupported format version " +
                std::to_string(version));
  }

  Checkpoint ck;
  ck.params = DecoderParams(cfg);
  ck.iteration = iteration;
  bool saw_velocity = false;
  DecoderParams velocity(cfg);

  while (key == "tensor") {
    std::string name;
    std::size_t rows = 0, cols = 0;
    if (!(is >> name >> rows >> cols)) {
      throw Error("checkpoint: bad tensor header in " + where);
    }
    const auto slash = name.find('/');
    if (slash == std::string::npos) {
      throw Error("checkpoint: unqualified tensor " + name + " in " + where);
    }
    const std::string group = name.substr(0, slash);
    const std::string leaf = name.substr(slash + 1);
    DecoderParams* target = nullptr;
    if (group == "params") {
      target = &ck.params;
    } else if (group == "velocity") {
      target = &velocity;
      saw_velocity = true;
    } else {
      throw Error("checkpoint: unknown tensor group " + group + " in " + where);
    }
    const auto views = target->tensors();
    auto it = std::find_if(views.begin(), views.end(),
                           [&](const auto& t) { return t.name == leaf; });
    if (it == views.end() || it->rows != rows || it->cols != cols) {
      throw Error("checkpoint: tensor " + name + " does not fit the config in " +
                  where);
    }
    std::string token;
    for (std::size_t k = 0; k < rows * cols; ++k) {
      if (!(is >> token)) throw Error("checkpoint: truncated tensor " + name);
      target->flat()[it->offset + k] = parse_number(token, where);
    }
    if (!(is >> key)) throw Error("checkpoint: missing end marker in " + where);
  }
  if (key != "end") throw Error("checkpoint: unexpected token '" + key + "'");
  if (saw_velocity) ck.velocity = std::move(velocity);
  return ck;
}

}  // namespace setdet
