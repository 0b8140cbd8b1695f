#include "fedreg/model.hpp"

#include <cmath>

#include "fedreg/errors.hpp"
#include "fedreg/rng.hpp"

namespace fedreg {

void ModelConfig::validate() const {
  if (n_blocks < 1) throw ConfigError("model: n_blocks must be >= 1");
  if (d_model < 1 || n_heads < 1 || d_ff < 1) throw ConfigError("model: dimensions must be >= 1");
  if (d_model % n_heads != 0) {
    throw ConfigError("model: d_model (" + std::to_string(d_model) +
                      ") must be divisible by n_heads (" + std::to_string(n_heads) + ")");
  }
  if (vocab_size < 2) throw ConfigError("model: vocab_size must be >= 2 (blank + tokens)");
  if (input_dim < 1) throw ConfigError("model: input_dim must be >= 1");
  for (int t : tap_positions) {
    if (t < 1 || t > n_blocks) {
      throw ConfigError("model: tap position " + std::to_string(t) + " outside 1.." +
                        std::to_string(n_blocks));
    }
  }
}

std::set<int> ModelConfig::effective_taps() const {
  if (!tap_positions.empty()) return tap_positions;
  std::set<int> all;
  for (int i = 1; i <= n_blocks; ++i) all.insert(i);
  return all;
}

ParamLayout::ParamLayout(const ModelConfig& cfg) {
  auto add = [&](std::string name, std::vector<std::size_t> shape, bool frontend = false) {
    index_[name] = specs_.size();
    total_scalars_ += shape_product(shape);
    specs_.push_back({std::move(name), std::move(shape), frontend});
  };
  std::size_t d = static_cast<std::size_t>(cfg.d_model);
  std::size_t ff = static_cast<std::size_t>(cfg.d_ff);
  add("frontend.weight", {static_cast<std::size_t>(cfg.input_dim), d}, true);
  add("frontend.bias", {d}, true);
  for (int b = 1; b <= cfg.n_blocks; ++b) {
    std::string p = "block" + std::to_string(b) + ".";
    add(p + "ln1.gain", {d});
    add(p + "ln1.bias", {d});
    add(p + "attn.wq", {d, d});
    add(p + "attn.bq", {d});
    add(p + "attn.wk", {d, d});
    add(p + "attn.bk", {d});
    add(p + "attn.wv", {d, d});
    add(p + "attn.bv", {d});
    add(p + "attn.wo", {d, d});
    add(p + "attn.bo", {d});
    add(p + "ln2.gain", {d});
    add(p + "ln2.bias", {d});
    add(p + "ffn.w1", {d, ff});
    add(p + "ffn.b1", {ff});
    add(p + "ffn.w2", {ff, d});
    add(p + "ffn.b2", {d});
  }
  add("head.weight", {d, static_cast<std::size_t>(cfg.vocab_size)});
  add("head.bias", {static_cast<std::size_t>(cfg.vocab_size)});
}

std::size_t ParamLayout::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter name '" + name + "'");
  return it->second;
}

ModelParams::ModelParams(const ModelConfig& cfg)
    : cfg_(cfg), layout_(std::make_shared<ParamLayout>(cfg)) {
  cfg_.validate();
  tensors_.reserve(layout_->specs().size());
  for (const auto& spec : layout_->specs()) tensors_.push_back(Tensor::zeros(spec.shape));
}

ModelParams ModelParams::init(const ModelConfig& cfg, std::uint64_t seed) {
  ModelParams p(cfg);
  Rng rng(splitmix64(seed ^ 0x6d6f64656cULL));
  constexpr double proj_std = 0.02;
  for (std::size_t i = 0; i < p.tensors_.size(); ++i) {
    const ParamSpec& spec = p.layout_->specs()[i];
    Tensor& t = p.tensors_[i];
    bool is_gain = spec.name.ends_with("gain");
    bool is_bias = spec.name.ends_with("bias") || spec.name.ends_with(".bq") ||
                   spec.name.ends_with(".bk") || spec.name.ends_with(".bv") ||
                   spec.name.ends_with(".bo") || spec.name.ends_with(".b1") ||
                   spec.name.ends_with(".b2");
    if (is_gain) {
      for (double& v : t.data) v = 1.0;
    } else if (is_bias) {
      // zeros already
    } else {
      for (double& v : t.data) v = proj_std * rng.gauss();
    }
  }
  return p;
}

std::vector<double> ModelParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(n_scalars());
  for (const Tensor& t : tensors_) flat.insert(flat.end(), t.data.begin(), t.data.end());
  return flat;
}

ModelParams ModelParams::unflatten(const ModelConfig& cfg, const std::vector<double>& flat) {
  ModelParams p(cfg);
  if (flat.size() != p.n_scalars()) {
    throw ConfigError("unflatten: expected " + std::to_string(p.n_scalars()) +
                      " scalars, got " + std::to_string(flat.size()));
  }
  std::size_t off = 0;
  for (Tensor& t : p.tensors_) {
    std::copy(flat.begin() + off, flat.begin() + off + t.size(), t.data.begin());
    off += t.size();
  }
  return p;
}

TapedParams stage_params(Graph& g, const ModelParams& params, bool trainable) {
  TapedParams tp;
  tp.source = &params;
  tp.tensors.reserve(params.n_tensors());
  for (std::size_t i = 0; i < params.n_tensors(); ++i) {
    tp.tensors.push_back(trainable ? g.leaf(params.tensor(i)) : g.constant(params.tensor(i)));
  }
  return tp;
}

Tensor sinusoidal_positions(std::size_t frames, std::size_t d_model) {
  Tensor pe = Tensor::zeros({frames, d_model});
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t i = 0; i < d_model; ++i) {
      double exponent = static_cast<double>(2 * (i / 2)) / static_cast<double>(d_model);
      double angle = static_cast<double>(t) / std::pow(10000.0, exponent);
      pe.data[t * d_model + i] = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return pe;
}

namespace {

// Pre-LN encoder block; shared by the full forward pass and resume_from_tap so
// the two paths are bitwise identical.
Value apply_block(Graph& g, const TapedParams& tp, const ModelParams& p, int block, Value x) {
  const ModelConfig& cfg = p.config();
  std::string pre = "block" + std::to_string(block) + ".";
  auto w = [&](const std::string& n) { return tp.at(p, pre + n); };

  Value normed = g.layer_norm_rows(x, w("ln1.gain"), w("ln1.bias"));
  Value q = g.add_row_broadcast(g.matmul(normed, w("attn.wq")), w("attn.bq"));
  Value k = g.add_row_broadcast(g.matmul(normed, w("attn.wk")), w("attn.bk"));
  Value v = g.add_row_broadcast(g.matmul(normed, w("attn.wv")), w("attn.bv"));

  std::size_t d_head = static_cast<std::size_t>(cfg.d_model / cfg.n_heads);
  double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(d_head));
  std::vector<Value> heads;
  heads.reserve(static_cast<std::size_t>(cfg.n_heads));
  for (int h = 0; h < cfg.n_heads; ++h) {
    std::size_t c0 = static_cast<std::size_t>(h) * d_head;
    Value qh = g.slice_cols(q, c0, d_head);
    Value kh = g.slice_cols(k, c0, d_head);
    Value vh = g.slice_cols(v, c0, d_head);
    Value scores = g.scale(g.matmul(qh, g.transpose(kh)), inv_sqrt);
    heads.push_back(g.matmul(g.softmax_rows(scores), vh));
  }
  Value attn = g.add_row_broadcast(
      g.matmul(g.concat_cols(heads), w("attn.wo")), w("attn.bo"));
  x = g.add(x, attn);

  Value normed2 = g.layer_norm_rows(x, w("ln2.gain"), w("ln2.bias"));
  Value hidden = g.gelu(g.add_row_broadcast(g.matmul(normed2, w("ffn.w1")), w("ffn.b1")));
  Value ffn = g.add_row_broadcast(g.matmul(hidden, w("ffn.w2")), w("ffn.b2"));
  return g.add(x, ffn);
}

Value apply_head(Graph& g, const TapedParams& tp, const ModelParams& p, Value x) {
  return g.add_row_broadcast(g.matmul(x, tp.at(p, "head.weight")), tp.at(p, "head.bias"));
}

}  // namespace

TapedTrace model_forward(Graph& g, const TapedParams& tp, const ModelParams& params,
                         const Tensor& features, const std::set<int>& taps) {
  const ModelConfig& cfg = params.config();
  if (features.shape.size() != 2 || features.rows() == 0) {
    throw DataError("model_forward: input must be a non-empty [T x input_dim] matrix, got " +
                    features.shape_str());
  }
  if (features.cols() != static_cast<std::size_t>(cfg.input_dim)) {
    throw ConfigError("model_forward: input width " + std::to_string(features.cols()) +
                      " != input_dim " + std::to_string(cfg.input_dim));
  }
  for (int t : taps) {
    if (t < 1 || t > cfg.n_blocks) {
      throw ConfigError("model_forward: tap " + std::to_string(t) + " outside 1.." +
                        std::to_string(cfg.n_blocks));
    }
  }

  Value x = g.add_row_broadcast(g.matmul(g.constant(features), tp.at(params, "frontend.weight")),
                                tp.at(params, "frontend.bias"));
  x = g.add(x, g.constant(sinusoidal_positions(features.rows(),
                                               static_cast<std::size_t>(cfg.d_model))));

  TapedTrace trace;
  for (int b = 1; b <= cfg.n_blocks; ++b) {
    x = apply_block(g, tp, params, b, x);
    if (taps.count(b)) trace.tap_embeddings.emplace(b, x);
  }
  trace.logits = apply_head(g, tp, params, x);
  trace.log_probs = g.log_softmax_rows(trace.logits);
  return trace;
}

Value resume_from_tap(Graph& g, const TapedParams& tp, const ModelParams& params,
                      Value embedding, int tap) {
  const ModelConfig& cfg = params.config();
  if (tap < 1 || tap > cfg.n_blocks) {
    throw ConfigError("resume_from_tap: tap " + std::to_string(tap) + " outside 1.." +
                      std::to_string(cfg.n_blocks));
  }
  const Tensor& e = g.value(embedding);
  if (e.shape.size() != 2 || e.cols() != static_cast<std::size_t>(cfg.d_model)) {
    throw ConfigError("resume_from_tap: embedding " + e.shape_str() + " incompatible with d_model " +
                      std::to_string(cfg.d_model));
  }
  Value x = embedding;
  for (int b = tap + 1; b <= cfg.n_blocks; ++b) x = apply_block(g, tp, params, b, x);
  return apply_head(g, tp, params, x);
}

ForwardTrace forward_eval(const ModelParams& params, const Tensor& features,
                          const std::set<int>& taps) {
  Graph g;
  TapedParams tp = stage_params(g, params, false);
  TapedTrace taped = model_forward(g, tp, params, features, taps);
  ForwardTrace out;
  for (const auto& [tap, val] : taped.tap_embeddings) out.tap_embeddings[tap] = g.value(val);
  out.logits = g.value(taped.logits);
  out.log_probs = g.value(taped.log_probs);
  return out;
}

}  // namespace fedreg
