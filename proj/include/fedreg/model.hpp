#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "fedreg/autodiff.hpp"
#include "fedreg/tensor.hpp"

namespace fedreg {

// Transformer-encoder CTC recognizer: linear frontend, n_blocks encoder blocks
// with an embedding tap after each block, single linear CTC head. Blank = 0.
struct ModelConfig {
  int n_blocks = 4;
  int d_model = 32;
  int n_heads = 2;
  int d_ff = 64;
  int vocab_size = 0;  // includes the blank symbol at index 0
  int input_dim = 0;
  std::set<int> tap_positions;  // subset of {1..n_blocks}; empty -> all

  void validate() const;  // throws ConfigError
  std::set<int> effective_taps() const;
  bool operator==(const ModelConfig& o) const = default;
};

struct ParamSpec {
  std::string name;
  std::vector<std::size_t> shape;
  bool frontend = false;  // excluded from parameter-based regularization
};

// Canonical parameter ordering for a config; the flattening order is the
// order of specs() and is stable across runs.
class ParamLayout {
 public:
  explicit ParamLayout(const ModelConfig& cfg);
  const std::vector<ParamSpec>& specs() const { return specs_; }
  std::size_t index_of(const std::string& name) const;  // throws ConfigError if unknown
  std::size_t total_scalars() const { return total_scalars_; }

 private:
  std::vector<ParamSpec> specs_;
  std::map<std::string, std::size_t> index_;
  std::size_t total_scalars_ = 0;
};

class ModelParams {
 public:
  explicit ModelParams(const ModelConfig& cfg);  // zero-initialized
  static ModelParams init(const ModelConfig& cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  const ParamLayout& layout() const { return *layout_; }
  std::size_t n_tensors() const { return tensors_.size(); }
  Tensor& tensor(std::size_t i) { return tensors_[i]; }
  const Tensor& tensor(std::size_t i) const { return tensors_[i]; }
  Tensor& tensor(const std::string& name) { return tensors_[layout_->index_of(name)]; }
  const Tensor& tensor(const std::string& name) const {
    return tensors_[layout_->index_of(name)];
  }

  std::size_t n_scalars() const { return layout_->total_scalars(); }
  std::vector<double> flatten() const;
  static ModelParams unflatten(const ModelConfig& cfg, const std::vector<double>& flat);

 private:
  ModelConfig cfg_;
  std::shared_ptr<const ParamLayout> layout_;
  std::vector<Tensor> tensors_;
};

// Parameters staged onto a tape: one Value per layout entry, leaves when
// trainable, constants when frozen.
struct TapedParams {
  const ModelParams* source = nullptr;
  std::vector<Value> tensors;
  Value at(const ModelParams& p, const std::string& name) const {
    return tensors[p.layout().index_of(name)];
  }
};

TapedParams stage_params(Graph& g, const ModelParams& params, bool trainable);

struct TapedTrace {
  std::map<int, Value> tap_embeddings;  // block index -> [T x d_model]
  Value logits;                         // [T x vocab]
  Value log_probs;                      // [T x vocab]
};

// Full forward pass recording embeddings at the requested tap positions.
// Throws DataError on empty input, ConfigError on dimension mismatch.
TapedTrace model_forward(Graph& g, const TapedParams& tp, const ModelParams& params,
                         const Tensor& features, const std::set<int>& taps);

// Runs blocks tap+1..n_blocks and the head on a [T x d_model] embedding.
// For any input x: resume_from_tap(P, forward(P, x).e_tap, tap) == forward(P, x).logits
// bitwise, because both paths share the same block code.
Value resume_from_tap(Graph& g, const TapedParams& tp, const ModelParams& params,
                      Value embedding, int tap);

struct ForwardTrace {
  std::map<int, Tensor> tap_embeddings;
  Tensor logits;
  Tensor log_probs;
};

// Convenience evaluation on a scratch graph.
ForwardTrace forward_eval(const ModelParams& params, const Tensor& features,
                          const std::set<int>& taps);

// Fixed sinusoidal positional encoding, added after the frontend.
Tensor sinusoidal_positions(std::size_t frames, std::size_t d_model);

}  // namespace fedreg
