#pragma once

#include <map>
#include <set>
#include <vector>

#include "fedreg/autodiff.hpp"
#include "fedreg/losses.hpp"
#include "fedreg/model.hpp"

namespace fedreg {

// Which regularizers are active and with what penalty weights. The combined
// preset switches the weights to (0.1, 0.1, 1) for para/embed/loss.
struct RegConfig {
  bool enable_para = false;
  double lambda_para = 0.01;
  bool enable_embed = false;
  double lambda_embed = 0.001;
  std::set<int> embed_taps;
  bool enable_loss = false;
  double lambda_loss = 0.01;
  std::set<int> loss_taps;
  bool combined_preset = false;

  double effective_lambda_para() const { return combined_preset ? 0.1 : lambda_para; }
  double effective_lambda_embed() const { return combined_preset ? 0.1 : lambda_embed; }
  double effective_lambda_loss() const { return combined_preset ? 1.0 : lambda_loss; }

  // A term contributes (and costs communication, for embed) only when enabled
  // with a positive weight; a zero-weight term is skipped entirely so runs
  // reduce bitwise to the unregularized baseline.
  bool para_active() const { return enable_para && effective_lambda_para() > 0.0; }
  bool embed_active() const { return enable_embed && effective_lambda_embed() > 0.0; }
  bool loss_active() const { return enable_loss && effective_lambda_loss() > 0.0; }

  std::set<int> required_taps() const;
  void validate(const ModelConfig& model) const;  // throws ConfigError
};

// Server-aggregated per-tap reference embeddings (one d_model vector per tap).
struct EmbeddingReference {
  std::map<int, std::vector<double>> taps;
  int produced_round = -1;
  bool empty() const { return taps.empty(); }
};

// Squared L2 distance between local and frozen global parameters, excluding
// the frontend. Throws ConfigError if the configs differ.
Value r_para_graph(Graph& g, const TapedParams& local, const TapedParams& global_frozen,
                   const ModelParams& params);
double r_para(const ModelParams& local, const ModelParams& global);

// Per-utterance: sum over taps of || time-mean(e_tap) - ref_tap ||^2.
Value r_embed_graph(Graph& g, const TapedTrace& trace, const EmbeddingReference& ref,
                    const std::set<int>& taps);

// Per-utterance: sum over taps of KL(softmax(local logits) || softmax(global
// logits resumed from the local tap embedding)), frame-averaged. Gradient
// flows through the local logits and the local embedding, never into the
// frozen global parameters.
Value r_loss_graph(Graph& g, const TapedTrace& trace, const TapedParams& global_frozen,
                   const ModelParams& global_params, const std::set<int>& taps);

// Plain-number counterparts used by tests and diagnostics.
double r_embed_eval(const ModelParams& local, const Tensor& features,
                    const EmbeddingReference& ref, const std::set<int>& taps);
double r_loss_eval(const ModelParams& local, const ModelParams& global, const Tensor& features,
                   const std::set<int>& taps);

struct LocalObjective {
  Value total;               // L_ctc + sum of weighted active regularizers
  TapedParams local_params;  // leaves; adjoints hold the gradient after backward
  std::size_t ctc_samples = 0;
  std::size_t skipped = 0;  // CTC-infeasible samples (excluded from every term)
};

// Builds the full local training objective for one batch on the given tape.
// Round-1 bootstrap: when embed regularization is active but no reference has
// been aggregated yet, R_embed is defined as 0. Throws ProtocolError when a
// reference exists but lacks an enabled tap, DataError when the whole batch is
// CTC-infeasible.
LocalObjective build_local_objective(Graph& g, const std::vector<const Sample*>& batch,
                                     const ModelParams& local, const ModelParams& global,
                                     const EmbeddingReference& ref, const RegConfig& reg);

}  // namespace fedreg
