#include "fedreg/regularizers.hpp"

#include <string>

#include "fedreg/errors.hpp"

namespace fedreg {

std::set<int> RegConfig::required_taps() const {
  std::set<int> taps;
  if (embed_active()) taps.insert(embed_taps.begin(), embed_taps.end());
  if (loss_active()) taps.insert(loss_taps.begin(), loss_taps.end());
  return taps;
}

void RegConfig::validate(const ModelConfig& model) const {
  if (lambda_para < 0.0 || lambda_embed < 0.0 || lambda_loss < 0.0) {
    throw ConfigError("reg: penalty weights must be >= 0");
  }
  std::set<int> model_taps = model.effective_taps();
  auto check_taps = [&](const std::set<int>& taps, const char* which) {
    if (taps.empty()) {
      throw ConfigError(std::string("reg: ") + which + " regularization enabled with no taps");
    }
    for (int t : taps) {
      if (!model_taps.count(t)) {
        throw ConfigError(std::string("reg: ") + which + " tap " + std::to_string(t) +
                          " not in model tap positions");
      }
    }
  };
  if (enable_embed) check_taps(embed_taps, "embed");
  if (enable_loss) check_taps(loss_taps, "loss");
}

Value r_para_graph(Graph& g, const TapedParams& local, const TapedParams& global_frozen,
                   const ModelParams& params) {
  const auto& specs = params.layout().specs();
  Value total = g.constant(Tensor::scalar(0.0));
  bool first = true;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].frontend) continue;
    Value term = squared_l2_distance_graph(g, local.tensors[i], global_frozen.tensors[i]);
    total = first ? term : g.add(total, term);
    first = false;
  }
  return total;
}

double r_para(const ModelParams& local, const ModelParams& global) {
  if (!(local.config() == global.config())) {
    throw ConfigError("r_para: local and global model configs differ");
  }
  const auto& specs = local.layout().specs();
  double total = 0.0;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].frontend) continue;
    total += squared_l2_distance(local.tensor(i), global.tensor(i));
  }
  return total;
}

Value r_embed_graph(Graph& g, const TapedTrace& trace, const EmbeddingReference& ref,
                    const std::set<int>& taps) {
  Value total = g.constant(Tensor::scalar(0.0));
  bool first = true;
  for (int tap : taps) {
    auto it_e = trace.tap_embeddings.find(tap);
    if (it_e == trace.tap_embeddings.end()) {
      throw ContractViolation("r_embed: trace missing tap " + std::to_string(tap));
    }
    auto it_r = ref.taps.find(tap);
    if (it_r == ref.taps.end()) {
      throw ProtocolError("r_embed: no reference embedding for tap " + std::to_string(tap));
    }
    Value pooled = g.mean_rows(it_e->second);
    Value reference = g.constant(Tensor::vec(it_r->second));
    Value term = squared_l2_distance_graph(g, pooled, reference);
    total = first ? term : g.add(total, term);
    first = false;
  }
  return total;
}

Value r_loss_graph(Graph& g, const TapedTrace& trace, const TapedParams& global_frozen,
                   const ModelParams& global_params, const std::set<int>& taps) {
  int n_blocks = global_params.config().n_blocks;
  Value local_probs = g.softmax_rows(trace.logits);
  Value total = g.constant(Tensor::scalar(0.0));
  bool first = true;
  for (int tap : taps) {
    if (tap < 1 || tap > n_blocks) {
      throw ConfigError("r_loss: tap " + std::to_string(tap) + " outside 1.." +
                        std::to_string(n_blocks));
    }
    auto it_e = trace.tap_embeddings.find(tap);
    if (it_e == trace.tap_embeddings.end()) {
      throw ContractViolation("r_loss: trace missing tap " + std::to_string(tap));
    }
    // Pseudo-distribution: local tap embedding pushed through the frozen
    // global blocks tap+1..L and head.
    Value pseudo_logits = resume_from_tap(g, global_frozen, global_params, it_e->second, tap);
    Value pseudo_probs = g.softmax_rows(pseudo_logits);
    Value term = kl_divergence_graph(g, local_probs, pseudo_probs);
    total = first ? term : g.add(total, term);
    first = false;
  }
  return total;
}

double r_embed_eval(const ModelParams& local, const Tensor& features,
                    const EmbeddingReference& ref, const std::set<int>& taps) {
  Graph g;
  TapedParams tp = stage_params(g, local, false);
  TapedTrace trace = model_forward(g, tp, local, features, taps);
  Value r = r_embed_graph(g, trace, ref, taps);
  return g.value(r).data[0];
}

double r_loss_eval(const ModelParams& local, const ModelParams& global, const Tensor& features,
                   const std::set<int>& taps) {
  Graph g;
  TapedParams local_tp = stage_params(g, local, false);
  TapedParams global_tp = stage_params(g, global, false);
  TapedTrace trace = model_forward(g, local_tp, local, features, taps);
  Value r = r_loss_graph(g, trace, global_tp, global, taps);
  return g.value(r).data[0];
}

LocalObjective build_local_objective(Graph& g, const std::vector<const Sample*>& batch,
                                     const ModelParams& local, const ModelParams& global,
                                     const EmbeddingReference& ref, const RegConfig& reg) {
  if (batch.empty()) throw ContractViolation("local_objective: empty batch");
  if (!(local.config() == global.config())) {
    throw ConfigError("local_objective: local and global model configs differ");
  }
  const RegConfig& r = reg;
  bool embed_this_round = r.embed_active() && !ref.empty();
  if (embed_this_round) {
    for (int tap : r.embed_taps) {
      if (!ref.taps.count(tap)) {
        throw ProtocolError("local_objective: reference missing enabled embed tap " +
                            std::to_string(tap));
      }
    }
  }

  LocalObjective out;
  out.local_params = stage_params(g, local, true);
  TapedParams global_tp;
  if (r.para_active() || r.loss_active()) global_tp = stage_params(g, global, false);

  std::set<int> taps;
  if (embed_this_round) taps.insert(r.embed_taps.begin(), r.embed_taps.end());
  if (r.loss_active()) taps.insert(r.loss_taps.begin(), r.loss_taps.end());

  std::vector<Value> ctc_terms, embed_terms, loss_terms;
  for (const Sample* sample : batch) {
    if (!ctc_feasible(sample->features.rows(), sample->labels)) {
      ++out.skipped;
      continue;
    }
    TapedTrace trace = model_forward(g, out.local_params, local, sample->features, taps);
    ctc_terms.push_back(ctc_loss_graph(g, trace.log_probs, sample->labels));
    if (embed_this_round) embed_terms.push_back(r_embed_graph(g, trace, ref, r.embed_taps));
    if (r.loss_active()) loss_terms.push_back(r_loss_graph(g, trace, global_tp, global, r.loss_taps));
  }
  if (ctc_terms.empty()) {
    throw DataError("local_objective: every sample in the batch is CTC-infeasible");
  }
  out.ctc_samples = ctc_terms.size();

  auto batch_mean = [&](const std::vector<Value>& terms) {
    Value sum = terms[0];
    for (std::size_t i = 1; i < terms.size(); ++i) sum = g.add(sum, terms[i]);
    return g.scale(sum, 1.0 / static_cast<double>(terms.size()));
  };

  Value total = batch_mean(ctc_terms);
  if (r.para_active()) {
    Value rp = r_para_graph(g, out.local_params, global_tp, local);
    total = g.add(total, g.scale(rp, r.effective_lambda_para()));
  }
  if (embed_this_round) {
    total = g.add(total, g.scale(batch_mean(embed_terms), r.effective_lambda_embed()));
  }
  if (r.loss_active()) {
    total = g.add(total, g.scale(batch_mean(loss_terms), r.effective_lambda_loss()));
  }
  out.total = total;
  return out;
}

}  // namespace fedreg
