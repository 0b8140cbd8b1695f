#pragma once

#include <vector>

#include "fedreg/autodiff.hpp"
#include "fedreg/tensor.hpp"

namespace fedreg {

// Training targets: token ids in 1..vocab-1 (blank 0 never appears in labels).
struct LabelSeq {
  std::vector<int> tokens;
  std::size_t length() const { return tokens.size(); }
};

// One training sample: features [T x input_dim] plus its label sequence.
struct Sample {
  Tensor features;
  LabelSeq labels;
};

void validate_labels(const LabelSeq& labels, int vocab_size);  // throws DataError

// Minimum frame count admitting a CTC alignment: U plus one separating blank
// per adjacent repeated token.
std::size_t ctc_min_frames(const LabelSeq& labels);
bool ctc_feasible(std::size_t frames, const LabelSeq& labels);

// Forward (alpha) recursion over the blank-augmented label sequence, in log
// space on the tape. Pre: feasible(T, labels); throws DataError otherwise.
Value ctc_loss_graph(Graph& g, Value log_probs, const LabelSeq& labels);

// Evaluation-only path; +inf on infeasible T/U combinations. Runs the same
// graph construction as ctc_loss_graph on a scratch tape.
double ctc_loss_eval(const Tensor& log_probs, const LabelSeq& labels);

// Mean over rows of sum_v p * (log max(p,1e-12) - log max(q,1e-12)), in nats.
Value kl_divergence_graph(Graph& g, Value p_rows, Value q_rows);
double kl_divergence(const Tensor& p_rows, const Tensor& q_rows);

Value squared_l2_distance_graph(Graph& g, Value a, Value b);
double squared_l2_distance(const Tensor& a, const Tensor& b);

}  // namespace fedreg
