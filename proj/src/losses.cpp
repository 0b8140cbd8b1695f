#include "fedreg/losses.hpp"

#include <limits>
#include <string>

#include "fedreg/errors.hpp"

namespace fedreg {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kProbFloor = 1e-12;
}  // namespace

void validate_labels(const LabelSeq& labels, int vocab_size) {
  if (labels.tokens.empty()) throw DataError("label sequence must be non-empty");
  for (int t : labels.tokens) {
    if (t < 1 || t >= vocab_size) {
      throw DataError("label token " + std::to_string(t) + " outside 1.." +
                      std::to_string(vocab_size - 1));
    }
  }
}

std::size_t ctc_min_frames(const LabelSeq& labels) {
  std::size_t repeats = 0;
  for (std::size_t i = 1; i < labels.tokens.size(); ++i) {
    if (labels.tokens[i] == labels.tokens[i - 1]) ++repeats;
  }
  return labels.tokens.size() + repeats;
}

bool ctc_feasible(std::size_t frames, const LabelSeq& labels) {
  return !labels.tokens.empty() && frames >= ctc_min_frames(labels);
}

Value ctc_loss_graph(Graph& g, Value log_probs, const LabelSeq& labels) {
  const Tensor& lp = g.value(log_probs);
  if (lp.shape.size() != 2) {
    throw ConfigError("ctc_loss: log_probs must be [T x V], got " + lp.shape_str());
  }
  std::size_t frames = lp.rows();
  if (!ctc_feasible(frames, labels)) {
    throw DataError("ctc_loss: infeasible sample, T=" + std::to_string(frames) +
                    " < min frames " + std::to_string(ctc_min_frames(labels)));
  }

  // Blank-augmented sequence l': blank, u1, blank, u2, ..., uU, blank.
  std::size_t u = labels.tokens.size();
  std::size_t s = 2 * u + 1;
  std::vector<std::size_t> augmented(s, 0);
  for (std::size_t i = 0; i < u; ++i) {
    augmented[2 * i + 1] = static_cast<std::size_t>(labels.tokens[i]);
  }

  // Skip transition s-2 -> s allowed only for non-blank l'_s differing from l'_{s-2}.
  Tensor skip_mask = Tensor::zeros({s});
  for (std::size_t i = 0; i < s; ++i) {
    bool allow = augmented[i] != 0 && i >= 2 && augmented[i] != augmented[i - 2];
    skip_mask.data[i] = allow ? 0.0 : kNegInf;
  }
  Value skip_mask_v = g.constant(skip_mask);

  // alpha_0: only states 0 and 1 reachable.
  Tensor init_mask = Tensor::full({s}, kNegInf);
  init_mask.data[0] = 0.0;
  if (s > 1) init_mask.data[1] = 0.0;

  Value emit0 = g.gather(g.row(log_probs, 0), augmented);
  Value alpha = g.add(emit0, g.constant(init_mask));
  for (std::size_t t = 1; t < frames; ++t) {
    Value stay = alpha;
    Value step1 = g.shift_right(alpha, 1, kNegInf);
    Value step2 = g.add(g.shift_right(alpha, 2, kNegInf), skip_mask_v);
    Value merged = g.logaddexp(g.logaddexp(stay, step1), step2);
    alpha = g.add(g.gather(g.row(log_probs, t), augmented), merged);
  }

  Value total = s >= 2 ? g.logaddexp(g.pick(alpha, s - 1), g.pick(alpha, s - 2))
                       : g.pick(alpha, s - 1);
  return g.scale(total, -1.0);
}

double ctc_loss_eval(const Tensor& log_probs, const LabelSeq& labels) {
  if (!ctc_feasible(log_probs.rows(), labels)) {
    return std::numeric_limits<double>::infinity();
  }
  Graph g;
  Value lp = g.constant(log_probs);
  Value loss = ctc_loss_graph(g, lp, labels);
  return g.value(loss).data[0];
}

Value kl_divergence_graph(Graph& g, Value p_rows, Value q_rows) {
  const Tensor& tp = g.value(p_rows);
  const Tensor& tq = g.value(q_rows);
  require_same_shape(tp, tq, "kl_divergence");
  if (tp.shape.size() != 2) {
    throw ConfigError("kl_divergence: expected distribution rows, got " + tp.shape_str());
  }
  Value terms = g.mul(p_rows, g.sub(g.log_clamped(p_rows, kProbFloor),
                                    g.log_clamped(q_rows, kProbFloor)));
  return g.scale(g.sum_all(terms), 1.0 / static_cast<double>(tp.rows()));
}

double kl_divergence(const Tensor& p_rows, const Tensor& q_rows) {
  Graph g;
  Value kl = kl_divergence_graph(g, g.constant(p_rows), g.constant(q_rows));
  return g.value(kl).data[0];
}

Value squared_l2_distance_graph(Graph& g, Value a, Value b) {
  return g.squared_l2(g.sub(a, b));
}

double squared_l2_distance(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "squared_l2_distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    double d = a.data[i] - b.data[i];
    s += d * d;
  }
  return s;
}

}  // namespace fedreg
