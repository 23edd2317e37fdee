#include "breps/training.hpp"

#include <algorithm>
#include <cmath>

#include "breps/error.hpp"
#include "breps/parallel.hpp"

namespace breps {
namespace {

struct ProjectedDoc {
  std::vector<std::vector<double>> blocks;
  std::vector<double> scores;
  std::vector<std::size_t> top;
  double score = 0.0;
};

ProjectedDoc forward_doc(const std::vector<double>& q, const StoredDocument& doc,
                         const ProjectionHead& head, const ScoringOptions& scoring) {
  std::size_t n = doc.block_vectors.size();
  if (scoring.block_limit) n = std::min(n, *scoring.block_limit);
  if (n == 0) throw Error(Errc::NoBlocks, "document '" + doc.doc_id + "' has no blocks to score");
  ProjectedDoc out;
  out.blocks.reserve(n);
  out.scores.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    out.blocks.push_back(head.project(std::span<const float>(doc.block_vectors[j].values)));
    out.scores.push_back(cosine(std::span<const double>(q), std::span<const double>(out.blocks.back())) /
                         scoring.temperature);
  }
  out.top = top_k_indices(out.scores, scoring.weights.k());
  for (std::size_t i = 0; i < out.top.size(); ++i) out.score += scoring.weights[i] * out.scores[out.top[i]];
  return out;
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (const double x : v) s += x * x;
  return std::sqrt(s);
}

// Accumulates dL/dM for one document given dL/dS_doc. `dq` collects the
// gradient with respect to the projected query.
void backward_doc(const std::vector<double>& q, double q_norm, const ProjectedDoc& fwd,
                  const StoredDocument& doc, double d_score, const ScoringOptions& scoring,
                  std::vector<double>& dq, std::vector<double>& d_head,
                  std::vector<double>& d_weights, std::size_t out_dim) {
  const double inv_t = 1.0 / scoring.temperature;
  for (std::size_t i = 0; i < fwd.top.size(); ++i) {
    const std::size_t j = fwd.top[i];
    d_weights[i] += d_score * fwd.scores[j];
    const double upstream = d_score * scoring.weights[i];
    if (upstream == 0.0) continue;
    const std::vector<double>& b = fwd.blocks[j];
    const double b_norm = norm(b);
    const double cos = fwd.scores[j] * scoring.temperature;
    const double inv_qb = 1.0 / (q_norm * b_norm);
    const std::span<const float> base = doc.block_vectors[j].values;
    for (std::size_t k = 0; k < out_dim; ++k) {
      dq[k] += upstream * inv_t * (b[k] * inv_qb - cos * q[k] / (q_norm * q_norm));
      const double db = upstream * inv_t * (q[k] * inv_qb - cos * b[k] / (b_norm * b_norm));
      for (std::size_t r = 0; r < base.size(); ++r) d_head[r * out_dim + k] += base[r] * db;
    }
  }
}

void check_inputs(const TripletInputs& inputs) {
  if (inputs.positive.doc_id == inputs.negative.doc_id) {
    throw Error(Errc::InvalidTriplet, "positive and negative document are both '" +
                                          inputs.positive.doc_id + "'");
  }
}

}  // namespace

double hinge_loss(double s_pos, double s_neg, double margin) {
  return std::max(0.0, margin - s_pos + s_neg);
}

double ranknet_loss(double s_pos, double s_neg, double sigma) {
  const double x = -sigma * (s_pos - s_neg);
  // softplus(x) = max(x, 0) + log1p(exp(-|x|))
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double loss_value(const LossFunction& loss, double s_pos, double s_neg) {
  if (const auto* hinge = std::get_if<HingeLoss>(&loss)) return hinge_loss(s_pos, s_neg, hinge->margin);
  return ranknet_loss(s_pos, s_neg, std::get<RankNetLoss>(loss).sigma);
}

LossGradient loss_gradient(const LossFunction& loss, double s_pos, double s_neg) {
  if (const auto* hinge = std::get_if<HingeLoss>(&loss)) {
    if (hinge->margin - s_pos + s_neg > 0.0) return {-1.0, 1.0};
    return {0.0, 0.0};
  }
  const double sigma = std::get<RankNetLoss>(loss).sigma;
  const double x = sigma * (s_pos - s_neg);
  // sigmoid(-x), stable for both signs
  const double p = x >= 0.0 ? std::exp(-x) / (1.0 + std::exp(-x)) : 1.0 / (1.0 + std::exp(x));
  return {-sigma * p, sigma * p};
}

TripletInputs resolve_triplet(const TrainingTriplet& triplet, const Store& store,
                              const Embedder& embedder) {
  if (triplet.positive_doc_id == triplet.negative_doc_id) {
    throw Error(Errc::InvalidTriplet, "positive and negative document are both '" +
                                          triplet.positive_doc_id + "'");
  }
  auto positive = store.get(triplet.positive_doc_id);
  if (!positive) throw Error(Errc::MissingDocument, "'" + triplet.positive_doc_id + "' is not in the store");
  auto negative = store.get(triplet.negative_doc_id);
  if (!negative) throw Error(Errc::MissingDocument, "'" + triplet.negative_doc_id + "' is not in the store");
  return TripletInputs{embedder.embed_one(triplet.query, EmbedderKind::Query), std::move(*positive),
                       std::move(*negative)};
}

ForwardResult triplet_forward(const TripletInputs& inputs, const ProjectionHead& head,
                              const ScoringOptions& scoring, const LossFunction& loss) {
  check_inputs(inputs);
  const auto q = head.project(std::span<const float>(inputs.query.values));
  const ProjectedDoc pos = forward_doc(q, inputs.positive, head, scoring);
  const ProjectedDoc neg = forward_doc(q, inputs.negative, head, scoring);
  return ForwardResult{pos.score, neg.score, loss_value(loss, pos.score, neg.score), pos.top, neg.top};
}

TripletGradient triplet_gradient(const TripletInputs& inputs, const ProjectionHead& head,
                                 const ScoringOptions& scoring, const LossFunction& loss) {
  check_inputs(inputs);
  const std::size_t out_dim = head.output_dim();
  const auto q = head.project(std::span<const float>(inputs.query.values));
  const double q_norm = norm(q);
  if (q_norm == 0.0) throw Error(Errc::ZeroVector, "projected query is all-zero");
  const ProjectedDoc pos = forward_doc(q, inputs.positive, head, scoring);
  const ProjectedDoc neg = forward_doc(q, inputs.negative, head, scoring);

  TripletGradient out;
  out.forward = ForwardResult{pos.score, neg.score, loss_value(loss, pos.score, neg.score), pos.top, neg.top};
  out.head.assign(head.matrix().size(), 0.0);
  out.weights.assign(scoring.weights.k(), 0.0);

  const LossGradient dl = loss_gradient(loss, pos.score, neg.score);
  if (dl.d_pos == 0.0 && dl.d_neg == 0.0) return out;

  std::vector<double> dq(out_dim, 0.0);
  backward_doc(q, q_norm, pos, inputs.positive, dl.d_pos, scoring, dq, out.head, out.weights, out_dim);
  backward_doc(q, q_norm, neg, inputs.negative, dl.d_neg, scoring, dq, out.head, out.weights, out_dim);
  const std::span<const float> base_q = inputs.query.values;
  for (std::size_t r = 0; r < base_q.size(); ++r) {
    for (std::size_t k = 0; k < out_dim; ++k) out.head[r * out_dim + k] += base_q[r] * dq[k];
  }
  return out;
}

void TrainingConfig::validate() const {
  if (const auto* hinge = std::get_if<HingeLoss>(&loss)) {
    if (!(hinge->margin > 0.0)) throw Error(Errc::InvalidConfig, "training.margin must be > 0");
  } else if (!(std::get<RankNetLoss>(loss).sigma > 0.0)) {
    throw Error(Errc::InvalidConfig, "training.sigma must be > 0");
  }
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw Error(Errc::InvalidConfig, "training.learning_rate must be finite and >= 0");
  }
  if (accumulation == 0) throw Error(Errc::InvalidConfig, "training.accumulation must be >= 1");
}

double mean_loss(std::span<const TripletInputs> data, const ProjectionHead& head,
                 const ScoringOptions& scoring, const LossFunction& loss) {
  if (data.empty()) return 0.0;
  double total = 0.0;
  for (const TripletInputs& inputs : data) total += triplet_forward(inputs, head, scoring, loss).loss;
  return total / static_cast<double>(data.size());
}

TrainingResult train(std::span<const TripletInputs> data, ProjectionHead initial,
                     const TrainingConfig& config) {
  config.validate();
  if (data.empty()) throw Error(Errc::InvalidArgument, "training needs at least one triplet");

  TrainingResult result{std::move(initial), config.scoring.weights, {}};
  ScoringOptions scoring = config.scoring;
  scoring.head = nullptr;
  if (config.learn_weights) {
    scoring.weights = WeightVector::learned({scoring.weights.values().begin(), scoring.weights.values().end()});
  }
  std::vector<double> weights(scoring.weights.values().begin(), scoring.weights.values().end());

  const std::size_t window = config.accumulation;
  std::vector<TripletGradient> grads(window);
  for (std::size_t step = 0; step < config.steps; ++step) {
    parallel_for(window, config.parallelism, [&](std::size_t a) {
      const std::size_t index = (step * window + a) % data.size();
      grads[a] = triplet_gradient(data[index], result.head, scoring, config.loss);
    });

    // Fixed reduction order keeps updates independent of thread scheduling.
    std::vector<double> d_head(result.head.matrix().size(), 0.0);
    std::vector<double> d_weights(weights.size(), 0.0);
    double window_loss = 0.0;
    for (std::size_t a = 0; a < window; ++a) {
      const TripletGradient& g = grads[a];
      if (!std::isfinite(g.forward.loss)) {
        throw Error(Errc::NonFiniteLoss,
                    "step " + std::to_string(step) + ", triplet " +
                        std::to_string((step * window + a) % data.size()) + ": loss is " +
                        std::to_string(g.forward.loss) + " (s_pos " + std::to_string(g.forward.s_pos) +
                        ", s_neg " + std::to_string(g.forward.s_neg) + ")");
      }
      window_loss += g.forward.loss;
      for (std::size_t i = 0; i < d_head.size(); ++i) d_head[i] += g.head[i];
      for (std::size_t i = 0; i < d_weights.size(); ++i) d_weights[i] += g.weights[i];
    }
    const double scale = 1.0 / static_cast<double>(window);
    result.loss_curve.push_back(window_loss * scale);

    if (config.train_projection) {
      auto matrix = result.head.matrix();
      for (std::size_t i = 0; i < matrix.size(); ++i) {
        matrix[i] -= config.learning_rate * d_head[i] * scale;
        if (!std::isfinite(matrix[i])) {
          throw Error(Errc::NonFiniteLoss, "step " + std::to_string(step) + ": projection entry diverged");
        }
      }
    }
    if (config.learn_weights) {
      for (std::size_t i = 0; i < weights.size(); ++i) {
        weights[i] = std::max(0.0, weights[i] - config.learning_rate * d_weights[i] * scale);
        if (!std::isfinite(weights[i])) {
          throw Error(Errc::NonFiniteLoss, "step " + std::to_string(step) + ": weight diverged");
        }
      }
      scoring.weights = WeightVector::learned(weights);
    }
  }
  result.weights = scoring.weights;
  return result;
}

}  // namespace breps
