#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "breps/embedding.hpp"
#include "breps/projection_head.hpp"
#include "breps/representation_store.hpp"
#include "breps/scoring.hpp"

namespace breps {

struct TrainingTriplet {
  std::string query;
  std::string positive_doc_id;
  std::string negative_doc_id;
};

struct HingeLoss {
  double margin = 10.0;
};

struct RankNetLoss {
  double sigma = 1.0;
};

using LossFunction = std::variant<HingeLoss, RankNetLoss>;

/// max(0, m - s_pos + s_neg)
double hinge_loss(double s_pos, double s_neg, double margin);

/// log(1 + exp(-sigma * (s_pos - s_neg))), evaluated without overflow.
double ranknet_loss(double s_pos, double s_neg, double sigma);

double loss_value(const LossFunction& loss, double s_pos, double s_neg);

struct LossGradient {
  double d_pos = 0.0;
  double d_neg = 0.0;
};

/// Partial derivatives of the loss in s_pos and s_neg. The hinge kink
/// (s_pos - s_neg == m) takes subgradient 0.
LossGradient loss_gradient(const LossFunction& loss, double s_pos, double s_neg);

/// A triplet with its frozen base vectors resolved.
struct TripletInputs {
  Representation query;
  StoredDocument positive;
  StoredDocument negative;
};

/// Embeds the query and fetches both documents. Throws InvalidTriplet when
/// positive == negative and MissingDocument when either id is not stored.
TripletInputs resolve_triplet(const TrainingTriplet& triplet, const Store& store,
                              const Embedder& embedder);

struct ForwardResult {
  double s_pos = 0.0;
  double s_neg = 0.0;
  double loss = 0.0;
  std::vector<std::size_t> pos_top_blocks;
  std::vector<std::size_t> neg_top_blocks;
};

/// Scores both documents through the projected scoring path and applies the
/// loss. `scoring.head` is ignored; `head` is always applied.
ForwardResult triplet_forward(const TripletInputs& inputs, const ProjectionHead& head,
                              const ScoringOptions& scoring, const LossFunction& loss);

struct TripletGradient {
  ForwardResult forward;
  std::vector<double> head;     // same layout as ProjectionHead::matrix()
  std::vector<double> weights;  // one entry per aggregation weight
};

/// Analytic gradient of the triplet loss. The top-k block selection found by
/// the forward pass is held fixed while differentiating.
TripletGradient triplet_gradient(const TripletInputs& inputs, const ProjectionHead& head,
                                 const ScoringOptions& scoring, const LossFunction& loss);

struct TrainingConfig {
  LossFunction loss = HingeLoss{};
  double learning_rate = 5e-5;
  std::size_t steps = 0;
  // Triplets whose gradients are averaged into one update.
  std::size_t accumulation = 4;
  bool train_projection = true;
  bool learn_weights = false;
  ScoringOptions scoring;
  std::size_t parallelism = 1;

  void validate() const;
};

struct TrainingResult {
  ProjectionHead head;
  WeightVector weights;
  // Mean loss of each update window, measured before the update.
  std::vector<double> loss_curve;
};

/// Plain SGD. Step t consumes triplets t*accumulation ... (t+1)*accumulation-1
/// cyclically. Learned weights are clamped at zero after every update.
/// Throws NonFiniteLoss if a loss or gradient stops being finite.
TrainingResult train(std::span<const TripletInputs> data, ProjectionHead initial,
                     const TrainingConfig& config);

double mean_loss(std::span<const TripletInputs> data, const ProjectionHead& head,
                 const ScoringOptions& scoring, const LossFunction& loss);

}  // namespace breps
