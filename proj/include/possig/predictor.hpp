#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "possig/dataset.hpp"
#include "possig/events.hpp"

namespace possig {

struct PredictorConfig {
  std::size_t logsig_dim = 55;
  std::size_t emb_dim = 16;
  std::size_t hidden = 256;
  std::size_t hidden_layers = 2;
  double leaky_alpha = 0.2;

  std::size_t input_dim() const { return logsig_dim + emb_dim + 1; }
};

inline constexpr std::size_t kOutputDim = kNumActions + 2;

/// Embedding table and MLP weights. Layer l maps rows of width
/// weights[l].rows() to width weights[l].cols(): z = a * W + b.
struct PredictorParams {
  PredictorConfig config;
  Eigen::MatrixXd embedding;  // kNumActions x emb_dim
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::RowVectorXd> biases;

  /// All-zero parameters of the right shape.
  static PredictorParams zeros(const PredictorConfig& config);
  /// He-style uniform init scaled by fan-in; biases zero.
  static PredictorParams init(const PredictorConfig& config, std::uint64_t seed);

  /// Named flat views of every parameter tensor (embedding, W1, b1, ...).
  std::vector<std::pair<std::string, std::span<double>>> tensors();
  std::size_t parameter_count() const;
  bool all_finite() const;
};

struct Prediction {
  std::array<double, kNumActions> action_probs{};
  double x = 0.0;
  double y = 0.0;

  double prob(ActionType a) const { return action_probs[action_index(a)]; }
  /// Location clamped to the unit pitch.
  std::pair<double, double> clamped_xy() const;
};

/// Normalized inverse-position weights (1/k) / sum_j (1/j), k = 1 most recent.
std::vector<double> recency_weights(std::size_t n);

Eigen::VectorXd weighted_action_embedding(std::span<const ActionType> recent, const Eigen::MatrixXd& embedding);

/// Model input row: log-signature, weighted embedding, scrad.
Eigen::RowVectorXd input_features(const PredictorParams& params, const Sample& sample);

Prediction forward(const PredictorParams& params, const Sample& sample);
std::vector<Prediction> forward_batch(const PredictorParams& params, std::span<const Sample> samples);

/// CEL weight of a target class: 1 for style actions, 0 for contextual ones.
double cel_weight(ActionType a);

struct LossBreakdown {
  double total = 0.0;
  double rmse = 0.0;
  double cel = 0.0;
  std::size_t n = 0;
  std::size_t n_weighted = 0;
};

/// total = RMSE_(x,y) + lambda * weighted CEL.
LossBreakdown loss(const PredictorParams& params, std::span<const Sample> batch, double lambda);
LossBreakdown loss_from_predictions(std::span<const Prediction> preds, std::span<const Sample> batch, double lambda);

/// Loss together with its exact gradient; the gradient has the same layout
/// as the parameters.
std::pair<LossBreakdown, PredictorParams> loss_and_gradient(const PredictorParams& params,
                                                            std::span<const Sample> batch, double lambda);

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 4;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double lambda = 1.0;
  std::uint64_t seed = 42;
};

struct EpochLog {
  std::size_t epoch = 0;
  LossBreakdown train;
  LossBreakdown validation;
  bool has_validation = false;
};

struct TrainResult {
  PredictorParams params;  // best epoch (or last good one when aborted)
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  bool aborted = false;
  std::string message;
};

/// Mini-batch Adam; keeps the parameters of the epoch with the lowest
/// validation loss (training loss when no validation set is given).
TrainResult train(std::span<const Sample> train_set, std::span<const Sample> validation_set,
                  const PredictorConfig& model_config, const TrainConfig& config);

/// Checkpoint with the model plus the settings it was trained with.
struct Checkpoint {
  PredictorParams params;
  int n_r = 3;
  std::size_t sig_order = 3;
  double lambda = 1.0;
  std::uint64_t seed = 42;
};

inline constexpr int kCheckpointVersion = 1;

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json& j);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace possig
