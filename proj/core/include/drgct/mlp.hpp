#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "drgct/series.hpp"

namespace drgct {

enum class LossKind { Squared, SmoothL1 };

/// Optimizer settings shared by both network trainers. batch_size 0 means
/// full batch.
struct OptimizerConfig {
  double learning_rate = 1e-3;
  int epochs = 300;
  int batch_size = 0;
  std::uint64_t seed = 0;
};

/// Feed-forward ReLU regression network. width 0 resolves to 5 * input_dim
/// at training time.
struct MlpConfig {
  int hidden_layers = 1;
  int width = 0;
  LossKind loss = LossKind::Squared;
  double smooth_l1_delta = 1.0;
  OptimizerConfig opt;
  bool standardize_inputs = true;
};

/// Trained conditional-mean network. Weights are stored layer by layer
/// (hidden layers first, then the scalar output layer); weights[l] has one
/// row per output unit. The net is fit against the standardized response;
/// predictions map back through response_mean/response_sd and stay in
/// response units. Immutable by convention once trained; fields stay
/// public so tests and serialization can reach them.
struct MlpModel {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  Scaler scaler;
  int input_dim = 0;
  double response_mean = 0.0;
  double response_sd = 1.0;

  struct TrainingInfo {
    double initial_loss = 0.0;
    double final_loss = 0.0;
    int epochs = 0;
    std::uint64_t seed = 0;
  } info;

  double predict(const Eigen::VectorXd& yvec) const;
  Eigen::VectorXd predict_batch(const Eigen::MatrixXd& rows) const;

  /// Identity-scaler model with all parameters zeroed; test fixtures
  /// overwrite the weights directly.
  static MlpModel zeroed(int input_dim, int hidden_layers, int width);
};

/// Gradient of the training loss with respect to every parameter, in the
/// same layout as MlpModel.
struct MlpGrads {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

/// Train on the design's Y-lag covariates against the response. Requires
/// row_count >= width. Seed-deterministic; aborts with the epoch index if
/// the loss turns non-finite.
MlpModel train_mlp(const LaggedDesign& design, const MlpConfig& cfg);

/// Mean training loss of a model on a design (inputs scaled internally).
double mlp_loss(const MlpModel& model, const LaggedDesign& design,
                LossKind loss, double smooth_l1_delta = 1.0);

/// Full-batch gradient; used by the trainer and by finite-difference tests.
MlpGrads mlp_gradient(const MlpModel& model, const LaggedDesign& design,
                      LossKind loss, double smooth_l1_delta = 1.0);

/// response - prediction, row by row.
Eigen::VectorXd residuals(const MlpModel& model, const LaggedDesign& design);

}  // namespace drgct
