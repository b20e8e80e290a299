#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "drgct/freq.hpp"
#include "drgct/mlp.hpp"
#include "drgct/rng.hpp"
#include "drgct/series.hpp"

namespace drgct {

/// Gaussian-mixture density network. components is the mixture size G;
/// width 0 resolves to 5 * input_dim. g_grid, when non-empty, enables
/// forward-chaining cross-validation over candidate component counts.
struct MdnConfig {
  int components = 10;
  int hidden_layers = 1;
  int width = 0;
  double sigma_floor = 1e-3;
  OptimizerConfig opt;
  bool standardize_inputs = true;
  std::vector<int> g_grid;
};

/// Mixture parameters at one input: weights on the simplex, component means
/// and per-coordinate scales (diagonal covariance), each G x p.
struct MixtureParams {
  Eigen::VectorXd alpha;
  Eigen::MatrixXd mu;
  Eigen::MatrixXd sigma;

  int components() const { return static_cast<int>(alpha.size()); }
  int dim() const { return static_cast<int>(mu.cols()); }
};

/// Conditional density network: shared ReLU trunk plus three linear heads
/// producing mixture logits, means, and scale pre-activations. Head rows
/// for coordinate j of component g sit at index g * dim + j. Heads work in
/// standardized response units and are mapped back per coordinate:
/// mu = response_mean + response_sd * head, sigma = response_sd *
/// softplus(head) + sigma_floor, so the floor holds exactly in raw units.
struct MdnModel {
  std::vector<Eigen::MatrixXd> trunk_w;
  std::vector<Eigen::VectorXd> trunk_b;
  Eigen::MatrixXd w_logit, w_mu, w_sigma;
  Eigen::VectorXd b_logit, b_mu, b_sigma;

  Scaler scaler;
  Eigen::VectorXd response_mean;
  Eigen::VectorXd response_sd;
  int input_dim = 0;
  int response_dim = 0;
  int components = 0;
  double sigma_floor = 1e-3;

  MlpModel::TrainingInfo info;

  MixtureParams params(const Eigen::VectorXd& yvec) const;

  static MdnModel zeroed(int input_dim, int response_dim, int components,
                         int hidden_layers, int width,
                         double sigma_floor = 1e-3);
};

struct MdnGrads {
  std::vector<Eigen::MatrixXd> trunk_w;
  std::vector<Eigen::VectorXd> trunk_b;
  Eigen::MatrixXd w_logit, w_mu, w_sigma;
  Eigen::VectorXd b_logit, b_mu, b_sigma;
};

/// Monte-Carlo conditional characteristic function values, one complex
/// entry per (design row, frequency pair).
struct CharFnEstimate {
  Eigen::MatrixXcd phi;
  int sample_count = 0;
};

/// Fit the mixture density of the X lag vector given the Y lag vector by
/// minimizing the empirical negative log-likelihood. Requires
/// row_count >= components. Seed-deterministic.
MdnModel train_mdn(const LaggedDesign& design, const MdnConfig& cfg);

/// Forward-chaining component selection: train on the first 80% of rows,
/// score NLL on the remaining 20%, return the best candidate.
int select_mdn_components(const LaggedDesign& design, const MdnConfig& cfg,
                          const std::vector<int>& grid);

MixtureParams mdn_params(const MdnModel& model, const Eigen::VectorXd& yvec);

/// M draws from the mixture: pick a component from alpha, then sample each
/// coordinate independently. Returns an M x p matrix.
Eigen::MatrixXd mdn_sample(const MixtureParams& params, int M, RngStream& rng);

/// Closed-form characteristic function of the diagonal Gaussian mixture:
/// sum_g alpha_g * exp(i nu'mu_g - 0.5 * sum_j nu_j^2 sigma_gj^2).
std::complex<double> mdn_cf_analytic(const MixtureParams& params,
                                     const Eigen::VectorXd& nu);

/// Monte-Carlo characteristic function per design row: M draws generated
/// once per row and reused across every frequency pair.
CharFnEstimate estimate_cf(const MdnModel& model, const LaggedDesign& design,
                           const FreqSet& pairs, int M, RngStream& rng);

/// Mean negative log-likelihood of a model on a design.
double mdn_nll(const MdnModel& model, const LaggedDesign& design);

/// Full-batch NLL gradient; used by the trainer and by finite-difference
/// tests.
MdnGrads mdn_gradient(const MdnModel& model, const LaggedDesign& design);

}  // namespace drgct
