#include "drgct/mlp.hpp"

#include <cmath>
#include <string>

#include "drgct/errors.hpp"
#include "drgct/rng.hpp"

namespace drgct {
namespace {

struct LayerDims {
  int in;
  int out;
};

std::vector<LayerDims> layer_dims(int input_dim, int hidden_layers, int width) {
  std::vector<LayerDims> dims;
  int in = input_dim;
  for (int l = 0; l < hidden_layers; ++l) {
    dims.push_back({in, width});
    in = width;
  }
  dims.push_back({in, 1});
  return dims;
}

/// Uniform fan-in init, one counter-derived draw per weight so a parameter's
/// initial value depends only on its own coordinates and the seed.
void init_weights(MlpModel& model, int hidden_layers, int width,
                  std::uint64_t seed) {
  const auto dims = layer_dims(model.input_dim, hidden_layers, width);
  model.weights.clear();
  model.biases.clear();
  for (std::size_t l = 0; l < dims.size(); ++l) {
    const double r = 1.0 / std::sqrt(static_cast<double>(dims[l].in));
    Eigen::MatrixXd w(dims[l].out, dims[l].in);
    for (int i = 0; i < dims[l].out; ++i) {
      for (int j = 0; j < dims[l].in; ++j) {
        const std::uint64_t u = splitmix64(
            derive_seed(seed, SeedDomain::MlpInit, l, static_cast<std::uint64_t>(i),
                        static_cast<std::uint64_t>(j)));
        w(i, j) = r * (2.0 * to_unit_double(u) - 1.0);
      }
    }
    model.weights.push_back(std::move(w));
    model.biases.push_back(Eigen::VectorXd::Zero(dims[l].out));
  }
}

/// Forward pass keeping post-activation values for backprop. activations[0]
/// is the input batch; the last entry is the linear output column.
std::vector<Eigen::MatrixXd> forward_all(const MlpModel& model,
                                         const Eigen::MatrixXd& x) {
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(model.weights.size() + 1);
  acts.push_back(x);
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    Eigen::MatrixXd z =
        (acts.back() * model.weights[l].transpose()).rowwise() +
        model.biases[l].transpose();
    if (l + 1 < model.weights.size()) z = z.cwiseMax(0.0);  // ReLU
    acts.push_back(std::move(z));
  }
  return acts;
}

double loss_value(const Eigen::VectorXd& pred, const Eigen::VectorXd& target,
                  LossKind loss, double delta) {
  const Eigen::ArrayXd r = (pred - target).array();
  if (loss == LossKind::Squared) {
    return r.square().mean();
  }
  const Eigen::ArrayXd a = r.abs();
  return (a <= delta)
      .select(0.5 * r.square(), delta * (a - 0.5 * delta))
      .mean();
}

Eigen::VectorXd loss_grad(const Eigen::VectorXd& pred,
                          const Eigen::VectorXd& target, LossKind loss,
                          double delta) {
  const Eigen::ArrayXd r = (pred - target).array();
  const double n = static_cast<double>(r.size());
  if (loss == LossKind::Squared) {
    return (2.0 * r / n).matrix();
  }
  const Eigen::ArrayXd clipped = r.min(delta).max(-delta);
  return (clipped / n).matrix();
}

MlpGrads backward(const MlpModel& model,
                  const std::vector<Eigen::MatrixXd>& acts,
                  const Eigen::VectorXd& dpred) {
  const std::size_t layers = model.weights.size();
  MlpGrads grads;
  grads.weights.resize(layers);
  grads.biases.resize(layers);

  Eigen::MatrixXd delta = dpred;  // N x 1 at the output layer
  for (std::size_t l = layers; l-- > 0;) {
    grads.weights[l].noalias() = delta.transpose() * acts[l];
    grads.biases[l] = delta.colwise().sum().transpose();
    if (l > 0) {
      Eigen::MatrixXd back = delta * model.weights[l];
      // ReLU derivative through the stored post-activation values
      delta = back.cwiseProduct(
          (acts[l].array() > 0.0).cast<double>().matrix());
    }
  }
  return grads;
}

struct AdamState {
  std::vector<Eigen::MatrixXd> mw, vw;
  std::vector<Eigen::VectorXd> mb, vb;
  long step = 0;

  explicit AdamState(const MlpModel& model) {
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
      mw.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(),
                                         model.weights[l].cols()));
      vw.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(),
                                         model.weights[l].cols()));
      mb.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
      vb.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
    }
  }

  void update(MlpModel& model, const MlpGrads& grads, double lr) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    ++step;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
      mw[l] = beta1 * mw[l] + (1.0 - beta1) * grads.weights[l];
      vw[l] = beta2 * vw[l].array().matrix() +
              (1.0 - beta2) * grads.weights[l].array().square().matrix();
      model.weights[l].array() -=
          lr * (mw[l].array() / c1) / ((vw[l].array() / c2).sqrt() + eps);

      mb[l] = beta1 * mb[l] + (1.0 - beta1) * grads.biases[l];
      vb[l] = beta2 * vb[l].array().matrix() +
              (1.0 - beta2) * grads.biases[l].array().square().matrix();
      model.biases[l].array() -=
          lr * (mb[l].array() / c1) / ((vb[l].array() / c2).sqrt() + eps);
    }
  }
};

}  // namespace

double MlpModel::predict(const Eigen::VectorXd& yvec) const {
  if (yvec.size() != input_dim) {
    throw DataError("mlp input dimension mismatch: expected " +
                    std::to_string(input_dim) + ", got " +
                    std::to_string(yvec.size()));
  }
  Eigen::VectorXd h = scaler.transform(yvec);
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Eigen::VectorXd z = weights[l] * h + biases[l];
    if (l + 1 < weights.size()) z = z.cwiseMax(0.0);
    h = std::move(z);
  }
  return response_mean + response_sd * h(0);
}

Eigen::VectorXd MlpModel::predict_batch(const Eigen::MatrixXd& rows) const {
  if (rows.cols() != input_dim) {
    throw DataError("mlp input dimension mismatch: expected " +
                    std::to_string(input_dim) + " columns, got " +
                    std::to_string(rows.cols()));
  }
  const auto acts = forward_all(*this, scaler.transform(rows));
  return (response_mean + response_sd * acts.back().col(0).array()).matrix();
}

MlpModel MlpModel::zeroed(int input_dim, int hidden_layers, int width) {
  MlpModel m;
  m.input_dim = input_dim;
  const auto dims = layer_dims(input_dim, hidden_layers, width);
  for (const auto& d : dims) {
    m.weights.push_back(Eigen::MatrixXd::Zero(d.out, d.in));
    m.biases.push_back(Eigen::VectorXd::Zero(d.out));
  }
  m.scaler = Scaler::identity(input_dim);
  return m;
}

MlpModel train_mlp(const LaggedDesign& design, const MlpConfig& cfg) {
  if (cfg.hidden_layers < 1) throw UsageError("mlp needs at least one hidden layer");
  const int width = cfg.width > 0 ? cfg.width : 5 * design.q();
  if (design.rows() < width) {
    throw DataError("too few rows to train mlp: " + std::to_string(design.rows()) +
                    " < width " + std::to_string(width));
  }
  if (cfg.opt.epochs < 1 || !(cfg.opt.learning_rate > 0.0)) {
    throw UsageError("mlp optimizer config invalid");
  }

  MlpModel model;
  model.input_dim = design.q();
  model.scaler = cfg.standardize_inputs ? Scaler::fit(design.ylags())
                                        : Scaler::identity(design.q());
  init_weights(model, cfg.hidden_layers, width, cfg.opt.seed);
  model.info.seed = cfg.opt.seed;
  model.info.epochs = cfg.opt.epochs;

  const Eigen::VectorXd& y = design.response();
  const Eigen::Index n = design.rows();
  model.response_mean = y.mean();
  {
    const double ss = (y.array() - model.response_mean).square().sum();
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    model.response_sd = sd > 0.0 ? sd : 1.0;
  }

  const Eigen::MatrixXd x = model.scaler.transform(design.ylags());

  const auto to_raw = [&](const Eigen::MatrixXd& out_col) {
    return (model.response_mean + model.response_sd * out_col.col(0).array())
        .matrix()
        .eval();
  };
  const auto batch_loss = [&](const Eigen::MatrixXd& xb,
                              const Eigen::VectorXd& yb) {
    const auto acts = forward_all(model, xb);
    return loss_value(to_raw(acts.back()), yb, cfg.loss, cfg.smooth_l1_delta);
  };

  model.info.initial_loss = batch_loss(x, y);
  if (!std::isfinite(model.info.initial_loss)) {
    throw NumericalError("mlp training loss non-finite at epoch 0");
  }

  AdamState adam(model);
  const int bs = cfg.opt.batch_size;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

  double last_loss = model.info.initial_loss;
  for (int epoch = 0; epoch < cfg.opt.epochs; ++epoch) {
    if (bs <= 0 || bs >= n) {
      const auto acts = forward_all(model, x);
      const Eigen::VectorXd pred = to_raw(acts.back());
      last_loss = loss_value(pred, y, cfg.loss, cfg.smooth_l1_delta);
      if (!std::isfinite(last_loss)) {
        throw NumericalError("mlp training loss non-finite at epoch " +
                             std::to_string(epoch));
      }
      const auto grads = backward(
          model, acts,
          model.response_sd *
              loss_grad(pred, y, cfg.loss, cfg.smooth_l1_delta));
      adam.update(model, grads, cfg.opt.learning_rate);
    } else {
      RngStream shuffle(derive_seed(cfg.opt.seed, SeedDomain::Shuffle,
                                    static_cast<std::uint64_t>(epoch)));
      for (Eigen::Index i = n - 1; i > 0; --i) {
        std::swap(order[static_cast<std::size_t>(i)],
                  order[shuffle.uniform_int(static_cast<std::uint64_t>(i + 1))]);
      }
      double epoch_loss = 0.0;
      for (Eigen::Index from = 0; from < n; from += bs) {
        const Eigen::Index m = std::min<Eigen::Index>(bs, n - from);
        Eigen::MatrixXd xb(m, x.cols());
        Eigen::VectorXd yb(m);
        for (Eigen::Index i = 0; i < m; ++i) {
          xb.row(i) = x.row(order[static_cast<std::size_t>(from + i)]);
          yb(i) = y(order[static_cast<std::size_t>(from + i)]);
        }
        const auto acts = forward_all(model, xb);
        const Eigen::VectorXd pred = to_raw(acts.back());
        epoch_loss += loss_value(pred, yb, cfg.loss, cfg.smooth_l1_delta) *
                      static_cast<double>(m);
        const auto grads = backward(
            model, acts,
            model.response_sd *
                loss_grad(pred, yb, cfg.loss, cfg.smooth_l1_delta));
        adam.update(model, grads, cfg.opt.learning_rate);
      }
      last_loss = epoch_loss / static_cast<double>(n);
      if (!std::isfinite(last_loss)) {
        throw NumericalError("mlp training loss non-finite at epoch " +
                             std::to_string(epoch));
      }
    }
  }

  model.info.final_loss = batch_loss(x, y);
  if (!std::isfinite(model.info.final_loss)) {
    throw NumericalError("mlp training loss non-finite at final epoch");
  }
  return model;
}

double mlp_loss(const MlpModel& model, const LaggedDesign& design,
                LossKind loss, double smooth_l1_delta) {
  const Eigen::VectorXd pred = model.predict_batch(design.ylags());
  return loss_value(pred, design.response(), loss, smooth_l1_delta);
}

MlpGrads mlp_gradient(const MlpModel& model, const LaggedDesign& design,
                      LossKind loss, double smooth_l1_delta) {
  if (design.rows() < 1) throw DataError("gradient needs a non-empty batch");
  const Eigen::MatrixXd x = model.scaler.transform(design.ylags());
  const auto acts = forward_all(model, x);
  const Eigen::VectorXd pred =
      (model.response_mean + model.response_sd * acts.back().col(0).array())
          .matrix();
  return backward(model, acts,
                  model.response_sd * loss_grad(pred, design.response(), loss,
                                                smooth_l1_delta));
}

Eigen::VectorXd residuals(const MlpModel& model, const LaggedDesign& design) {
  return design.response() - model.predict_batch(design.ylags());
}

}  // namespace drgct
