#include "drgct/mdn.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "drgct/errors.hpp"

namespace drgct {
namespace {

double softplus(double s) {
  if (s > 30.0) return s;
  if (s < -30.0) return std::exp(s);
  return std::log1p(std::exp(s));
}

double sigmoid(double s) { return 1.0 / (1.0 + std::exp(-s)); }

Eigen::MatrixXd softplus(const Eigen::MatrixXd& m) {
  return m.unaryExpr([](double v) { return softplus(v); });
}

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& m) {
  return m.unaryExpr([](double v) { return sigmoid(v); });
}

struct BatchForward {
  std::vector<Eigen::MatrixXd> acts;  // acts[0] is the scaled input batch
  Eigen::MatrixXd logits;             // N x G
  Eigen::MatrixXd mu;                 // N x G*p
  Eigen::MatrixXd s_pre;              // N x G*p
  Eigen::MatrixXd sigma;              // N x G*p
  Eigen::MatrixXd logalpha;           // N x G
  Eigen::MatrixXd loglik;             // N x G
  Eigen::VectorXd row_ll;             // N, log-likelihood per row
};

Eigen::VectorXd rowwise_lse(const Eigen::MatrixXd& m) {
  const Eigen::VectorXd mx = m.rowwise().maxCoeff();
  return (mx.array() +
          (m.colwise() - mx).array().exp().rowwise().sum().log())
      .matrix();
}

BatchForward forward_batch(const MdnModel& model, const Eigen::MatrixXd& x,
                           const Eigen::MatrixXd* targets) {
  BatchForward f;
  f.acts.push_back(x);
  for (std::size_t l = 0; l < model.trunk_w.size(); ++l) {
    Eigen::MatrixXd z =
        ((f.acts.back() * model.trunk_w[l].transpose()).rowwise() +
         model.trunk_b[l].transpose())
            .cwiseMax(0.0);
    f.acts.push_back(std::move(z));
  }
  const Eigen::MatrixXd& h = f.acts.back();
  f.logits = (h * model.w_logit.transpose()).rowwise() + model.b_logit.transpose();

  // Tile the per-coordinate response moments across components.
  const int gp = model.components * model.response_dim;
  Eigen::RowVectorXd offset(gp), scale(gp);
  for (int g = 0; g < model.components; ++g) {
    for (int j = 0; j < model.response_dim; ++j) {
      offset(g * model.response_dim + j) = model.response_mean(j);
      scale(g * model.response_dim + j) = model.response_sd(j);
    }
  }
  const Eigen::MatrixXd mu_head =
      (h * model.w_mu.transpose()).rowwise() + model.b_mu.transpose();
  f.mu = (mu_head.array().rowwise() * scale.array()).matrix().rowwise() +
         offset;
  f.s_pre = (h * model.w_sigma.transpose()).rowwise() + model.b_sigma.transpose();
  f.sigma = ((softplus(f.s_pre).array().rowwise() * scale.array()) +
             model.sigma_floor)
                .matrix();
  f.logalpha = f.logits.colwise() - rowwise_lse(f.logits);

  if (targets != nullptr) {
    const int G = model.components;
    const int p = model.response_dim;
    const double norm_const =
        0.5 * static_cast<double>(p) * std::log(2.0 * std::numbers::pi);
    f.loglik.resize(x.rows(), G);
    for (int g = 0; g < G; ++g) {
      const auto mu_g = f.mu.middleCols(g * p, p).array();
      const auto sg_g = f.sigma.middleCols(g * p, p).array();
      const Eigen::ArrayXXd z = (targets->array() - mu_g) / sg_g;
      f.loglik.col(g) = (-0.5 * z.square().rowwise().sum() -
                         sg_g.log().rowwise().sum() - norm_const)
                            .matrix();
    }
    f.row_ll = rowwise_lse(f.logalpha + f.loglik);
  }
  return f;
}

/// Counter-based init; trunk layers take indices 0..H-1, heads H, H+1, H+2.
void init_weights(MdnModel& model, int hidden_layers, int width,
                  std::uint64_t seed) {
  const auto draw = [&](std::uint64_t layer, int i, int j, double r) {
    const std::uint64_t u = splitmix64(
        derive_seed(seed, SeedDomain::MdnInit, layer,
                    static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)));
    return r * (2.0 * to_unit_double(u) - 1.0);
  };
  const auto init_matrix = [&](Eigen::MatrixXd& w, std::uint64_t layer, int out,
                               int in) {
    const double r = 1.0 / std::sqrt(static_cast<double>(in));
    w.resize(out, in);
    for (int i = 0; i < out; ++i)
      for (int j = 0; j < in; ++j) w(i, j) = draw(layer, i, j, r);
  };

  model.trunk_w.clear();
  model.trunk_b.clear();
  int in = model.input_dim;
  for (int l = 0; l < hidden_layers; ++l) {
    Eigen::MatrixXd w;
    init_matrix(w, static_cast<std::uint64_t>(l), width, in);
    model.trunk_w.push_back(std::move(w));
    model.trunk_b.push_back(Eigen::VectorXd::Zero(width));
    in = width;
  }
  const int gp = model.components * model.response_dim;
  const auto h = static_cast<std::uint64_t>(hidden_layers);
  init_matrix(model.w_logit, h, model.components, in);
  init_matrix(model.w_mu, h + 1, gp, in);
  init_matrix(model.w_sigma, h + 2, gp, in);
  model.b_logit = Eigen::VectorXd::Zero(model.components);
  model.b_mu = Eigen::VectorXd::Zero(gp);
  model.b_sigma = Eigen::VectorXd::Zero(gp);
}

MdnGrads backward_batch(const MdnModel& model, const BatchForward& f,
                        const Eigen::MatrixXd& targets) {
  const int G = model.components;
  const int p = model.response_dim;
  const auto n = static_cast<double>(targets.rows());

  const Eigen::MatrixXd resp =
      ((f.logalpha + f.loglik).colwise() - f.row_ll).array().exp().matrix();
  const Eigen::MatrixXd alpha = f.logalpha.array().exp().matrix();

  const Eigen::MatrixXd dlogits = (alpha - resp) / n;

  Eigen::MatrixXd dmu(targets.rows(), G * p);
  Eigen::MatrixXd dsigma(targets.rows(), G * p);
  for (int g = 0; g < G; ++g) {
    const auto mu_g = f.mu.middleCols(g * p, p).array();
    const auto sg_g = f.sigma.middleCols(g * p, p).array();
    const Eigen::ArrayXXd diff = mu_g - targets.array();
    const Eigen::ArrayXXd inv_sg = sg_g.inverse();
    dmu.middleCols(g * p, p) =
        ((diff * inv_sg.square()).colwise() * resp.col(g).array() / n).matrix();
    dsigma.middleCols(g * p, p) =
        (((inv_sg - diff.square() * inv_sg.cube()).colwise() *
          resp.col(g).array()) /
         n)
            .matrix();
  }
  Eigen::RowVectorXd scale(G * p);
  for (int g = 0; g < G; ++g) {
    for (int j = 0; j < p; ++j) {
      scale(g * p + j) = model.response_sd(j);
    }
  }
  dmu = (dmu.array().rowwise() * scale.array()).matrix();
  const Eigen::MatrixXd ds =
      (dsigma.cwiseProduct(sigmoid(f.s_pre)).array().rowwise() *
       scale.array())
          .matrix();

  MdnGrads grads;
  const Eigen::MatrixXd& h = f.acts.back();
  grads.w_logit.noalias() = dlogits.transpose() * h;
  grads.b_logit = dlogits.colwise().sum().transpose();
  grads.w_mu.noalias() = dmu.transpose() * h;
  grads.b_mu = dmu.colwise().sum().transpose();
  grads.w_sigma.noalias() = ds.transpose() * h;
  grads.b_sigma = ds.colwise().sum().transpose();

  Eigen::MatrixXd delta = dlogits * model.w_logit + dmu * model.w_mu +
                          ds * model.w_sigma;
  const std::size_t layers = model.trunk_w.size();
  grads.trunk_w.resize(layers);
  grads.trunk_b.resize(layers);
  for (std::size_t l = layers; l-- > 0;) {
    delta = delta.cwiseProduct(
        (f.acts[l + 1].array() > 0.0).cast<double>().matrix());
    grads.trunk_w[l].noalias() = delta.transpose() * f.acts[l];
    grads.trunk_b[l] = delta.colwise().sum().transpose();
    if (l > 0) delta = (delta * model.trunk_w[l]).eval();
  }
  return grads;
}

/// Adam over the model's parameter tensors, visited in a fixed order.
class MdnAdam {
 public:
  explicit MdnAdam(const MdnModel& model) {
    auto zero_like_m = [](const Eigen::MatrixXd& m) {
      return Eigen::MatrixXd::Zero(m.rows(), m.cols()).eval();
    };
    auto zero_like_v = [](const Eigen::VectorXd& v) {
      return Eigen::VectorXd::Zero(v.size()).eval();
    };
    for (const auto& w : model.trunk_w) mw_.push_back(zero_like_m(w)), vw_.push_back(zero_like_m(w));
    for (const auto& b : model.trunk_b) mb_.push_back(zero_like_v(b)), vb_.push_back(zero_like_v(b));
    m_logit_ = zero_like_m(model.w_logit); v_logit_ = zero_like_m(model.w_logit);
    m_mu_ = zero_like_m(model.w_mu); v_mu_ = zero_like_m(model.w_mu);
    m_sigma_ = zero_like_m(model.w_sigma); v_sigma_ = zero_like_m(model.w_sigma);
    mb_logit_ = zero_like_v(model.b_logit); vb_logit_ = zero_like_v(model.b_logit);
    mb_mu_ = zero_like_v(model.b_mu); vb_mu_ = zero_like_v(model.b_mu);
    mb_sigma_ = zero_like_v(model.b_sigma); vb_sigma_ = zero_like_v(model.b_sigma);
  }

  void update(MdnModel& model, const MdnGrads& g, double lr) {
    ++step_;
    c1_ = 1.0 - std::pow(0.9, static_cast<double>(step_));
    c2_ = 1.0 - std::pow(0.999, static_cast<double>(step_));
    for (std::size_t l = 0; l < model.trunk_w.size(); ++l) {
      apply(model.trunk_w[l], g.trunk_w[l], mw_[l], vw_[l], lr);
      apply(model.trunk_b[l], g.trunk_b[l], mb_[l], vb_[l], lr);
    }
    apply(model.w_logit, g.w_logit, m_logit_, v_logit_, lr);
    apply(model.w_mu, g.w_mu, m_mu_, v_mu_, lr);
    apply(model.w_sigma, g.w_sigma, m_sigma_, v_sigma_, lr);
    apply(model.b_logit, g.b_logit, mb_logit_, vb_logit_, lr);
    apply(model.b_mu, g.b_mu, mb_mu_, vb_mu_, lr);
    apply(model.b_sigma, g.b_sigma, mb_sigma_, vb_sigma_, lr);
  }

 private:
  template <typename T>
  void apply(T& param, const T& grad, T& m, T& v, double lr) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    m = beta1 * m + (1.0 - beta1) * grad;
    v = (beta2 * v.array() + (1.0 - beta2) * grad.array().square()).matrix();
    param.array() -= lr * (m.array() / c1_) / ((v.array() / c2_).sqrt() + eps);
  }

  std::vector<Eigen::MatrixXd> mw_, vw_;
  std::vector<Eigen::VectorXd> mb_, vb_;
  Eigen::MatrixXd m_logit_, v_logit_, m_mu_, v_mu_, m_sigma_, v_sigma_;
  Eigen::VectorXd mb_logit_, vb_logit_, mb_mu_, vb_mu_, mb_sigma_, vb_sigma_;
  long step_ = 0;
  double c1_ = 1.0, c2_ = 1.0;
};

LaggedDesign take_rows(const LaggedDesign& design, Eigen::Index from,
                       Eigen::Index count) {
  return LaggedDesign(design.response().segment(from, count),
                      design.ylags().middleRows(from, count),
                      design.xlags().middleRows(from, count));
}

/// Draw one sample in place from row segments. Consumes one uniform for the
/// component, then p normals.
void sample_row(const Eigen::VectorXd& alpha, const Eigen::VectorXd& mu_row,
                const Eigen::VectorXd& sigma_row, int p, RngStream& rng,
                Eigen::VectorXd& out) {
  const int G = static_cast<int>(alpha.size());
  const double u = rng.uniform();
  int g = 0;
  double cum = 0.0;
  for (; g < G; ++g) {
    cum += alpha(g);
    if (u < cum) break;
  }
  if (g == G) g = G - 1;  // guard against cumulative rounding
  for (int j = 0; j < p; ++j) {
    out(j) = rng.normal(mu_row(g * p + j), sigma_row(g * p + j));
  }
}

}  // namespace

MixtureParams MdnModel::params(const Eigen::VectorXd& yvec) const {
  if (yvec.size() != input_dim) {
    throw DataError("mdn input dimension mismatch: expected " +
                    std::to_string(input_dim) + ", got " +
                    std::to_string(yvec.size()));
  }
  Eigen::MatrixXd x = scaler.transform(yvec).transpose();
  const BatchForward f = forward_batch(*this, x, nullptr);
  MixtureParams out;
  out.alpha = f.logalpha.row(0).transpose().array().exp().matrix();
  out.mu.resize(components, response_dim);
  out.sigma.resize(components, response_dim);
  for (int g = 0; g < components; ++g) {
    out.mu.row(g) = f.mu.row(0).segment(g * response_dim, response_dim);
    out.sigma.row(g) =
        f.sigma.row(0).segment(g * response_dim, response_dim);
  }
  return out;
}

MdnModel MdnModel::zeroed(int input_dim, int response_dim, int components,
                          int hidden_layers, int width, double sigma_floor) {
  MdnModel m;
  m.input_dim = input_dim;
  m.response_dim = response_dim;
  m.components = components;
  m.sigma_floor = sigma_floor;
  int in = input_dim;
  for (int l = 0; l < hidden_layers; ++l) {
    m.trunk_w.push_back(Eigen::MatrixXd::Zero(width, in));
    m.trunk_b.push_back(Eigen::VectorXd::Zero(width));
    in = width;
  }
  const int gp = components * response_dim;
  m.w_logit = Eigen::MatrixXd::Zero(components, in);
  m.w_mu = Eigen::MatrixXd::Zero(gp, in);
  m.w_sigma = Eigen::MatrixXd::Zero(gp, in);
  m.b_logit = Eigen::VectorXd::Zero(components);
  m.b_mu = Eigen::VectorXd::Zero(gp);
  m.b_sigma = Eigen::VectorXd::Zero(gp);
  m.scaler = Scaler::identity(input_dim);
  m.response_mean = Eigen::VectorXd::Zero(response_dim);
  m.response_sd = Eigen::VectorXd::Ones(response_dim);
  return m;
}

MdnModel train_mdn(const LaggedDesign& design, const MdnConfig& cfg) {
  int components = cfg.components;
  if (!cfg.g_grid.empty()) {
    components = select_mdn_components(design, cfg, cfg.g_grid);
  }
  if (components < 1) throw UsageError("mixture needs at least one component");
  if (!(cfg.sigma_floor > 0.0)) throw UsageError("sigma floor must be positive");
  if (design.rows() < components) {
    throw DataError("too few rows to train mdn: " + std::to_string(design.rows()) +
                    " < components " + std::to_string(components));
  }
  if (cfg.opt.epochs < 1 || !(cfg.opt.learning_rate > 0.0)) {
    throw UsageError("mdn optimizer config invalid");
  }

  MdnModel model;
  model.input_dim = design.q();
  model.response_dim = design.p();
  model.components = components;
  model.sigma_floor = cfg.sigma_floor;
  model.scaler = cfg.standardize_inputs ? Scaler::fit(design.ylags())
                                        : Scaler::identity(design.q());
  {
    const Scaler response = Scaler::fit(design.xlags());
    model.response_mean = response.mean();
    model.response_sd = response.sd();
  }
  const int width = cfg.width > 0 ? cfg.width : 5 * design.q();
  init_weights(model, cfg.hidden_layers, width, cfg.opt.seed);
  model.info.seed = cfg.opt.seed;
  model.info.epochs = cfg.opt.epochs;

  const Eigen::MatrixXd x = model.scaler.transform(design.ylags());
  const Eigen::MatrixXd& targets = design.xlags();
  const Eigen::Index n = design.rows();

  {
    const BatchForward f = forward_batch(model, x, &targets);
    model.info.initial_loss = -f.row_ll.mean();
  }
  if (!std::isfinite(model.info.initial_loss)) {
    throw NumericalError("mdn training loss non-finite at epoch 0");
  }

  MdnAdam adam(model);
  const int bs = cfg.opt.batch_size;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

  for (int epoch = 0; epoch < cfg.opt.epochs; ++epoch) {
    if (bs <= 0 || bs >= n) {
      const BatchForward f = forward_batch(model, x, &targets);
      const double nll = -f.row_ll.mean();
      if (!std::isfinite(nll)) {
        throw NumericalError("mdn training loss non-finite at epoch " +
                             std::to_string(epoch));
      }
      adam.update(model, backward_batch(model, f, targets),
                  cfg.opt.learning_rate);
    } else {
      RngStream shuffle(derive_seed(cfg.opt.seed, SeedDomain::Shuffle,
                                    static_cast<std::uint64_t>(epoch), 1));
      for (Eigen::Index i = n - 1; i > 0; --i) {
        std::swap(order[static_cast<std::size_t>(i)],
                  order[shuffle.uniform_int(static_cast<std::uint64_t>(i + 1))]);
      }
      for (Eigen::Index from = 0; from < n; from += bs) {
        const Eigen::Index m = std::min<Eigen::Index>(bs, n - from);
        Eigen::MatrixXd xb(m, x.cols());
        Eigen::MatrixXd tb(m, targets.cols());
        for (Eigen::Index i = 0; i < m; ++i) {
          xb.row(i) = x.row(order[static_cast<std::size_t>(from + i)]);
          tb.row(i) = targets.row(order[static_cast<std::size_t>(from + i)]);
        }
        const BatchForward f = forward_batch(model, xb, &tb);
        const double nll = -f.row_ll.mean();
        if (!std::isfinite(nll)) {
          throw NumericalError("mdn training loss non-finite at epoch " +
                               std::to_string(epoch));
        }
        adam.update(model, backward_batch(model, f, tb), cfg.opt.learning_rate);
      }
    }
  }

  {
    const BatchForward f = forward_batch(model, x, &targets);
    model.info.final_loss = -f.row_ll.mean();
  }
  if (!std::isfinite(model.info.final_loss)) {
    throw NumericalError("mdn training loss non-finite at final epoch");
  }
  return model;
}

int select_mdn_components(const LaggedDesign& design, const MdnConfig& cfg,
                          const std::vector<int>& grid) {
  if (grid.empty()) throw UsageError("component grid is empty");
  const Eigen::Index split = (design.rows() * 4) / 5;
  if (split < 2 || design.rows() - split < 1) {
    throw DataError("too few rows for forward-chaining validation");
  }
  const LaggedDesign train = take_rows(design, 0, split);
  const LaggedDesign valid = take_rows(design, split, design.rows() - split);

  int best_g = grid.front();
  double best_nll = std::numeric_limits<double>::infinity();
  for (const int g : grid) {
    MdnConfig candidate = cfg;
    candidate.components = g;
    candidate.g_grid.clear();
    const MdnModel model = train_mdn(train, candidate);
    const double nll = mdn_nll(model, valid);
    if (nll < best_nll) {
      best_nll = nll;
      best_g = g;
    }
  }
  return best_g;
}

MixtureParams mdn_params(const MdnModel& model, const Eigen::VectorXd& yvec) {
  return model.params(yvec);
}

Eigen::MatrixXd mdn_sample(const MixtureParams& params, int M, RngStream& rng) {
  if (M < 1) throw UsageError("sample count must be at least 1");
  const int G = params.components();
  const int p = params.dim();
  // Flatten to the head layout used internally.
  Eigen::VectorXd mu_row(G * p), sigma_row(G * p);
  for (int g = 0; g < G; ++g) {
    mu_row.segment(g * p, p) = params.mu.row(g);
    sigma_row.segment(g * p, p) = params.sigma.row(g);
  }
  Eigen::MatrixXd draws(M, p);
  Eigen::VectorXd draw(p);
  for (int m = 0; m < M; ++m) {
    sample_row(params.alpha, mu_row, sigma_row, p, rng, draw);
    draws.row(m) = draw.transpose();
  }
  return draws;
}

std::complex<double> mdn_cf_analytic(const MixtureParams& params,
                                     const Eigen::VectorXd& nu) {
  if (nu.size() != params.dim()) {
    throw DataError("cf frequency dimension mismatch");
  }
  std::complex<double> cf(0.0, 0.0);
  for (int g = 0; g < params.components(); ++g) {
    const double theta = nu.dot(params.mu.row(g));
    const double damp =
        -0.5 * (nu.array().square() * params.sigma.row(g).transpose().array().square())
                   .sum();
    cf += params.alpha(g) * std::exp(damp) *
          std::complex<double>(std::cos(theta), std::sin(theta));
  }
  return cf;
}

CharFnEstimate estimate_cf(const MdnModel& model, const LaggedDesign& design,
                           const FreqSet& pairs, int M, RngStream& rng) {
  if (M < 1) throw UsageError("sample count must be at least 1");
  if (design.q() != model.input_dim || design.p() != model.response_dim) {
    throw DataError("mdn/design dimension mismatch");
  }
  const Eigen::Index n = design.rows();
  const int L = pairs.size();
  const int p = model.response_dim;

  const Eigen::MatrixXd x = model.scaler.transform(design.ylags());
  const BatchForward f = forward_batch(model, x, nullptr);

  CharFnEstimate est;
  est.sample_count = M;
  est.phi.resize(n, L);

  Eigen::MatrixXd draws(M, p);
  Eigen::VectorXd draw(p);
  Eigen::VectorXd theta(M);
  for (Eigen::Index t = 0; t < n; ++t) {
    const Eigen::VectorXd alpha =
        f.logalpha.row(t).transpose().array().exp().matrix();
    const Eigen::VectorXd mu_row = f.mu.row(t).transpose();
    const Eigen::VectorXd sigma_row = f.sigma.row(t).transpose();
    for (int m = 0; m < M; ++m) {
      sample_row(alpha, mu_row, sigma_row, p, rng, draw);
      draws.row(m) = draw.transpose();
    }
    for (int l = 0; l < L; ++l) {
      theta.noalias() = draws * pairs.pairs[static_cast<std::size_t>(l)].nu;
      double re = 0.0, im = 0.0;
      for (int m = 0; m < M; ++m) {
        re += std::cos(theta(m));
        im += std::sin(theta(m));
      }
      est.phi(t, l) = std::complex<double>(re / M, im / M);
    }
  }
  return est;
}

double mdn_nll(const MdnModel& model, const LaggedDesign& design) {
  if (design.q() != model.input_dim || design.p() != model.response_dim) {
    throw DataError("mdn/design dimension mismatch");
  }
  const Eigen::MatrixXd x = model.scaler.transform(design.ylags());
  const Eigen::MatrixXd& targets = design.xlags();
  const BatchForward f = forward_batch(model, x, &targets);
  return -f.row_ll.mean();
}

MdnGrads mdn_gradient(const MdnModel& model, const LaggedDesign& design) {
  if (design.rows() < 1) throw DataError("gradient needs a non-empty batch");
  const Eigen::MatrixXd x = model.scaler.transform(design.ylags());
  const Eigen::MatrixXd& targets = design.xlags();
  const BatchForward f = forward_batch(model, x, &targets);
  return backward_batch(model, f, targets);
}

}  // namespace drgct
