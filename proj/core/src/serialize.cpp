#include "drgct/serialize.hpp"

#include <cstring>
#include <fstream>

#include "drgct/errors.hpp"

namespace drgct {
namespace {

constexpr std::uint64_t kMlpMagic = 0x44524743544d4c31ULL;  // "DRGCTML1"
constexpr std::uint64_t kMdnMagic = 0x44524743544d4431ULL;  // "DRGCTMD1"
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw DataError("cannot open snapshot for writing: " + path);
  }

  void u32(std::uint32_t v) { raw(&v, sizeof(v)); }
  void u64(std::uint64_t v) { raw(&v, sizeof(v)); }
  void f64(double v) { raw(&v, sizeof(v)); }

  void vec(const Eigen::VectorXd& v) {
    u32(static_cast<std::uint32_t>(v.size()));
    raw(v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
  }

  void mat(const Eigen::MatrixXd& m) {
    u32(static_cast<std::uint32_t>(m.rows()));
    u32(static_cast<std::uint32_t>(m.cols()));
    raw(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
  }

  void check() {
    if (!out_) throw DataError("snapshot write failed");
  }

 private:
  void raw(const void* p, std::size_t bytes) {
    out_.write(static_cast<const char*>(p),
               static_cast<std::streamsize>(bytes));
  }
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary) {
    if (!in_) throw DataError("cannot open snapshot: " + path);
  }

  std::uint32_t u32() { std::uint32_t v; raw(&v, sizeof(v)); return v; }
  std::uint64_t u64() { std::uint64_t v; raw(&v, sizeof(v)); return v; }
  double f64() { double v; raw(&v, sizeof(v)); return v; }

  Eigen::VectorXd vec() {
    const auto n = u32();
    Eigen::VectorXd v(n);
    raw(v.data(), sizeof(double) * n);
    return v;
  }

  Eigen::MatrixXd mat() {
    const auto rows = u32();
    const auto cols = u32();
    Eigen::MatrixXd m(rows, cols);
    raw(m.data(), sizeof(double) * rows * cols);
    return m;
  }

 private:
  void raw(void* p, std::size_t bytes) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(bytes));
    if (!in_) throw DataError("snapshot truncated or unreadable");
  }
  std::ifstream in_;
};

void write_scaler(Writer& w, const Scaler& s) {
  w.vec(s.mean());
  w.vec(s.sd());
}

Scaler read_scaler(Reader& r) {
  Eigen::VectorXd mean = r.vec();
  Eigen::VectorXd sd = r.vec();
  return Scaler::from_moments(std::move(mean), std::move(sd));
}

void write_info(Writer& w, const MlpModel::TrainingInfo& info) {
  w.f64(info.initial_loss);
  w.f64(info.final_loss);
  w.u32(static_cast<std::uint32_t>(info.epochs));
  w.u64(info.seed);
}

MlpModel::TrainingInfo read_info(Reader& r) {
  MlpModel::TrainingInfo info;
  info.initial_loss = r.f64();
  info.final_loss = r.f64();
  info.epochs = static_cast<int>(r.u32());
  info.seed = r.u64();
  return info;
}

}  // namespace

void save_mlp(const MlpModel& model, const std::string& path) {
  Writer w(path);
  w.u64(kMlpMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(model.input_dim));
  w.u32(static_cast<std::uint32_t>(model.weights.size()));
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    w.mat(model.weights[l]);
    w.vec(model.biases[l]);
  }
  write_scaler(w, model.scaler);
  write_info(w, model.info);
  w.check();
}

MlpModel load_mlp(const std::string& path) {
  Reader r(path);
  if (r.u64() != kMlpMagic) throw DataError("not an mlp snapshot: " + path);
  if (r.u32() != kVersion) throw DataError("unsupported mlp snapshot version");
  MlpModel model;
  model.input_dim = static_cast<int>(r.u32());
  const auto layers = r.u32();
  for (std::uint32_t l = 0; l < layers; ++l) {
    model.weights.push_back(r.mat());
    model.biases.push_back(r.vec());
  }
  model.scaler = read_scaler(r);
  model.info = read_info(r);
  return model;
}

void save_mdn(const MdnModel& model, const std::string& path) {
  Writer w(path);
  w.u64(kMdnMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(model.input_dim));
  w.u32(static_cast<std::uint32_t>(model.response_dim));
  w.u32(static_cast<std::uint32_t>(model.components));
  w.f64(model.sigma_floor);
  w.u32(static_cast<std::uint32_t>(model.trunk_w.size()));
  for (std::size_t l = 0; l < model.trunk_w.size(); ++l) {
    w.mat(model.trunk_w[l]);
    w.vec(model.trunk_b[l]);
  }
  w.mat(model.w_logit);
  w.vec(model.b_logit);
  w.mat(model.w_mu);
  w.vec(model.b_mu);
  w.mat(model.w_sigma);
  w.vec(model.b_sigma);
  write_scaler(w, model.scaler);
  write_info(w, model.info);
  w.check();
}

MdnModel load_mdn(const std::string& path) {
  Reader r(path);
  if (r.u64() != kMdnMagic) throw DataError("not an mdn snapshot: " + path);
  if (r.u32() != kVersion) throw DataError("unsupported mdn snapshot version");
  MdnModel model;
  model.input_dim = static_cast<int>(r.u32());
  model.response_dim = static_cast<int>(r.u32());
  model.components = static_cast<int>(r.u32());
  model.sigma_floor = r.f64();
  const auto layers = r.u32();
  for (std::uint32_t l = 0; l < layers; ++l) {
    model.trunk_w.push_back(r.mat());
    model.trunk_b.push_back(r.vec());
  }
  model.w_logit = r.mat();
  model.b_logit = r.vec();
  model.w_mu = r.mat();
  model.b_mu = r.vec();
  model.w_sigma = r.mat();
  model.b_sigma = r.vec();
  model.scaler = read_scaler(r);
  model.info = read_info(r);
  return model;
}

}  // namespace drgct
