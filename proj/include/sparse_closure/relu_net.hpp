#ifndef SPARSE_CLOSURE_RELU_NET_HPP
#define SPARSE_CLOSURE_RELU_NET_HPP

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sparse_closure/support_pattern.hpp"

namespace sparse_closure {

// Weight and bias arrays shaped like a network; used for gradients and momentum.
struct LayerArrays {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static LayerArrays zeros(const SupportPattern& p) {
    LayerArrays a;
    for (std::size_t k = 1; k <= p.depth(); ++k) {
      a.weights.push_back(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p.rows(k)), static_cast<Eigen::Index>(p.cols(k))));
      a.biases.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.rows(k))));
    }
    return a;
  }
};

/*
 * Parameters theta = (W_k, b_k) of a ReLU network on a fixed support.
 * Every mutation goes through the mask: off-support weights stay exactly 0.
 */
class NetworkParams {
 public:
  explicit NetworkParams(SupportPattern pattern) : pattern_(std::move(pattern)), arrays_(LayerArrays::zeros(pattern_)) {
    for (std::size_t k = 1; k <= pattern_.depth(); ++k) {
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(pattern_.rows(k)), static_cast<Eigen::Index>(pattern_.cols(k)));
      for (const auto& [r, c] : pattern_.mask(k)) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = 1.0;
      masks_.push_back(std::move(m));
    }
  }

  // Uniform on [-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights and biases, then masked.
  template <typename Rng>
  static NetworkParams random_init(SupportPattern pattern, Rng& rng) {
    NetworkParams net(std::move(pattern));
    for (std::size_t k = 1; k <= net.depth(); ++k) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(net.pattern_.cols(k)));
      std::uniform_real_distribution<double> unif(-bound, bound);
      auto& w = net.arrays_.weights[k - 1];
      for (Eigen::Index c = 0; c < w.cols(); ++c)
        for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = unif(rng);
      auto& b = net.arrays_.biases[k - 1];
      for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = unif(rng);
    }
    net.apply_masks();
    return net;
  }

  [[nodiscard]] const SupportPattern& pattern() const { return pattern_; }
  [[nodiscard]] std::size_t depth() const { return pattern_.depth(); }
  [[nodiscard]] const Eigen::MatrixXd& weight(std::size_t layer) const { return arrays_.weights.at(layer - 1); }
  [[nodiscard]] const Eigen::VectorXd& bias(std::size_t layer) const { return arrays_.biases.at(layer - 1); }
  [[nodiscard]] const Eigen::MatrixXd& mask_matrix(std::size_t layer) const { return masks_.at(layer - 1); }
  [[nodiscard]] const LayerArrays& arrays() const { return arrays_; }

  void set_weight(std::size_t layer, const Eigen::MatrixXd& w) {
    auto& dst = arrays_.weights.at(layer - 1);
    if (w.rows() != dst.rows() || w.cols() != dst.cols()) throw std::invalid_argument("weight shape mismatch");
    dst = w.cwiseProduct(masks_[layer - 1]);
  }

  void set_bias(std::size_t layer, const Eigen::VectorXd& b) {
    auto& dst = arrays_.biases.at(layer - 1);
    if (b.size() != dst.size()) throw std::invalid_argument("bias shape mismatch");
    dst = b;
  }

  [[nodiscard]] double weight_norm(std::size_t layer) const { return weight(layer).norm(); }

  /*
   * v <- momentum v + grad + weight_decay theta ; theta <- theta - lr v,
   * then the mask is reapplied to weights and velocity.
   */
  void momentum_step(const LayerArrays& grads, LayerArrays& velocity, double learning_rate, double momentum,
                     double weight_decay) {
    for (std::size_t k = 0; k < depth(); ++k) {
      auto& vw = velocity.weights.at(k);
      vw = momentum * vw + grads.weights.at(k) + weight_decay * arrays_.weights[k];
      vw = vw.cwiseProduct(masks_[k]);
      arrays_.weights[k] -= learning_rate * vw;
      arrays_.weights[k] = arrays_.weights[k].cwiseProduct(masks_[k]);
      auto& vb = velocity.biases.at(k);
      vb = momentum * vb + grads.biases.at(k) + weight_decay * arrays_.biases[k];
      arrays_.biases[k] -= learning_rate * vb;
    }
  }

 private:
  void apply_masks() {
    for (std::size_t k = 0; k < depth(); ++k) arrays_.weights[k] = arrays_.weights[k].cwiseProduct(masks_[k]);
  }

  SupportPattern pattern_;
  LayerArrays arrays_;
  std::vector<Eigen::MatrixXd> masks_;
};

inline void check_input(const NetworkParams& net, Eigen::Index rows) {
  if (rows != static_cast<Eigen::Index>(net.pattern().input_dim())) throw std::invalid_argument("input has wrong dimension");
}

// R_theta on each column of `inputs` (N_0 x B); ReLU on hidden layers only.
inline Eigen::MatrixXd forward_batch(const NetworkParams& net, const Eigen::MatrixXd& inputs) {
  check_input(net, inputs.rows());
  Eigen::MatrixXd h = inputs;
  for (std::size_t k = 1; k <= net.depth(); ++k) {
    Eigen::MatrixXd z = net.weight(k) * h;
    z.colwise() += net.bias(k);
    h = k < net.depth() ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
  }
  return h;
}

inline Eigen::VectorXd forward(const NetworkParams& net, const Eigen::VectorXd& x) {
  return forward_batch(net, Eigen::MatrixXd(x)).col(0);
}

struct JacobianResult {
  Eigen::MatrixXd jacobian;
  bool on_boundary = false;  // some hidden preactivation was exactly 0 (treated as inactive)
};

// W_L D_{L-1} ... D_1 W_1 with D_k the 0/1 activation pattern at x.
inline JacobianResult jacobian_at(const NetworkParams& net, const Eigen::VectorXd& x) {
  check_input(net, x.size());
  JacobianResult out;
  Eigen::VectorXd h = x;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(x.size(), x.size());
  for (std::size_t k = 1; k <= net.depth(); ++k) {
    const Eigen::VectorXd z = net.weight(k) * h + net.bias(k);
    jac = net.weight(k) * jac;
    if (k == net.depth()) break;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      if (z(i) == 0.0) out.on_boundary = true;
      if (!(z(i) > 0.0)) jac.row(i).setZero();
    }
    h = z.cwiseMax(0.0);
  }
  out.jacobian = std::move(jac);
  return out;
}

// How the per-sample squared error is averaged.
enum class LossReduction {
  PerSample,   // mean over samples of ||R(x) - y||^2
  PerElement,  // additionally divided by N_L (mean over every output entry)
};

struct LossAndGrad {
  double loss = 0.0;
  LayerArrays grads;
};

/*
 * Squared loss over a batch (columns of inputs/targets) and its gradient
 * by reverse-mode chain rule, with sigma'(t) = 1 for t > 0 else 0.
 * Weight gradients are masked to the support.
 */
inline LossAndGrad loss_and_grad(const NetworkParams& net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                                 LossReduction reduction = LossReduction::PerSample) {
  check_input(net, inputs.rows());
  if (inputs.cols() == 0) throw std::invalid_argument("empty batch");
  if (targets.cols() != inputs.cols() || targets.rows() != static_cast<Eigen::Index>(net.pattern().output_dim()))
    throw std::invalid_argument("targets shape mismatch");
  const std::size_t depth = net.depth();
  std::vector<Eigen::MatrixXd> acts;  // acts[k] = input to layer k+1
  std::vector<Eigen::MatrixXd> pre;   // pre[k] = preactivation of layer k+1
  acts.reserve(depth);
  pre.reserve(depth);
  acts.push_back(inputs);
  for (std::size_t k = 1; k <= depth; ++k) {
    Eigen::MatrixXd z = net.weight(k) * acts.back();
    z.colwise() += net.bias(k);
    pre.push_back(std::move(z));
    if (k < depth) acts.push_back(pre.back().cwiseMax(0.0));
  }
  const Eigen::MatrixXd residual = pre.back() - targets;
  double scale = 1.0 / static_cast<double>(inputs.cols());
  if (reduction == LossReduction::PerElement) scale /= static_cast<double>(targets.rows());

  LossAndGrad out;
  out.loss = residual.squaredNorm() * scale;
  out.grads = LayerArrays::zeros(net.pattern());
  Eigen::MatrixXd delta = 2.0 * scale * residual;  // dLoss / dpre[L]
  for (std::size_t k = depth; k >= 1; --k) {
    out.grads.weights[k - 1] = (delta * acts[k - 1].transpose()).cwiseProduct(net.mask_matrix(k));
    out.grads.biases[k - 1] = delta.rowwise().sum();
    if (k == 1) break;
    Eigen::MatrixXd back = net.weight(k).transpose() * delta;
    delta = back.cwiseProduct((pre[k - 2].array() > 0.0).cast<double>().matrix());
  }
  return out;
}

struct TrainingConfig {
  std::size_t batch_size = 3000;
  double learning_rate = 0.1;
  double momentum = 0.9;
  double weight_decay = 0.0;
  std::size_t epochs = 200;
  std::uint64_t seed = 0;
  LossReduction reduction = LossReduction::PerElement;
  double divergence_threshold = 1e8;

  void validate() const {
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must lie in [0, 1)");
    if (!(weight_decay >= 0.0)) throw std::invalid_argument("weight_decay must be >= 0");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  }
};

inline void sgd_step(NetworkParams& net, const LayerArrays& grads, LayerArrays& velocity, const TrainingConfig& config) {
  net.momentum_step(grads, velocity, config.learning_rate, config.momentum, config.weight_decay);
}

struct FitMetrics {
  double rel_empirical = 0.0;  // mean over samples with y != 0 of ||R(x) - y||^2 / ||y||^2
  double rel_jacobian = 0.0;   // ||A - W_2 W_1||_F^2 / ||A||_F^2
};

inline FitMetrics metrics(const NetworkParams& net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                          const Eigen::MatrixXd& a) {
  if (net.depth() != 2) throw std::invalid_argument("metrics are defined for two-layer networks");
  const double a_norm2 = a.squaredNorm();
  if (a_norm2 == 0.0) throw std::invalid_argument("relative Jacobian loss undefined for A = 0");
  FitMetrics m;
  const Eigen::MatrixXd out = forward_batch(net, inputs);
  double sum = 0.0;
  std::size_t counted = 0;
  for (Eigen::Index i = 0; i < inputs.cols(); ++i) {
    const double y2 = targets.col(i).squaredNorm();
    if (y2 == 0.0) continue;
    sum += (out.col(i) - targets.col(i)).squaredNorm() / y2;
    ++counted;
  }
  m.rel_empirical = counted ? sum / static_cast<double>(counted) : 0.0;
  m.rel_jacobian = (a - net.weight(2) * net.weight(1)).squaredNorm() / a_norm2;
  return m;
}

/*
 * Rescales a two-layer network so every row of W_1 has unit Euclidean norm
 * and |b_1| <= C = B sqrt(N_0) (the largest <u, x> over unit u and
 * x in [-B, B]^{N_0}). The realization is unchanged on [-B, B]^{N_0}.
 *
 * A zero row becomes the unit vector on its first allowed column (it stays
 * zero if the row has no allowed column); its constant contribution
 * W_2[:, i] sigma(b_1[i]) moves into b_2 and the column is zeroed.
 */
inline NetworkParams normalize_first_layer(const NetworkParams& net, double domain_bound) {
  if (net.depth() != 2) throw std::invalid_argument("normalize_first_layer needs a two-layer network");
  if (!(domain_bound > 0.0)) throw std::invalid_argument("domain bound must be positive");
  const auto& p = net.pattern();
  const double c_bound = domain_bound * std::sqrt(static_cast<double>(p.input_dim()));
  Eigen::MatrixXd w1 = net.weight(1);
  Eigen::VectorXd b1 = net.bias(1);
  Eigen::MatrixXd w2 = net.weight(2);
  Eigen::VectorXd b2 = net.bias(2);

  for (Eigen::Index i = 0; i < w1.rows(); ++i) {
    const double norm = w1.row(i).norm();
    if (norm > 0.0) {
      w1.row(i) /= norm;
      b1(i) /= norm;
      w2.col(i) *= norm;
    } else {
      b2 += w2.col(i) * std::max(0.0, b1(i));
      w2.col(i).setZero();
      for (const auto& [r, c] : p.mask(1))
        if (static_cast<Eigen::Index>(r) == i) {
          w1(i, static_cast<Eigen::Index>(c)) = 1.0;
          break;
        }
    }
    // Saturate the bias: beyond +-C the neuron is always on (linear) or always off on the domain.
    if (b1(i) > c_bound) {
      b2 += (b1(i) - c_bound) * w2.col(i);
      b1(i) = c_bound;
    } else if (b1(i) < -c_bound) {
      b1(i) = -c_bound;
    }
  }

  NetworkParams out(p);
  out.set_weight(1, w1);
  out.set_bias(1, b1);
  out.set_weight(2, w2);
  out.set_bias(2, b2);
  return out;
}

struct EpochRecord {
  std::size_t epoch = 0;
  double rel_empirical = 0.0;
  double rel_jacobian = 0.0;
  double frob_w1 = 0.0;
  double frob_w2 = 0.0;
};

struct TrainingTrace {
  EpochRecord initial;               // before the first step, epoch 0
  std::vector<EpochRecord> records;  // one per completed epoch, epochs 1..E
  bool diverged = false;

  [[nodiscard]] double max_weight_norm() const {
    double m = std::max(initial.frob_w1, initial.frob_w2);
    for (const auto& r : records) m = std::max({m, r.frob_w1, r.frob_w2});
    return m;
  }
};

inline EpochRecord snapshot(const NetworkParams& net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                            const Eigen::MatrixXd& a, std::size_t epoch) {
  const auto m = metrics(net, inputs, targets, a);
  return {epoch, m.rel_empirical, m.rel_jacobian, net.weight_norm(1), net.weight_norm(2)};
}

/*
 * Mini-batch SGD with momentum over shuffled epochs (last batch may be
 * short). Halts early, flagging divergence, once a weight norm exceeds
 * the configured threshold or stops being finite.
 */
inline TrainingTrace train(NetworkParams& net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                           const Eigen::MatrixXd& a, const TrainingConfig& config) {
  config.validate();
  const auto n = static_cast<std::size_t>(inputs.cols());
  if (n < config.batch_size) throw std::invalid_argument("fewer samples than batch_size");
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  LayerArrays velocity = LayerArrays::zeros(net.pattern());

  TrainingTrace trace;
  trace.initial = snapshot(net, inputs, targets, a, 0);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t len = std::min(config.batch_size, n - start);
      const std::vector<Eigen::Index> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                          order.begin() + static_cast<std::ptrdiff_t>(start + len));
      const Eigen::MatrixXd xb = inputs(Eigen::all, idx);
      const Eigen::MatrixXd yb = targets(Eigen::all, idx);
      const auto lg = loss_and_grad(net, xb, yb, config.reduction);
      sgd_step(net, lg.grads, velocity, config);
    }
    auto rec = snapshot(net, inputs, targets, a, epoch);
    const bool blown = !std::isfinite(rec.frob_w1) || !std::isfinite(rec.frob_w2) ||
                       rec.frob_w1 > config.divergence_threshold || rec.frob_w2 > config.divergence_threshold;
    trace.records.push_back(rec);
    if (blown) {
      trace.diverged = true;
      break;
    }
  }
  return trace;
}

inline void write_trace_csv(const TrainingTrace& trace, std::ostream& out) {
  out << "epoch,rel_empirical,rel_jacobian,frob_W1,frob_W2\n";
  char buf[160];
  auto row = [&](const EpochRecord& r) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", r.epoch, r.rel_empirical, r.rel_jacobian, r.frob_w1, r.frob_w2);
    out << buf;
  };
  row(trace.initial);
  for (const auto& r : trace.records) row(r);
}

inline nlohmann::json params_to_json(const NetworkParams& net) {
  nlohmann::json weights = nlohmann::json::array();
  nlohmann::json biases = nlohmann::json::array();
  for (std::size_t k = 1; k <= net.depth(); ++k) {
    const auto& w = net.weight(k);
    std::vector<double> flat;  // row-major
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
    weights.push_back(flat);
    const auto& b = net.bias(k);
    biases.push_back(std::vector<double>(b.data(), b.data() + b.size()));
  }
  return {{"pattern", pattern_to_json(net.pattern())}, {"weights", weights}, {"biases", biases}};
}

inline NetworkParams params_from_json(const nlohmann::json& j) {
  NetworkParams net(validate_pattern(j.at("pattern")));
  const auto& jw = j.at("weights");
  const auto& jb = j.at("biases");
  if (jw.size() != net.depth() || jb.size() != net.depth()) throw std::invalid_argument("checkpoint layer count mismatch");
  for (std::size_t k = 1; k <= net.depth(); ++k) {
    const auto flat = jw[k - 1].get<std::vector<double>>();
    const auto rows = static_cast<Eigen::Index>(net.pattern().rows(k));
    const auto cols = static_cast<Eigen::Index>(net.pattern().cols(k));
    if (static_cast<Eigen::Index>(flat.size()) != rows * cols) throw std::invalid_argument("checkpoint weight size mismatch");
    Eigen::MatrixXd w(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
    const auto bias = jb[k - 1].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(bias.size()) != rows) throw std::invalid_argument("checkpoint bias size mismatch");
    net.set_weight(k, w);
    net.set_bias(k, Eigen::Map<const Eigen::VectorXd>(bias.data(), rows));
  }
  return net;
}

}  // namespace sparse_closure

#endif  // SPARSE_CLOSURE_RELU_NET_HPP
