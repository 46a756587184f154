#ifndef SPARSE_CLOSURE_INFIMUM_ORACLE_HPP
#define SPARSE_CLOSURE_INFIMUM_ORACLE_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "sparse_closure/support_pattern.hpp"

namespace sparse_closure {

struct InfimumOracleOptions {
  std::size_t restarts = 8;
  std::uint64_t seed = 0;
  double initial_damping = 1e-2;
};

struct InfimumResult {
  double distance = std::numeric_limits<double>::infinity();  // ||A - X_L...X_1||_F
  SparseFactors<double> factors;
  double max_factor_norm = 0.0;  // largest ||X_i||_F along the best run
};

namespace detail {

struct MaskedParams {
  // (layer, row, col) for each free entry, layer 1-based.
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> slots;

  explicit MaskedParams(const SupportPattern& p) {
    for (std::size_t k = 1; k <= p.depth(); ++k)
      for (const auto& [r, c] : p.mask(k)) slots.emplace_back(k, r, c);
  }

  std::vector<Eigen::MatrixXd> unpack(const SupportPattern& p, const Eigen::VectorXd& v) const {
    std::vector<Eigen::MatrixXd> xs;
    for (std::size_t k = 1; k <= p.depth(); ++k)
      xs.push_back(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p.rows(k)), static_cast<Eigen::Index>(p.cols(k))));
    for (std::size_t s = 0; s < slots.size(); ++s) {
      const auto& [k, r, c] = slots[s];
      xs[k - 1](static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v(static_cast<Eigen::Index>(s));
    }
    return xs;
  }
};

inline Eigen::MatrixXd chain_product(const std::vector<Eigen::MatrixXd>& xs, std::size_t from, std::size_t to,
                                     Eigen::Index identity_dim) {
  // X_to ... X_from (1-based, inclusive); identity when from > to.
  Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(identity_dim, identity_dim);
  for (std::size_t k = from; k <= to; ++k) acc = xs[k - 1] * acc;
  return acc;
}

inline double max_frobenius(const std::vector<Eigen::MatrixXd>& xs) {
  double m = 0.0;
  for (const auto& x : xs) m = std::max(m, x.norm());
  return m;
}

}  // namespace detail

/*
 * Numerical evidence for membership in closure(L_I): minimizes
 * ||A - X_L ... X_1||_F over masked factors with multi-start
 * Levenberg-Marquardt. `budget` is the total number of iterations shared
 * evenly by the restarts. When the infimum is not attained the factor
 * norms of the best run grow without bound while the distance shrinks.
 */
inline InfimumResult infimum_oracle(const RealMatrix& target, const SupportPattern& p, std::size_t budget,
                                    const InfimumOracleOptions& opts = {}) {
  if (budget == 0) throw std::invalid_argument("infimum_oracle budget must be positive");
  if (target.rows() != p.output_dim() || target.cols() != p.input_dim())
    throw std::invalid_argument("target shape does not match pattern output x input dims");
  const std::size_t restarts = std::max<std::size_t>(1, opts.restarts);
  const std::size_t per_run = std::max<std::size_t>(1, budget / restarts);

  const auto rows = static_cast<Eigen::Index>(p.output_dim());
  const auto cols = static_cast<Eigen::Index>(p.input_dim());
  Eigen::MatrixXd a(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) a(i, j) = target(static_cast<std::size_t>(i), static_cast<std::size_t>(j));

  const detail::MaskedParams params(p);
  const auto n = static_cast<Eigen::Index>(params.slots.size());
  const std::size_t depth = p.depth();

  auto residual = [&](const std::vector<Eigen::MatrixXd>& xs) -> Eigen::VectorXd {
    Eigen::MatrixXd r = detail::chain_product(xs, 1, depth, cols) - a;
    return Eigen::Map<Eigen::VectorXd>(r.data(), r.size());  // column-major vec
  };
  auto jacobian = [&](const std::vector<Eigen::MatrixXd>& xs) {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(rows * cols, n);
    std::vector<Eigen::MatrixXd> left(depth), right(depth);
    for (std::size_t k = 1; k <= depth; ++k) {
      left[k - 1] = detail::chain_product(xs, k + 1, depth, static_cast<Eigen::Index>(p.rows(k)));
      right[k - 1] = detail::chain_product(xs, 1, k - 1, cols);
    }
    for (Eigen::Index s = 0; s < n; ++s) {
      const auto& [k, r, c] = params.slots[static_cast<std::size_t>(s)];
      const auto& lft = left[k - 1];
      const auto& rgt = right[k - 1];
      for (Eigen::Index j = 0; j < cols; ++j) {
        const double rc = rgt(static_cast<Eigen::Index>(c), j);
        if (rc == 0.0) continue;
        for (Eigen::Index i = 0; i < rows; ++i) jac(j * rows + i, s) = lft(i, static_cast<Eigen::Index>(r)) * rc;
      }
    }
    return jac;
  };

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  double best_distance = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_v = Eigen::VectorXd::Zero(n);
  double best_norm = 0.0;
  const double target_scale = std::max(1.0, a.norm());

  for (std::size_t run = 0; run < restarts; ++run) {
    Eigen::VectorXd v(n);
    for (Eigen::Index s = 0; s < n; ++s) v(s) = unif(rng);
    auto xs = params.unpack(p, v);
    Eigen::VectorXd r = residual(xs);
    double cost = r.squaredNorm();
    double run_norm = detail::max_frobenius(xs);
    double lambda = opts.initial_damping;
    double nu = 2.0;

    for (std::size_t it = 0; it < per_run && n > 0; ++it) {
      if (std::sqrt(cost) <= 1e-15 * target_scale) break;
      const Eigen::MatrixXd jac = jacobian(xs);
      const Eigen::VectorXd grad = jac.transpose() * r;
      if (grad.lpNorm<Eigen::Infinity>() == 0.0) break;
      Eigen::MatrixXd h = jac.transpose() * jac;
      Eigen::MatrixXd damped = h;
      damped.diagonal().array() += lambda;
      const Eigen::VectorXd step = damped.ldlt().solve(-grad);
      if (!step.allFinite()) break;
      const Eigen::VectorXd trial_v = v + step;
      auto trial_xs = params.unpack(p, trial_v);
      const Eigen::VectorXd trial_r = residual(trial_xs);
      const double trial_cost = trial_r.squaredNorm();
      const double predicted = -(step.dot(grad) * 2.0 + step.dot(h * step));
      if (std::isfinite(trial_cost) && trial_cost < cost) {
        const double rho = predicted > 0 ? (cost - trial_cost) / predicted : 0.0;
        v = trial_v;
        xs = std::move(trial_xs);
        r = trial_r;
        cost = trial_cost;
        run_norm = std::max(run_norm, detail::max_frobenius(xs));
        lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
        lambda = std::max(lambda, 1e-300);
        nu = 2.0;
      } else {
        lambda *= nu;
        nu *= 2.0;
        if (!std::isfinite(lambda) || lambda > 1e200) break;
      }
    }

    const double dist = std::sqrt(cost);
    if (dist < best_distance) {
      best_distance = dist;
      best_v = v;
      best_norm = run_norm;
    }
  }

  std::vector<RealMatrix> factors;
  for (const auto& x : params.unpack(p, best_v)) {
    RealMatrix m(static_cast<std::size_t>(x.rows()), static_cast<std::size_t>(x.cols()));
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = 0; j < x.cols(); ++j) m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = x(i, j);
    factors.push_back(std::move(m));
  }
  return {best_distance, SparseFactors<double>(p, std::move(factors)), best_norm};
}

}  // namespace sparse_closure

#endif  // SPARSE_CLOSURE_INFIMUM_ORACLE_HPP
