#ifndef SPARSE_CLOSURE_LU_EXPERIMENT_HPP
#define SPARSE_CLOSURE_LU_EXPERIMENT_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <random>
#include <stdexcept>
#include <vector>

#include "sparse_closure/relu_net.hpp"
#include "sparse_closure/support_pattern.hpp"

namespace sparse_closure {

struct ExperimentSpec {
  std::size_t dimension = 20;
  std::size_t num_samples = 10'000;
  TrainingConfig config;  // config.seed is the base seed; run r uses seed + r
  std::size_t runs = 10;

  [[nodiscard]] bool regularized() const { return config.weight_decay > 0.0; }

  void validate() const {
    config.validate();
    if (dimension < 2) throw std::invalid_argument("experiment dimension must be >= 2");
    if (num_samples < config.batch_size) throw std::invalid_argument("num_samples must be >= batch_size");
    if (runs == 0) throw std::invalid_argument("runs must be >= 1");
  }

  static ExperimentSpec paper_scale() {
    ExperimentSpec s;
    s.dimension = 100;
    s.num_samples = 100'000;
    return s;
  }
};

inline Eigen::MatrixXd anti_diagonal(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) a(i, n - 1 - i) = 1.0;
  return a;
}

// Columns are samples, uniform on [-1, 1]^d.
inline Eigen::MatrixXd sample_uniform_inputs(std::size_t d, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(count));
  for (Eigen::Index c = 0; c < x.cols(); ++c)
    for (Eigen::Index r = 0; r < x.rows(); ++r) x(r, c) = unif(rng);
  return x;
}

struct RunResult {
  std::uint64_t seed = 0;
  TrainingTrace trace;
};

// One training run of the LU network against the anti-diagonal map.
inline RunResult run_lu_once(const ExperimentSpec& spec, std::uint64_t seed) {
  const SupportPattern pattern = lu_pattern(spec.dimension);
  const Eigen::MatrixXd a = anti_diagonal(spec.dimension);
  const Eigen::MatrixXd x = sample_uniform_inputs(spec.dimension, spec.num_samples, seed);
  const Eigen::MatrixXd y = a * x;
  std::mt19937_64 init_rng(seed + 0x5851f42d4c957f2dULL);
  NetworkParams net = NetworkParams::random_init(pattern, init_rng);
  TrainingConfig cfg = spec.config;
  cfg.seed = seed;
  return {seed, train(net, x, y, a, cfg)};
}

inline std::vector<RunResult> run_lu_experiment(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<RunResult> out;
  for (std::size_t r = 0; r < spec.runs; ++r) out.push_back(run_lu_once(spec, spec.config.seed + r));
  return out;
}

struct Stat {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

inline Stat mean_std(const std::vector<double>& v) {
  Stat s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  for (double x : v) s.std += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(s.std / static_cast<double>(v.size()));
  return s;
}

struct AggregateRecord {
  std::size_t epoch = 0;
  std::size_t runs = 0;  // runs that reached this epoch
  Stat rel_empirical, rel_jacobian, frob_w1, frob_w2;
};

// Per-epoch mean/std over runs; diverged runs drop out after their last epoch.
inline std::vector<AggregateRecord> aggregate(const std::vector<RunResult>& results) {
  std::size_t longest = 0;
  for (const auto& r : results) longest = std::max(longest, r.trace.records.size());
  std::vector<AggregateRecord> agg;
  for (std::size_t e = 0; e <= longest; ++e) {
    std::vector<double> emp, jac, w1, w2;
    for (const auto& r : results) {
      const EpochRecord* rec = nullptr;
      if (e == 0) rec = &r.trace.initial;
      else if (e <= r.trace.records.size()) rec = &r.trace.records[e - 1];
      if (!rec) continue;
      emp.push_back(rec->rel_empirical);
      jac.push_back(rec->rel_jacobian);
      w1.push_back(rec->frob_w1);
      w2.push_back(rec->frob_w2);
    }
    agg.push_back({e, emp.size(), mean_std(emp), mean_std(jac), mean_std(w1), mean_std(w2)});
  }
  return agg;
}

inline void write_aggregate_csv(const std::vector<AggregateRecord>& agg, std::ostream& out) {
  out << "epoch,runs,rel_empirical_mean,rel_empirical_std,rel_jacobian_mean,rel_jacobian_std,"
         "frob_W1_mean,frob_W1_std,frob_W2_mean,frob_W2_std\n";
  char buf[320];
  for (const auto& r : agg) {
    std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.epoch, r.runs,
                  r.rel_empirical.mean, r.rel_empirical.std, r.rel_jacobian.mean, r.rel_jacobian.std, r.frob_w1.mean,
                  r.frob_w1.std, r.frob_w2.mean, r.frob_w2.std);
    out << buf;
  }
}

// Seed-averaged summary of a finished experiment.
struct ExperimentSummary {
  double final_rel_jacobian = 0.0;
  double final_rel_empirical = 0.0;
  double norm_growth = 0.0;  // mean of max_t max(|W1|,|W2|) / max(|W1|,|W2|) at t = 0
  double max_norm_ratio_w1 = 0.0;  // worst run, max_t |W1_t| / |W1_0|
  double max_norm_ratio_w2 = 0.0;
  std::size_t diverged_runs = 0;
};

inline ExperimentSummary summarize(const std::vector<RunResult>& results) {
  ExperimentSummary s;
  if (results.empty()) return s;
  for (const auto& r : results) {
    const auto& t = r.trace;
    const EpochRecord& last = t.records.empty() ? t.initial : t.records.back();
    s.final_rel_jacobian += last.rel_jacobian;
    s.final_rel_empirical += last.rel_empirical;
    const double init = std::max(t.initial.frob_w1, t.initial.frob_w2);
    s.norm_growth += t.max_weight_norm() / init;
    double w1 = t.initial.frob_w1, w2 = t.initial.frob_w2;
    for (const auto& rec : t.records) {
      w1 = std::max(w1, rec.frob_w1);
      w2 = std::max(w2, rec.frob_w2);
    }
    s.max_norm_ratio_w1 = std::max(s.max_norm_ratio_w1, w1 / t.initial.frob_w1);
    s.max_norm_ratio_w2 = std::max(s.max_norm_ratio_w2, w2 / t.initial.frob_w2);
    if (t.diverged) ++s.diverged_runs;
  }
  const auto n = static_cast<double>(results.size());
  s.final_rel_jacobian /= n;
  s.final_rel_empirical /= n;
  s.norm_growth /= n;
  return s;
}

}  // namespace sparse_closure

#endif  // SPARSE_CLOSURE_LU_EXPERIMENT_HPP
