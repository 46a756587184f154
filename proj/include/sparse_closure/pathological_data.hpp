#ifndef SPARSE_CLOSURE_PATHOLOGICAL_DATA_HPP
#define SPARSE_CLOSURE_PATHOLOGICAL_DATA_HPP

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdio>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparse_closure/linear_closure.hpp"
#include "sparse_closure/matrix.hpp"
#include "sparse_closure/support_pattern.hpp"

namespace sparse_closure {

using RationalVector = std::vector<Rational>;
using GridIndex = std::vector<std::size_t>;

// { (i_1/p, ..., i_N/p) : 0 <= i_j <= p }.
class Grid {
 public:
  Grid(std::size_t resolution, std::size_t dimension) : p_(resolution), n_(dimension) {
    if (p_ == 0 || n_ == 0) throw std::invalid_argument("grid resolution and dimension must be positive");
  }

  [[nodiscard]] std::size_t resolution() const { return p_; }
  [[nodiscard]] std::size_t dimension() const { return n_; }

  // (p+1)^N
  [[nodiscard]] BigInt cardinality() const {
    BigInt c;
    mpz_ui_pow_ui(c.get_mpz_t(), p_ + 1, n_);
    return c;
  }

  [[nodiscard]] RationalVector point(const GridIndex& idx) const {
    RationalVector x;
    x.reserve(n_);
    for (auto i : idx) x.emplace_back(static_cast<unsigned long>(i), static_cast<unsigned long>(p_));
    for (auto& q : x) q.canonicalize();
    return x;
  }

  // Visits every index in lexicographic order (last coordinate fastest),
  // each coordinate ranging over 0..upper.
  template <typename F>
  static bool for_each_index(std::size_t dimension, std::size_t upper, F&& visit) {
    GridIndex idx(dimension, 0);
    while (true) {
      if (visit(static_cast<const GridIndex&>(idx))) return true;
      std::size_t k = dimension;
      while (k > 0 && idx[k - 1] == upper) idx[--k] = 0;
      if (k == 0) return false;
      ++idx[k - 1];
    }
  }

 private:
  std::size_t p_;
  std::size_t n_;
};

// { x : w.x + b = 0 }, w != 0.
class Hyperplane {
 public:
  Hyperplane(RationalVector w, Rational b) : w_(std::move(w)), b_(std::move(b)) {
    bool nonzero = false;
    for (const auto& q : w_) nonzero = nonzero || q != 0;
    if (!nonzero) throw std::invalid_argument("hyperplane normal must be nonzero");
  }

  [[nodiscard]] const RationalVector& normal() const { return w_; }
  [[nodiscard]] const Rational& offset() const { return b_; }

  [[nodiscard]] Rational evaluate(const RationalVector& x) const {
    if (x.size() != w_.size()) throw std::invalid_argument("point dimension does not match hyperplane");
    Rational v = b_;
    for (std::size_t j = 0; j < x.size(); ++j) v += w_[j] * x[j];
    return v;
  }

 private:
  RationalVector w_;
  Rational b_;
};

/*
 * The plane meets the edge (x, x + e_axis / p) in exactly one point:
 * endpoint values have product <= 0 and are not both zero. An edge lying
 * inside the plane does not count.
 */
inline bool edge_intersects(const Hyperplane& h, const GridIndex& base, std::size_t axis, std::size_t p) {
  if (axis >= base.size()) throw std::out_of_range("edge axis out of range");
  if (base.size() != h.normal().size()) throw std::invalid_argument("grid point dimension does not match hyperplane");
  if (base[axis] >= p) throw std::out_of_range("edge leaves the grid");
  const Rational v0 = h.evaluate(Grid(p, base.size()).point(base));
  const Rational v1 = v0 + h.normal()[axis] / Rational(static_cast<unsigned long>(p));
  return sgn(v0) * sgn(v1) <= 0 && (v0 != 0 || v1 != 0);
}

// All N 2^{N-1} edges of the elementary cube at `base` miss every plane.
inline bool cube_is_free(const std::vector<Hyperplane>& planes, const GridIndex& base, std::size_t p) {
  const std::size_t n = base.size();
  const std::size_t corners = std::size_t{1} << n;
  for (std::size_t axis = 0; axis < n; ++axis)
    for (std::size_t mask = 0; mask < corners; ++mask) {
      if (mask & (std::size_t{1} << axis)) continue;
      GridIndex v = base;
      for (std::size_t j = 0; j < n; ++j)
        if (mask & (std::size_t{1} << j)) ++v[j];
      for (const auto& h : planes)
        if (edge_intersects(h, v, axis, p)) return false;
    }
  return true;
}

/*
 * First base point (lexicographic) whose elementary cube has no
 * intersecting edge. Existence is guaranteed when p >= 3 N H; an empty
 * result is only possible below that bound.
 */
inline std::optional<GridIndex> find_free_hypercube(const std::vector<Hyperplane>& planes, std::size_t p,
                                                    std::size_t n) {
  if (p == 0) throw std::invalid_argument("grid resolution must be positive");
  if (n == 0) throw std::invalid_argument("grid dimension must be positive");
  for (const auto& h : planes)
    if (h.normal().size() != n) throw std::invalid_argument("hyperplane dimension does not match grid");
  std::optional<GridIndex> found;
  Grid::for_each_index(n, p - 1, [&](const GridIndex& idx) {
    if (!cube_is_free(planes, idx, p)) return false;
    found = idx;
    return true;
  });
  if (!found && p >= 3 * n * planes.size())
    throw std::logic_error("no free elementary cube although p >= 3NH");
  return found;
}

// p = 3 N_0 4^{N_1 + ... + N_{L-1}}
inline BigInt theoretical_resolution(const SupportPattern& pattern) {
  unsigned long hidden = 0;
  for (std::size_t i = 1; i + 1 < pattern.dims().size(); ++i) hidden += pattern.dim(i);
  BigInt pow4;
  mpz_ui_pow_ui(pow4.get_mpz_t(), 4, hidden);
  return BigInt(3) * BigInt(static_cast<unsigned long>(pattern.input_dim())) * pow4;
}

// (p + 1)^{N_0} with the theoretical p.
inline BigInt theoretical_cardinality(const SupportPattern& pattern) {
  const BigInt p1 = theoretical_resolution(pattern) + 1;
  BigInt c;
  mpz_pow_ui(c.get_mpz_t(), p1.get_mpz_t(), pattern.input_dim());
  return c;
}

struct LabeledDataset {
  std::vector<RationalVector> inputs;
  std::vector<RationalVector> targets;
  std::size_t resolution = 0;
};

inline constexpr std::size_t kDefaultPointCap = 10'000'000;

/*
 * Grid inputs on [0,1]^{N_0} at the theoretical resolution (or an
 * override) labelled by the linear map x -> A x.
 */
inline LabeledDataset build_bad_dataset(const RationalMatrix& a, const SupportPattern& pattern,
                                        std::optional<std::size_t> p_override = std::nullopt,
                                        std::size_t point_cap = kDefaultPointCap) {
  if (a.rows() != pattern.output_dim() || a.cols() != pattern.input_dim())
    throw std::invalid_argument("target matrix must be N_L x N_0");
  std::size_t p = 0;
  if (p_override) {
    if (*p_override == 0) throw std::invalid_argument("grid resolution must be positive");
    p = *p_override;
  } else {
    const BigInt theoretical = theoretical_resolution(pattern);
    const BigInt points = theoretical_cardinality(pattern);
    if (points > BigInt(static_cast<unsigned long>(point_cap)))
      throw std::length_error("theoretical grid has " + points.get_str() + " points, above the cap of " +
                              std::to_string(point_cap) + "; pass a resolution override");
    p = theoretical.get_ui();
  }
  const Grid grid(p, pattern.input_dim());
  LabeledDataset ds;
  ds.resolution = p;
  Grid::for_each_index(grid.dimension(), p, [&](const GridIndex& idx) {
    RationalVector x = grid.point(idx);
    RationalVector y(a.rows(), Rational(0));
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t j = 0; j < a.cols(); ++j) y[i] += a(i, j) * x[j];
    ds.inputs.push_back(std::move(x));
    ds.targets.push_back(std::move(y));
    return false;
  });
  return ds;
}

inline void write_dataset_csv(const LabeledDataset& ds, std::ostream& out) {
  if (ds.inputs.empty()) return;
  const std::size_t nx = ds.inputs.front().size();
  const std::size_t ny = ds.targets.front().size();
  for (std::size_t j = 0; j < nx; ++j) out << (j ? "," : "") << "x" << j + 1;
  for (std::size_t j = 0; j < ny; ++j) out << ",y" << j + 1;
  out << "\n";
  char buf[32];
  auto put = [&](const Rational& q) {
    std::snprintf(buf, sizeof buf, "%.17g", q.get_d());
    out << buf;
  };
  for (std::size_t i = 0; i < ds.inputs.size(); ++i) {
    for (std::size_t j = 0; j < nx; ++j) {
      if (j) out << ",";
      put(ds.inputs[i][j]);
    }
    for (std::size_t j = 0; j < ny; ++j) {
      out << ",";
      put(ds.targets[i][j]);
    }
    out << "\n";
  }
}

inline nlohmann::json dataset_header(const LabeledDataset& ds, const RationalMatrix& a, const SupportPattern& pattern) {
  return {{"A", matrix_to_json(a)},
          {"pattern", pattern_to_json(pattern)},
          {"p", ds.resolution},
          {"num_points", ds.inputs.size()},
          {"domain", "[0,1]^N0 grid, x = i/p"}};
}

}  // namespace sparse_closure

#endif  // SPARSE_CLOSURE_PATHOLOGICAL_DATA_HPP
