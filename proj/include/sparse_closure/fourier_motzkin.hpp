#ifndef SPARSE_CLOSURE_FOURIER_MOTZKIN_HPP
#define SPARSE_CLOSURE_FOURIER_MOTZKIN_HPP

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sparse_closure/matrix.hpp"

namespace sparse_closure {

class RowCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultRowCap = 100000;

// Row cap from SPARSE_CLOSURE_ROW_CAP, else the default.
inline std::size_t row_cap_from_env() {
  if (const char* s = std::getenv("SPARSE_CLOSURE_ROW_CAP")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (end != s && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return kDefaultRowCap;
}

// One constraint  coeffs . z <= rhs.
struct Halfspace {
  std::vector<Rational> coeffs;
  Rational rhs;

  [[nodiscard]] bool is_trivial() const {
    return std::all_of(coeffs.begin(), coeffs.end(), [](const Rational& q) { return q == 0; });
  }

  friend bool operator==(const Halfspace&, const Halfspace&) = default;
  friend bool operator<(const Halfspace& a, const Halfspace& b) {
    if (a.coeffs != b.coeffs) return std::lexicographical_compare(a.coeffs.begin(), a.coeffs.end(), b.coeffs.begin(), b.coeffs.end());
    return a.rhs < b.rhs;
  }
};

namespace detail {

// Positive rescaling to coprime integer coefficients; keeps the halfspace.
inline Halfspace normalize(Halfspace h) {
  BigInt den_lcm = 1;
  for (const auto& q : h.coeffs) mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), q.get_den_mpz_t());
  BigInt num_gcd = 0;
  for (const auto& q : h.coeffs) {
    const BigInt scaled = q.get_num() * (den_lcm / q.get_den());
    mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), scaled.get_mpz_t());
  }
  if (num_gcd == 0) {
    // 0 <= rhs: only the sign of rhs matters.
    h.rhs = sgn(h.rhs) < 0 ? Rational(-1) : Rational(0);
    return h;
  }
  const Rational factor(den_lcm, num_gcd);
  for (auto& q : h.coeffs) {
    q *= factor;
    q.canonicalize();
  }
  h.rhs *= factor;
  h.rhs.canonicalize();
  return h;
}

}  // namespace detail

/*
 * { z in Q^n : C z <= y } over exact rationals. n may reach 0 after
 * eliminating every variable; the system is then a closed sentence that
 * holds iff every rhs is nonnegative.
 */
class RationalPolyhedron {
 public:
  explicit RationalPolyhedron(std::size_t num_vars, std::vector<Halfspace> rows = {})
      : num_vars_(num_vars), rows_(std::move(rows)) {
    for (const auto& r : rows_)
      if (r.coeffs.size() != num_vars_) throw std::invalid_argument("halfspace width does not match variable count");
  }

  RationalPolyhedron(const RationalMatrix& c, const std::vector<Rational>& y) : num_vars_(c.cols()) {
    if (c.rows() != y.size()) throw std::invalid_argument("C and y have different row counts");
    for (std::size_t i = 0; i < c.rows(); ++i) {
      Halfspace h;
      for (std::size_t j = 0; j < c.cols(); ++j) h.coeffs.push_back(c(i, j));
      h.rhs = y[i];
      rows_.push_back(std::move(h));
    }
  }

  [[nodiscard]] std::size_t num_vars() const { return num_vars_; }
  [[nodiscard]] std::size_t num_rows() const { return rows_.size(); }
  [[nodiscard]] const std::vector<Halfspace>& rows() const { return rows_; }

  // True when some row reads 0 <= negative.
  [[nodiscard]] bool has_contradiction() const {
    return std::any_of(rows_.begin(), rows_.end(), [](const Halfspace& h) { return h.is_trivial() && h.rhs < 0; });
  }

  [[nodiscard]] RationalMatrix constraint_matrix() const {
    RationalMatrix c(rows_.size(), num_vars_);
    for (std::size_t i = 0; i < rows_.size(); ++i)
      for (std::size_t j = 0; j < num_vars_; ++j) c(i, j) = rows_[i].coeffs[j];
    return c;
  }

  [[nodiscard]] std::vector<Rational> bounds() const {
    std::vector<Rational> y;
    for (const auto& r : rows_) y.push_back(r.rhs);
    return y;
  }

 private:
  std::size_t num_vars_;
  std::vector<Halfspace> rows_;
};

inline bool contains(const RationalPolyhedron& poly, const std::vector<Rational>& point) {
  if (point.size() != poly.num_vars()) throw std::invalid_argument("point dimension does not match polyhedron");
  for (const auto& r : poly.rows()) {
    Rational lhs = 0;
    for (std::size_t j = 0; j < point.size(); ++j) lhs += r.coeffs[j] * point[j];
    if (lhs > r.rhs) return false;
  }
  return true;
}

namespace detail {

// Is h implied by lambda1 * a + lambda2 * b with lambda >= 0?
inline bool implied_by_pair(const Halfspace& h, const Halfspace& a, const Halfspace& b) {
  const std::size_t n = h.coeffs.size();
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p + 1; q < n; ++q) {
      const Rational det = a.coeffs[p] * b.coeffs[q] - a.coeffs[q] * b.coeffs[p];
      if (det == 0) continue;
      const Rational l1 = (h.coeffs[p] * b.coeffs[q] - h.coeffs[q] * b.coeffs[p]) / det;
      const Rational l2 = (a.coeffs[p] * h.coeffs[q] - a.coeffs[q] * h.coeffs[p]) / det;
      if (l1 < 0 || l2 < 0) return false;
      for (std::size_t j = 0; j < n; ++j)
        if (l1 * a.coeffs[j] + l2 * b.coeffs[j] != h.coeffs[j]) return false;
      return l1 * a.rhs + l2 * b.rhs <= h.rhs;
    }
  return false;  // a, b parallel; single-row dominance covers that case
}

}  // namespace detail

inline constexpr std::size_t kPairRedundancyLimit = 160;

/*
 * Removes trivially true rows, duplicates, rows dominated by a parallel
 * row with smaller bound, and (for small systems) rows implied by a
 * nonnegative combination of two remaining rows. The represented set is
 * unchanged. A contradictory system collapses to the single row 0 <= -1.
 * Output rows are normalized and sorted.
 */
inline RationalPolyhedron drop_redundant(const RationalPolyhedron& poly) {
  const std::size_t n = poly.num_vars();
  std::vector<Halfspace> rows;
  rows.reserve(poly.num_rows());
  for (const auto& r : poly.rows()) {
    auto h = detail::normalize(r);
    if (h.is_trivial()) {
      if (h.rhs < 0) return RationalPolyhedron(n, {h});
      continue;
    }
    rows.push_back(std::move(h));
  }
  // Normalized parallel rows share coefficients; keep the tightest bound.
  std::sort(rows.begin(), rows.end());
  std::vector<Halfspace> kept;
  for (auto& r : rows)
    if (kept.empty() || kept.back().coeffs != r.coeffs) kept.push_back(std::move(r));

  if (kept.size() <= kPairRedundancyLimit && n >= 2) {
    for (std::size_t i = 0; i < kept.size();) {
      bool implied = false;
      for (std::size_t a = 0; a < kept.size() && !implied; ++a) {
        if (a == i) continue;
        for (std::size_t b = a + 1; b < kept.size() && !implied; ++b) {
          if (b == i) continue;
          implied = detail::implied_by_pair(kept[i], kept[a], kept[b]);
        }
      }
      if (implied)
        kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(i));
      else
        ++i;
    }
  }
  return RationalPolyhedron(n, std::move(kept));
}

/*
 * Fourier-Motzkin step: projects out variable `idx` (0-based). Rows are
 * split by the sign of their idx coefficient; each (positive, negative)
 * pair is combined so the variable cancels, zero-coefficient rows pass
 * through.
 */
inline RationalPolyhedron eliminate_variable(const RationalPolyhedron& poly, std::size_t idx,
                                             std::size_t row_cap = kDefaultRowCap) {
  const std::size_t n = poly.num_vars();
  if (idx >= n) throw std::out_of_range("variable index " + std::to_string(idx) + " out of range");
  std::vector<const Halfspace*> pos, neg;
  std::vector<Halfspace> out;
  auto drop_idx = [idx](const std::vector<Rational>& v) {
    std::vector<Rational> w;
    w.reserve(v.size() - 1);
    for (std::size_t j = 0; j < v.size(); ++j)
      if (j != idx) w.push_back(v[j]);
    return w;
  };
  for (const auto& r : poly.rows()) {
    const int s = sgn(r.coeffs[idx]);
    if (s > 0) pos.push_back(&r);
    else if (s < 0) neg.push_back(&r);
    else out.push_back({drop_idx(r.coeffs), r.rhs});
  }
  if (out.size() + pos.size() * neg.size() > row_cap)
    throw RowCapExceeded("Fourier-Motzkin step would produce " + std::to_string(out.size() + pos.size() * neg.size()) +
                         " rows (cap " + std::to_string(row_cap) + ")");
  for (const auto* p : pos)
    for (const auto* q : neg) {
      const Rational wp = -q->coeffs[idx];  // > 0
      const Rational wq = p->coeffs[idx];   // > 0
      Halfspace h;
      h.coeffs.reserve(n - 1);
      for (std::size_t j = 0; j < n; ++j)
        if (j != idx) h.coeffs.push_back(wp * p->coeffs[j] + wq * q->coeffs[j]);
      h.rhs = wp * p->rhs + wq * q->rhs;
      out.push_back(std::move(h));
    }
  return drop_redundant(RationalPolyhedron(n - 1, std::move(out)));
}

/*
 * Eliminates a set of variables (0-based, original numbering). The next
 * variable is the one with the smallest |S+| * |S-|, ties to the lowest
 * index, so results are deterministic.
 */
inline RationalPolyhedron eliminate_variables(RationalPolyhedron poly, std::vector<std::size_t> vars,
                                              std::size_t row_cap = kDefaultRowCap) {
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  for (auto v : vars)
    if (v >= poly.num_vars()) throw std::out_of_range("variable index " + std::to_string(v) + " out of range");
  // Track where each original variable currently sits.
  std::vector<std::size_t> position(poly.num_vars());
  std::iota(position.begin(), position.end(), std::size_t{0});
  while (!vars.empty()) {
    std::size_t best = 0;
    std::size_t best_cost = static_cast<std::size_t>(-1);
    for (std::size_t k = 0; k < vars.size(); ++k) {
      const std::size_t col = position[vars[k]];
      std::size_t np = 0, nn = 0;
      for (const auto& r : poly.rows()) {
        const int s = sgn(r.coeffs[col]);
        np += s > 0;
        nn += s < 0;
      }
      if (np * nn < best_cost) {
        best_cost = np * nn;
        best = k;
      }
    }
    const std::size_t victim = vars[best];
    poly = eliminate_variable(poly, position[victim], row_cap);
    for (auto& pos : position)
      if (pos != static_cast<std::size_t>(-1) && pos > position[victim]) --pos;
    position[victim] = static_cast<std::size_t>(-1);
    vars.erase(vars.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return poly;
}

// { A z : z in base }.
struct AffineImageSet {
  RationalMatrix map;
  RationalPolyhedron base;
};

/*
 * Halfspace description of { A x : C x <= y }: adds targets t = A x as two
 * inequalities each over (x, t), then eliminates every x.
 */
inline RationalPolyhedron affine_image(const AffineImageSet& img, std::size_t row_cap = kDefaultRowCap) {
  const std::size_t n = img.base.num_vars();
  const std::size_t p = img.map.rows();
  if (img.map.cols() != n) throw std::invalid_argument("affine map columns do not match base dimension");
  std::vector<Halfspace> rows;
  for (const auto& r : img.base.rows()) {
    Halfspace h{r.coeffs, r.rhs};
    h.coeffs.resize(n + p, Rational(0));
    rows.push_back(std::move(h));
  }
  for (std::size_t i = 0; i < p; ++i) {
    Halfspace up, down;  // t_i - A_i x <= 0 and A_i x - t_i <= 0
    up.coeffs.assign(n + p, Rational(0));
    down.coeffs.assign(n + p, Rational(0));
    for (std::size_t j = 0; j < n; ++j) {
      up.coeffs[j] = -img.map(i, j);
      down.coeffs[j] = img.map(i, j);
    }
    up.coeffs[n + i] = 1;
    down.coeffs[n + i] = -1;
    rows.push_back(std::move(up));
    rows.push_back(std::move(down));
  }
  std::vector<std::size_t> originals(n);
  std::iota(originals.begin(), originals.end(), std::size_t{0});
  return eliminate_variables(RationalPolyhedron(n + p, std::move(rows)), originals, row_cap);
}

// Keeps the listed variables (0-based, ascending order in the result).
inline RationalPolyhedron project_onto(const RationalPolyhedron& poly, const std::vector<std::size_t>& keep,
                                       std::size_t row_cap = kDefaultRowCap) {
  std::vector<bool> kept(poly.num_vars(), false);
  for (auto k : keep) {
    if (k >= poly.num_vars()) throw std::out_of_range("kept variable " + std::to_string(k) + " out of range");
    kept[k] = true;
  }
  std::vector<std::size_t> drop;
  for (std::size_t j = 0; j < poly.num_vars(); ++j)
    if (!kept[j]) drop.push_back(j);
  return eliminate_variables(poly, drop, row_cap);
}

inline nlohmann::json polyhedron_to_json(const RationalPolyhedron& poly) {
  nlohmann::json c = nlohmann::json::array();
  nlohmann::json y = nlohmann::json::array();
  for (const auto& r : poly.rows()) {
    nlohmann::json row = nlohmann::json::array();
    for (const auto& q : r.coeffs) row.push_back(format_rational(q));
    c.push_back(std::move(row));
    y.push_back(format_rational(r.rhs));
  }
  return {{"num_vars", poly.num_vars()}, {"C", std::move(c)}, {"y", std::move(y)}};
}

namespace detail {
inline Rational rational_from_json(const nlohmann::json& e) {
  if (e.is_string()) return parse_rational(e.get<std::string>());
  if (e.is_number_integer()) return Rational(e.get<long>());
  throw std::invalid_argument("rational entries must be integers or \"p/q\" strings");
}
}  // namespace detail

inline RationalPolyhedron polyhedron_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("C") || !j.contains("y")) throw std::invalid_argument("polyhedron JSON needs \"C\" and \"y\"");
  const auto& jc = j.at("C");
  const auto& jy = j.at("y");
  if (!jc.is_array() || !jy.is_array() || jc.size() != jy.size()) throw std::invalid_argument("\"C\" and \"y\" must be arrays of equal length");
  std::size_t n = 0;
  if (j.contains("num_vars")) n = j.at("num_vars").get<std::size_t>();
  else if (!jc.empty()) n = jc.front().size();
  std::vector<Halfspace> rows;
  for (std::size_t i = 0; i < jc.size(); ++i) {
    if (!jc[i].is_array() || jc[i].size() != n) throw std::invalid_argument("row " + std::to_string(i) + " has wrong width");
    Halfspace h;
    for (const auto& e : jc[i]) h.coeffs.push_back(detail::rational_from_json(e));
    h.rhs = detail::rational_from_json(jy[i]);
    rows.push_back(std::move(h));
  }
  return RationalPolyhedron(n, std::move(rows));
}

}  // namespace sparse_closure

#endif  // SPARSE_CLOSURE_FOURIER_MOTZKIN_HPP
