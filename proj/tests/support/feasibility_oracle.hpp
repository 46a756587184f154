#ifndef SPARSE_CLOSURE_TESTS_FEASIBILITY_ORACLE_HPP
#define SPARSE_CLOSURE_TESTS_FEASIBILITY_ORACLE_HPP

// Exact feasibility of { x : C x <= y } without Fourier-Motzkin.
//
// A nonempty polyhedron has a minimal face { x : C_I x = y_I } with
// rank C_I = rank C. So it is feasible iff some row subset I of size
// rank C with full rank has a solution of C_I x = y_I satisfying all rows.

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "sparse_closure/fourier_motzkin.hpp"

namespace oracle {

using sparse_closure::Rational;
using sparse_closure::RationalMatrix;

// One solution of M x = rhs (free variables set to 0), or nullopt.
inline std::optional<std::vector<Rational>> solve_any(RationalMatrix m, std::vector<Rational> rhs) {
  const std::size_t rows = m.rows(), cols = m.cols();
  std::vector<std::size_t> pivot_col;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && m(p, c) == 0) ++p;
    if (p == rows) continue;
    for (std::size_t j = 0; j < cols; ++j) std::swap(m(p, j), m(r, j));
    std::swap(rhs[p], rhs[r]);
    const Rational inv = 1 / m(r, c);
    for (std::size_t j = 0; j < cols; ++j) m(r, j) *= inv;
    rhs[r] *= inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || m(i, c) == 0) continue;
      const Rational f = m(i, c);
      for (std::size_t j = 0; j < cols; ++j) m(i, j) -= f * m(r, j);
      rhs[i] -= f * rhs[r];
    }
    pivot_col.push_back(c);
    ++r;
  }
  for (std::size_t i = r; i < rows; ++i)
    if (rhs[i] != 0) return std::nullopt;
  std::vector<Rational> x(cols, Rational(0));
  for (std::size_t i = 0; i < r; ++i) x[pivot_col[i]] = rhs[i];
  return x;
}

inline bool feasible(const sparse_closure::RationalPolyhedron& poly) {
  const std::size_t n = poly.num_vars();
  const auto& rows = poly.rows();
  const RationalMatrix c = poly.constraint_matrix();
  const std::size_t rank = n == 0 || rows.empty() ? 0 : sparse_closure::exact_rank(c);
  if (rank == 0) {
    for (const auto& h : rows)
      if (h.rhs < 0) return false;
    return true;
  }
  std::vector<std::size_t> pick;
  std::function<bool(std::size_t)> search = [&](std::size_t start) -> bool {
    if (pick.size() == rank) {
      RationalMatrix m(rank, n);
      std::vector<Rational> rhs;
      for (std::size_t i = 0; i < rank; ++i) {
        for (std::size_t j = 0; j < n; ++j) m(i, j) = rows[pick[i]].coeffs[j];
        rhs.push_back(rows[pick[i]].rhs);
      }
      if (sparse_closure::exact_rank(m) != rank) return false;
      const auto x = solve_any(m, rhs);
      return x && sparse_closure::contains(poly, *x);
    }
    for (std::size_t i = start; i < rows.size(); ++i) {
      pick.push_back(i);
      if (search(i + 1)) return true;
      pick.pop_back();
    }
    return false;
  };
  return search(0);
}

// Is `t` (values of the kept variables, ascending) in the projection?
inline bool in_projection(const sparse_closure::RationalPolyhedron& poly, const std::vector<std::size_t>& keep,
                          const std::vector<Rational>& t) {
  std::vector<bool> kept(poly.num_vars(), false);
  std::vector<std::optional<Rational>> fixed(poly.num_vars());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    kept[keep[i]] = true;
    fixed[keep[i]] = t[i];
  }
  std::vector<sparse_closure::Halfspace> rows;
  for (const auto& h : poly.rows()) {
    sparse_closure::Halfspace g;
    g.rhs = h.rhs;
    for (std::size_t j = 0; j < poly.num_vars(); ++j) {
      if (kept[j]) g.rhs -= h.coeffs[j] * *fixed[j];
      else g.coeffs.push_back(h.coeffs[j]);
    }
    rows.push_back(std::move(g));
  }
  const std::size_t free_vars = poly.num_vars() - keep.size();
  return feasible(sparse_closure::RationalPolyhedron(free_vars, std::move(rows)));
}

}  // namespace oracle

#endif  // SPARSE_CLOSURE_TESTS_FEASIBILITY_ORACLE_HPP
