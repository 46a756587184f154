#ifndef SPARSE_CLOSURE_QE_SENTENCE_HPP
#define SPARSE_CLOSURE_QE_SENTENCE_HPP

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparse_closure/support_pattern.hpp"

namespace sparse_closure {

// Size parameters of the emitted sentence: s polynomials of degree at most d
// in k real variables.
struct QeSentenceStats {
  std::size_t num_polynomials = 0;
  std::size_t max_degree = 0;
  std::size_t num_variables = 0;

  friend bool operator==(const QeSentenceStats&, const QeSentenceStats&) = default;
};

// k = N_L N_0 + 1 + 2 sum |I_i|, s = 2, d = 2L.
inline QeSentenceStats expected_qe_stats(const SupportPattern& p) {
  return {2, 2 * p.depth(), p.output_dim() * p.input_dim() + 1 + 2 * p.total_support()};
}

namespace detail {

inline std::string smt_sum(const std::vector<std::string>& terms) {
  if (terms.empty()) return "0.0";
  if (terms.size() == 1) return terms.front();
  std::string out = "(+";
  for (const auto& t : terms) out += " " + t;
  return out + ")";
}

inline std::string factor_var(char block, std::size_t layer, std::size_t r, std::size_t c) {
  return std::string(1, block) + std::to_string(layer) + "_" + std::to_string(r + 1) + "_" + std::to_string(c + 1);
}

inline std::string target_var(std::size_t r, std::size_t c) {
  return "a_" + std::to_string(r + 1) + "_" + std::to_string(c + 1);
}

// Monomials of entry (i, j) of X_L ... X_1: one per path through the masks.
inline std::vector<std::string> path_monomials(const SupportPattern& p, char block, std::size_t i, std::size_t j) {
  std::vector<std::string> out;
  std::vector<std::string> chain;
  // Walk from the output side: at layer k we sit on row `node` of X_k.
  std::function<void(std::size_t, std::size_t)> walk = [&](std::size_t layer, std::size_t node) {
    for (const auto& [r, c] : p.mask(layer)) {
      if (r != node) continue;
      if (layer == 1 && c != j) continue;
      chain.push_back(factor_var(block, layer, r, c));
      if (layer == 1) {
        if (chain.size() == 1) {
          out.push_back(chain.front());
        } else {
          std::string m = "(*";
          for (const auto& v : chain) m += " " + v;
          out.push_back(m + ")");
        }
      } else {
        walk(layer - 1, c);
      }
      chain.pop_back();
    }
  };
  walk(p.depth(), i);
  return out;
}

// P(A, X) = sum_{i,j} (A[i,j] - P_ij(X))^2
inline std::string residual_polynomial(const SupportPattern& p, char block) {
  std::vector<std::string> squares;
  for (std::size_t i = 0; i < p.output_dim(); ++i)
    for (std::size_t j = 0; j < p.input_dim(); ++j) {
      const std::string diff = "(- " + target_var(i, j) + " " + smt_sum(path_monomials(p, block, i, j)) + ")";
      squares.push_back("(* " + diff + " " + diff + ")");
    }
  return smt_sum(squares);
}

inline std::vector<std::string> block_vars(const SupportPattern& p, char block) {
  std::vector<std::string> vars;
  for (std::size_t k = 1; k <= p.depth(); ++k)
    for (const auto& [r, c] : p.mask(k)) vars.push_back(factor_var(block, k, r, c));
  return vars;
}

inline std::string binder(const std::vector<std::string>& vars) {
  std::string out = "(";
  for (std::size_t i = 0; i < vars.size(); ++i) out += (i ? " (" : "(") + vars[i] + " Real)";
  return out + ")";
}

}  // namespace detail

/*
 * Writes an SMT-LIB 2 (logic NRA) script that is sat iff some matrix A lies
 * in closure(L_I) \ L_I:
 *
 *   exists A. (forall X. P(A,X) > 0) and (forall eps > 0. exists X'. P(A,X') - eps < 0)
 *
 * A is declared as free constants, X and X' are separate variable copies
 * of every mask entry. Returns the size parameters of the sentence and
 * checks that the declared variable count matches the closed formula.
 */
inline QeSentenceStats emit_qe_sentence(const SupportPattern& p, std::ostream& out) {
  const auto universal = detail::block_vars(p, 'x');
  const auto existential = detail::block_vars(p, 'y');
  std::size_t declared = 0;

  out << "; closure(L_I) \\ L_I is nonempty iff this script is sat\n";
  out << "; dims:";
  for (auto n : p.dims()) out << " " << n;
  out << "\n(set-logic NRA)\n";
  for (std::size_t i = 0; i < p.output_dim(); ++i)
    for (std::size_t j = 0; j < p.input_dim(); ++j) {
      out << "(declare-fun " << detail::target_var(i, j) << " () Real)\n";
      ++declared;
    }

  const std::string strict_positive = "(> " + detail::residual_polynomial(p, 'x') + " 0.0)";
  out << "(assert ";
  if (universal.empty())
    out << strict_positive;
  else
    out << "(forall " << detail::binder(universal) << " " << strict_positive << ")";
  out << ")\n";
  declared += universal.size();

  const std::string approach = "(< (- " + detail::residual_polynomial(p, 'y') + " eps) 0.0)";
  out << "(assert (forall ((eps Real)) (=> (> eps 0.0) ";
  if (existential.empty())
    out << approach;
  else
    out << "(exists " << detail::binder(existential) << " " << approach << ")";
  out << ")))\n";
  declared += 1 + existential.size();
  out << "(check-sat)\n";

  QeSentenceStats stats{2, 2 * p.depth(), declared};
  if (stats != expected_qe_stats(p)) throw std::logic_error("emitted sentence does not match the variable-count formula");
  return stats;
}

inline QeSentenceStats emit_qe_sentence(const SupportPattern& p, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  auto stats = emit_qe_sentence(p, f);
  f.flush();
  if (!f) throw std::runtime_error("failed writing " + path.string());
  return stats;
}

}  // namespace sparse_closure

#endif  // SPARSE_CLOSURE_QE_SENTENCE_HPP
